"""Distance-ratio memorization criterion and its summary statistics.

A generated row's ratio is its nearest-training-neighbor mixed distance over
its second-nearest; every statistic here is a functional of those ratios.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .distance import fit_normalizer, two_nearest
from .errors import EmptyRatiosError
from .table import Table

DEFAULT_THRESHOLD = 1.0 / 3.0
DEFAULT_BINS = 50


@dataclass(frozen=True)
class MemorizationReport:
    """Per-sample distance ratios plus threshold, ratio, AUC, and histogram."""

    ratios: tuple[float, ...]
    threshold: float
    mem_ratio: float
    mem_auc: float
    histogram: tuple[int, ...]

    @property
    def bin_width(self) -> float:
        return 1.0 / len(self.histogram)

    def to_dict(self) -> dict:
        return {
            "ratios": list(self.ratios),
            "threshold": self.threshold,
            "mem_ratio": self.mem_ratio,
            "mem_auc": self.mem_auc,
            "histogram": list(self.histogram),
        }

    def write_histogram_csv(self, path: str | Path) -> None:
        """Two-column CSV (bin_left, count) over the [0, 1] ratio range."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["bin_left", "count"])
            for i, count in enumerate(self.histogram):
                writer.writerow([repr(i * self.bin_width), count])


def distance_ratios(generated: Table, train: Table, threads: int = 1) -> list[float]:
    """Nearest over second-nearest mixed distance per generated row (0/0 -> 0).

    The normalizer is fitted on the generated x train cross pairs of this
    audit before any ratio is computed.
    """
    norm = fit_normalizer(generated, train, threads=threads)
    neighbors = two_nearest(generated, train, norm, threads=threads)
    ratios = []
    for nn in neighbors:
        if nn.nn2_distance == 0.0:
            # nn1 <= nn2 == 0: the row coincides with duplicated train rows.
            ratios.append(0.0)
        else:
            ratios.append(nn.nn1_distance / nn.nn2_distance)
    return ratios


def memorization_ratio(ratios: Sequence[float], threshold: float = DEFAULT_THRESHOLD) -> float:
    """Fraction of ratios strictly below the threshold."""
    if len(ratios) == 0:
        raise EmptyRatiosError("no ratios to aggregate")
    if not (0.0 < threshold <= 1.0):
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    values = np.asarray(ratios, dtype=np.float64)
    return float(np.count_nonzero(values < threshold) / values.size)


def mem_auc(ratios: Sequence[float]) -> float:
    """Exact integral of the memorization ratio over thresholds in [0, 1].

    The empirical step function integrates in closed form to the mean of
    (1 - r) over the samples.
    """
    if len(ratios) == 0:
        raise EmptyRatiosError("no ratios to aggregate")
    values = np.asarray(ratios, dtype=np.float64)
    if values.min() < 0.0 or values.max() > 1.0:
        raise ValueError("ratios must lie in [0, 1]")
    return float(np.mean(1.0 - values))


def audit(
    generated: Table,
    train: Table,
    threshold: float = DEFAULT_THRESHOLD,
    bins: int = DEFAULT_BINS,
    threads: int = 1,
) -> MemorizationReport:
    """Full memorization report for a generated table against its train set."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    ratios = distance_ratios(generated, train, threads=threads)
    counts, _ = np.histogram(ratios, bins=bins, range=(0.0, 1.0))
    return MemorizationReport(
        ratios=tuple(ratios),
        threshold=threshold,
        mem_ratio=memorization_ratio(ratios, threshold),
        mem_auc=mem_auc(ratios),
        histogram=tuple(int(c) for c in counts),
    )
