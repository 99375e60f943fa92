"""Same-class feature-swap augmentation and an independent-marginals baseline.

CutMix swaps individual features between two rows of one class under a
Bernoulli(lambda) mask with lambda ~ Uniform(0, 1). The Plus variant first
groups correlated features and swaps each group as an atomic unit, one
lambda and one coin per group. The IJF baseline draws every feature
independently from a per-feature marginal fitted on the training table.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .association import (
    DEFAULT_CLUSTER_THRESHOLD,
    FeatureClusters,
    association_matrix,
    cluster_features,
)
from .errors import ClassTooSmallError, EmptyTableError, NoTargetError
from .table import Cell, Row, Table

DEFAULT_RATIO = 0.3


class AugmentMode(Enum):
    CUTMIX = "cutmix"
    CUTMIXPLUS = "cutmixplus"
    IJF = "ijf"


@dataclass(frozen=True)
class AugmentConfig:
    mode: AugmentMode
    ratio: float = DEFAULT_RATIO
    seed: int = 0
    cluster_threshold: float = DEFAULT_CLUSTER_THRESHOLD

    def __post_init__(self):
        if self.ratio < 0:
            raise ValueError(f"ratio must be >= 0, got {self.ratio}")


@dataclass(frozen=True)
class MixMask:
    """Per-swap-unit donor indicators drawn Bernoulli(lambda)."""

    lam: float
    bits: tuple[int, ...]

    @classmethod
    def draw(cls, rng: np.random.Generator, n_units: int) -> "MixMask":
        lam = float(rng.random())
        bits = tuple(int(b) for b in rng.random(n_units) < lam)
        return cls(lam, bits)


def class_prior(train: Table) -> dict[str, float]:
    """Empirical class frequencies, keyed in order of first appearance."""
    if train.schema.target is None:
        raise NoTargetError("augmentation needs a class-label column")
    if train.n_rows == 0:
        raise EmptyTableError("cannot compute a prior on an empty table")
    counts: dict[str, int] = {}
    for label in train.target_values():
        counts[label] = counts.get(label, 0) + 1
    return {label: count / train.n_rows for label, count in counts.items()}


class _ClassIndex:
    """Row indices per class label, in table order."""

    def __init__(self, train: Table):
        if train.schema.target is None:
            raise NoTargetError("augmentation needs a class-label column")
        self.rows: dict[str, list[int]] = {}
        for i, label in enumerate(train.target_values()):
            self.rows.setdefault(label, []).append(i)

    def sample_pair(self, label: str, rng: np.random.Generator) -> tuple[int, int]:
        members = self.rows[label]
        if len(members) < 2:
            raise ClassTooSmallError(label, len(members))
        a, b = rng.choice(len(members), size=2, replace=False)
        return members[int(a)], members[int(b)]


def _sample_class(prior: dict[str, float], rng: np.random.Generator) -> str:
    labels = list(prior)
    probs = np.asarray([prior[label] for label in labels])
    return labels[int(rng.choice(len(labels), p=probs / probs.sum()))]


def mix_rows(x_a: Row, x_b: Row, bits: tuple[int, ...], label: str, n_features: int) -> Row:
    """Take feature j from donor A where bits[j] is 1, else from donor B."""
    cells: list[Cell] = [
        x_a[j] if bits[j] else x_b[j] for j in range(n_features)
    ]
    cells.append(label)
    return tuple(cells)


def cutmix_once(
    train: Table,
    prior: dict[str, float],
    rng: np.random.Generator,
    index: _ClassIndex | None = None,
) -> Row:
    """One CutMix row: same-class donor pair mixed under a per-feature mask."""
    index = index or _ClassIndex(train)
    label = _sample_class(prior, rng)
    ia, ib = index.sample_pair(label, rng)
    mask = MixMask.draw(rng, train.schema.n_features)
    return mix_rows(train.row(ia), train.row(ib), mask.bits, label, train.schema.n_features)


def cutmixplus_once(
    train: Table,
    prior: dict[str, float],
    clusters: FeatureClusters,
    rng: np.random.Generator,
    index: _ClassIndex | None = None,
) -> Row:
    """One CutMixPlus row: every feature group comes whole from one donor."""
    index = index or _ClassIndex(train)
    label = _sample_class(prior, rng)
    ia, ib = index.sample_pair(label, rng)
    bits = [0] * train.schema.n_features
    for group in clusters.clusters:
        lam = float(rng.random())
        take_a = int(rng.random() < lam)
        for j in group:
            bits[j] = take_a
    return mix_rows(train.row(ia), train.row(ib), tuple(bits), label, train.schema.n_features)


class _IjfModel:
    """Per-feature marginals: Gaussian MLE for numbers, frequencies for categories."""

    def __init__(self, train: Table):
        if train.n_rows < 2:
            raise EmptyTableError("IJF needs at least 2 rows to fit marginals")
        self.schema = train.schema
        numeric = train.numeric_values()
        self.means = numeric.mean(axis=0) if numeric.shape[1] else np.empty(0)
        self.stds = numeric.std(axis=0) if numeric.shape[1] else np.empty(0)
        self.categories: list[tuple[list[str], np.ndarray]] = []
        for j in train.schema.categorical_indices:
            col = [row[j] for row in train.rows]
            values = list(dict.fromkeys(col))
            freqs = np.asarray([col.count(v) for v in values], dtype=np.float64)
            self.categories.append((values, freqs / freqs.sum()))
        self.labels: tuple[list[str], np.ndarray] | None = None
        if train.schema.target is not None:
            col = train.target_values()
            values = list(dict.fromkeys(col))
            freqs = np.asarray([col.count(v) for v in values], dtype=np.float64)
            self.labels = (values, freqs / freqs.sum())

    def sample(self, rng: np.random.Generator) -> Row:
        cells: list[Cell] = [None] * self.schema.n_features  # type: ignore[list-item]
        for k, j in enumerate(self.schema.numerical_indices):
            cells[j] = float(self.means[k] + self.stds[k] * rng.standard_normal())
        for k, j in enumerate(self.schema.categorical_indices):
            values, probs = self.categories[k]
            cells[j] = values[int(rng.choice(len(values), p=probs))]
        if self.labels is not None:
            values, probs = self.labels
            cells.append(values[int(rng.choice(len(values), p=probs))])
        return tuple(cells)


def ijf_sample(train: Table, rng: np.random.Generator) -> Row:
    """One row with every feature drawn independently from its fitted marginal."""
    return _IjfModel(train).sample(rng)


def augment(train: Table, config: AugmentConfig) -> Table:
    """Original rows followed by round(ratio * n) augmented rows.

    Every augmented row draws from its own RNG stream derived from the seed
    and the row's index, so output is identical however samples are scheduled.
    """
    n_new = int(round(config.ratio * train.n_rows))
    if n_new == 0:
        return train

    streams = np.random.SeedSequence(config.seed).spawn(n_new)
    rows = list(train.rows)

    if config.mode is AugmentMode.IJF:
        model = _IjfModel(train)
        rows.extend(model.sample(np.random.default_rng(s)) for s in streams)
        return Table(train.schema, rows)

    prior = class_prior(train)
    index = _ClassIndex(train)
    for label, members in index.rows.items():
        if len(members) < 2:
            raise ClassTooSmallError(label, len(members))

    if config.mode is AugmentMode.CUTMIXPLUS:
        clusters = cluster_features(association_matrix(train), config.cluster_threshold)
        rows.extend(
            cutmixplus_once(train, prior, clusters, np.random.default_rng(s), index)
            for s in streams
        )
    else:
        rows.extend(
            cutmix_once(train, prior, np.random.default_rng(s), index)
            for s in streams
        )
    return Table(train.schema, rows)
