"""Mixed numerical/categorical sample distance and exact nearest-neighbor search.

The distance between two rows is the max-min-normalized Euclidean distance
over numerical features plus the count of differing categorical features,
divided by the total feature count. The normalizer is fitted over a declared
pair population (for an audit: all generated x train pairs) and clamps
out-of-range values into [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyTableError, SchemaMismatchError, TrainTooSmallError
from .parallel import map_blocks
from .table import Cell, FeatureKind, Schema, Table

# Query rows are processed in blocks to bound the size of the pairwise
# distance buffers; any block size gives identical results.
_BLOCK = 256


@dataclass(frozen=True)
class DistanceNormalizer:
    """Fitted min/max of raw numerical pair distances; maps into [0, 1]."""

    d_min: float
    d_max: float

    def __post_init__(self):
        if not (0.0 <= self.d_min <= self.d_max):
            raise ValueError(f"need 0 <= d_min <= d_max, got ({self.d_min}, {self.d_max})")

    @property
    def degenerate(self) -> bool:
        return self.d_max == self.d_min

    def normalize(self, raw: float) -> float:
        if self.degenerate:
            return 0.0
        scaled = (raw - self.d_min) / (self.d_max - self.d_min)
        return min(max(scaled, 0.0), 1.0)

    def normalize_array(self, raw: np.ndarray) -> np.ndarray:
        if self.degenerate:
            return np.zeros_like(raw)
        return np.clip((raw - self.d_min) / (self.d_max - self.d_min), 0.0, 1.0)

    @classmethod
    def from_distances(cls, distances: Sequence[float]) -> "DistanceNormalizer":
        values = np.asarray(distances, dtype=np.float64)
        if values.size == 0:
            raise EmptyTableError("cannot fit a normalizer on an empty pair population")
        return cls(float(values.min()), float(values.max()))


@dataclass(frozen=True)
class NeighborResult:
    """Indices and mixed distances of a query row's two nearest train rows."""

    nn1_index: int
    nn1_distance: float
    nn2_index: int
    nn2_distance: float


def _split_row(row: Sequence[Cell], schema: Schema) -> tuple[np.ndarray, list[str]]:
    if len(row) != schema.row_width():
        raise SchemaMismatchError(
            f"row has {len(row)} cells, schema expects {schema.row_width()}"
        )
    numeric = []
    categorical = []
    for i, (name, kind) in enumerate(schema.features):
        if kind is FeatureKind.NUMERICAL:
            if isinstance(row[i], str):
                raise SchemaMismatchError(f"column {name!r} expects a number, got {row[i]!r}")
            numeric.append(float(row[i]))
        else:
            if not isinstance(row[i], str):
                raise SchemaMismatchError(f"column {name!r} expects a category, got {row[i]!r}")
            categorical.append(row[i])
    return np.asarray(numeric, dtype=np.float64), categorical


def raw_numeric_distance(a: Sequence[Cell], b: Sequence[Cell], schema: Schema) -> float:
    """Euclidean distance over numerical features, in original units."""
    a_num, _ = _split_row(a, schema)
    b_num, _ = _split_row(b, schema)
    if a_num.size == 0:
        return 0.0
    return float(np.sqrt(np.sum((a_num - b_num) ** 2)))


def mixed_distance(
    a: Sequence[Cell],
    b: Sequence[Cell],
    schema: Schema,
    norm: DistanceNormalizer,
) -> float:
    """Per-pair mixed distance: (normalized numeric + differing categories) / M."""
    a_num, a_cat = _split_row(a, schema)
    b_num, b_cat = _split_row(b, schema)
    numeric_part = 0.0
    if a_num.size:
        numeric_part = norm.normalize(float(np.sqrt(np.sum((a_num - b_num) ** 2))))
    hamming = sum(1 for x, y in zip(a_cat, b_cat) if x != y)
    return (numeric_part + hamming) / schema.n_features


def _check_pair(generated: Table, train: Table) -> None:
    if generated.schema != train.schema:
        raise SchemaMismatchError("generated and train tables must share a schema")
    if generated.n_rows == 0 or train.n_rows == 0:
        raise EmptyTableError("both tables need at least one row")


def _raw_numeric_block(query_num: np.ndarray, ref_num: np.ndarray) -> np.ndarray:
    """(block, n_ref) raw Euclidean distances over numerical features."""
    if query_num.shape[1] == 0:
        return np.zeros((query_num.shape[0], ref_num.shape[0]))
    diff = query_num[:, None, :] - ref_num[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _encode_categories(query_cat: np.ndarray, ref_cat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Jointly integer-code categorical columns of two tables for fast compares."""
    n_cols = query_cat.shape[1]
    q_codes = np.empty((query_cat.shape[0], n_cols), dtype=np.int32)
    r_codes = np.empty((ref_cat.shape[0], n_cols), dtype=np.int32)
    for j in range(n_cols):
        mapping: dict[str, int] = {}
        for source, dest in ((query_cat, q_codes), (ref_cat, r_codes)):
            col = source[:, j]
            out = dest[:, j]
            for i, value in enumerate(col):
                code = mapping.setdefault(value, len(mapping))
                out[i] = code
    return q_codes, r_codes


def _hamming_block(q_codes: np.ndarray, r_codes: np.ndarray) -> np.ndarray:
    if q_codes.shape[1] == 0:
        return np.zeros((q_codes.shape[0], r_codes.shape[0]))
    return np.sum(q_codes[:, None, :] != r_codes[None, :, :], axis=-1, dtype=np.float64)


def fit_normalizer(generated: Table, train: Table, threads: int = 1) -> DistanceNormalizer:
    """Fit min/max of raw numerical distances over all generated x train pairs."""
    _check_pair(generated, train)
    gen_num = generated.numeric_values()
    train_num = train.numeric_values()
    if gen_num.shape[1] == 0:
        return DistanceNormalizer(0.0, 0.0)

    def min_max(lo: int, hi: int) -> tuple[float, float]:
        block = _raw_numeric_block(gen_num[lo:hi], train_num)
        return float(block.min()), float(block.max())

    extremes = map_blocks(min_max, generated.n_rows, _BLOCK, threads)
    return DistanceNormalizer(
        min(lo for lo, _ in extremes), max(hi for _, hi in extremes)
    )


def pairwise_mixed(
    generated: Table,
    train: Table,
    norm: DistanceNormalizer,
    threads: int = 1,
) -> np.ndarray:
    """Full (n_generated, n_train) mixed-distance matrix."""
    _check_pair(generated, train)
    gen_num = generated.numeric_values()
    train_num = train.numeric_values()
    q_codes, r_codes = _encode_categories(
        generated.categorical_values(), train.categorical_values()
    )
    m = generated.schema.n_features

    def block(lo: int, hi: int) -> np.ndarray:
        numeric = norm.normalize_array(_raw_numeric_block(gen_num[lo:hi], train_num))
        return (numeric + _hamming_block(q_codes[lo:hi], r_codes)) / m

    return np.vstack(map_blocks(block, generated.n_rows, _BLOCK, threads))


def two_nearest(
    generated: Table,
    train: Table,
    norm: DistanceNormalizer,
    threads: int = 1,
) -> list[NeighborResult]:
    """Two smallest mixed distances per generated row, ties to the lower index."""
    _check_pair(generated, train)
    if train.n_rows < 2:
        raise TrainTooSmallError(f"need >= 2 train rows, got {train.n_rows}")
    gen_num = generated.numeric_values()
    train_num = train.numeric_values()
    q_codes, r_codes = _encode_categories(
        generated.categorical_values(), train.categorical_values()
    )
    m = generated.schema.n_features

    def block(lo: int, hi: int) -> np.ndarray:
        numeric = norm.normalize_array(_raw_numeric_block(gen_num[lo:hi], train_num))
        dist = (numeric + _hamming_block(q_codes[lo:hi], r_codes)) / m
        # argmin returns the first minimum, which is the lowest-index tie.
        first = np.argmin(dist, axis=1)
        rows = np.arange(dist.shape[0])
        d1 = dist[rows, first]
        dist[rows, first] = np.inf
        second = np.argmin(dist, axis=1)
        d2 = dist[rows, second]
        return np.column_stack([first, d1, second, d2])

    packed = np.vstack(map_blocks(block, generated.n_rows, _BLOCK, threads))
    return [
        NeighborResult(int(i1), float(d1), int(i2), float(d2))
        for i1, d1, i2, d2 in packed
    ]
