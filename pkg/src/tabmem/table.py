"""Mixed-type tabular data model with CSV ingestion, emission, and splitting.

A schema declares an ordered list of features, each numerical or categorical,
plus an optional class-label column. The label rides along as an extra
trailing column of every row; it is never one of the distance-bearing
features.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BadFractionsError,
    EmptyTableError,
    MissingColumnError,
    MissingValueError,
    SchemaMismatchError,
    UnparsableNumericError,
)

Cell = float | str
Row = tuple[Cell, ...]


class FeatureKind(Enum):
    NUMERICAL = "numerical"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Schema:
    """Ordered feature declarations plus an optional class-label column.

    ``features`` holds the distance-bearing columns only. ``target``, when
    set, names one extra categorical column appended after the features in
    every row and in CSV files.
    """

    features: tuple[tuple[str, FeatureKind], ...]
    target: str | None = None

    def __post_init__(self):
        names = [name for name, _ in self.features]
        if not names:
            raise SchemaMismatchError("schema needs at least one feature")
        if any(not n for n in names):
            raise SchemaMismatchError("feature names must be non-empty")
        all_names = names + ([self.target] if self.target is not None else [])
        if len(set(all_names)) != len(all_names):
            raise SchemaMismatchError(f"duplicate column names in schema: {all_names}")
        if self.target == "":
            raise SchemaMismatchError("target name must be non-empty")

    @property
    def feature_names(self) -> list[str]:
        return [name for name, _ in self.features]

    @property
    def column_names(self) -> list[str]:
        """Feature names followed by the target name when present."""
        cols = self.feature_names
        if self.target is not None:
            cols = cols + [self.target]
        return cols

    @property
    def n_features(self) -> int:
        return len(self.features)

    @property
    def numerical_indices(self) -> list[int]:
        return [i for i, (_, k) in enumerate(self.features) if k is FeatureKind.NUMERICAL]

    @property
    def categorical_indices(self) -> list[int]:
        return [i for i, (_, k) in enumerate(self.features) if k is FeatureKind.CATEGORICAL]

    def row_width(self) -> int:
        return self.n_features + (1 if self.target is not None else 0)

    def to_dict(self) -> dict:
        return {
            "features": [{"name": n, "kind": k.value} for n, k in self.features],
            "target": self.target,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "Schema":
        try:
            features = tuple(
                (f["name"], FeatureKind(f["kind"])) for f in obj["features"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaMismatchError(f"malformed schema object: {exc}") from exc
        return cls(features=features, target=obj.get("target"))


def load_schema(path: str | Path) -> Schema:
    """Read a schema from its JSON file format."""
    with open(path, encoding="utf-8") as fh:
        return Schema.from_dict(json.load(fh))


def save_schema(schema: Schema, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schema.to_dict(), fh, indent=2)
        fh.write("\n")


def _check_cell(value: Cell, kind: FeatureKind, column: str) -> Cell:
    if kind is FeatureKind.NUMERICAL:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaMismatchError(f"column {column!r} expects a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise SchemaMismatchError(f"column {column!r} holds non-finite value {value!r}")
        return value
    if not isinstance(value, str):
        raise SchemaMismatchError(f"column {column!r} expects a category, got {value!r}")
    return sys.intern(value)


class Table:
    """Immutable mixed-type table: a schema plus kind-checked rows.

    Rows are stored as tuples; numerical and categorical feature blocks are
    also materialized as read-only numpy arrays for batched distance work.
    """

    def __init__(self, schema: Schema, rows: Iterable[Sequence[Cell]]):
        self.schema = schema
        width = schema.row_width()
        checked: list[Row] = []
        for r, row in enumerate(rows):
            if len(row) != width:
                raise SchemaMismatchError(
                    f"row {r} has {len(row)} cells, schema expects {width}"
                )
            cells = [
                _check_cell(row[i], kind, name)
                for i, (name, kind) in enumerate(schema.features)
            ]
            if schema.target is not None:
                cells.append(_check_cell(row[-1], FeatureKind.CATEGORICAL, schema.target))
            checked.append(tuple(cells))
        self._rows: tuple[Row, ...] = tuple(checked)

        num_idx = schema.numerical_indices
        cat_idx = schema.categorical_indices
        self._numeric = np.array(
            [[row[i] for i in num_idx] for row in self._rows], dtype=np.float64
        ).reshape(len(self._rows), len(num_idx))
        self._numeric.setflags(write=False)
        self._categorical = np.array(
            [[row[i] for i in cat_idx] for row in self._rows], dtype=object
        ).reshape(len(self._rows), len(cat_idx))
        self._categorical.setflags(write=False)

    @property
    def n_rows(self) -> int:
        return len(self._rows)

    @property
    def rows(self) -> tuple[Row, ...]:
        return self._rows

    def row(self, i: int) -> Row:
        return self._rows[i]

    def numeric_values(self) -> np.ndarray:
        """(n_rows, |numerical features|) float64 view, read-only."""
        return self._numeric

    def categorical_values(self) -> np.ndarray:
        """(n_rows, |categorical features|) object array of category strings."""
        return self._categorical

    def target_values(self) -> list[str]:
        if self.schema.target is None:
            raise SchemaMismatchError("table has no target column")
        return [row[-1] for row in self._rows]  # type: ignore[misc]

    def feature_column(self, index: int) -> list[Cell]:
        return [row[index] for row in self._rows]

    def __len__(self) -> int:
        return len(self._rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return self.schema == other.schema and self._rows == other._rows

    def __repr__(self) -> str:
        return f"Table({self.n_rows} rows x {self.schema.row_width()} columns)"


def load_csv(path: str | Path, schema: Schema) -> Table:
    """Load a header-first CSV whose columns are a permutation of the schema's.

    Numerical cells must parse as finite decimal reals; categorical cells are
    taken verbatim (case-sensitive). Empty cells are rejected.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(f"{path}: empty file, expected a header row") from None
        expected = schema.column_names
        if sorted(header) != sorted(expected):
            missing = set(expected) - set(header)
            extra = set(header) - set(expected)
            raise MissingColumnError(
                f"{path}: header mismatch (missing from CSV: {sorted(missing)}, "
                f"not in schema: {sorted(extra)})"
            )
        order = [header.index(name) for name in expected]
        kinds = [kind for _, kind in schema.features]
        if schema.target is not None:
            kinds.append(FeatureKind.CATEGORICAL)

        rows: list[list[Cell]] = []
        for r, raw in enumerate(reader):
            if len(raw) != len(header):
                raise SchemaMismatchError(f"{path}: row {r} has {len(raw)} cells, header has {len(header)}")
            cells: list[Cell] = []
            for dest, src in enumerate(order):
                text = raw[src]
                if text == "":
                    raise MissingValueError(r, expected[dest])
                if kinds[dest] is FeatureKind.NUMERICAL:
                    try:
                        value = float(text)
                    except ValueError:
                        raise UnparsableNumericError(r, expected[dest], text) from None
                    if not math.isfinite(value):
                        raise UnparsableNumericError(r, expected[dest], text)
                    cells.append(value)
                else:
                    cells.append(text)
            rows.append(cells)
    return Table(schema, rows)


def write_csv(table: Table, path: str | Path) -> None:
    """Emit a table as UTF-8 CSV (RFC-4180 quoting) that round-trips exactly.

    Floats are serialized with ``repr``, the shortest digit string that
    parses back to the identical double.
    """
    if table.n_rows == 0:
        raise EmptyTableError("refusing to write a table with no rows")
    kinds = [kind for _, kind in table.schema.features]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.schema.column_names)
        for row in table.rows:
            out = [repr(cell) if kind is FeatureKind.NUMERICAL else cell
                   for cell, kind in zip(row, kinds)]
            if table.schema.target is not None:
                out.append(row[-1])
            writer.writerow(out)


def split(table: Table, fractions: Sequence[float], seed: int) -> list[Table]:
    """Partition rows by shuffled index into len(fractions) disjoint tables.

    Sizes are floor-allocated with the remainder going to the first part;
    the shuffle is deterministic for a fixed seed.
    """
    if table.n_rows == 0:
        raise EmptyTableError("cannot split an empty table")
    if not fractions or any(f <= 0 for f in fractions):
        raise BadFractionsError(f"fractions must be positive, got {list(fractions)}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise BadFractionsError(f"fractions sum to {sum(fractions)!r}, expected 1")

    n = table.n_rows
    sizes = [int(n * f) for f in fractions]
    sizes[0] += n - sum(sizes)
    perm = np.random.default_rng(seed).permutation(n)
    parts: list[Table] = []
    start = 0
    for size in sizes:
        idx = perm[start:start + size]
        parts.append(Table(table.schema, [table.row(int(i)) for i in idx]))
        start += size
    return parts


def concat(first: Table, *rest: Table) -> Table:
    """Stack tables sharing a schema, preserving row order."""
    rows: list[Row] = list(first.rows)
    for other in rest:
        if other.schema != first.schema:
            raise SchemaMismatchError("cannot concatenate tables with different schemas")
        rows.extend(other.rows)
    return Table(first.schema, rows)
