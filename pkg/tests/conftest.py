import math

import numpy as np
import pytest

from tabmem.table import FeatureKind, Schema, Table

NUM = FeatureKind.NUMERICAL
CAT = FeatureKind.CATEGORICAL


def brute_force_two_nearest(generated, train, norm):
    """Independent oracle: scalar per-pair distances, double loop, stable sort."""
    results = []
    for g in generated.rows:
        dists = []
        for idx, t in enumerate(train.rows):
            num = 0.0
            cat = 0
            for j, (_, kind) in enumerate(train.schema.features):
                if kind is NUM:
                    num += (g[j] - t[j]) ** 2
                else:
                    cat += g[j] != t[j]
            raw = math.sqrt(num)
            if norm.d_max > norm.d_min:
                scaled = min(max((raw - norm.d_min) / (norm.d_max - norm.d_min), 0.0), 1.0)
            else:
                scaled = 0.0
            dists.append(((scaled + cat) / train.schema.n_features, idx))
        dists.sort(key=lambda pair: (pair[0], pair[1]))
        results.append((dists[0][1], dists[0][0], dists[1][1], dists[1][0]))
    return results


@pytest.fixture
def mixed_schema():
    return Schema(
        features=(("x", NUM), ("y", NUM), ("color", CAT), ("shape", CAT)),
        target="label",
    )


@pytest.fixture
def small_table(mixed_schema):
    return Table(
        mixed_schema,
        [
            (0.0, 0.0, "red", "circle", "pos"),
            (3.0, 4.0, "red", "square", "pos"),
            (1.0, 1.0, "blue", "circle", "neg"),
            (6.0, 8.0, "green", "square", "neg"),
        ],
    )


def random_mixed_table(
    rng: np.random.Generator,
    n_rows: int,
    n_num: int = 2,
    n_cat: int = 2,
    categories: int = 3,
    with_target: bool = False,
    duplicate_rows: int = 0,
) -> Table:
    """Random table; optionally repeats its first rows to create exact ties."""
    features = [(f"n{i}", NUM) for i in range(n_num)] + [(f"c{i}", CAT) for i in range(n_cat)]
    schema = Schema(features=tuple(features), target="label" if with_target else None)
    symbols = [f"v{k}" for k in range(categories)]
    rows = []
    for _ in range(n_rows):
        row = [float(v) for v in rng.normal(size=n_num)]
        row += [symbols[int(k)] for k in rng.integers(categories, size=n_cat)]
        if with_target:
            row.append("A" if rng.random() < 0.5 else "B")
        rows.append(tuple(row))
    for i in range(duplicate_rows):
        rows.append(rows[i % n_rows])
    return Table(schema, rows)
