"""Shared helpers: random table generation and independent oracles.

The oracles here are deliberately naive (plain Python loops, no numpy) so
they stay independent of the library code paths they check.
"""

import numpy as np

from biasaudit import ContingencyTable


def random_table(rng, max_rows=8, max_cols=8, max_count=100, min_rows=1, min_cols=1):
    """A random labeled table with no zero marginals."""
    while True:
        n_rows = int(rng.integers(min_rows, max_rows + 1))
        n_cols = int(rng.integers(min_cols, max_cols + 1))
        counts = rng.integers(0, max_count + 1, size=(n_rows, n_cols))
        if (counts.sum(axis=1) > 0).all() and (counts.sum(axis=0) > 0).all():
            return ContingencyTable(
                tuple(f"group_{i}" for i in range(n_rows)),
                tuple(f"pred_{j}" for j in range(n_cols)),
                counts,
            )


def chi_square_oracle(counts) -> float:
    """Brute-force chi-squared: explicit loops over every cell."""
    counts = [list(map(int, row)) for row in counts]
    n_rows = len(counts)
    n_cols = len(counts[0])
    row_totals = [sum(row) for row in counts]
    col_totals = [sum(counts[i][j] for i in range(n_rows)) for j in range(n_cols)]
    grand = sum(row_totals)
    total = 0.0
    for i in range(n_rows):
        for j in range(n_cols):
            expected = row_totals[i] * col_totals[j] / grand
            observed = counts[i][j]
            total += (observed - expected) ** 2 / expected
    return total


def cramers_v_oracle(counts) -> float:
    counts = [list(row) for row in counts]
    dof = min(len(counts), len(counts[0])) - 1
    if dof == 0:
        return float("nan")
    grand = sum(sum(row) for row in counts)
    return (chi_square_oracle(counts) / (grand * dof)) ** 0.5


def skewness_oracle(values) -> float:
    """Moment-convention skewness with plain Python arithmetic."""
    values = list(map(float, values))
    n = len(values)
    mean = sum(values) / n
    m2 = sum((v - mean) ** 2 for v in values) / n
    if m2 == 0.0:
        return 0.0
    m3 = sum((v - mean) ** 3 for v in values) / n
    return m3 / m2**1.5


def table_from(matrix, rows=None, cols=None) -> ContingencyTable:
    matrix = np.asarray(matrix)
    rows = rows or tuple(f"group_{i}" for i in range(matrix.shape[0]))
    cols = cols or tuple(f"pred_{j}" for j in range(matrix.shape[1]))
    return ContingencyTable(tuple(rows), tuple(cols), matrix)
