"""Labeled contingency tables and the statistics computed on them.

A table cross-tabulates subgroup (rows) against predicted label (columns)
for one ground-truth class. Everything here is descriptive: the chi-squared
statistic is the plain sum of (observed - expected)^2 / expected with no
continuity correction, and no p-values are ever computed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AllColumnsRemovedError, EmptyInputError


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    """Non-negative integer counts with labeled rows and columns.

    Invariants enforced at construction: labels are unique, the matrix shape
    matches the labels, counts are non-negative integers, and every row and
    column total is positive (tables are built from observed pairs, so
    all-zero rows/columns never occur).
    """

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2:
            raise ValueError("counts must be a 2-D matrix")
        if not np.issubdtype(counts.dtype, np.integer):
            as_int = counts.astype(np.int64)
            if not np.array_equal(as_int, counts):
                raise ValueError("counts must be integers")
            counts = as_int
        else:
            counts = counts.astype(np.int64, copy=True)
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "row_labels", tuple(self.row_labels))
        object.__setattr__(self, "col_labels", tuple(self.col_labels))

        n_rows, n_cols = counts.shape
        if n_rows == 0 or n_cols == 0:
            raise ValueError("table must have at least one row and one column")
        if len(self.row_labels) != n_rows or len(self.col_labels) != n_cols:
            raise ValueError("label lengths must match the counts shape")
        if len(set(self.row_labels)) != n_rows:
            raise ValueError("duplicate row labels")
        if len(set(self.col_labels)) != n_cols:
            raise ValueError("duplicate column labels")
        if (counts < 0).any():
            raise ValueError("counts must be non-negative")
        if (counts.sum(axis=1) == 0).any():
            raise ValueError("every row total must be positive")
        if (counts.sum(axis=0) == 0).any():
            raise ValueError("every column total must be positive")

    @property
    def n_rows(self) -> int:
        return self.counts.shape[0]

    @property
    def n_cols(self) -> int:
        return self.counts.shape[1]

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_totals(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def total(self) -> int:
        """Grand total N."""
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        """JSON-ready form: {row_labels, col_labels, counts}."""
        return {
            "row_labels": list(self.row_labels),
            "col_labels": list(self.col_labels),
            "counts": self.counts.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ContingencyTable":
        return cls(
            row_labels=tuple(data["row_labels"]),
            col_labels=tuple(data["col_labels"]),
            counts=np.asarray(data["counts"], dtype=np.int64),
        )


@dataclass(frozen=True, eq=False)
class ExpectedTable:
    """Expected cell frequencies under row/column independence.

    Aligned entry-for-entry with the table it was computed from:
    values[i, j] = row_total(i) * col_total(j) / N.
    """

    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        total = float(values.sum())
        n = round(total)
        if n >= 1 and abs(total - n) > 1e-9 * n:
            raise ValueError("expected frequencies must sum to the grand total")


@dataclass(frozen=True)
class MevFilterOutcome:
    """Result of filtering low-expected-count columns out of a table.

    ``removed_columns`` pairs each removed label with the column statistic
    (min or mean expected cell value, per the rule) that fell below the
    threshold. ``dropped_rows`` lists rows that became all-zero once the
    columns were gone.
    """

    kept: ContingencyTable
    removed_columns: tuple[tuple[str, float], ...]
    dropped_rows: tuple[str, ...]
    threshold: float


def build_table(pairs) -> ContingencyTable:
    """Cross-tabulate (subgroup, prediction) pairs into a labeled table.

    Row and column labels appear in first-appearance order, which makes the
    construction reproducible for a fixed input order; the statistics below
    are invariant to that order anyway.
    """
    row_index: dict[str, int] = {}
    col_index: dict[str, int] = {}
    cells: dict[tuple[int, int], int] = {}
    n_pairs = 0
    for subgroup, prediction in pairs:
        i = row_index.setdefault(subgroup, len(row_index))
        j = col_index.setdefault(prediction, len(col_index))
        key = (i, j)
        cells[key] = cells.get(key, 0) + 1
        n_pairs += 1
    if n_pairs == 0:
        raise EmptyInputError("cannot build a contingency table from zero pairs")
    counts = np.zeros((len(row_index), len(col_index)), dtype=np.int64)
    for (i, j), c in cells.items():
        counts[i, j] = c
    return ContingencyTable(tuple(row_index), tuple(col_index), counts)


def expected_frequencies(table: ContingencyTable) -> ExpectedTable:
    """Expected frequencies e[i,j] = row_total(i) * col_total(j) / N."""
    values = np.outer(table.row_totals, table.col_totals) / table.total
    return ExpectedTable(table.row_labels, table.col_labels, values)


def chi_square(table: ContingencyTable) -> float:
    """Pearson chi-squared statistic, summed over every cell.

    Uses exact summation (math.fsum) over the per-cell terms so the result
    is bit-identical under any permutation of rows and columns. Degenerate
    tables with a single row or column return exactly 0.0, since observed
    and expected frequencies coincide.
    """
    if table.n_rows == 1 or table.n_cols == 1:
        return 0.0
    expected = expected_frequencies(table).values
    terms = (table.counts - expected) ** 2 / expected
    return math.fsum(terms.ravel().tolist())


def degrees_of_freedom(table: ContingencyTable) -> int:
    """min(R, C) - 1, the normalization used inside the effect size.

    This equals the textbook min(R - 1, C - 1) that bounds chi-squared at
    N * DF, so the effect size below stays in [0, 1].
    """
    return min(table.n_rows, table.n_cols) - 1


def cramers_v(table: ContingencyTable) -> float:
    """Cramer's V effect size: sqrt(chi2 / (N * DF)).

    Returns NaN when DF = 0 (single row or single column), the distinguished
    "undefined" value; callers decide whether to exclude such classes.
    Otherwise the value lies in [0, 1], with 1 indicating that rows fully
    determine columns (or vice versa).
    """
    dof = degrees_of_freedom(table)
    if dof == 0:
        return math.nan
    ratio = chi_square(table) / (table.total * dof)
    return math.sqrt(min(ratio, 1.0))


def phi_coefficient(table: ContingencyTable) -> float:
    """Phi coefficient: sqrt(chi2 / N).

    Meant for 2x2 tables. For larger tables the value is still computed but
    is advisory only (it can exceed 1), and a warning is emitted.
    """
    if table.n_rows > 2 or table.n_cols > 2:
        warnings.warn(
            "phi coefficient on a table larger than 2x2 is advisory only",
            stacklevel=2,
        )
    return math.sqrt(chi_square(table) / table.total)


def apply_mev_filter(
    table: ContingencyTable, threshold: float, rule: str = "min"
) -> MevFilterOutcome:
    """Drop prediction columns whose expected counts fall below ``threshold``.

    Expectations are computed once, on the original table (single pass; the
    filter is not iterated). Under the default ``min`` rule a column is
    removed iff its smallest expected cell is below the threshold; ``mean``
    compares the column's mean expected cell instead. Rows that end up
    all-zero after column removal are dropped from the kept table. A
    threshold of 0 keeps everything.

    Raises AllColumnsRemovedError when nothing survives, signalling that the
    class must be excluded downstream.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    if rule not in ("min", "mean"):
        raise ValueError(f"unknown filter rule {rule!r}; expected 'min' or 'mean'")
    expected = expected_frequencies(table).values
    col_stat = expected.min(axis=0) if rule == "min" else expected.mean(axis=0)
    keep = col_stat >= threshold
    if not keep.any():
        raise AllColumnsRemovedError(
            f"all {table.n_cols} columns fall below expected-count threshold {threshold}"
        )
    removed = tuple(
        (label, float(stat))
        for label, stat, kept_col in zip(table.col_labels, col_stat, keep)
        if not kept_col
    )
    counts = table.counts[:, keep]
    row_keep = counts.sum(axis=1) > 0
    dropped = tuple(
        label for label, kept_row in zip(table.row_labels, row_keep) if not kept_row
    )
    kept_table = ContingencyTable(
        row_labels=tuple(l for l, k in zip(table.row_labels, row_keep) if k),
        col_labels=tuple(l for l, k in zip(table.col_labels, keep) if k),
        counts=counts[row_keep],
    )
    return MevFilterOutcome(
        kept=kept_table,
        removed_columns=removed,
        dropped_rows=dropped,
        threshold=float(threshold),
    )
