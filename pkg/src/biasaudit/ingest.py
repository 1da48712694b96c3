"""Reading, canonicalizing and grouping prediction logs.

A log row carries a ground-truth class, a predicted label (free text is
allowed, as emitted by open-vocabulary models), and a subgroup value for the
bias attribute. Files are UTF-8; CSV follows RFC 4180 with a configurable
delimiter, JSONL holds one object per line.
"""

from __future__ import annotations

import csv
import json
import string
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    EmptyFileError,
    MalformedRowError,
    MissingColumnError,
)

# Sentinel label for predictions that are (or canonicalize to) the empty
# string: a refusal/empty output is itself an error-distribution signal, so
# such rows are counted rather than dropped.
EMPTY_PREDICTION = "⟨empty⟩"

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


@dataclass(frozen=True, slots=True)
class PredictionRecord:
    """One evaluation instance: what the model was shown and what it said."""

    ground_truth: str
    prediction: str
    subgroup: str
    example_id: str | None = None


@dataclass(frozen=True)
class ColumnSpec:
    """Names of the columns/fields holding each record component."""

    label: str = "label"
    prediction: str = "prediction"
    group: str = "group"
    id: str | None = None


DEFAULT_COLUMNS = ColumnSpec(id="example_id")


def _normalize_text(text: str, trim: bool, lowercase: bool, strip_punctuation: bool) -> str:
    if trim:
        text = text.strip()
    if lowercase:
        text = text.lower()
    if strip_punctuation:
        text = text.translate(_PUNCT_TABLE)
        if trim:
            text = text.strip()
    return text


@dataclass(frozen=True)
class CanonicalizationRules:
    """Deterministic post-processing of free-text model outputs.

    Stages run in a fixed order: trim, lowercase, strip punctuation, synonym
    lookup. Synonym keys and values are normalized with the text rules when
    the object is built, so lookup happens after normalization and the whole
    transform is idempotent. Chained maps (a value that is itself remapped to
    something else) are rejected.
    """

    lowercase: bool = True
    trim: bool = True
    strip_punctuation: bool = False
    synonym_map: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        normalized = {}
        for variant, canonical in self.synonym_map.items():
            key = _normalize_text(variant, self.trim, self.lowercase, self.strip_punctuation)
            value = _normalize_text(canonical, self.trim, self.lowercase, self.strip_punctuation)
            normalized[key] = value
        for value in normalized.values():
            if value in normalized and normalized[value] != value:
                raise ValueError(
                    f"synonym map contains a chain: {value!r} -> {normalized[value]!r}"
                )
        object.__setattr__(self, "synonym_map", normalized)


IDENTITY_RULES = CanonicalizationRules(lowercase=False, trim=False, strip_punctuation=False)


def load_synonym_map(path) -> dict[str, str]:
    """Load a JSON object mapping variant -> canonical label."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in data.items()
    ):
        raise ValueError(f"{path}: synonym map must be a JSON object of strings")
    return data


def canonicalize(prediction: str, rules: CanonicalizationRules) -> str:
    """Apply the rules to one predicted label.

    Empty results become the EMPTY_PREDICTION sentinel, which passes through
    unchanged on repeated application (the transform is idempotent).
    """
    if prediction == EMPTY_PREDICTION:
        return EMPTY_PREDICTION
    text = _normalize_text(prediction, rules.trim, rules.lowercase, rules.strip_punctuation)
    text = rules.synonym_map.get(text, text)
    if text == "":
        return EMPTY_PREDICTION
    return text


def canonicalize_records(records, rules: CanonicalizationRules) -> list[PredictionRecord]:
    """Canonicalize predictions and ground-truth labels across a record list.

    Both sides go through the same rules so a sentence-form prediction can
    match its class label; subgroup values and ids are left untouched.
    """
    memo: dict[str, str] = {}

    def canon(text: str) -> str:
        hit = memo.get(text)
        if hit is None:
            hit = canonicalize(text, rules)
            memo[text] = hit
        return hit

    return [
        PredictionRecord(
            ground_truth=canon(r.ground_truth),
            prediction=canon(r.prediction),
            subgroup=r.subgroup,
            example_id=r.example_id,
        )
        for r in records
    ]


def _record_from_values(gt, pred, group, example_id, row_num) -> PredictionRecord:
    if gt is None or not str(gt).strip():
        raise MalformedRowError(row_num, "empty ground-truth label")
    if group is None or not str(group).strip():
        raise MalformedRowError(row_num, "empty subgroup value")
    if pred is None:
        raise MalformedRowError(row_num, "missing prediction")
    return PredictionRecord(
        ground_truth=str(gt).strip(),
        prediction=str(pred),
        subgroup=str(group).strip(),
        example_id=str(example_id) if example_id not in (None, "") else None,
    )


def _read_csv(path, columns: ColumnSpec, delimiter: str) -> list[PredictionRecord]:
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFileError(f"{path}: file is empty") from None
        positions = {name: idx for idx, name in enumerate(header)}
        needed = [columns.label, columns.prediction, columns.group]
        if columns.id is not None and columns.id in positions:
            id_pos = positions[columns.id]
        elif columns.id is not None and columns.id != DEFAULT_COLUMNS.id:
            # an explicitly requested id column must exist
            raise MissingColumnError(columns.id, 1)
        else:
            id_pos = None
        for name in needed:
            if name not in positions:
                raise MissingColumnError(name, 1)
        for row_num, row in enumerate(reader, start=2):
            if not row:
                continue
            values = []
            for name in needed:
                pos = positions[name]
                if pos >= len(row):
                    raise MissingColumnError(name, row_num)
                values.append(row[pos])
            example_id = None
            if id_pos is not None and id_pos < len(row):
                example_id = row[id_pos]
            records.append(_record_from_values(*values, example_id, row_num))
    return records


def _read_jsonl(path, columns: ColumnSpec) -> list[PredictionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for row_num, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRowError(row_num, f"invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise MalformedRowError(row_num, "line is not a JSON object")
            for name in (columns.label, columns.prediction, columns.group):
                if name not in obj:
                    raise MissingColumnError(name, row_num)
            example_id = obj.get(columns.id) if columns.id is not None else None
            records.append(
                _record_from_values(
                    obj[columns.label],
                    obj[columns.prediction],
                    obj[columns.group],
                    example_id,
                    row_num,
                )
            )
    if not records:
        raise EmptyFileError(f"{path}: file is empty")
    return records


def read_records(
    path,
    format: str = "csv",
    columns: ColumnSpec = DEFAULT_COLUMNS,
    delimiter: str = ",",
) -> list[PredictionRecord]:
    """Read prediction records from a CSV (header required) or JSONL file.

    Input order is preserved and row numbers are reported in errors.
    """
    path = Path(path)
    if format == "csv":
        records = _read_csv(path, columns, delimiter)
        if not records:
            raise EmptyFileError(f"{path}: no data rows")
        return records
    if format == "jsonl":
        return _read_jsonl(path, columns)
    raise ValueError(f"unknown format {format!r}; expected 'csv' or 'jsonl'")


def write_records(
    records,
    path,
    format: str = "csv",
    columns: ColumnSpec = DEFAULT_COLUMNS,
    delimiter: str = ",",
) -> None:
    """Write records in the same schema ``read_records`` accepts.

    Reading the file back reproduces the record list exactly.
    """
    id_col = columns.id or "example_id"
    if format == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
            writer.writerow([columns.label, columns.prediction, columns.group, id_col])
            for r in records:
                writer.writerow(
                    [r.ground_truth, r.prediction, r.subgroup, r.example_id or ""]
                )
    elif format == "jsonl":
        with open(path, "w", encoding="utf-8") as fh:
            for r in records:
                obj = {
                    columns.label: r.ground_truth,
                    columns.prediction: r.prediction,
                    columns.group: r.subgroup,
                    id_col: r.example_id,
                }
                fh.write(json.dumps(obj, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}; expected 'csv' or 'jsonl'")


def group_by_class(records) -> dict[str, list[tuple[str, str]]]:
    """Partition records by ground-truth class.

    Returns {class: [(subgroup, prediction), ...]} with classes in
    first-appearance order and pairs in input order; the partition is exact
    (sizes sum to the input size).
    """
    groups: dict[str, list[tuple[str, str]]] = {}
    for r in records:
        groups.setdefault(r.ground_truth, []).append((r.subgroup, r.prediction))
    return groups


@dataclass(frozen=True)
class ValidationReport:
    """Structural description of a dataset, with human-readable warnings."""

    n_records: int
    subgroups: tuple[str, ...]
    classes: tuple[str, ...]
    cell_counts: dict[tuple[str, str], int]
    single_subgroup_classes: tuple[str, ...]
    duplicate_ids: tuple[str, ...]
    warnings: tuple[str, ...]


def validate_dataset(records) -> ValidationReport:
    """Report subgroup coverage, per-cell counts, and duplicate ids.

    Purely observational; never mutates or filters the data.
    """
    subgroups: dict[str, None] = {}
    classes: dict[str, None] = {}
    cell_counts: dict[tuple[str, str], int] = {}
    seen_ids: set[str] = set()
    duplicates: dict[str, None] = {}
    for r in records:
        subgroups.setdefault(r.subgroup)
        classes.setdefault(r.ground_truth)
        key = (r.ground_truth, r.subgroup)
        cell_counts[key] = cell_counts.get(key, 0) + 1
        if r.example_id is not None:
            if r.example_id in seen_ids:
                duplicates.setdefault(r.example_id)
            seen_ids.add(r.example_id)

    groups_per_class: dict[str, set[str]] = {}
    for cls, grp in cell_counts:
        groups_per_class.setdefault(cls, set()).add(grp)
    single = tuple(c for c, gs in groups_per_class.items() if len(gs) == 1)

    warnings: list[str] = []
    if records and len(subgroups) == 1:
        warnings.append("single subgroup: all effect sizes undefined")
    elif len(subgroups) > 1:
        for cls in single:
            warnings.append(f"class {cls!r} is observed in a single subgroup")
    if duplicates:
        shown = ", ".join(list(duplicates)[:5])
        warnings.append(f"duplicate example_id values ({len(duplicates)}): {shown}")

    return ValidationReport(
        n_records=len(records),
        subgroups=tuple(subgroups),
        classes=tuple(classes),
        cell_counts=cell_counts,
        single_subgroup_classes=single,
        duplicate_ids=tuple(duplicates),
        warnings=tuple(warnings),
    )
