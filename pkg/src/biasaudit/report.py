"""Audit orchestration and the canonical report format.

``audit_records`` runs the full pipeline (canonicalize, validate, per-class
effect sizes, SkewSize, accuracy family, DP/EO) and returns an
:class:`AuditReport`. Reports serialize to a canonical JSON form: sorted
keys, floats at 6 significant digits, NaN rendered as null, so identical
inputs and flags always produce identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass

from . import metrics as m
from .contingency import apply_mev_filter, build_table, expected_frequencies
from .errors import (
    AllColumnsRemovedError,
    NoRecordsError,
    SingleSubgroupError,
    TooFewClassesError,
)
from .ingest import (
    CanonicalizationRules,
    canonicalize_records,
    group_by_class,
    validate_dataset,
)

SCHEMA_VERSION = 1


@dataclass
class AuditReport:
    config_echo: dict
    per_class: list[dict]
    aggregate: dict
    band_histogram: dict[str, int]
    warnings: list[str]
    tables: dict | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        data = {
            "schema_version": self.schema_version,
            "config_echo": self.config_echo,
            "per_class": self.per_class,
            "aggregate": self.aggregate,
            "band_histogram": self.band_histogram,
            "warnings": self.warnings,
        }
        if self.tables is not None:
            data["tables"] = self.tables
        return data


def default_config() -> dict:
    return {
        "command": None,
        "input": None,
        "format": None,
        "delimiter": ",",
        "label_col": None,
        "pred_col": None,
        "group_col": None,
        "id_col": None,
        "synonyms": None,
        "synonym_map_hash": None,
        "canonicalization": None,
        "mev_threshold": 0.0,
        "mev_rule": "min",
        "skew_convention": "moment",
        "aggregation": "max",
        "min_class_count": 1,
        "band_edges": list(m.BAND_EDGES),
        "negate_skew": False,
        "dump_tables": False,
        "seed": None,
        "generator": None,
    }


def audit_records(
    records,
    *,
    rules: CanonicalizationRules | None = None,
    mev_threshold: float = 0.0,
    mev_rule: str = "min",
    skew_convention: str = "moment",
    aggregation: str = "max",
    min_class_count: int = 1,
    eo_per_label: bool = False,
    negate_skew: bool = False,
    dump_tables: bool = False,
    config_extra: dict | None = None,
) -> AuditReport:
    """Run the full audit over an in-memory record list."""
    if not records:
        raise NoRecordsError("no records to audit")
    if rules is not None:
        records = canonicalize_records(records, rules)

    validation = validate_dataset(records)
    warnings = list(validation.warnings)

    effects = m.per_class_effect_sizes(
        records,
        mev_threshold=mev_threshold,
        mev_rule=mev_rule,
        min_class_count=min_class_count,
    )

    accuracy = m.accuracy_metrics(records)
    class_accuracy, class_group_accuracy = _per_class_accuracy(records)

    try:
        fairness = m.fairness_summary(records, aggregation, eo_per_label=eo_per_label)
    except SingleSubgroupError:
        fairness = None
        warnings.append("DP/EO undefined: fewer than two subgroups")

    try:
        skew = m.skewsize(effects, skew_convention)
        skew_value = -skew.value if negate_skew else skew.value
        classes_used = skew.classes_used
        classes_excluded = skew.classes_excluded
    except TooFewClassesError as exc:
        skew_value = None
        classes_used = sum(1 for e in effects if not e.excluded)
        classes_excluded = len(effects) - classes_used
        warnings.append(f"SkewSize undefined: {exc}")

    histogram = {name: 0 for name in m.BAND_NAMES}
    for effect in effects:
        if not effect.excluded:
            histogram[effect.band] += 1

    per_class = []
    for effect in effects:
        cls = effect.class_label
        per_class.append(
            {
                "class": cls,
                "n": effect.n,
                "effect_size": None if effect.excluded else effect.effect_size,
                "dof": effect.dof,
                "band": effect.band,
                "excluded": effect.excluded,
                "exclusion_reason": effect.exclusion_reason,
                "accuracy": class_accuracy[cls],
                "per_group_accuracy": class_group_accuracy[cls],
                "dp": fairness.per_class_dp[cls] if fairness else None,
                "eo": fairness.per_class_eo[cls] if fairness else None,
            }
        )

    aggregate = {
        "skewsize": skew_value,
        "classes_used": classes_used,
        "classes_excluded": classes_excluded,
        "overall_accuracy": accuracy.overall,
        "worst_group_accuracy": accuracy.worst_group,
        "gap": accuracy.gap,
        "dp_aggregate": fairness.dp_aggregate if fairness else None,
        "eo_aggregate": fairness.eo_aggregate if fairness else None,
    }

    config = default_config()
    config.update(
        {
            "canonicalization": None
            if rules is None
            else {
                "trim": rules.trim,
                "lowercase": rules.lowercase,
                "strip_punctuation": rules.strip_punctuation,
            },
            "mev_threshold": float(mev_threshold),
            "mev_rule": mev_rule,
            "skew_convention": skew_convention,
            "aggregation": aggregation,
            "min_class_count": min_class_count,
            "negate_skew": negate_skew,
            "dump_tables": dump_tables,
        }
    )
    if config_extra:
        config.update(config_extra)

    tables = _dump_tables(records, mev_threshold, mev_rule) if dump_tables else None

    report = AuditReport(
        config_echo=config,
        per_class=per_class,
        aggregate=aggregate,
        band_histogram=histogram,
        warnings=warnings,
        tables=tables,
    )
    validate_report(report)
    return report


def _per_class_accuracy(records):
    correct: dict[tuple[str, str], int] = {}
    total: dict[tuple[str, str], int] = {}
    for r in records:
        key = (r.ground_truth, r.subgroup)
        total[key] = total.get(key, 0) + 1
        if r.prediction == r.ground_truth:
            correct[key] = correct.get(key, 0) + 1
    class_accuracy: dict[str, float] = {}
    class_group_accuracy: dict[str, dict[str, float]] = {}
    class_totals: dict[str, int] = {}
    class_correct: dict[str, int] = {}
    for (cls, grp), n in total.items():
        hits = correct.get((cls, grp), 0)
        class_group_accuracy.setdefault(cls, {})[grp] = hits / n
        class_totals[cls] = class_totals.get(cls, 0) + n
        class_correct[cls] = class_correct.get(cls, 0) + hits
    for cls, n in class_totals.items():
        class_accuracy[cls] = class_correct.get(cls, 0) / n
    return class_accuracy, class_group_accuracy


def _dump_tables(records, mev_threshold, mev_rule) -> dict:
    tables = {}
    for cls, pairs in group_by_class(records).items():
        table = build_table(pairs)
        entry = {"table": table.to_dict()}
        try:
            outcome = apply_mev_filter(table, mev_threshold, rule=mev_rule)
            entry["removed_columns"] = [[label, stat] for label, stat in outcome.removed_columns]
            entry["dropped_rows"] = list(outcome.dropped_rows)
        except AllColumnsRemovedError:
            entry["removed_columns"] = [
                [label, stat]
                for label, stat in zip(
                    table.col_labels,
                    _column_stats(table, mev_rule),
                )
            ]
            entry["dropped_rows"] = list(table.row_labels)
        tables[cls] = entry
    return tables


def _column_stats(table, rule):
    expected = expected_frequencies(table).values
    stats = expected.min(axis=0) if rule == "min" else expected.mean(axis=0)
    return [float(s) for s in stats]


def validate_report(report: AuditReport) -> None:
    """Check the report's self-consistency invariants; raise on violation."""
    agg = report.aggregate
    used = agg["classes_used"]
    excluded = agg["classes_excluded"]
    if used + excluded != len(report.per_class):
        raise ValueError("classes_used + classes_excluded != number of per-class rows")
    if sum(report.band_histogram.values()) != used:
        raise ValueError("band histogram does not sum to classes_used")
    values = [row["effect_size"] for row in report.per_class if not row["excluded"]]
    if agg["skewsize"] is not None:
        recomputed = m.fisher_pearson_skewness(
            values, report.config_echo["skew_convention"]
        )
        if report.config_echo.get("negate_skew"):
            recomputed = -recomputed
        if abs(recomputed - agg["skewsize"]) > 1e-12:
            raise ValueError("aggregate skewsize is not recomputable from per-class rows")


def _round6(value: float) -> float:
    rounded = float(f"{value:.6g}")
    return 0.0 if rounded == 0 else rounded


def _canonical(obj):
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return _round6(obj)
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def canonical_json(data: dict) -> str:
    """Deterministic JSON: sorted keys, floats to 6 significant digits."""
    return json.dumps(_canonical(data), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{_round6(value):g}"
    return str(value)


PER_CLASS_COLUMNS = (
    "class",
    "n",
    "effect_size",
    "dof",
    "band",
    "excluded",
    "exclusion_reason",
    "accuracy",
    "per_group_accuracy",
    "dp",
    "eo",
)


def render_report(report: AuditReport, format: str = "json") -> str:
    """Render as canonical JSON, a per-class CSV table, or markdown."""
    if format == "json":
        return canonical_json(report.to_dict())
    if format == "csv":
        return _render_csv(report)
    if format == "markdown":
        return _render_markdown(report)
    raise ValueError(f"unknown render format {format!r}")


def _render_csv(report: AuditReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(PER_CLASS_COLUMNS)
    for row in report.per_class:
        cells = []
        for col in PER_CLASS_COLUMNS:
            value = row[col]
            if col == "per_group_accuracy":
                value = ";".join(f"{g}={_format_cell(a)}" for g, a in value.items())
            cells.append(_format_cell(value))
        writer.writerow(cells)
    return buffer.getvalue()


def _render_markdown(report: AuditReport) -> str:
    agg = report.aggregate
    lines = ["# Bias audit", ""]
    skew = agg["skewsize"]
    skew_text = "undefined" if skew is None else f"{_round6(skew):g}"
    lines.append(
        f"SkewSize: **{skew_text}** "
        f"({agg['classes_used']} classes used, {agg['classes_excluded']} excluded; "
        f"higher is less biased)"
    )
    lines.append(
        f"Accuracy: overall {_format_cell(agg['overall_accuracy'])}, "
        f"worst group {_format_cell(agg['worst_group_accuracy'])}, "
        f"gap {_format_cell(agg['gap'])}, "
        f"DP {_format_cell(agg['dp_aggregate'])}, EO {_format_cell(agg['eo_aggregate'])}"
    )
    lines.append("")
    lines.append("| class | n | accuracy | gap | effect size | band | dp | eo |")
    lines.append("|---|---|---|---|---|---|---|---|")
    for row in report.per_class:
        group_accs = row["per_group_accuracy"].values()
        class_gap = row["accuracy"] - min(group_accs)
        effect = "excluded" if row["excluded"] else _format_cell(row["effect_size"])
        band = row["band"] or row["exclusion_reason"] or ""
        lines.append(
            f"| {row['class']} | {row['n']} | {_format_cell(row['accuracy'])} "
            f"| {_format_cell(class_gap)} | {effect} | {band} "
            f"| {_format_cell(row['dp'])} | {_format_cell(row['eo'])} |"
        )
    lines.append("")
    histogram = ", ".join(f"{name}={report.band_histogram[name]}" for name in m.BAND_NAMES)
    lines.append(f"Band histogram: {histogram}")
    if report.warnings:
        lines.append("")
        lines.append("Warnings:")
        lines.extend(f"- {w}" for w in report.warnings)
    return "\n".join(lines) + "\n"
