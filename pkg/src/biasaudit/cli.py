"""Command-line entry points: audit, compare, simulate.

Exit codes: 0 success, 1 I/O failure, 2 schema/validation failure. Errors
are written to stderr as a single JSON object so CI gates can parse them.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .errors import BiasAuditError, NoRecordsError
from .ingest import (
    CanonicalizationRules,
    ColumnSpec,
    load_synonym_map,
    read_records,
    write_records,
)
from .report import audit_records, canonical_json, render_report
from .simulate import (
    GENERATOR_NAME,
    dsprites_scenario,
    sample_records,
    stereotype_scenario,
)

IO_ERROR = 1
VALIDATION_ERROR = 2


def _add_input_flags(parser):
    parser.add_argument("--format", choices=["csv", "jsonl"], default="csv")
    parser.add_argument("--label-col", "--label-field", dest="label_col", default="label")
    parser.add_argument("--pred-col", "--pred-field", dest="pred_col", default="prediction")
    parser.add_argument("--group-col", "--group-field", dest="group_col", default="group")
    parser.add_argument("--id-col", "--id-field", dest="id_col", default="example_id")
    parser.add_argument("--delimiter", default=",")
    parser.add_argument("--synonyms", metavar="PATH", default=None,
                        help="JSON file mapping prediction variants to canonical labels")


def _add_metric_flags(parser):
    parser.add_argument("--mev", type=float, default=5.0, metavar="FLOAT",
                        help="minimum expected value below which prediction columns are dropped")
    parser.add_argument("--mev-rule", choices=["min", "mean"], default="min")
    parser.add_argument("--skew-convention", choices=["moment", "eq4"], default="moment")
    parser.add_argument("--aggregation", choices=["max", "mean"], default="max",
                        help="how per-class DP/EO values are aggregated")
    parser.add_argument("--min-class-count", type=int, default=1, metavar="INT")
    parser.add_argument("--negate-skew", action="store_true",
                        help="report -SkewSize instead (presentation only)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bias-audit",
        description="Quantify distributional bias in classifier prediction logs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    audit = sub.add_parser("audit", help="audit one prediction log")
    audit.add_argument("--input", required=True, metavar="PATH")
    _add_input_flags(audit)
    _add_metric_flags(audit)
    audit.add_argument("--dump-tables", action="store_true",
                       help="include per-class contingency tables in the report")
    audit.add_argument("--out", metavar="PATH", default=None)
    audit.add_argument("--render", choices=["json", "csv", "markdown"], default="json")

    compare = sub.add_parser("compare", help="audit several logs and rank them by SkewSize")
    compare.add_argument("inputs", nargs="+", metavar="PATH")
    _add_input_flags(compare)
    _add_metric_flags(compare)
    compare.add_argument("--mev-sweep", metavar="LO..HI", default=None,
                         help="recompute SkewSize over a grid of integer thresholds, e.g. 2..6")
    compare.add_argument("--out", metavar="PATH", default=None)

    simulate = sub.add_parser("simulate", help="write a synthetic biased prediction log")
    simulate.add_argument("--scenario", choices=["dsprites", "stereotype"], required=True)
    simulate.add_argument("--strength", type=float, default=1.0,
                          help="bias strength in [0,1] for the dsprites scenario")
    simulate.add_argument("--variant", choices=["M1", "M2"], default="M1",
                          help="stereotype scenario variant")
    simulate.add_argument("--n", type=int, default=None, metavar="INT",
                          help="records per (class, subgroup) cell")
    simulate.add_argument("--seed", type=int, default=0)
    simulate.add_argument("--out", required=True, metavar="PATH")

    return parser


def _rules_from_args(args) -> tuple[CanonicalizationRules, str | None]:
    synonym_map = {}
    map_hash = None
    if args.synonyms:
        synonym_map = load_synonym_map(args.synonyms)
        map_hash = hashlib.sha256(Path(args.synonyms).read_bytes()).hexdigest()
    rules = CanonicalizationRules(synonym_map=synonym_map)
    return rules, map_hash


def _columns_from_args(args) -> ColumnSpec:
    return ColumnSpec(
        label=args.label_col,
        prediction=args.pred_col,
        group=args.group_col,
        id=args.id_col,
    )


def _sidecar_echo(input_path) -> dict:
    sidecar = Path(str(input_path) + ".scenario.json")
    if sidecar.exists():
        try:
            data = json.loads(sidecar.read_text(encoding="utf-8"))
            return {"seed": data.get("seed"), "generator": data.get("generator")}
        except (OSError, json.JSONDecodeError):
            pass
    return {}


def _audit_one(input_path, args, map_hash, rules):
    records = read_records(
        input_path,
        format=args.format,
        columns=_columns_from_args(args),
        delimiter=args.delimiter,
    )
    config_extra = {
        "command": args.command,
        "input": str(input_path),
        "format": args.format,
        "delimiter": args.delimiter,
        "label_col": args.label_col,
        "pred_col": args.pred_col,
        "group_col": args.group_col,
        "id_col": args.id_col,
        "synonyms": args.synonyms,
        "synonym_map_hash": map_hash,
    }
    config_extra.update(_sidecar_echo(input_path))
    return audit_records(
        records,
        rules=rules,
        mev_threshold=args.mev,
        mev_rule=args.mev_rule,
        skew_convention=args.skew_convention,
        aggregation=args.aggregation,
        min_class_count=args.min_class_count,
        negate_skew=args.negate_skew,
        dump_tables=getattr(args, "dump_tables", False),
        config_extra=config_extra,
    )


def _emit(text: str, out_path) -> None:
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_audit(args) -> int:
    rules, map_hash = _rules_from_args(args)
    report = _audit_one(args.input, args, map_hash, rules)
    _emit(render_report(report, args.render), args.out)
    return 0


def _parse_sweep(text: str) -> list[int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise ValueError(f"bad sweep range {text!r}; expected LO..HI")
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise ValueError(f"bad sweep range {text!r}: upper bound below lower bound")
    return list(range(lo, hi + 1))


def _rank(paths: list[str], skews: list[float | None], negate_skew: bool) -> list[str]:
    # descending SkewSize = least biased first; ties keep input order
    def key(index: int):
        value = skews[index]
        if value is None:
            value = float("-inf")
        elif negate_skew:
            value = -value
        return (-value, index)

    return [paths[i] for i in sorted(range(len(paths)), key=key)]


def cmd_compare(args) -> int:
    if len(args.inputs) < 2:
        raise NoRecordsError("compare needs at least two input files")
    rules, map_hash = _rules_from_args(args)
    # inputs are positional throughout: comparing a file with itself is legal
    reports = [_audit_one(path, args, map_hash, rules) for path in args.inputs]

    vocabularies = [
        tuple(sorted({g for row in rep.per_class for g in row["per_group_accuracy"]}))
        for rep in reports
    ]
    for path, vocabulary in zip(args.inputs, vocabularies):
        if vocabulary != vocabularies[0]:
            raise BiasAuditError(
                f"inputs do not share a subgroup vocabulary: {path} has "
                f"{vocabulary}, expected {vocabularies[0]}"
            )

    skews = [rep.aggregate["skewsize"] for rep in reports]
    comparison = {
        "schema_version": 1,
        "inputs": list(args.inputs),
        "ranking": _rank(args.inputs, skews, args.negate_skew),
        "skewsize": skews,
        "accuracy": [
            {
                "input": path,
                "overall": rep.aggregate["overall_accuracy"],
                "worst_group": rep.aggregate["worst_group_accuracy"],
                "gap": rep.aggregate["gap"],
            }
            for path, rep in zip(args.inputs, reports)
        ],
        "reports": [rep.to_dict() for rep in reports],
    }

    if args.mev_sweep:
        thresholds = _parse_sweep(args.mev_sweep)
        records_by_input = [
            read_records(
                path, format=args.format, columns=_columns_from_args(args),
                delimiter=args.delimiter,
            )
            for path in args.inputs
        ]
        sweep_values: dict[str, list[float | None]] = {}
        sweep_rankings: dict[str, list[str]] = {}
        for threshold in thresholds:
            row = []
            for records in records_by_input:
                rep = audit_records(
                    records,
                    rules=rules,
                    mev_threshold=float(threshold),
                    mev_rule=args.mev_rule,
                    skew_convention=args.skew_convention,
                    aggregation=args.aggregation,
                    min_class_count=args.min_class_count,
                    negate_skew=args.negate_skew,
                )
                row.append(rep.aggregate["skewsize"])
            sweep_values[str(threshold)] = row
            sweep_rankings[str(threshold)] = _rank(args.inputs, row, args.negate_skew)
        rankings = list(sweep_rankings.values())
        comparison["mev_sweep"] = {
            "thresholds": thresholds,
            "skewsize": sweep_values,
            "rankings": sweep_rankings,
            "ranking_stable": all(r == rankings[0] for r in rankings),
        }

    _emit(canonical_json(comparison), args.out)
    return 0


def cmd_simulate(args) -> int:
    if args.n is not None and args.n < 1:
        raise BiasAuditError("--n must be at least 1")
    if args.scenario == "dsprites":
        if not 0.0 <= args.strength <= 1.0:
            raise BiasAuditError(f"--strength must be in [0, 1], got {args.strength}")
        n = args.n if args.n is not None else 5000
        spec = dsprites_scenario(args.strength, n_per_cell=n)
        meta = {"scenario": "dsprites", "strength": args.strength}
    else:
        n = args.n if args.n is not None else 1000
        spec = stereotype_scenario(args.variant, n_per_cell=n)
        meta = {"scenario": "stereotype", "variant": args.variant}

    records = sample_records(spec, args.seed)
    write_records(records, args.out, format="csv")
    sidecar = {
        **meta,
        "n_per_cell": spec.n_per_cell,
        "seed": args.seed,
        "generator": GENERATOR_NAME,
        "spec": spec.to_dict(),
    }
    Path(str(args.out) + ".scenario.json").write_text(
        json.dumps(sidecar, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"audit": cmd_audit, "compare": cmd_compare, "simulate": cmd_simulate}
    try:
        return handlers[args.command](args)
    except BiasAuditError as exc:
        _report_error(exc, VALIDATION_ERROR)
        return VALIDATION_ERROR
    except OSError as exc:
        _report_error(exc, IO_ERROR)
        return IO_ERROR
    except (ValueError, KeyError) as exc:
        _report_error(exc, VALIDATION_ERROR)
        return VALIDATION_ERROR


def _report_error(exc: Exception, code: int) -> None:
    payload = {
        "error": {
            "type": type(exc).__name__,
            "message": str(exc),
            "exit_code": code,
        }
    }
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def entry_point() -> None:
    sys.exit(main())
