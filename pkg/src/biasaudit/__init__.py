"""Distributional bias audits for classifier prediction logs.

The pipeline: read prediction records (ingest), cross-tabulate each
ground-truth class by subgroup x predicted label and measure the association
(contingency), aggregate per-class effect sizes into SkewSize alongside
accuracy and DP/EO baselines (metrics), and emit a deterministic report
(report). A seeded simulator (simulate) provides synthetic biased
classifiers with known structure for validation.
"""

from .contingency import (
    ContingencyTable,
    ExpectedTable,
    MevFilterOutcome,
    apply_mev_filter,
    build_table,
    chi_square,
    cramers_v,
    degrees_of_freedom,
    expected_frequencies,
    phi_coefficient,
)
from .errors import (
    AllColumnsRemovedError,
    BiasAuditError,
    EmptyFileError,
    EmptyInputError,
    MalformedRowError,
    MismatchedSpecsError,
    MissingColumnError,
    NoRecordsError,
    OutOfRangeError,
    SingleSubgroupError,
    TooFewClassesError,
)
from .ingest import (
    EMPTY_PREDICTION,
    CanonicalizationRules,
    ColumnSpec,
    PredictionRecord,
    ValidationReport,
    canonicalize,
    canonicalize_records,
    group_by_class,
    load_synonym_map,
    read_records,
    validate_dataset,
    write_records,
)
from .metrics import (
    BAND_EDGES,
    BAND_NAMES,
    AccuracySummary,
    ClassEffect,
    DisparitySummary,
    FairnessSummary,
    SkewSizeResult,
    accuracy_metrics,
    classify_band,
    demographic_parity,
    equalized_odds,
    fairness_summary,
    fisher_pearson_skewness,
    per_class_effect_sizes,
    skewsize,
)
from .report import AuditReport, audit_records, canonical_json, render_report, validate_report
from .simulate import (
    BiasInterpolation,
    ScenarioSpec,
    dsprites_scenario,
    interpolate,
    sample_records,
    stereotype_scenario,
)

__version__ = "0.1.0"
