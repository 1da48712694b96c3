"""The metric suite: per-class effect sizes, their skewness aggregate
(SkewSize), the accuracy family, and multi-class DP/EO baselines.

Effect sizes are computed per ground-truth class from the subgroup x
prediction contingency table; SkewSize is the Fisher-Pearson skewness of the
per-class effect-size distribution, with undefined (NaN) entries removed
first. Higher SkewSize means less bias.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .contingency import (
    apply_mev_filter,
    build_table,
    cramers_v,
    degrees_of_freedom,
)
from .errors import (
    AllColumnsRemovedError,
    EmptyInputError,
    NoRecordsError,
    OutOfRangeError,
    SingleSubgroupError,
    TooFewClassesError,
)
from .ingest import group_by_class

logger = logging.getLogger(__name__)

BAND_EDGES = (0.1, 0.3, 0.5)
BAND_NAMES = ("negligible", "small", "medium", "large")

SKEW_CONVENTIONS = ("moment", "eq4", "eq4_literal")
AGGREGATIONS = ("max", "mean")

EXCLUDE_DOF_ZERO = "dof_zero"
EXCLUDE_MEV_ALL_REMOVED = "mev_all_removed"
EXCLUDE_INSUFFICIENT_DATA = "insufficient_data"


@dataclass(frozen=True)
class ClassEffect:
    """Effect size of the subgroup/prediction association for one class.

    ``effect_size`` is NaN exactly when ``excluded`` is true, in which case
    ``exclusion_reason`` says why and ``band`` is None.
    """

    class_label: str
    effect_size: float
    dof: int
    n: int
    band: str | None
    excluded: bool
    exclusion_reason: str | None


@dataclass(frozen=True)
class SkewSizeResult:
    value: float
    classes_used: int
    classes_excluded: int


@dataclass(frozen=True)
class AccuracySummary:
    """Overall, per-subgroup and worst-subgroup accuracy, plus their gap."""

    overall: float
    per_group: dict[str, float]
    worst_group: float
    gap: float


@dataclass(frozen=True)
class DisparitySummary:
    """Per-class disparity gaps and their aggregate (max or mean)."""

    per_class: dict[str, float]
    aggregate: float
    aggregation: str


@dataclass(frozen=True)
class FairnessSummary:
    per_class_dp: dict[str, float]
    per_class_eo: dict[str, float]
    dp_aggregate: float
    eo_aggregate: float
    aggregation: str


def classify_band(effect_size: float) -> str:
    """Bucket an effect size: [0,0.1) negligible, [0.1,0.3) small,
    [0.3,0.5) medium, [0.5,1] large. Boundaries belong to the upper band."""
    if math.isnan(effect_size) or not 0.0 <= effect_size <= 1.0:
        raise OutOfRangeError(f"effect size {effect_size!r} outside [0, 1]")
    for edge, name in zip(BAND_EDGES, BAND_NAMES):
        if effect_size < edge:
            return name
    return BAND_NAMES[-1]


def per_class_effect_sizes(
    records,
    *,
    mev_threshold: float = 0.0,
    mev_rule: str = "min",
    min_class_count: int = 1,
) -> list[ClassEffect]:
    """Estimate the effect size for every ground-truth class.

    For each class: collect its (subgroup, prediction) pairs, cross-tabulate,
    filter low-expected-count prediction columns, and compute Cramer's V on
    what remains. Classes are excluded (effect size NaN) when the filter
    removes every column, when fewer than ``min_class_count`` instances
    survive it, or when the filtered table has zero degrees of freedom (a
    single subgroup or a single distinct prediction).
    """
    if not records:
        raise NoRecordsError("no records to audit")
    effects = []
    for class_label, pairs in group_by_class(records).items():
        effects.append(
            _effect_for_class(
                class_label,
                pairs,
                mev_threshold=mev_threshold,
                mev_rule=mev_rule,
                min_class_count=min_class_count,
            )
        )
    return effects


def _effect_for_class(
    class_label, pairs, *, mev_threshold, mev_rule, min_class_count
) -> ClassEffect:
    table = build_table(pairs)

    def excluded(reason, dof, n):
        return ClassEffect(
            class_label=class_label,
            effect_size=math.nan,
            dof=dof,
            n=n,
            band=None,
            excluded=True,
            exclusion_reason=reason,
        )

    try:
        outcome = apply_mev_filter(table, mev_threshold, rule=mev_rule)
    except AllColumnsRemovedError:
        return excluded(EXCLUDE_MEV_ALL_REMOVED, 0, table.total)
    kept = outcome.kept
    dof = degrees_of_freedom(kept)
    if kept.total < min_class_count:
        return excluded(EXCLUDE_INSUFFICIENT_DATA, dof, kept.total)
    if dof == 0:
        return excluded(EXCLUDE_DOF_ZERO, 0, kept.total)
    value = cramers_v(kept)
    return ClassEffect(
        class_label=class_label,
        effect_size=value,
        dof=dof,
        n=kept.total,
        band=classify_band(value),
        excluded=False,
        exclusion_reason=None,
    )


def fisher_pearson_skewness(values, convention: str = "moment") -> float:
    """Fisher-Pearson coefficient of skewness of a sample.

    ``moment`` (default) is g1 = m3 / m2^(3/2) with biased sample moments
    m_k = mean((x - mean(x))^k). ``eq4``/``eq4_literal`` leaves the sums
    unnormalized, sum(d^3) / (sum(d^2))^(3/2), which equals g1 / sqrt(n).
    Zero-variance samples (including a single value) return 0.0.
    """
    if convention not in SKEW_CONVENTIONS:
        raise ValueError(f"unknown skewness convention {convention!r}")
    vals = np.asarray(list(values), dtype=np.float64)
    if vals.size == 0:
        raise EmptyInputError("skewness of an empty sample is undefined")
    if np.isnan(vals).any():
        raise ValueError("undefined entries must be removed before computing skewness")
    # exact-constant check first: the computed mean of identical values can
    # carry rounding, turning zero variance into catastrophic cancellation
    if (vals == vals[0]).all():
        return 0.0
    deviations = vals - vals.mean()
    # rescale by the peak deviation (skewness is scale-invariant) so m2**1.5
    # cannot underflow for tiny-variance samples
    peak = float(np.abs(deviations).max())
    if peak == 0.0:
        return 0.0
    deviations = deviations / peak
    m2 = float((deviations**2).mean())
    m3 = float((deviations**3).mean())
    g1 = m3 / m2**1.5
    if convention == "moment":
        return g1
    return g1 / math.sqrt(vals.size)


def skewsize(effects, convention: str = "moment") -> SkewSizeResult:
    """Aggregate per-class effect sizes into a single scalar.

    Excluded (NaN) classes are dropped first; at least two defined values
    must remain. Higher values indicate less bias: a model whose rare large
    effect sizes sit in the right tail scores higher than one where a large
    share of classes is strongly associated with the subgroup.
    """
    defined = [e.effect_size for e in effects if not e.excluded]
    n_excluded = len(effects) - len(defined)
    if len(defined) < 2:
        raise TooFewClassesError(
            f"need at least 2 defined effect sizes, have {len(defined)} "
            f"({n_excluded} excluded)"
        )
    value = fisher_pearson_skewness(defined, convention)
    return SkewSizeResult(value=value, classes_used=len(defined), classes_excluded=n_excluded)


def accuracy_metrics(records) -> AccuracySummary:
    """Overall accuracy, per-subgroup accuracy, worst group and gap.

    A record is correct when its prediction string equals its ground-truth
    string; run canonicalization first if the predictions are free text.
    """
    if not records:
        raise NoRecordsError("no records to score")
    correct: dict[str, int] = {}
    total: dict[str, int] = {}
    n_correct = 0
    for r in records:
        total[r.subgroup] = total.get(r.subgroup, 0) + 1
        if r.prediction == r.ground_truth:
            correct[r.subgroup] = correct.get(r.subgroup, 0) + 1
            n_correct += 1
    per_group = {g: correct.get(g, 0) / t for g, t in total.items()}
    overall = n_correct / len(records)
    worst = min(per_group.values())
    return AccuracySummary(
        overall=overall, per_group=per_group, worst_group=worst, gap=overall - worst
    )


def _aggregate(values, aggregation: str) -> float:
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"unknown aggregation {aggregation!r}; expected 'max' or 'mean'")
    values = list(values)
    if aggregation == "max":
        return max(values)
    return sum(values) / len(values)


def _group_sizes(records) -> dict[str, int]:
    sizes: dict[str, int] = {}
    for r in records:
        sizes[r.subgroup] = sizes.get(r.subgroup, 0) + 1
    return sizes


def demographic_parity(records, aggregation: str = "max") -> DisparitySummary:
    """Per-class demographic parity gaps.

    Each ground-truth class is binarized (predicted-or-not) and its
    positive-prediction rate is computed over *all* records of each subgroup;
    the gap is the max rate minus the min rate across subgroups.
    """
    sizes = _group_sizes(records)
    if len(sizes) < 2:
        raise SingleSubgroupError("demographic parity needs at least two subgroups")
    classes: dict[str, None] = {}
    pred_count: dict[tuple[str, str], int] = {}
    for r in records:
        classes.setdefault(r.ground_truth)
        key = (r.subgroup, r.prediction)
        pred_count[key] = pred_count.get(key, 0) + 1
    per_class = {}
    for cls in classes:
        rates = [pred_count.get((g, cls), 0) / n for g, n in sizes.items()]
        per_class[cls] = max(rates) - min(rates)
    return DisparitySummary(
        per_class=per_class,
        aggregate=_aggregate(per_class.values(), aggregation),
        aggregation=aggregation,
    )


def equalized_odds(
    records, aggregation: str = "max", per_label: bool = False
) -> DisparitySummary:
    """Per-class equalized-odds gaps.

    Both prediction and ground truth are binarized per class. With the
    default ``per_label=False`` the gap is the global max minus min of the
    conditional positive-prediction rates over the whole
    (subgroup x binary-label) grid; with ``per_label=True`` rates are
    compared across subgroups separately for each binary label and the
    larger of the two gaps is taken. Cells with no records are skipped and
    logged.
    """
    sizes = _group_sizes(records)
    if len(sizes) < 2:
        raise SingleSubgroupError("equalized odds needs at least two subgroups")
    classes: dict[str, None] = {}
    gt_count: dict[tuple[str, str], int] = {}
    pred_count: dict[tuple[str, str], int] = {}
    both_count: dict[tuple[str, str], int] = {}
    for r in records:
        classes.setdefault(r.ground_truth)
        gt_count[(r.subgroup, r.ground_truth)] = gt_count.get((r.subgroup, r.ground_truth), 0) + 1
        pred_count[(r.subgroup, r.prediction)] = pred_count.get((r.subgroup, r.prediction), 0) + 1
        if r.prediction == r.ground_truth:
            both_count[(r.subgroup, r.ground_truth)] = (
                both_count.get((r.subgroup, r.ground_truth), 0) + 1
            )

    per_class = {}
    for cls in classes:
        positive_rates = []
        negative_rates = []
        for g, n in sizes.items():
            n_pos = gt_count.get((g, cls), 0)
            n_neg = n - n_pos
            if n_pos > 0:
                positive_rates.append(both_count.get((g, cls), 0) / n_pos)
            else:
                logger.debug("class %r: subgroup %r has no positive records", cls, g)
            if n_neg > 0:
                pred_in_neg = pred_count.get((g, cls), 0) - both_count.get((g, cls), 0)
                negative_rates.append(pred_in_neg / n_neg)
            else:
                logger.debug("class %r: subgroup %r has no negative records", cls, g)
        if per_label:
            gaps = [
                max(rates) - min(rates)
                for rates in (positive_rates, negative_rates)
                if len(rates) >= 2
            ]
            per_class[cls] = max(gaps) if gaps else 0.0
        else:
            cells = positive_rates + negative_rates
            per_class[cls] = max(cells) - min(cells) if len(cells) >= 2 else 0.0
    return DisparitySummary(
        per_class=per_class,
        aggregate=_aggregate(per_class.values(), aggregation),
        aggregation=aggregation,
    )


def fairness_summary(
    records, aggregation: str = "max", eo_per_label: bool = False
) -> FairnessSummary:
    """DP and EO per class plus their aggregates, in one structure."""
    dp = demographic_parity(records, aggregation)
    eo = equalized_odds(records, aggregation, per_label=eo_per_label)
    return FairnessSummary(
        per_class_dp=dp.per_class,
        per_class_eo=eo.per_class,
        dp_aggregate=dp.aggregate,
        eo_aggregate=eo.aggregate,
        aggregation=aggregation,
    )
