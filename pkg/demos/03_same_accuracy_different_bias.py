"""
Two models, same accuracy, different bias
=========================================

The motivating comparison: two synthetic occupation classifiers that agree
on accuracy for the "doctor" class but disagree on *where* the errors go.
Model variant M1 spreads its doctor mistakes over nurse/surgeon identically
for both subgroups; M2 sends female doctors to "nurse" and male doctors to
"surgeon". Accuracy, worst-group accuracy and the gap cannot tell them
apart; the per-class effect size and SkewSize can.
"""

from biasaudit import (
    accuracy_metrics,
    audit_records,
    per_class_effect_sizes,
    sample_records,
    skewsize,
    stereotype_scenario,
)

SEED = 1
N_PER_CELL = 1000

records = {}
for variant in ("M1", "M2"):
    spec = stereotype_scenario(variant, n_per_cell=N_PER_CELL)
    records[variant] = sample_records(spec, SEED)

print("doctor class only:")
print(f"{'variant':>8} | {'accuracy':>8} {'worst':>8} {'gap':>8} {'effect':>8}")
print("-" * 48)
for variant, recs in records.items():
    doctors = [r for r in recs if r.ground_truth == "doctor"]
    acc = accuracy_metrics(doctors)
    effect = next(
        e.effect_size
        for e in per_class_effect_sizes(recs)
        if e.class_label == "doctor"
    )
    print(f"{variant:>8} | {acc.overall:>8.3f} {acc.worst_group:>8.3f} "
          f"{acc.gap:>8.3f} {effect:>8.3f}")

# Identical accuracy columns; the effect-size column separates the models.

print("\nwhole model, aggregated:")
for variant, recs in records.items():
    result = skewsize(per_class_effect_sizes(recs))
    print(f"  SkewSize({variant}) = {result.value:+.3f}  "
          f"({result.classes_used} classes; higher = less biased)")

# The full audit report carries all of this at once: per-class effect
# sizes with band labels, the accuracy family, DP/EO, and SkewSize.
report = audit_records(records["M2"], mev_threshold=5.0)
print("\nM2 audit aggregate:", {
    k: round(v, 4) if isinstance(v, float) else v
    for k, v in report.aggregate.items()
})
print("band histogram:", report.band_histogram)
