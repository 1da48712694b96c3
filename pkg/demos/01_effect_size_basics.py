"""
Effect sizes on contingency tables
==================================

The building block of the audit: cross-tabulate subgroup x predicted label
for one ground-truth class, then measure how strongly the subgroup is
associated with what the model predicts.
"""

from biasaudit import (
    apply_mev_filter,
    build_table,
    chi_square,
    classify_band,
    cramers_v,
    expected_frequencies,
    phi_coefficient,
)

# Suppose the ground-truth class is "doctor". Each pair is
# (subgroup, what the model predicted for one image of a doctor).
pairs = (
    [("female", "doctor")] * 50 + [("female", "nurse")] * 50
    + [("male", "doctor")] * 50 + [("male", "surgeon")] * 50
)
table = build_table(pairs)
print("rows:", table.row_labels)
print("cols:", table.col_labels)
print("counts:\n", table.counts)

# Both subgroups are correct half of the time, so accuracy metrics see no
# difference. But the errors go to different places: female doctors become
# nurses, male doctors become surgeons.
print("\nexpected under independence:\n", expected_frequencies(table).values)
print("chi-square:", chi_square(table))

# Cramer's V rescales chi-square into [0, 1]: 0 means the prediction
# distribution is identical across subgroups, 1 means the subgroup fully
# determines the prediction.
v = cramers_v(table)
print("Cramer's V:", v, "->", classify_band(v), "effect")

# The phi coefficient is the 2x2 special case (they coincide there).
small = build_table([("a", "x")] * 30 + [("a", "y")] * 10
                    + [("b", "x")] * 10 + [("b", "y")] * 30)
print("\n2x2 table:  V =", cramers_v(small), " phi =", phi_coefficient(small))

# Open-vocabulary models produce noisy one-off predictions. Columns whose
# expected counts are tiny mostly carry sampling noise, so the audit can
# drop them before computing the statistic (the default threshold is 5).
noisy = build_table(pairs + [("female", "astronaut"), ("male", "pirate")])
outcome = apply_mev_filter(noisy, threshold=5.0)
print("\nafter expected-count filtering:")
print("  kept columns:   ", outcome.kept.col_labels)
print("  removed columns:", [label for label, _ in outcome.removed_columns])
print("  V on kept table:", cramers_v(outcome.kept))
