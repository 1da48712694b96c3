"""
Auditing a prediction log file
==============================

End-to-end on files: write a small open-vocabulary prediction log, a
synonym map for its free-text outputs, then audit it through the same path
the command-line tool uses. The equivalent shell session:

    bias-audit audit --input preds.csv --label-col gt --pred-col pred \
        --group-col gender --synonyms synonyms.json --mev 5 --out report.json
    bias-audit simulate --scenario stereotype --variant M2 --seed 1 --out m2.csv
    bias-audit compare m1.csv m2.csv --mev-sweep 2..6
"""

import csv
import json
import tempfile
from pathlib import Path

from biasaudit import (
    CanonicalizationRules,
    ColumnSpec,
    audit_records,
    load_synonym_map,
    read_records,
    render_report,
    validate_dataset,
)

workdir = Path(tempfile.mkdtemp(prefix="biasaudit-demo-"))

# A log from a vision-language model asked "what is this person's
# occupation?": free-text predictions, one row per image.
rows = (
    [("lawyer", "A lawyer", "female")] * 18
    + [("lawyer", "The person is a lawyer.", "female")] * 6
    + [("lawyer", "paralegal", "female")] * 16
    + [("lawyer", "attorney", "male")] * 30
    + [("lawyer", "judge", "male")] * 10
    + [("doctor", "doctor", "female")] * 25
    + [("doctor", "nurse", "female")] * 15
    + [("doctor", "doctor", "male")] * 28
    + [("doctor", "surgeon", "male")] * 12
    + [("scientist", "scientist", "female")] * 34
    + [("scientist", "chemist", "female")] * 6
    + [("scientist", "scientist", "male")] * 33
    + [("scientist", "chemist", "male")] * 7
)
log_path = workdir / "preds.csv"
with open(log_path, "w", newline="") as fh:
    writer = csv.writer(fh)
    writer.writerow(["gt", "pred", "gender"])
    writer.writerows(rows)

# Sentence-shaped outputs need a synonym map to count as correct.
synonyms = {
    "a lawyer": "lawyer",
    "the person is a lawyer": "lawyer",
    "attorney": "lawyer",
}
synonyms_path = workdir / "synonyms.json"
synonyms_path.write_text(json.dumps(synonyms, indent=2))

records = read_records(
    log_path, columns=ColumnSpec(label="gt", prediction="pred", group="gender")
)
print(validate_dataset(records).warnings or "dataset structure: no warnings")

rules = CanonicalizationRules(
    strip_punctuation=True, synonym_map=load_synonym_map(synonyms_path)
)
report = audit_records(records, rules=rules, mev_threshold=5.0)
print(render_report(report, "markdown"))

# Rerunning without the synonym map shows why post-processing matters:
# sentence-form answers count as errors and every statistic moves.
raw = audit_records(records, mev_threshold=5.0)
print(f"overall accuracy with map: {report.aggregate['overall_accuracy']:.3f}  "
      f"without: {raw.aggregate['overall_accuracy']:.3f}")
print(f"SkewSize with map: {report.aggregate['skewsize']:+.3f}  "
      f"without: {raw.aggregate['skewsize']:+.3f}")
print(f"\nartifacts in {workdir}")
