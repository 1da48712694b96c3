"""Seeded generators of synthetic biased-classifier prediction logs.

Instead of training models with manipulated data, scenarios directly
parameterize the categorical prediction distribution a biased classifier
would emit in each (class, subgroup) cell, and sample from it with a
deterministic generator. This gives desk-scale ground truth with known bias
structure: the dsprites-style scenario confuses one class under one
subgroup, the stereotype scenario routes error mass to different labels per
subgroup while holding accuracy fixed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import MismatchedSpecsError
from .ingest import PredictionRecord

GENERATOR_NAME = "numpy.random.Generator(PCG64)"


@dataclass(frozen=True)
class ScenarioSpec:
    """A synthetic classifier: one categorical output distribution per cell.

    ``cell_distributions`` maps (class, subgroup) to {label: probability};
    probabilities are non-negative, sum to 1 within 1e-9 per cell, and use
    labels from ``prediction_space``. Zero-probability entries are dropped at
    construction so equal scenarios compare equal.
    """

    classes: tuple[str, ...]
    subgroups: tuple[str, ...]
    prediction_space: tuple[str, ...]
    cell_distributions: dict[tuple[str, str], dict[str, float]]
    n_per_cell: int

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "subgroups", tuple(self.subgroups))
        object.__setattr__(self, "prediction_space", tuple(self.prediction_space))
        if self.n_per_cell < 1:
            raise ValueError("n_per_cell must be at least 1")
        space = set(self.prediction_space)
        cleaned = {}
        for cls in self.classes:
            for grp in self.subgroups:
                key = (cls, grp)
                if key not in self.cell_distributions:
                    raise ValueError(f"missing distribution for cell {key!r}")
                dist = self.cell_distributions[key]
                unknown = set(dist) - space
                if unknown:
                    raise ValueError(
                        f"cell {key!r} uses labels outside the prediction space: {sorted(unknown)}"
                    )
                if any(p < 0 for p in dist.values()):
                    raise ValueError(f"cell {key!r} has negative probabilities")
                total = sum(dist.values())
                if abs(total - 1.0) > 1e-9:
                    raise ValueError(f"cell {key!r} probabilities sum to {total}, not 1")
                cleaned[key] = {label: p for label, p in dist.items() if p != 0.0}
        object.__setattr__(self, "cell_distributions", cleaned)

    def to_dict(self) -> dict:
        cells: dict[str, dict[str, dict[str, float]]] = {}
        for (cls, grp), dist in self.cell_distributions.items():
            cells.setdefault(cls, {})[grp] = dict(dist)
        return {
            "classes": list(self.classes),
            "subgroups": list(self.subgroups),
            "prediction_space": list(self.prediction_space),
            "n_per_cell": self.n_per_cell,
            "cell_distributions": cells,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioSpec":
        cells = {
            (c, g): dict(dist)
            for c, by_group in data["cell_distributions"].items()
            for g, dist in by_group.items()
        }
        return cls(
            classes=tuple(data["classes"]),
            subgroups=tuple(data["subgroups"]),
            prediction_space=tuple(data["prediction_space"]),
            cell_distributions=cells,
            n_per_cell=int(data["n_per_cell"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioSpec":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BiasInterpolation:
    """Convex mixture between an unbiased and a fully biased scenario."""

    base: ScenarioSpec
    stereo: ScenarioSpec
    strength: float


def interpolate(mix: BiasInterpolation) -> ScenarioSpec:
    """Blend two scenarios cell by cell: (1 - strength) * base + strength * stereo.

    Exact at the endpoints; renormalizes a cell only if floating-point drift
    exceeds 1e-12.
    """
    base, stereo, lam = mix.base, mix.stereo, mix.strength
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"strength must be in [0, 1], got {lam}")
    if (
        base.classes != stereo.classes
        or base.subgroups != stereo.subgroups
        or base.prediction_space != stereo.prediction_space
    ):
        raise MismatchedSpecsError(
            "base and stereo scenarios must share classes, subgroups and prediction space"
        )
    cells = {}
    for key, base_dist in base.cell_distributions.items():
        stereo_dist = stereo.cell_distributions[key]
        labels = list(base_dist)
        labels += [l for l in stereo_dist if l not in base_dist]
        mixed = {
            label: (1.0 - lam) * base_dist.get(label, 0.0) + lam * stereo_dist.get(label, 0.0)
            for label in labels
        }
        mixed = {label: p for label, p in mixed.items() if p != 0.0}
        total = sum(mixed.values())
        if abs(total - 1.0) > 1e-12:
            mixed = {label: p / total for label, p in mixed.items()}
        cells[key] = mixed
    return ScenarioSpec(
        classes=base.classes,
        subgroups=base.subgroups,
        prediction_space=base.prediction_space,
        cell_distributions=cells,
        n_per_cell=base.n_per_cell,
    )


def sample_records(spec: ScenarioSpec, seed: int) -> list[PredictionRecord]:
    """Draw exactly n_per_cell i.i.d. predictions for every cell.

    A single seeded PCG64 stream is consumed in a fixed cell order (classes,
    then subgroups, in spec order), so identical (spec, seed) inputs produce
    identical record lists.
    """
    rng = np.random.default_rng(seed)
    records = []
    counter = 0
    for cls in spec.classes:
        for grp in spec.subgroups:
            dist = spec.cell_distributions[(cls, grp)]
            labels = list(dist)
            cumulative = np.cumsum([dist[l] for l in labels])
            cumulative[-1] = 1.0  # guard against rounding shortfall
            draws = np.searchsorted(cumulative, rng.random(spec.n_per_cell), side="right")
            for idx in draws:
                records.append(
                    PredictionRecord(
                        ground_truth=cls,
                        prediction=labels[idx],
                        subgroup=grp,
                        example_id=f"sim-{counter:07d}",
                    )
                )
                counter += 1
    return records


DSPRITES_CLASSES = ("class_0", "class_1", "class_2")
DSPRITES_SUBGROUPS = ("red", "green", "blue")
DSPRITES_AFFECTED_CLASS = "class_1"
DSPRITES_AFFECTED_SUBGROUP = "green"


def dsprites_scenario(strength: float, n_per_cell: int = 5000) -> ScenarioSpec:
    """Three shape classes under three colors, with a color-specific confusion.

    At strength 0 every cell is near-perfect (0.99 correct, residue split
    over the other classes). At strength 1 the affected class ("class_1")
    under the "green" subgroup is predicted as the other two classes in
    equal halves; all other cells are unchanged, so only the affected class
    should show a large effect size.
    """

    def near_perfect(cls):
        others = [c for c in DSPRITES_CLASSES if c != cls]
        dist = {cls: 0.99}
        for other in others:
            dist[other] = 0.005
        return dist

    base_cells = {
        (cls, grp): near_perfect(cls)
        for cls in DSPRITES_CLASSES
        for grp in DSPRITES_SUBGROUPS
    }
    stereo_cells = dict(base_cells)
    stereo_cells[(DSPRITES_AFFECTED_CLASS, DSPRITES_AFFECTED_SUBGROUP)] = {
        "class_0": 0.5,
        "class_2": 0.5,
    }
    def make(cells):
        return ScenarioSpec(
            classes=DSPRITES_CLASSES,
            subgroups=DSPRITES_SUBGROUPS,
            prediction_space=DSPRITES_CLASSES,
            cell_distributions=cells,
            n_per_cell=n_per_cell,
        )

    return interpolate(BiasInterpolation(make(base_cells), make(stereo_cells), strength))


STEREOTYPE_CLASSES = ("writer", "doctor", "biologist")
STEREOTYPE_SUBGROUPS = ("female", "male")
STEREOTYPE_PREDICTION_SPACE = STEREOTYPE_CLASSES + (
    "editor",
    "composer",
    "philosopher",
    "nurse",
    "surgeon",
    "teacher",
    "scientist",
    "banker",
)

# Fixture probabilities. M1 splits each class's error mass identically
# across subgroups; M2 routes it to subgroup-stereotyped labels. Doctor
# accuracy is 0.77 in every cell of both variants, so the variants are
# indistinguishable by accuracy on that class while M2 carries a large
# subgroup/prediction association.
_STEREOTYPE_CELLS = {
    "M1": {
        "writer": {
            "female": {"writer": 0.88, "editor": 0.04, "composer": 0.04, "philosopher": 0.04},
            "male": {"writer": 0.88, "editor": 0.04, "composer": 0.04, "philosopher": 0.04},
        },
        "doctor": {
            "female": {"doctor": 0.77, "nurse": 0.115, "surgeon": 0.115},
            "male": {"doctor": 0.77, "nurse": 0.115, "surgeon": 0.115},
        },
        "biologist": {
            "female": {"biologist": 0.02, "teacher": 0.98 / 3, "scientist": 0.98 / 3, "banker": 0.98 / 3},
            "male": {"biologist": 0.02, "teacher": 0.98 / 3, "scientist": 0.98 / 3, "banker": 0.98 / 3},
        },
    },
    "M2": {
        "writer": {
            "female": {"writer": 0.14, "editor": 0.86},
            "male": {"writer": 0.14, "composer": 0.43, "philosopher": 0.43},
        },
        "doctor": {
            "female": {"doctor": 0.77, "nurse": 0.23},
            "male": {"doctor": 0.77, "surgeon": 0.23},
        },
        "biologist": {
            "female": {"biologist": 0.15, "teacher": 0.85},
            "male": {"biologist": 0.15, "scientist": 0.425, "banker": 0.425},
        },
    },
}


def stereotype_scenario(variant: str, n_per_cell: int = 1000) -> ScenarioSpec:
    """Occupation prediction with gendered error routing.

    ``M1`` distributes each class's errors identically for both subgroups
    (no association between subgroup and prediction); ``M2`` sends the same
    error mass to different labels per subgroup (e.g. doctors misread as
    nurses for one subgroup and surgeons for the other), which leaves
    accuracy untouched but creates a strong per-class effect.
    """
    if variant not in _STEREOTYPE_CELLS:
        raise ValueError(f"unknown variant {variant!r}; expected 'M1' or 'M2'")
    cells = {
        (cls, grp): dict(dist)
        for cls, by_group in _STEREOTYPE_CELLS[variant].items()
        for grp, dist in by_group.items()
    }
    return ScenarioSpec(
        classes=STEREOTYPE_CLASSES,
        subgroups=STEREOTYPE_SUBGROUPS,
        prediction_space=STEREOTYPE_PREDICTION_SPACE,
        cell_distributions=cells,
        n_per_cell=n_per_cell,
    )
