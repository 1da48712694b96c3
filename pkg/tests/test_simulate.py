import math

import numpy as np
import pytest

from biasaudit import (
    BiasInterpolation,
    MismatchedSpecsError,
    ScenarioSpec,
    accuracy_metrics,
    dsprites_scenario,
    interpolate,
    per_class_effect_sizes,
    sample_records,
    skewsize,
    stereotype_scenario,
)
from biasaudit.simulate import (
    DSPRITES_AFFECTED_CLASS,
    DSPRITES_AFFECTED_SUBGROUP,
    DSPRITES_CLASSES,
    DSPRITES_SUBGROUPS,
)


def tiny_spec(cells=None, n_per_cell=5):
    cells = cells or {
        ("doctor", "female"): {"doctor": 1.0},
        ("doctor", "male"): {"doctor": 1.0},
    }
    return ScenarioSpec(
        classes=("doctor",),
        subgroups=("female", "male"),
        prediction_space=("doctor", "nurse"),
        cell_distributions=cells,
        n_per_cell=n_per_cell,
    )


class TestScenarioSpec:
    def test_validates_probabilities(self):
        with pytest.raises(ValueError, match="sum"):
            tiny_spec({("doctor", "female"): {"doctor": 0.6},
                       ("doctor", "male"): {"doctor": 1.0}})
        with pytest.raises(ValueError, match="negative"):
            tiny_spec({("doctor", "female"): {"doctor": 1.5, "nurse": -0.5},
                       ("doctor", "male"): {"doctor": 1.0}})
        with pytest.raises(ValueError, match="missing"):
            ScenarioSpec(
                classes=("doctor",),
                subgroups=("female", "male"),
                prediction_space=("doctor",),
                cell_distributions={("doctor", "female"): {"doctor": 1.0}},
                n_per_cell=5,
            )
        with pytest.raises(ValueError, match="prediction space"):
            tiny_spec({("doctor", "female"): {"surgeon": 1.0},
                       ("doctor", "male"): {"doctor": 1.0}})

    def test_json_round_trip(self):
        spec = stereotype_scenario("M2")
        again = ScenarioSpec.from_json(spec.to_json())
        assert again == spec


class TestInterpolate:
    def _pair(self):
        base = tiny_spec({("doctor", "female"): {"doctor": 1.0},
                          ("doctor", "male"): {"doctor": 1.0}})
        stereo = tiny_spec({("doctor", "female"): {"doctor": 0.5, "nurse": 0.5},
                            ("doctor", "male"): {"doctor": 1.0}})
        return base, stereo

    def test_endpoints_exact(self):
        base, stereo = self._pair()
        assert interpolate(BiasInterpolation(base, stereo, 0.0)) == base
        assert interpolate(BiasInterpolation(base, stereo, 1.0)) == stereo

    def test_convex_mixture(self):
        base, stereo = self._pair()
        mixed = interpolate(BiasInterpolation(base, stereo, 0.5))
        cell = mixed.cell_distributions[("doctor", "female")]
        assert cell["doctor"] == pytest.approx(0.75, abs=1e-15)
        assert cell["nurse"] == pytest.approx(0.25, abs=1e-15)

    def test_cellwise_linear(self):
        base, stereo = self._pair()
        for lam in np.linspace(0, 1, 7):
            mixed = interpolate(BiasInterpolation(base, stereo, float(lam)))
            cell = mixed.cell_distributions[("doctor", "female")]
            assert cell["doctor"] == pytest.approx(1 - 0.5 * lam, abs=1e-12)
            assert sum(cell.values()) == pytest.approx(1.0, abs=1e-12)

    def test_mismatched_specs(self):
        base, _ = self._pair()
        other = ScenarioSpec(
            classes=("doctor",),
            subgroups=("female", "male"),
            prediction_space=("doctor", "surgeon"),
            cell_distributions={("doctor", "female"): {"doctor": 1.0},
                                ("doctor", "male"): {"doctor": 1.0}},
            n_per_cell=5,
        )
        with pytest.raises(MismatchedSpecsError):
            interpolate(BiasInterpolation(base, other, 0.5))

    def test_strength_out_of_range(self):
        base, stereo = self._pair()
        with pytest.raises(ValueError):
            interpolate(BiasInterpolation(base, stereo, 1.5))


class TestSampleRecords:
    def test_degenerate_distribution(self):
        records = sample_records(tiny_spec(n_per_cell=5), seed=3)
        assert len(records) == 10
        assert all(r.prediction == "doctor" for r in records)

    def test_determinism(self):
        spec = stereotype_scenario("M2", n_per_cell=50)
        assert sample_records(spec, seed=11) == sample_records(spec, seed=11)

    def test_different_seeds_differ(self):
        spec = stereotype_scenario("M2", n_per_cell=200)
        assert sample_records(spec, seed=1) != sample_records(spec, seed=2)

    def test_empirical_frequency(self):
        spec = tiny_spec(
            {("doctor", "female"): {"doctor": 0.5, "nurse": 0.5},
             ("doctor", "male"): {"doctor": 0.5, "nurse": 0.5}},
            n_per_cell=10000,
        )
        records = sample_records(spec, seed=123)
        female = [r for r in records if r.subgroup == "female"]
        share = sum(r.prediction == "doctor" for r in female) / len(female)
        assert 0.47 <= share <= 0.53  # three-sigma band for n=10000

    def test_cell_sizes_exact(self):
        spec = dsprites_scenario(0.5, n_per_cell=20)
        records = sample_records(spec, seed=0)
        assert len(records) == 20 * 9
        cells = {}
        for r in records:
            cells[(r.ground_truth, r.subgroup)] = cells.get((r.ground_truth, r.subgroup), 0) + 1
        assert set(cells.values()) == {20}

    def test_ids_unique(self):
        records = sample_records(dsprites_scenario(1.0, n_per_cell=10), seed=4)
        ids = [r.example_id for r in records]
        assert len(set(ids)) == len(ids)


class TestDsprites:
    def test_shape(self):
        spec = dsprites_scenario(0.0)
        assert spec.classes == DSPRITES_CLASSES
        assert spec.subgroups == DSPRITES_SUBGROUPS
        assert spec.n_per_cell == 5000

    def test_unbiased_endpoint_cells(self):
        spec = dsprites_scenario(0.0)
        for cls in spec.classes:
            for grp in spec.subgroups:
                cell = spec.cell_distributions[(cls, grp)]
                assert cell[cls] == pytest.approx(0.99)
                assert sum(cell.values()) == pytest.approx(1.0)

    def test_biased_endpoint_cell(self):
        spec = dsprites_scenario(1.0)
        cell = spec.cell_distributions[(DSPRITES_AFFECTED_CLASS, DSPRITES_AFFECTED_SUBGROUP)]
        assert cell == {"class_0": 0.5, "class_2": 0.5}
        untouched = spec.cell_distributions[(DSPRITES_AFFECTED_CLASS, "red")]
        assert untouched[DSPRITES_AFFECTED_CLASS] == pytest.approx(0.99)

    def test_effect_monotone_in_strength(self):
        # smaller n than the acceptance run keeps this module test quick
        previous = -1.0
        for lam in (0.0, 0.33, 0.66, 1.0):
            records = sample_records(dsprites_scenario(lam, n_per_cell=1500), seed=77)
            effects = {e.class_label: e for e in per_class_effect_sizes(records)}
            affected = effects[DSPRITES_AFFECTED_CLASS].effect_size
            assert affected > previous - 0.02
            previous = affected
            for cls in DSPRITES_CLASSES:
                if cls != DSPRITES_AFFECTED_CLASS:
                    assert effects[cls].effect_size < 0.05
        assert previous > 0.5


class TestStereotype:
    def test_doctor_cells_match_fixture(self):
        m1 = stereotype_scenario("M1")
        m2 = stereotype_scenario("M2")
        for grp in ("female", "male"):
            assert m1.cell_distributions[("doctor", grp)] == {
                "doctor": 0.77, "nurse": 0.115, "surgeon": 0.115,
            }
        assert m2.cell_distributions[("doctor", "female")] == {"doctor": 0.77, "nurse": 0.23}
        assert m2.cell_distributions[("doctor", "male")] == {"doctor": 0.77, "surgeon": 0.23}

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            stereotype_scenario("M3")

    def test_expected_pattern_in_sampled_audit(self):
        seed = 2024
        m1_records = sample_records(stereotype_scenario("M1"), seed=seed)
        m2_records = sample_records(stereotype_scenario("M2"), seed=seed)

        def doctor_accuracy(records):
            doctors = [r for r in records if r.ground_truth == "doctor"]
            return accuracy_metrics(doctors).overall

        assert abs(doctor_accuracy(m1_records) - doctor_accuracy(m2_records)) < 0.01
        m1_effects = {e.class_label: e for e in per_class_effect_sizes(m1_records)}
        m2_effects = {e.class_label: e for e in per_class_effect_sizes(m2_records)}
        assert m2_effects["doctor"].effect_size > 0.4
        assert m1_effects["doctor"].effect_size < 0.05
        m1_skew = skewsize(per_class_effect_sizes(m1_records)).value
        m2_skew = skewsize(per_class_effect_sizes(m2_records)).value
        assert m1_skew > m2_skew
