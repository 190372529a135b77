"""Aggregation: corrected bounds arithmetic and verdict counting."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from probcert.aggregate import (
    SIL_KAPPA_PRESETS,
    aggregate,
    bounds_from_observed,
    clopper_pearson,
)
from probcert.assessor import Observation, PointAssessment
from probcert.errors import EstimationError


def verdict(obs: Observation) -> PointAssessment:
    return PointAssessment(
        observation=obs,
        samples_used=100,
        failures=0,
        final_left_tail=0.01,
        final_right_tail=1.0,
        center_label=0,
    )


class TestBoundsArithmetic:
    def test_frozen_085_001(self):
        lower, upper = bounds_from_observed(0.85, 0.01)
        assert lower == pytest.approx(float(Fraction(84, 101)), abs=1e-12)
        assert upper == pytest.approx(float(Fraction(85, 99)), abs=1e-12)

    def test_frozen_0842_001(self):
        lower, upper = bounds_from_observed(0.842, 0.01)
        assert lower == pytest.approx(0.823762, abs=5e-7)
        assert upper == pytest.approx(0.850505, abs=5e-7)

    def test_perfect_rate_clamps_upper(self):
        lower, upper = bounds_from_observed(1.0, 0.05)
        assert lower == pytest.approx(0.95 / 1.05, abs=1e-15)
        assert upper == 1.0

    def test_zero_rate(self):
        assert bounds_from_observed(0.0, 0.05) == (0.0, 0.0)

    def test_small_rate_clamps_lower(self):
        lower, upper = bounds_from_observed(0.03, 0.05)
        assert lower == 0.0
        assert upper == pytest.approx(0.03 / 0.95, abs=1e-15)

    @given(
        p_w=st.floats(min_value=0.0, max_value=1.0),
        alpha=st.floats(min_value=1e-6, max_value=0.499),
    )
    @settings(max_examples=200, deadline=None)
    def test_bounds_bracket_p_w(self, p_w, alpha):
        lower, upper = bounds_from_observed(p_w, alpha)
        assert 0.0 <= lower <= p_w <= upper <= 1.0

    @given(
        a=st.floats(min_value=0.0, max_value=1.0),
        b=st.floats(min_value=0.0, max_value=1.0),
        alpha=st.floats(min_value=1e-6, max_value=0.499),
    )
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_p_w(self, a, b, alpha):
        lo_a, up_a = bounds_from_observed(min(a, b), alpha)
        lo_b, up_b = bounds_from_observed(max(a, b), alpha)
        assert lo_a <= lo_b and up_a <= up_b

    @given(
        p_w=st.floats(min_value=0.0, max_value=1.0),
        a1=st.floats(min_value=1e-6, max_value=0.499),
        a2=st.floats(min_value=1e-6, max_value=0.499),
    )
    @settings(max_examples=200, deadline=None)
    def test_width_grows_with_alpha(self, p_w, a1, a2):
        lo1, up1 = bounds_from_observed(p_w, min(a1, a2))
        lo2, up2 = bounds_from_observed(p_w, max(a1, a2))
        assert up2 - lo2 >= up1 - lo1 - 1e-15

    def test_alpha_to_zero_collapses_to_p_w(self):
        for p_w in (0.0, 0.3, 0.97, 1.0):
            lower, upper = bounds_from_observed(p_w, 1e-9)
            assert lower == pytest.approx(p_w, abs=5e-9)
            assert upper == pytest.approx(p_w, abs=5e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            bounds_from_observed(1.2, 0.05)
        with pytest.raises(ValueError):
            bounds_from_observed(0.5, 0.0)
        with pytest.raises(ValueError):
            bounds_from_observed(0.5, 0.5)


class TestClopperPearson:
    def test_against_statsmodels(self):
        """Cross-library agreement with an unrelated implementation."""
        from statsmodels.stats.proportion import proportion_confint

        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(1, 5000))
            k = int(rng.integers(0, n + 1))
            alpha = float(rng.uniform(0.005, 0.2))
            want = proportion_confint(k, n, alpha=alpha, method="beta")
            got = clopper_pearson(k, n, alpha)
            assert got[0] == pytest.approx(want[0], abs=1e-12)
            assert got[1] == pytest.approx(want[1], abs=1e-12)

    def test_edge_closures(self):
        lo, hi = clopper_pearson(0, 50, 0.05)
        assert lo == 0.0 and 0 < hi < 0.1
        lo, hi = clopper_pearson(50, 50, 0.05)
        assert hi == 1.0 and 0.9 < lo < 1.0

    def test_brackets_point_estimate(self):
        rng = np.random.default_rng(6)
        for _ in range(25):
            n = int(rng.integers(1, 2000))
            k = int(rng.integers(0, n + 1))
            lo, hi = clopper_pearson(k, n, 0.05)
            assert lo <= k / n <= hi


class TestAggregate:
    def test_frozen_84_16(self):
        results = [verdict(Observation.W1)] * 84 + [verdict(Observation.W0)] * 16
        est = aggregate(results, alpha=0.01)
        assert (est.n_prime, est.k_prime, est.inconclusive) == (100, 84, 0)
        assert est.p_w == pytest.approx(0.84, abs=1e-15)
        assert est.lower_bound == pytest.approx(float(Fraction(83, 101)), abs=1e-12)
        assert est.upper_bound == pytest.approx(float(Fraction(84, 99)), abs=1e-12)
        assert est.conservative_p_w == pytest.approx(0.84, abs=1e-15)

    def test_inconclusive_excluded_but_counted(self):
        results = (
            [verdict(Observation.W1)] * 5
            + [verdict(Observation.W0)] * 5
            + [verdict(Observation.INCONCLUSIVE)] * 10
        )
        est = aggregate(results, alpha=0.05)
        assert (est.n_prime, est.k_prime, est.inconclusive) == (10, 5, 10)
        assert est.p_w == 0.5
        assert est.conservative_p_w == 0.25

    def test_composed_interval_contains_plain_interval(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            n = int(rng.integers(1, 500))
            k = int(rng.integers(0, n + 1))
            results = [verdict(Observation.W1)] * k + [verdict(Observation.W0)] * (n - k)
            est = aggregate(results, alpha=0.05)
            assert est.composed_lower <= est.lower_bound + 1e-15
            assert est.composed_upper >= est.upper_bound - 1e-15
            assert est.p_w_interval_lower <= est.p_w <= est.p_w_interval_upper

    def test_all_inconclusive_raises(self):
        with pytest.raises(EstimationError, match="no decided"):
            aggregate([verdict(Observation.INCONCLUSIVE)] * 4, alpha=0.05)

    def test_empty_raises(self):
        with pytest.raises(EstimationError):
            aggregate([], alpha=0.05)

    def test_estimate_roundtrips_as_dict(self):
        est = aggregate([verdict(Observation.W1)] * 3, alpha=0.05)
        d = est.as_dict()
        assert d["n_prime"] == 3 and d["p_w"] == 1.0
        assert d["upper_bound"] == 1.0


class TestPresets:
    def test_ladder(self):
        assert SIL_KAPPA_PRESETS == {1: 0.1, 2: 0.01, 3: 0.001, 4: 0.0001, 5: 0.00001}
