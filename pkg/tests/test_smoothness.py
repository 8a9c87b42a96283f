import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from avgsmooth.metric import FiniteMetric
from avgsmooth.smoothness import (
    LabeledSample,
    empirical_smoothness,
    holder_seminorm,
    point_slope,
)
from avgsmooth.synthetic import finite_scenario, sample, true_average_smoothness


def line(points):
    return FiniteMetric.from_points(points)


THREE = line([0.0, 0.5, 1.0])


class TestPointSlope:
    def test_linear_values(self):
        assert point_slope(THREE, [0.0, 0.5, 1.0], 1.0, 0) == 1.0

    def test_constant_values(self):
        for i in range(3):
            assert point_slope(THREE, [0.4, 0.4, 0.4], 1.0, i) == 0.0

    def test_fractional_exponent(self):
        # max(0.5/sqrt(0.5), 1/1) = max(0.7071..., 1.0) = 1.0
        got = point_slope(THREE, [0.0, 0.5, 1.0], 0.5, 0)
        assert got == pytest.approx(1.0, abs=1e-12)

    def test_zero_distance_pairs_excluded(self):
        m = line([0.0, 0.0, 1.0])
        # the duplicate at distance 0 does not create an infinite slope
        assert point_slope(m, [0.0, 1.0, 0.5], 1.0, 0) == 0.5

    def test_all_coincident_is_error(self):
        m = line([0.2, 0.2])
        with pytest.raises(ValueError, match="coincides"):
            point_slope(m, [0.0, 1.0], 1.0, 0)

    def test_beta_out_of_range(self):
        with pytest.raises(ValueError, match="beta"):
            point_slope(THREE, [0.0, 0.5, 1.0], 1.5, 0)


class TestEmpiricalSmoothness:
    def test_linear_values(self):
        prof = empirical_smoothness(THREE, [0.0, 0.5, 1.0], 1.0)
        assert np.array_equal(prof.per_point_slope, [1.0, 1.0, 1.0])
        assert prof.empirical_avg == 1.0

    def test_constant(self):
        prof = empirical_smoothness(THREE, [0.3, 0.3, 0.3], 1.0)
        assert prof.empirical_avg == 0.0

    def test_tent(self):
        prof = empirical_smoothness(THREE, [0.0, 1.0, 0.0], 1.0)
        assert np.array_equal(prof.per_point_slope, [2.0, 2.0, 2.0])
        assert prof.empirical_avg == 2.0

    def test_avg_below_max(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = line(rng.random(8))
            v = rng.random(8)
            prof = empirical_smoothness(m, v, 1.0)
            assert prof.empirical_avg <= prof.max_slope
            assert np.all(prof.per_point_slope >= 0)
            assert prof.empirical_avg == pytest.approx(
                np.mean(prof.per_point_slope), abs=0
            )


class TestHolderSeminorm:
    def test_linear(self):
        assert holder_seminorm(THREE, [0.0, 0.5, 1.0], 1.0) == 1.0

    def test_constant(self):
        assert holder_seminorm(THREE, [0.1, 0.1, 0.1], 1.0) == 0.0

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            holder_seminorm(line([0.5]), [0.3], 1.0)

    def test_dominates_empirical_avg(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            m = line(rng.random(10))
            v = rng.random(10)
            prof = empirical_smoothness(m, v, 0.7)
            assert prof.empirical_avg <= holder_seminorm(m, v, 0.7) + 1e-15

    def test_spike_gap(self):
        # a narrow spike drives the seminorm to 100 while most points keep
        # slope about 1: the average stays small
        x = np.concatenate([np.linspace(0, 0.89, 90), [0.895, 0.9]])
        v = np.concatenate([np.linspace(0, 0.5, 90) % 0.5, [0.5 + 0.5, 0.06]])
        v = np.clip(v, 0, 1)
        m = line(x)
        sem = holder_seminorm(m, v, 1.0)
        prof = empirical_smoothness(m, v, 1.0)
        assert sem >= 50.0
        assert prof.empirical_avg < sem / 5


class TestInvariances:
    @settings(max_examples=40, deadline=None)
    @given(
        st.lists(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
            min_size=3,
            max_size=12,
            unique=True,
        ),
        st.floats(min_value=0.0, max_value=3.0, allow_nan=False),
    )
    def test_value_scaling(self, coords, c):
        m = line(coords)
        v = np.linspace(0.1, 0.9, len(coords))
        base = empirical_smoothness(m, v, 1.0)
        scaled = empirical_smoothness(m, c * v, 1.0)
        assert scaled.empirical_avg == pytest.approx(c * base.empirical_avg, rel=1e-12)
        np.testing.assert_allclose(
            scaled.per_point_slope, c * base.per_point_slope, rtol=1e-12
        )

    def test_constant_shift(self):
        rng = np.random.default_rng(8)
        m = line(rng.random(9))
        v = rng.random(9) * 0.5
        base = empirical_smoothness(m, v, 0.6)
        shifted = empirical_smoothness(m, v + 0.25, 0.6)
        np.testing.assert_allclose(
            shifted.per_point_slope, base.per_point_slope, rtol=1e-12
        )

    def test_slope_monotone_in_beta_unit_diameter(self):
        rng = np.random.default_rng(9)
        m = line(rng.random(10))  # all pairwise distances <= 1
        v = rng.random(10)
        betas = [0.2, 0.4, 0.6, 0.8, 1.0]
        avgs = [empirical_smoothness(m, v, b).empirical_avg for b in betas]
        assert all(a <= b + 1e-12 for a, b in zip(avgs, avgs[1:]))


class TestSmoothnessConcentration:
    """Resampled empirical smoothness against the 5*log^2(2n/delta)
    concentration envelope, on a finite support where the average slope is
    exact."""

    def test_violation_frequency(self):
        pts = np.linspace(0.0, 1.0, 12)
        vals = ((np.arange(12) % 3) / 3.0).tolist()
        scen = finite_scenario(pts, vals, seed=123)
        lam_bar = true_average_smoothness(scen)
        assert lam_bar > 0
        n, trials, delta = 60, 200, 0.05
        envelope = 5.0 * math.log(2 * n / delta) ** 2 * lam_bar
        violations = 0
        for t in range(trials):
            s = sample(scen.with_seed(1000 + t), n)
            prof = empirical_smoothness(s.space, s.labels, 1.0)
            if prof.empirical_avg > envelope:
                violations += 1
        limit = delta + 3 * math.sqrt(delta / trials)
        assert violations / trials <= limit


class TestLabeledSample:
    def test_label_range_enforced(self):
        with pytest.raises(ValueError, match="0, 1"):
            LabeledSample(space=THREE, labels=np.array([0.0, 0.5, 1.2]))

    def test_length_enforced(self):
        with pytest.raises(ValueError, match="one-to-one"):
            LabeledSample(space=THREE, labels=np.array([0.0, 0.5]))
