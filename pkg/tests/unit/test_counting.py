"""
Unit tests for level-set counts, the window, exponential sums, Weyl sums and resonance counts.
"""
import cmath
import math

import numpy as np
import pytest

from counting.exp_sums import (
    dual_exponent,
    exp_sum,
    exp_sum_batch,
    exp_sum_lp_norm,
    point_estimate_check,
    weyl_norm,
    weyl_sum_midpoints,
)
from counting.level_sets import level_set_counts, phase_values
from counting.resonance import resonance_instance
from counting.window import make_window
from norms.quadrature import lp_mean, midpoint_times
from spectral.regions import CubeRegion
from spectral.torus import quadratic_form
from utils.errors import DomainError, UsageError


def line(M):
    """The one-dimensional set {0, ..., M-1} as an (M, 1) point array."""
    return np.arange(M, dtype=np.int64).reshape(-1, 1)


@pytest.mark.unit
class TestLevelSets:
    """Test cases for level_set_counts."""

    def test_separated_values(self):
        family = level_set_counts(line(4), lambda pts: pts[:, 0] ** 2, 0.5)

        assert family.counts == {0: 1, 1: 1, 4: 1, 9: 1}
        assert family.lp(2) == pytest.approx(2.0)
        assert family.exploratory

    def test_singleton(self):
        family = level_set_counts(line(1), np.array([0.0]), 1.0)

        assert family.counts == {-1: 1, 0: 1, 1: 1}
        assert not family.exploratory

    def test_boundary_is_inclusive(self):
        family = level_set_counts(line(1), np.array([2.5]), 0.5)
        assert family.counts == {2: 1, 3: 1}

    def test_matches_brute_force_recount(self, torus2):
        points = CubeRegion((4, 4), 4).lattice_points()
        values = quadratic_form(torus2, points)

        family = level_set_counts(points, values, 1.0)

        expected = {}
        for k in range(-2, int(values.max()) + 3):
            count = sum(1 for v in values if abs(v - k) <= 1.0)
            if count:
                expected[k] = count
        assert family.counts == expected

    def test_total_counts_every_membership(self, torus3, rng):
        points = rng.integers(-6, 7, size=(80, 3))
        values = quadratic_form(torus3, points)
        r = 2.5

        family = level_set_counts(points, values, r)

        per_point = sum(math.floor(v + r) - math.ceil(v - r) + 1 for v in values)
        assert family.total() == per_point

    def test_empty_set(self):
        family = level_set_counts(np.zeros((0, 2), dtype=np.int64), np.zeros(0), 1.0)

        assert family.counts == {}
        assert family.lp(3) == 0.0

    def test_negative_radius(self):
        with pytest.raises(UsageError):
            level_set_counts(line(2), np.zeros(2), -1.0)

    def test_value_count_mismatch(self):
        with pytest.raises(UsageError):
            phase_values(line(3), np.zeros(2))


@pytest.mark.unit
class TestWindow:
    """Test cases for make_window."""

    @pytest.mark.parametrize("r", [1.0, 2.0, 4.0, 7.5])
    def test_constants(self, r):
        window = make_window(r)

        assert window.a == pytest.approx(1.0 / (4.0 * r))
        assert window.c == pytest.approx(math.pi ** 2 * r * r)
        assert window.interval == pytest.approx((-0.5 / r, 0.5 / r))
        assert window.length == pytest.approx(1.0 / r)

    @pytest.mark.parametrize("r", [1.0, 2.0, 4.0])
    def test_transform_dominates_indicator(self, r):
        window = make_window(r)
        tau = np.linspace(-r, r, 10_000)

        assert window.eta_hat(0.0) == pytest.approx(math.pi ** 2 / 4.0)
        assert window.eta_hat(r) == pytest.approx(1.0, abs=1e-12)
        assert window.eta_hat(tau).min() >= 1.0 - 1e-9

    def test_transform_is_nonnegative(self):
        window = make_window(2.0)
        assert np.all(window.eta_hat(np.linspace(-100.0, 100.0, 20_001)) >= 0.0)

    def test_support(self):
        window = make_window(1.0)

        assert window.eta(0.5) == 0.0
        assert window.eta(-0.75) == 0.0
        assert window.eta(0.0) == pytest.approx(window.sup_eta)
        assert window.sup_eta == pytest.approx(math.pi ** 2 / 2.0)

    @pytest.mark.parametrize("r", [0.0, -1.0, math.inf])
    def test_invalid_radius(self, r):
        with pytest.raises(DomainError):
            make_window(r)


@pytest.mark.unit
class TestExponentialSums:
    """Test cases for exp_sum and its time norms."""

    def test_zero_time(self):
        assert exp_sum(line(11), lambda pts: pts[:, 0] ** 2, 0.0) == 11

    def test_dirichlet_kernel(self):
        M, t = 16, 0.3
        expected = cmath.exp(1j * math.pi * (M - 1) * t) * math.sin(math.pi * M * t) / math.sin(math.pi * t)

        value = exp_sum(line(M), lambda pts: pts[:, 0], t)

        assert abs(value - expected) <= 1e-12

    def test_shift_and_conjugation(self, torus2, rng):
        points = rng.integers(-10, 11, size=(40, 2))
        values = quadratic_form(torus2, points)
        t = 0.4137

        base = exp_sum(points, values, t)

        assert abs(exp_sum(points, values + 3.3, t)) == pytest.approx(abs(base), abs=1e-12)
        assert abs(exp_sum(points, -values, t)) == pytest.approx(abs(base), abs=1e-12)

    def test_batch_matches_scalar(self, torus2, rng):
        points = rng.integers(-10, 11, size=(25, 2))
        values = quadratic_form(torus2, points)
        times = np.array([-0.3, 0.0, 0.01, 0.25, 0.9])

        batch = exp_sum_batch(values, times)

        expected = [exp_sum(points, values, t) for t in times]
        np.testing.assert_allclose(batch, expected, atol=1e-11)

    def test_norm_of_singleton(self):
        value = exp_sum_lp_norm(line(1), np.array([3.7]), 4.0 / 3.0, (-0.5, 0.5))
        assert value.value == pytest.approx(1.0, rel=1e-12)

    def test_norm_of_constant_phase(self):
        m, interval = 6, (-0.125, 0.125)

        value = exp_sum_lp_norm(line(m), np.zeros(m), 2.0, interval)

        assert value.value == pytest.approx(m * 0.25 ** 0.5, rel=1e-12)

    def test_norm_matches_dense_quadrature(self):
        values = (line(16)[:, 0] ** 2).astype(np.float64)
        interval = make_window(1.0).interval
        p_dual = 4.0 / 3.0

        value = exp_sum_lp_norm(line(16), values, p_dual, interval, rtol=1e-7)

        times = midpoint_times(interval, 10 ** 6)
        dense = lp_mean(np.abs(exp_sum_batch(values, times)), p_dual, 1.0)
        assert value.value == pytest.approx(dense, rel=1e-4)

    def test_dual_exponent_bounds(self):
        with pytest.raises(DomainError):
            exp_sum_lp_norm(line(2), np.zeros(2), 0.5, (0.0, 1.0))
        with pytest.raises(DomainError):
            dual_exponent(1.0)

    @pytest.mark.parametrize("p,expected", [(2, 2.0), (4, 4.0 / 3.0), (3, 1.5), (math.inf, 1.0)])
    def test_dual_exponent(self, p, expected):
        assert dual_exponent(p) == pytest.approx(expected)


@pytest.mark.unit
class TestPointEstimate:
    """Test cases for point_estimate_check."""

    def test_singleton_closed_form(self):
        result = point_estimate_check(np.zeros((1, 2), dtype=np.int64), np.zeros(1), 1.0, 2.0, rtol=1e-8)

        assert result.lhs == pytest.approx(math.sqrt(3.0))
        assert result.rhs == pytest.approx(1.0, rel=1e-12)
        # ||eta||_{L^2} with eta(t) = pi^2 (1/2 - |t|) on [-1/2, 1/2]
        assert result.intermediate == pytest.approx(math.pi ** 2 / math.sqrt(12.0), rel=1e-6)
        assert result.hausdorff_young == pytest.approx(result.intermediate, rel=1e-3)
        assert result.ratio <= math.pi ** 2 / 2.0
        assert result.chain_holds
        assert result.hausdorff_young_holds

    def test_ratio_independent_of_multiplicity(self):
        points = np.arange(5, dtype=np.int64).reshape(-1, 1)
        one = point_estimate_check(points[:1], np.zeros(1), 1.0, 2.0)
        five = point_estimate_check(points, np.zeros(5), 1.0, 2.0)

        assert five.lhs == pytest.approx(5 * math.sqrt(3.0))
        assert five.ratio == pytest.approx(one.ratio, rel=1e-9)

    def test_randomized_chain(self, torus2):
        rng = np.random.default_rng(11)
        for _ in range(20):
            size = int(rng.integers(1, 65))
            points = rng.integers(-16, 17, size=(size, 2))
            r = float(rng.choice([1.0, 2.0, 4.0]))
            p = float(rng.choice([2.0, 3.0, 4.0]))

            result = point_estimate_check(points, quadratic_form(torus2, points), r, p, rtol=1e-4)

            assert result.chain_holds, result.to_dict()
            assert result.lhs <= result.sup_eta * result.rhs * (1 + 1e-6)

    def test_row_fields(self, torus2):
        points = CubeRegion((0, 0), 2).lattice_points()

        row = point_estimate_check(points, quadratic_form(torus2, points), 2.0, 3.0).to_dict()

        assert {'lhs', 'hausdorff_young', 'intermediate', 'rhs', 'ratio', 'n_t_used', 'pass'} <= set(row)
        assert row['set_size'] == 25

    @pytest.mark.parametrize("r,p", [(1.0, 1.5), (0.5, 2.0)])
    def test_hypotheses(self, r, p):
        with pytest.raises(DomainError):
            point_estimate_check(line(3), np.zeros(3), r, p)


@pytest.mark.unit
class TestWeylSums:
    """Test cases for quadratic Weyl sums."""

    def test_midpoints_match_direct_sum(self):
        M, n_t = 8, 64
        times = midpoint_times((0.0, 1.0), n_t)
        n = np.arange(M)

        expected = np.exp(2j * math.pi * np.outer(times, n * n)).sum(axis=1)

        np.testing.assert_allclose(weyl_sum_midpoints(M, n_t), expected, atol=1e-10)

    def test_infinite_exponent(self):
        value = weyl_norm(64, math.inf)

        assert value.value == 64.0

    def test_l2_is_square_root(self):
        assert weyl_norm(16, 2.0).value == pytest.approx(4.0, rel=1e-12)

    def test_l4_counts_additive_energy(self):
        # 0, 1, 4, 9 have no nontrivial coincidences a + b = c + d
        assert weyl_norm(4, 4.0).value == pytest.approx(28.0 ** 0.25, rel=1e-12)

    def test_single_term(self):
        assert weyl_norm(1, 6.0).value == pytest.approx(1.0, rel=1e-12)

    def test_invalid_length(self):
        with pytest.raises(UsageError):
            weyl_sum_midpoints(0, 8)


@pytest.mark.unit
class TestResonance:
    """Test cases for the resonance majorant."""

    def test_random_instances(self, torus2):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a = rng.integers(-8, 9, size=2)
            c2 = tuple(int(v) for v in rng.integers(-4, 5, size=2))
            c3 = tuple(int(v) for v in rng.integers(-4, 5, size=2))

            instance = resonance_instance(torus2, a, CubeRegion(c2, 2), CubeRegion(c3, 2))

            assert instance.pairs == 25 * 25
            assert instance.levels_checked > 0
            assert instance.passed, instance.to_dict()

    def test_rational_torus(self, square2):
        instance = resonance_instance(square2, (1, 0), CubeRegion((0, 0), 2), CubeRegion((2, 1), 1))

        assert instance.passed
        assert instance.to_dict()['pass'] is True

    def test_dimension_mismatch(self, torus2):
        with pytest.raises(UsageError):
            resonance_instance(torus2, (0, 0, 0), CubeRegion((0, 0), 1), CubeRegion((0, 0), 1))
