"""
Unit tests for the time quadrature and the mixed space-time norms.
"""
import cmath
import math
from collections import defaultdict

import numpy as np
import pytest

from norms.mixed_norms import (
    MixedNormSpec,
    h_s_norm,
    mixed_norm,
    resonance_l2,
    seq_lp,
    space_norm,
    space_norms,
)
from norms.quadrature import NormValue, lp_mean, lp_time_norm, midpoint_times, next_power_of_two
from spectral.propagator import sample_grid
from spectral.regions import CubeRegion
from spectral.state import FourierState
from spectral.torus import quadratic_form
from utils.errors import ConvergenceError, DomainError, ResolutionError, UsageError


def dirichlet(torus, half_width, center=None):
    center = center or (0,) * torus.d
    points = CubeRegion(center, half_width).lattice_points()
    return FourierState(torus, points, np.ones(len(points)))


def bilinear_oracle(a: FourierState, b: FourierState) -> float:
    """
    ||e^{it Delta} a * e^{it Delta} b||_{L^2([0,1] x T^d)} from closed-form time integrals.

    Groups the pairs (n, m) by output frequency n + m and sums
    c_n d_m conj(c_n' d_m') * int_0^1 exp(2 pi i w t) dt over pairs of pairs.
    """
    torus = a.torus
    groups = defaultdict(list)
    for n, c in zip(a.modes, a.coeffs):
        for m, e in zip(b.modes, b.coeffs):
            omega = quadratic_form(torus, n) + quadratic_form(torus, m)
            groups[tuple(n + m)].append((complex(c * e), omega))

    total = 0.0
    for terms in groups.values():
        for c1, w1 in terms:
            for c2, w2 in terms:
                w = w1 - w2
                integral = 1.0 if w == 0 else (cmath.exp(2j * math.pi * w) - 1.0) / (2j * math.pi * w)
                total += (c1 * c2.conjugate() * integral).real
    return math.sqrt(total)


@pytest.mark.unit
class TestQuadrature:
    """Test cases for the doubling time quadrature."""

    def test_midpoints(self):
        np.testing.assert_allclose(midpoint_times((0.0, 1.0), 4), [0.125, 0.375, 0.625, 0.875])

    def test_lp_mean(self):
        values = np.array([1.0, 1.0, 1.0, 1.0])

        assert lp_mean(values, 2, 0.25) == pytest.approx(0.5)
        assert lp_mean(values * 3, math.inf, 0.25) == 3.0
        assert lp_mean(np.zeros(4), 3, 1.0) == 0.0

    def test_lp_mean_large_exponent(self):
        """Test peak scaling keeps large values and exponents finite."""
        values = np.full(8, 1e200)
        assert lp_mean(values, 8, 1.0) == pytest.approx(1e200)

    @pytest.mark.parametrize("value,expected", [(0.3, 1), (1, 1), (5, 8), (8, 8), (1000, 1024)])
    def test_next_power_of_two(self, value, expected):
        assert next_power_of_two(value) == expected

    def test_linear_integrand(self):
        """Test the midpoint rule is exact on t and converges on t^2."""
        result = lp_time_norm(lambda t: t, (0.0, 1.0), 1, n_start=4)

        assert isinstance(result, NormValue)
        assert result.value == pytest.approx(0.5, abs=1e-15)
        assert result.doublings == 1

        squared = lp_time_norm(lambda t: t, (0.0, 1.0), 2, rtol=1e-10)
        assert squared.value == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-9)

    def test_records_convergence(self):
        result = lp_time_norm(lambda t: np.abs(np.sin(7 * t)), (0.0, 2.0), 3, rtol=1e-6)

        assert result.rel_change < 1e-6
        assert result.n_t_used >= 128

    def test_cap_raises(self):
        with pytest.raises(ConvergenceError) as exc_info:
            lp_time_norm(lambda t: np.abs(np.cos(200 * t)), (0.0, 1.0), 2, n_start=4, n_cap=16, rtol=1e-12)

        assert exc_info.value.n_t == 16
        assert exc_info.value.previous > 0

    def test_invalid_arguments(self):
        with pytest.raises(DomainError):
            lp_time_norm(lambda t: t, (0.0, 1.0), 0.5)
        with pytest.raises(DomainError):
            lp_time_norm(lambda t: t, (1.0, 1.0), 2)


@pytest.mark.unit
class TestSpaceNorms:
    """Test cases for grid L^q norms."""

    @pytest.mark.parametrize("q", [1, 2, 3, 4.5, math.inf])
    def test_constant_field(self, q):
        field = np.full((8, 8), 2.0 - 1.5j)
        assert space_norm(field, q) == pytest.approx(2.5)

    @pytest.mark.parametrize("q", [1, 2, 6, math.inf])
    def test_single_mode(self, torus2, q):
        field = sample_grid(FourierState.single_mode(torus2, (2, -1)), 16)
        assert space_norm(field, q) == pytest.approx(1.0)

    def test_two_modes_parseval(self, torus2):
        state = FourierState.from_mapping(torus2, {(0, 0): 1.0, (1, 0): 1.0})

        field = sample_grid(state, 8)

        assert space_norm(field, 2) == pytest.approx(math.sqrt(2.0), rel=1e-14)

    def test_nesting(self, rng):
        field = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        norms = [space_norm(field, q) for q in (1, 1.5, 2, 3, 4, 8, math.inf)]

        assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))

    def test_batched(self, rng):
        fields = rng.standard_normal((3, 8, 8, 8))

        batched = space_norms(fields, 4, 3)

        np.testing.assert_allclose(batched, [space_norm(f, 4) for f in fields])

    def test_zero_field(self):
        assert space_norm(np.zeros((4, 4)), 3) == 0.0

    def test_exponent_below_one(self):
        with pytest.raises(DomainError):
            space_norm(np.ones((4, 4)), 0.5)


@pytest.mark.unit
class TestMixedNorm:
    """Test cases for mixed_norm."""

    @pytest.mark.parametrize("p,q", [(2, 2), (4, 6), (math.inf, 3), (7, math.inf)])
    def test_single_mode(self, torus2, p, q):
        value = mixed_norm([FourierState.single_mode(torus2, (5, 3))], MixedNormSpec(p=p, q=q))

        assert value.value == pytest.approx(1.0, rel=1e-12)

    def test_product_of_single_modes(self, torus3):
        factors = [FourierState.single_mode(torus3, n) for n in [(1, 0, 0), (0, -4, 2), (7, 7, 7)]]

        value = mixed_norm(factors, MixedNormSpec(p=3, q=4))

        assert value.value == pytest.approx(1.0, rel=1e-12)

    def test_interval_length(self, torus2):
        spec = MixedNormSpec(p=4, q=2, tau=(0.25, 0.75))

        value = mixed_norm([FourierState.single_mode(torus2, (1, 1), 3.0)], spec)

        assert value.value == pytest.approx(3.0 * 0.5 ** 0.25, rel=1e-12)

    def test_matches_closed_form(self, torus2):
        a = dirichlet(torus2, 1)
        b = dirichlet(torus2, 1)
        spec = MixedNormSpec(p=2, q=2, convergence_rtol=2e-7, method="quadrature")

        value = mixed_norm([a, b], spec)

        assert value.value == pytest.approx(bilinear_oracle(a, b), rel=1e-6)
        assert value.grid_used == 8

    def test_matches_closed_form_off_centre(self, torus2):
        a = dirichlet(torus2, 1, center=(3, 0))
        b = FourierState.from_mapping(torus2, {(0, 2): 1.0, (1, -1): 2.0 - 1.0j, (-1, 0): 0.5j})
        spec = MixedNormSpec(p=2, q=2, convergence_rtol=2e-7, method="quadrature")

        value = mixed_norm([a, b], spec)

        assert value.value == pytest.approx(bilinear_oracle(a, b), rel=1e-6)

    @pytest.mark.slow
    def test_matches_closed_form_wider(self, torus2):
        a = dirichlet(torus2, 2)
        spec = MixedNormSpec(p=2, q=2, convergence_rtol=1e-7, method="quadrature")

        value = mixed_norm([a, a], spec)

        assert value.value == pytest.approx(bilinear_oracle(a, a), rel=1e-5)

    def test_homogeneity(self, torus2):
        a = dirichlet(torus2, 2)
        b = dirichlet(torus2, 1, center=(3, 1))
        spec = MixedNormSpec(p=3, q=4)

        base = mixed_norm([a, b], spec).value
        scaled = mixed_norm([a.scaled(2.0), b], spec).value

        assert scaled == pytest.approx(2.0 * base, rel=1e-12)

    def test_phase_invariance(self, torus2):
        a = dirichlet(torus2, 2)
        b = dirichlet(torus2, 1, center=(3, 1))
        spec = MixedNormSpec(p=3, q=4)

        base = mixed_norm([a, b], spec).value
        rotated = mixed_norm([a.with_phase(0.7), b.with_phase(-2.1)], spec).value

        assert rotated == pytest.approx(base, rel=1e-10)

    def test_zero_factor(self, torus2):
        value = mixed_norm([dirichlet(torus2, 1), FourierState.zero(torus2)], MixedNormSpec(p=2, q=2))
        assert value.value == 0.0

    def test_requested_grid_too_small(self, torus2):
        spec = MixedNormSpec(p=2, q=2, grid_per_dim=8, method="quadrature")

        with pytest.raises(ResolutionError):
            mixed_norm([dirichlet(torus2, 2), dirichlet(torus2, 2)], spec)

    def test_non_convergence(self, torus2):
        spec = MixedNormSpec(p=2, q=2, n_t=2, n_t_cap=8, convergence_rtol=1e-12, method="quadrature")

        with pytest.raises(ConvergenceError) as exc_info:
            mixed_norm([dirichlet(torus2, 1), dirichlet(torus2, 1)], spec)

        assert exc_info.value.last > 0

    def test_no_factors(self):
        with pytest.raises(UsageError):
            mixed_norm([], MixedNormSpec(p=2, q=2))

    @pytest.mark.parametrize("kwargs,error", [
        ({'p': 0.5, 'q': 2}, DomainError),
        ({'p': 2, 'q': 2, 'tau': (0.5, 0.2)}, UsageError),
        ({'p': 2, 'q': 2, 'tau': (0.0, 1.5)}, UsageError),
        ({'p': 2, 'q': 2, 'n_t': 1}, UsageError),
        ({'p': 2, 'q': 2, 'convergence_rtol': 0.0}, UsageError),
        ({'p': 2, 'q': 2, 'method': "fft"}, UsageError),
    ])
    def test_norm_spec_validation(self, kwargs, error):
        with pytest.raises(error):
            MixedNormSpec(**kwargs)


@pytest.mark.unit
class TestExactPaths:
    """Test cases for the resonance sum and the periodic time shortcut."""

    def test_resonance_sum_matches_closed_form(self, torus2):
        a = dirichlet(torus2, 2)
        b = dirichlet(torus2, 1, center=(3, 0))

        value = mixed_norm([a, b], MixedNormSpec(p=2, q=2))

        assert value.value == pytest.approx(bilinear_oracle(a, b), rel=1e-10)
        assert value.n_t_used == 0
        assert value.doublings == 0

    def test_resonance_sum_matches_quadrature_on_subinterval(self, torus2):
        factors = [dirichlet(torus2, 1), dirichlet(torus2, 1, center=(2, -1)), dirichlet(torus2, 1)]
        tau = (0.2, 0.7)

        exact = mixed_norm(factors, MixedNormSpec(p=2, q=2, tau=tau, method="resonance"))
        sampled = mixed_norm(factors, MixedNormSpec(p=2, q=2, tau=tau, convergence_rtol=1e-6, method="quadrature"))

        assert exact.value == pytest.approx(sampled.value, rel=1e-5)

    def test_resonance_sum_budget(self, torus2):
        factors = [dirichlet(torus2, 1), dirichlet(torus2, 1)]

        assert resonance_l2(factors, MixedNormSpec(p=2, q=2), tuple_budget=80) is None
        assert resonance_l2(factors, MixedNormSpec(p=2, q=2), tuple_budget=81, pair_budget=81 * 81) is not None
        assert resonance_l2(factors, MixedNormSpec(p=2, q=2), pair_budget=80) is None

    def test_resonance_needs_l2(self, torus2):
        with pytest.raises(UsageError):
            mixed_norm([dirichlet(torus2, 1)], MixedNormSpec(p=4, q=4, method="resonance"))

    def test_periodic_time_integrand_skips_doubling(self, square2):
        a = dirichlet(square2, 1)
        b = dirichlet(square2, 1, center=(1, 2))

        value = mixed_norm([a, b], MixedNormSpec(p=4, q=4))
        halves = [
            mixed_norm([a, b], MixedNormSpec(p=4, q=4, tau=tau, convergence_rtol=1e-6)).value
            for tau in ((0.0, 0.5), (0.5, 1.0))
        ]

        assert value.doublings == 0
        assert value.value ** 4 == pytest.approx(halves[0] ** 4 + halves[1] ** 4, rel=1e-5)

    def test_irrational_torus_keeps_doubling(self, torus2):
        value = mixed_norm([dirichlet(torus2, 1), dirichlet(torus2, 1)], MixedNormSpec(p=4, q=4))
        assert value.doublings >= 1


@pytest.mark.unit
class TestSequenceNorms:
    """Test cases for seq_lp and h_s_norm."""

    @pytest.mark.parametrize("counts,p,expected", [
        ([1, 1, 1], 2, math.sqrt(3.0)),
        ([0, 0, 0], 2, 0.0),
        ([], 3, 0.0),
        ([3, 4], 1, 7.0),
        ([3, 4], 2, 5.0),
        ([3, 9, 4], math.inf, 9.0),
    ])
    def test_seq_lp(self, counts, p, expected):
        assert seq_lp(counts, p) == pytest.approx(expected)

    def test_seq_lp_exponent_below_one(self):
        with pytest.raises(DomainError):
            seq_lp([1, 2], 0.5)

    def test_h_s_single_modes(self, torus2):
        assert h_s_norm(FourierState.single_mode(torus2, (0, 0)), 2.5) == 1.0
        assert h_s_norm(FourierState.single_mode(torus2, (1, 0)), 1.0) == pytest.approx(math.sqrt(2.0))

    def test_h_zero_is_l2(self, torus3, rng):
        modes = rng.integers(-9, 10, size=(30, 3))
        state = FourierState(torus3, modes, rng.standard_normal(30) + 1j * rng.standard_normal(30))

        assert h_s_norm(state, 0.0) == pytest.approx(state.l2_norm(), rel=1e-14)

    def test_h_s_zero_state(self, torus2):
        assert h_s_norm(FourierState.zero(torus2), 1.0) == 0.0
