"""
L^p_t L^q_x norms of products of propagated states, sequence l^p norms and H^s norms.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from norms.quadrature import (
    DEFAULT_NT_CAP,
    DEFAULT_NT_START,
    DEFAULT_RTOL,
    NormValue,
    lp_time_norm,
    next_power_of_two,
)
from spectral.propagator import ProductSampler, clock_rate, even_ceiling, product_grid_size
from spectral.state import FourierState
from spectral.torus import quadratic_form, sobolev_weight
from utils.errors import DomainError, ResolutionError, UsageError


logger = logging.getLogger(__name__)

NORM_METHODS = ("auto", "quadrature", "resonance")
# Limits of the exact p = q = 2 path
RESONANCE_TUPLE_BUDGET = 1 << 20
RESONANCE_PAIR_BUDGET = 1 << 24
_PAIR_CHUNK = 1 << 18


@dataclass(frozen=True)
class MixedNormSpec:
    """Exponents, time interval and quadrature resolutions of an L^p_t L^q_x evaluation."""
    p: float
    q: float
    tau: Tuple[float, float] = (0.0, 1.0)
    n_t: int = DEFAULT_NT_START
    grid_per_dim: Optional[int] = None
    convergence_rtol: float = DEFAULT_RTOL
    n_t_cap: int = DEFAULT_NT_CAP
    clock: str = "estimate"
    method: str = "auto"

    def __post_init__(self):
        object.__setattr__(self, "tau", (float(self.tau[0]), float(self.tau[1])))
        if self.p < 1 or self.q < 1:
            raise DomainError(f"Exponents must be >= 1, got p={self.p}, q={self.q}")
        t0, t1 = self.tau
        if not (0.0 <= t0 < t1 <= 1.0):
            raise UsageError(f"Time interval must satisfy 0 <= t0 < t1 <= 1, got: {self.tau}")
        if self.n_t < 2:
            raise UsageError(f"Need at least 2 time samples, got: {self.n_t}")
        if self.convergence_rtol <= 0:
            raise UsageError(f"convergence_rtol must be positive, got: {self.convergence_rtol}")
        if self.method not in NORM_METHODS:
            raise UsageError(f"method must be one of {list(NORM_METHODS)}, got: {self.method}")

    @property
    def length(self) -> float:
        return self.tau[1] - self.tau[0]


def space_norms(fields: np.ndarray, q: float, d: int) -> np.ndarray:
    """
    Grid L^q norms over the last d axes: (G^{-d} sum_m |u(x_m)|^q)^{1/q}, max for q=inf.

    Raises:
        DomainError: If q < 1
    """
    if q < 1:
        raise DomainError(f"Space exponent must be >= 1, got: {q}")
    axes = tuple(range(fields.ndim - d, fields.ndim))
    modulus = np.abs(fields)
    if math.isinf(q):
        return modulus.max(axis=axes)
    if q == 2:
        return np.sqrt(np.mean(modulus * modulus, axis=axes))
    peak = modulus.max(axis=axes, keepdims=True)
    safe = np.where(peak > 0, peak, 1.0)
    scaled = np.mean((modulus / safe) ** q, axis=axes) ** (1.0 / q)
    return scaled * np.squeeze(peak, axis=axes)


def space_norm(field_values: np.ndarray, q: float) -> float:
    """L^q norm on the unit cell of a field sampled on a uniform grid."""
    values = np.asarray(field_values)
    return float(space_norms(values[None, ...], q, values.ndim)[0])


def resolve_grid(factors: Sequence[FourierState], spec: MixedNormSpec) -> int:
    """
    Grid size for the product: the exactness rule by default, or the requested size
    when it still resolves the product bandwidth.

    Raises:
        ResolutionError: If a requested grid cannot hold the product bandwidth
    """
    if spec.grid_per_dim is None:
        return product_grid_size(factors, spec.q)
    J = len(factors)
    radius = max((f.half_span() for f in factors), default=0)
    if spec.grid_per_dim <= 2 * J * radius:
        raise ResolutionError(
            f"Grid {spec.grid_per_dim} cannot resolve a {J}-fold product of half-span {radius}"
        )
    return int(spec.grid_per_dim)


def resonance_tuples(
    factors: Sequence[FourierState], budget: int
) -> Optional[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """
    Output modes n_1 + ... + n_J, frequencies Q(n_1) + ... + Q(n_J) and amplitudes
    prod_j phi_j_hat(n_j) of every mode tuple, or None past budget tuples.
    """
    total = 1
    for f in factors:
        total *= len(f)
    if total > budget:
        return None
    torus = factors[0].torus
    modes = np.zeros((1, torus.d), dtype=np.int64)
    frequencies = np.zeros(1, dtype=np.float64)
    amplitudes = np.ones(1, dtype=np.complex128)
    for f in factors:
        q = np.asarray(quadratic_form(torus, f.modes), dtype=np.float64).reshape(-1) if len(f) else np.zeros(0)
        modes = (modes[:, None, :] + f.modes[None, :, :]).reshape(-1, torus.d)
        frequencies = (frequencies[:, None] + q[None, :]).reshape(-1)
        amplitudes = (amplitudes[:, None] * f.coeffs[None, :]).reshape(-1)
    return modes, frequencies, amplitudes


def resonance_l2(
    factors: Sequence[FourierState],
    spec: MixedNormSpec,
    tuple_budget: int = RESONANCE_TUPLE_BUDGET,
    pair_budget: int = RESONANCE_PAIR_BUDGET,
) -> Optional[NormValue]:
    """
    Closed form of ||prod_j e^{it Delta} phi_j||_{L^2(tau, L^2)}.

    By Parseval the square is sum_xi sum_{a, b -> xi} A_a conj(A_b) int_tau e^{i r (w_a - w_b) t} dt
    over mode tuples a, b with output mode xi, amplitude A and frequency w. Returns None
    when the tuple count or the pair count exceeds its budget.
    """
    tuples = resonance_tuples(factors, tuple_budget)
    if tuples is None:
        return None
    modes, frequencies, amplitudes = tuples
    if len(amplitudes) == 0:
        return NormValue(value=0.0, n_t_used=0, rel_change=0.0, doublings=0)

    _, inverse, counts = np.unique(modes, axis=0, return_inverse=True, return_counts=True)
    inverse = np.asarray(inverse).reshape(-1)
    if int(np.sum(counts.astype(np.int64) ** 2)) > pair_budget:
        return None

    rate = clock_rate(spec.clock)
    length = spec.length
    centre = 0.5 * (spec.tau[0] + spec.tau[1])
    order = np.argsort(inverse, kind="stable")
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))

    total = 0.0
    # groups of equal size are summed together, _PAIR_CHUNK pairs at a time
    for size in np.unique(counts):
        groups = np.flatnonzero(counts == size)
        step = max(1, _PAIR_CHUNK // int(size * size))
        for begin in range(0, len(groups), step):
            members = order[starts[groups[begin:begin + step]][:, None] + np.arange(size)[None, :]]
            w = frequencies[members]
            theta = rate * (w[:, :, None] - w[:, None, :])
            kernel = np.exp(1j * theta * centre) * length * np.sinc(theta * length / (2.0 * math.pi))
            a = amplitudes[members]
            total += float(np.real(np.einsum("gi,gij,gj->", a, kernel, np.conj(a))))
    return NormValue(value=math.sqrt(max(total, 0.0)), n_t_used=0, rel_change=0.0, doublings=0)


def periodic_sample_count(
    sampler: ProductSampler, factors: Sequence[FourierState], spec: MixedNormSpec
) -> Optional[int]:
    """
    Sample count at which the midpoint rule is exact for ||.||_{L^p(0,1; L^q)}, or None.

    Needs p = q even, tau = [0, 1] and integer time frequencies: the integrand is then a
    trigonometric polynomial of degree at most q/2 times the frequency spread.
    """
    q = spec.q
    if spec.p != q or math.isinf(q) or q != even_ceiling(q) or spec.tau != (0.0, 1.0):
        return None
    if sampler.grid_size < product_grid_size(factors, q) or not sampler.integer_frequencies():
        return None
    n_t = next_power_of_two(0.5 * q * sampler.time_frequency_spread + 1.0)
    return n_t if n_t <= spec.n_t_cap else None


def mixed_norm(factors: Sequence[FourierState], spec: MixedNormSpec) -> NormValue:
    """
    ||prod_j e^{it Delta} phi_j||_{L^p(tau, L^q)}.

    At p = q = 2 the resonance sum is exact and is used while it fits the pair budget
    (method "auto"). Otherwise time doubling over exact grid samples, skipped when the
    time integrand is a trigonometric polynomial the first sample count already integrates.

    Raises:
        UsageError: If no factors are given, they live on different tori, or method
            "resonance" is asked for away from p = q = 2
        ResolutionError: If the requested grid is too coarse or a forced resonance sum
            exceeds the pair budget
        ConvergenceError: If the time quadrature does not settle before n_t_cap
    """
    if not factors:
        raise UsageError("mixed_norm needs at least one factor")
    if any(f.torus != factors[0].torus for f in factors):
        raise UsageError("All factors must live on the same torus")

    if spec.method != "quadrature" and spec.p == 2 and spec.q == 2:
        exact = resonance_l2(factors, spec)
        if exact is not None:
            logger.debug("Mixed norm from resonance sum", extra={"factors": len(factors), "value": exact.value})
            return exact
        if spec.method == "resonance":
            raise ResolutionError(f"Resonance sum over {len(factors)} factors exceeds its tuple or pair budget")
    elif spec.method == "resonance":
        raise UsageError(f"Resonance sums need p = q = 2, got p={spec.p}, q={spec.q}")

    grid = resolve_grid(factors, spec)
    sampler = ProductSampler(factors, grid, clock=spec.clock)
    d = factors[0].d

    spread = sampler.time_frequency_spread
    floor = next_power_of_two(2.0 * spread * spec.length)
    n_start = min(max(spec.n_t, floor), spec.n_t_cap // 2)
    periodic = periodic_sample_count(sampler, factors, spec)
    if periodic is not None:
        n_start = max(spec.n_t, periodic)

    def evaluate(times: np.ndarray) -> np.ndarray:
        chunks = [space_norms(batch, spec.q, d) for batch in sampler.iter_fields(times)]
        return np.concatenate(chunks)

    result = lp_time_norm(
        evaluate,
        spec.tau,
        spec.p,
        n_start=n_start,
        n_cap=spec.n_t_cap,
        rtol=spec.convergence_rtol,
        label="mixed norm",
        exact=periodic is not None,
    )
    logger.debug(
        "Mixed norm evaluated",
        extra={"factors": len(factors), "grid": grid, "n_t": result.n_t_used, "value": result.value}
    )
    return NormValue(
        value=result.value,
        n_t_used=result.n_t_used,
        rel_change=result.rel_change,
        doublings=result.doublings,
        grid_used=grid,
    )


def seq_lp(counts: Sequence[float], p: float) -> float:
    """(sum_k count_k^p)^{1/p}; p = inf gives the max."""
    values = np.abs(np.asarray(list(counts), dtype=np.float64))
    if len(values) == 0:
        return 0.0
    if math.isinf(p):
        return float(values.max())
    if p < 1:
        raise DomainError(f"Sequence exponent must be >= 1, got: {p}")
    peak = values.max()
    if peak == 0:
        return 0.0
    return float(peak * np.sum((values / peak) ** p) ** (1.0 / p))


def h_s_norm(state: FourierState, s: float) -> float:
    """(sum <n>^{2s} |phi_hat(n)|^2)^{1/2}."""
    if len(state) == 0:
        return 0.0
    weights = np.asarray(sobolev_weight(state.modes, s), dtype=np.float64).reshape(-1)
    return float(np.sqrt(np.sum(weights * np.abs(state.coeffs) ** 2)))
