"""
Exponential sums sum_{n in S} exp(2 pi i f(n) t), their L^p norms over time intervals,
quadratic Weyl sums, and the point-estimate chain for level-set counts.
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Tuple

import numpy as np
from scipy import fft as sp_fft

from counting.level_sets import PhaseFunction, level_set_counts, phase_values
from counting.window import Window, make_window
from norms.mixed_norms import seq_lp
from norms.quadrature import (
    DEFAULT_NT_CAP,
    DEFAULT_NT_START,
    DEFAULT_RTOL,
    NormValue,
    lp_mean,
    lp_time_norm,
    midpoint_times,
    next_power_of_two,
)
from utils.errors import DomainError, UsageError


logger = logging.getLogger(__name__)

# (times x points) phase entries per batch
_BATCH_ELEMENTS = 1 << 21


def exp_sum(points: np.ndarray, f: PhaseFunction, t: float) -> complex:
    """sum_{n in S} exp(2 pi i f(n) t) with exactly rounded real and imaginary parts."""
    values = phase_values(points, f)
    phases = 2.0 * math.pi * np.mod(values * t, 1.0)
    return complex(math.fsum(np.cos(phases)), math.fsum(np.sin(phases)))


def exp_sum_batch(values: np.ndarray, times: np.ndarray) -> np.ndarray:
    """
    Exponential sums of phase values at many times.

    Phases are reduced modulo 1 before exponentiation; the sum over points uses numpy's
    pairwise reduction. Batches keep the phase matrix bounded.
    """
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    times = np.asarray(times, dtype=np.float64).reshape(-1)
    out = np.empty(len(times), dtype=np.complex128)
    if len(values) == 0:
        out[:] = 0.0
        return out
    step = max(1, _BATCH_ELEMENTS // len(values))
    for start in range(0, len(times), step):
        chunk = times[start:start + step]
        phases = np.mod(np.outer(chunk, values), 1.0)
        out[start:start + step] = np.exp(2j * math.pi * phases).sum(axis=1)
    return out


def _time_floor(values: np.ndarray, interval: Tuple[float, float]) -> int:
    spread = float(values.max() - values.min()) if len(values) else 0.0
    return next_power_of_two(2.0 * spread * (interval[1] - interval[0]))


def exp_sum_lp_norm(
    points: np.ndarray,
    f: PhaseFunction,
    p_dual: float,
    interval: Tuple[float, float],
    n_start: int = DEFAULT_NT_START,
    n_cap: int = DEFAULT_NT_CAP,
    rtol: float = DEFAULT_RTOL,
) -> NormValue:
    """
    ||sum_{n in S} exp(2 pi i f(n) t)||_{L^{p_dual}(I)} with the doubling certificate.

    Raises:
        DomainError: If p_dual < 1
        ConvergenceError: If the quadrature does not settle before n_cap
    """
    if p_dual < 1:
        raise DomainError(f"Dual exponent must be >= 1, got: {p_dual}")
    values = phase_values(points, f)
    start = min(max(n_start, _time_floor(values, interval)), max(2, n_cap // 2))
    return lp_time_norm(
        lambda times: np.abs(exp_sum_batch(values, times)),
        interval,
        p_dual,
        n_start=start,
        n_cap=n_cap,
        rtol=rtol,
        label="exponential sum norm",
    )


def dual_exponent(p: float) -> float:
    if math.isinf(p):
        return 1.0
    if p <= 1:
        raise DomainError(f"Exponent must exceed 1 for a finite dual, got: {p}")
    return p / (p - 1.0)


def hausdorff_young_term(values: np.ndarray, window: Window, p: float, margin: int = 0) -> float:
    """
    Truncated ||psi_hat(k)||_{l^p_k} with psi = eta * sum_n exp(2 pi i f(n) t), i.e.
    psi_hat(k) = sum_n eta_hat(k - f(n)) over k within margin of the range of f.

    Every k with a nonempty level set lies inside the truncation.
    """
    if len(values) == 0:
        return 0.0
    margin = margin or max(16, 4 * math.ceil(window.r))
    k_lo = math.floor(values.min() - window.r) - margin
    k_hi = math.ceil(values.max() + window.r) + margin
    ks = np.arange(k_lo, k_hi + 1, dtype=np.float64)
    step = max(1, _BATCH_ELEMENTS // len(values))
    psi_hat = np.empty(len(ks), dtype=np.float64)
    for start in range(0, len(ks), step):
        chunk = ks[start:start + step]
        psi_hat[start:start + step] = window.eta_hat(chunk[:, None] - values[None, :]).sum(axis=1)
    return seq_lp(psi_hat, p)


@dataclass(frozen=True)
class PointEstimateResult:
    """One evaluation of the chain lhs <= hausdorff_young <= intermediate <= sup_eta * rhs."""
    p: float
    r: float
    set_size: int
    lhs: float
    hausdorff_young: float
    intermediate: float
    rhs: float
    sup_eta: float
    n_t_used: int
    tolerance: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0:
            return 0.0 if self.lhs == 0 else math.inf
        return self.lhs / self.rhs

    @property
    def chain_holds(self) -> bool:
        """LHS <= ||psi||_{L^p'(I)} <= sup(eta) * RHS within the relative tolerance."""
        slack = 1.0 + self.tolerance
        return self.lhs <= self.intermediate * slack and self.intermediate <= self.sup_eta * self.rhs * slack

    @property
    def hausdorff_young_holds(self) -> bool:
        """Reported only: the middle step carries the time-quadrature error of ||psi||."""
        slack = 1.0 + self.tolerance
        return self.lhs <= self.hausdorff_young * slack

    def to_dict(self) -> dict:
        data = asdict(self)
        data['ratio'] = self.ratio
        data['pass'] = self.chain_holds
        return data


def point_estimate_check(
    points: np.ndarray,
    f: PhaseFunction,
    r: float,
    p: float,
    n_start: int = DEFAULT_NT_START,
    n_cap: int = DEFAULT_NT_CAP,
    rtol: float = DEFAULT_RTOL,
    tolerance: float = 1e-6,
) -> PointEstimateResult:
    """
    Compare ||#S_k||_{l^p_k} with ||sum_{n in S} exp(2 pi i f(n) t)||_{L^{p'}(I)}.

    The doubling certificate runs on psi = eta * sum; the right side is then taken on
    the same time samples, so intermediate <= sup(eta) * rhs holds sample by sample.

    Raises:
        DomainError: If p < 2 or r < 1
    """
    if p < 2:
        raise DomainError(f"Point estimate needs p >= 2, got: {p}")
    if r < 1:
        raise DomainError(f"Point estimate needs r >= 1, got: {r}")
    values = phase_values(points, f)
    window = make_window(r)
    p_dual = dual_exponent(p)
    interval = window.interval

    family = level_set_counts(points, values, r)
    lhs = family.lp(p)
    hy = hausdorff_young_term(values, window, p)

    def psi_modulus(times: np.ndarray) -> np.ndarray:
        return window.eta(times) * np.abs(exp_sum_batch(values, times))

    start = min(max(n_start, _time_floor(values, interval)), max(2, n_cap // 2))
    psi = lp_time_norm(psi_modulus, interval, p_dual, n_start=start, n_cap=n_cap, rtol=rtol,
                       label="windowed exponential sum norm")

    times = midpoint_times(interval, psi.n_t_used)
    modulus = np.abs(exp_sum_batch(values, times))
    rhs = lp_mean(modulus, p_dual, window.length)
    intermediate = lp_mean(window.eta(times) * modulus, p_dual, window.length)

    result = PointEstimateResult(
        p=float(p),
        r=float(r),
        set_size=len(values),
        lhs=lhs,
        hausdorff_young=hy,
        intermediate=intermediate,
        rhs=rhs,
        sup_eta=window.sup_eta,
        n_t_used=psi.n_t_used,
        tolerance=tolerance,
    )
    logger.debug("Point estimate evaluated", extra=result.to_dict())
    return result


def weyl_sum_midpoints(M: int, n_t: int) -> np.ndarray:
    """
    sum_{n=0}^{M-1} exp(2 pi i n^2 t) at the n_t midpoints of [0, 1].

    With t_j = (j + 1/2) / L the sum is L * ifft of the histogram of n^2 mod L weighted by
    exp(pi i n^2 / L), so one transform of length L replaces L * M exponentials.
    """
    if M < 1:
        raise UsageError(f"Weyl sum length must be >= 1, got: {M}")
    L = int(n_t)
    n = np.arange(M, dtype=np.int64)
    squares = n * n
    weights = np.exp(1j * math.pi * np.mod(squares, 2 * L) / L)
    histogram = np.zeros(L, dtype=np.complex128)
    np.add.at(histogram, np.mod(squares, L), weights)
    return sp_fft.ifft(histogram, norm="forward")


def weyl_norm(
    M: int,
    exponent: float,
    floor_factor: int = 64,
    n_cap: int = DEFAULT_NT_CAP,
    rtol: float = DEFAULT_RTOL,
) -> NormValue:
    """
    ||sum_{n<M} exp(2 pi i n^2 t)||_{L^exponent([0,1])}.

    The sum is 1-periodic in t. Sampling starts at floor_factor * M^2 points; an
    exponent of infinity gives M, attained at t = 0.
    """
    if math.isinf(exponent):
        return NormValue(value=float(M), n_t_used=1, rel_change=0.0, doublings=0)
    start = next_power_of_two(max(DEFAULT_NT_START, floor_factor * M * M))
    cap = max(n_cap, 2 * start)

    def evaluate(times: np.ndarray) -> np.ndarray:
        # lp_time_norm always samples the midpoints of [0, 1]
        return np.abs(weyl_sum_midpoints(M, len(times)))

    return lp_time_norm(evaluate, (0.0, 1.0), exponent, n_start=start, n_cap=cap, rtol=rtol,
                        label=f"Weyl sum norm M={M}")
