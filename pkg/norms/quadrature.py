"""
Time quadrature with a doubling certificate.

L^p(tau) norms of a sampled nonnegative function g(t) are computed with the uniform
midpoint rule; the sample count doubles until two successive values agree to rtol.
"""
import logging
import math
from dataclasses import dataclass, asdict
from typing import Callable, Tuple

import numpy as np

from utils.errors import ConvergenceError, DomainError


logger = logging.getLogger(__name__)

DEFAULT_NT_START = 64
DEFAULT_NT_CAP = 2 ** 20
DEFAULT_RTOL = 5e-3


@dataclass(frozen=True)
class NormValue:
    """A computed norm with its quadrature metadata."""
    value: float
    n_t_used: int
    rel_change: float
    doublings: int
    grid_used: int = 0

    def to_dict(self) -> dict:
        """Convert to a JSON-ready dictionary."""
        return asdict(self)


def midpoint_times(tau: Tuple[float, float], n_t: int) -> np.ndarray:
    t0, t1 = tau
    h = (t1 - t0) / n_t
    return t0 + h * (np.arange(n_t, dtype=np.float64) + 0.5)


def lp_mean(values: np.ndarray, p: float, length: float) -> float:
    """(h sum g^p)^{1/p} over n samples of an interval of the given length; p=inf gives max."""
    values = np.asarray(values, dtype=np.float64)
    if math.isinf(p):
        return float(values.max()) if len(values) else 0.0
    h = length / len(values)
    peak = float(values.max()) if len(values) else 0.0
    if peak == 0.0:
        return 0.0
    # scale by the peak so large p cannot overflow
    return peak * float((h * np.sum((values / peak) ** p)) ** (1.0 / p))


def next_power_of_two(value: float) -> int:
    n = 1
    while n < value:
        n *= 2
    return n


def lp_time_norm(
    evaluate: Callable[[np.ndarray], np.ndarray],
    tau: Tuple[float, float],
    p: float,
    n_start: int = DEFAULT_NT_START,
    n_cap: int = DEFAULT_NT_CAP,
    rtol: float = DEFAULT_RTOL,
    label: str = "time norm",
    exact: bool = False,
) -> NormValue:
    """
    ||g||_{L^p(tau)} with g evaluated by evaluate(times) -> values >= 0.

    exact=True declares the n_start-point midpoint rule exact for g^p; the first
    evaluation is returned without doubling.

    Raises:
        DomainError: If p < 1 or the interval is empty
        ConvergenceError: If successive doublings still differ by more than rtol at n_cap
    """
    if p < 1:
        raise DomainError(f"Time exponent must be >= 1, got: {p}")
    t0, t1 = tau
    if not t0 < t1:
        raise DomainError(f"Time interval must satisfy t0 < t1, got: {tau}")
    length = t1 - t0

    n_t = max(2, min(int(n_start), int(n_cap)))
    previous = lp_mean(evaluate(midpoint_times(tau, n_t)), p, length)
    if exact:
        return NormValue(value=previous, n_t_used=n_t, rel_change=0.0, doublings=0)
    doublings = 0
    while True:
        if n_t * 2 > n_cap:
            raise ConvergenceError(f"{label} did not converge by n_t={n_cap}", previous, previous, n_t)
        n_t *= 2
        doublings += 1
        current = lp_mean(evaluate(midpoint_times(tau, n_t)), p, length)
        scale = max(abs(current), abs(previous))
        change = 0.0 if scale == 0 else abs(current - previous) / scale
        if change < rtol:
            logger.debug(
                f"{label} converged",
                extra={"n_t": n_t, "rel_change": change, "value": current}
            )
            return NormValue(value=current, n_t_used=n_t, rel_change=change, doublings=doublings)
        if n_t * 2 > n_cap:
            raise ConvergenceError(f"{label} did not converge by n_t={n_cap}", previous, current, n_t)
        previous = current
