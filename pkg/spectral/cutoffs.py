"""
Smooth dyadic Littlewood-Paley cutoffs psi_N.

psi is the smooth step h(2-|s|) / (h(2-|s|) + h(|s|-1)) with h(x) = exp(-1/x) for x > 0:
even, equal to 1 on |s| <= 1 and supported in (-2, 2). Then psi_1(xi) = psi(|xi|) and
psi_N(xi) = psi(|xi|/N) - psi(2|xi|/N) for N >= 2, so the psi_N sum telescopes.
"""
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from utils.errors import UsageError


logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def is_dyadic(n) -> bool:
    """True for integer powers of two >= 1."""
    try:
        value = int(n)
    except (TypeError, ValueError):
        return False
    return value == n and value >= 1 and (value & (value - 1)) == 0


def dyadic_range(lo: int, hi: int) -> list:
    """Dyadic numbers lo, 2lo, ..., hi (both ends dyadic)."""
    if not (is_dyadic(lo) and is_dyadic(hi)) or lo > hi:
        raise UsageError(f"Dyadic range needs dyadic lo <= hi, got {lo}..{hi}")
    values = []
    n = lo
    while n <= hi:
        values.append(n)
        n *= 2
    return values


def _h(x: np.ndarray) -> np.ndarray:
    positive = x > 0
    safe = np.where(positive, x, 1.0)
    return np.where(positive, np.exp(-1.0 / safe), 0.0)


def smooth_step(s: ArrayLike) -> ArrayLike:
    """The base bump psi evaluated at real s."""
    a = np.abs(np.asarray(s, dtype=np.float64))
    rise = _h(2.0 - a)
    fall = _h(a - 1.0)
    values = rise / (rise + fall)
    if np.ndim(values) == 0:
        return float(values)
    return values


def _radius(xi: ArrayLike, radial: bool) -> np.ndarray:
    arr = np.asarray(xi, dtype=np.float64)
    if radial:
        return np.abs(arr)
    return np.sqrt(np.sum(arr ** 2, axis=-1))


@dataclass(frozen=True)
class DyadicCutoff:
    """Evaluator xi -> psi_N(xi) for a dyadic N."""
    N: int

    @property
    def outer_radius(self) -> float:
        return 2.0 * self.N

    @property
    def inner_radius(self) -> float:
        return 0.0 if self.N == 1 else self.N / 2.0

    def __call__(self, xi: ArrayLike, radial: bool = False) -> ArrayLike:
        """
        Evaluate psi_N.

        Args:
            xi: Frequencies of shape (..., d), or radii when radial=True
            radial: Interpret xi as |xi| directly
        """
        r = _radius(xi, radial)
        if self.N == 1:
            values = smooth_step(r)
        else:
            values = smooth_step(r / self.N) - smooth_step(2.0 * r / self.N)
        if np.ndim(values) == 0:
            return float(values)
        return values


@dataclass(frozen=True)
class LowPassCutoff:
    """Symbol psi(|xi|/N) of P_{<=N} = sum_{M<=N} P_M."""
    N: int

    @property
    def outer_radius(self) -> float:
        return 2.0 * self.N

    def __call__(self, xi: ArrayLike, radial: bool = False) -> ArrayLike:
        values = smooth_step(_radius(xi, radial) / self.N)
        if np.ndim(values) == 0:
            return float(values)
        return values


def make_cutoff(N: int) -> DyadicCutoff:
    """
    Construct psi_N.

    Raises:
        UsageError: If N is not a dyadic integer >= 1
    """
    if not is_dyadic(N):
        raise UsageError(f"Cutoff scale must be dyadic (power of two >= 1), got: {N}")
    return DyadicCutoff(int(N))


def make_low_pass(N: int) -> LowPassCutoff:
    if not is_dyadic(N):
        raise UsageError(f"Cutoff scale must be dyadic (power of two >= 1), got: {N}")
    return LowPassCutoff(int(N))
