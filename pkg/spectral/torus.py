"""
Irrational torus geometry: the anisotropic quadratic form and indices derived from (d, k).
"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from utils.errors import DomainError, UsageError


logger = logging.getLogger(__name__)

LatticePoint = Tuple[int, ...]
LatticeLike = Union[Sequence[int], np.ndarray]

SUPPORTED_DIMENSIONS = (2, 3)


@dataclass(frozen=True)
class IrrationalTorus:
    """
    Flat torus with aspect ratios alphas; carrier of Q(n) = sum_j alpha_j n_j^2.

    c_bound is metadata only. When omitted it is set to twice the largest of
    max(alpha) and 1/min(alpha), which satisfies 1/C < alpha_j < C.
    """
    alphas: Tuple[float, ...]
    c_bound: Optional[float] = None
    d: int = field(init=False)

    def __post_init__(self):
        alphas = tuple(float(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "d", len(alphas))

        if self.d not in SUPPORTED_DIMENSIONS:
            raise UsageError(f"Torus dimension must be one of {SUPPORTED_DIMENSIONS}, got: {self.d}")
        if any(not math.isfinite(a) or a <= 0 for a in alphas):
            raise UsageError(f"Aspect ratios must be positive and finite, got: {alphas}")

        if self.c_bound is None:
            spread = max(max(alphas), 1.0 / min(alphas))
            object.__setattr__(self, "c_bound", 2.0 * spread)

        c = float(self.c_bound)
        object.__setattr__(self, "c_bound", c)
        if c <= 1:
            raise UsageError(f"Bound C must exceed 1, got: {c}")
        for a in alphas:
            if not (1.0 / c < a < c):
                raise UsageError(f"Aspect ratio {a} violates 1/C < alpha < C with C={c}")

    @property
    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alphas, dtype=np.float64)

    @property
    def is_rational(self) -> bool:
        """True when every ratio alpha_j / alpha_1 is a fraction with small denominator."""
        base = self.alphas[0]
        for a in self.alphas[1:]:
            ratio = a / base
            approx = Fraction(ratio).limit_denominator(64)
            if abs(ratio - float(approx)) > 1e-12:
                return False
        return True

    def to_dict(self) -> dict:
        """Convert torus to dictionary."""
        return {
            'd': self.d,
            'alphas': list(self.alphas),
            'c_bound': self.c_bound,
            'rational': self.is_rational,
        }


def default_torus(d: int) -> IrrationalTorus:
    """Generic irrational torus: alpha = (1, sqrt 2) in 2d and (1, sqrt 2, sqrt 3) in 3d."""
    if d == 2:
        return IrrationalTorus((1.0, math.sqrt(2.0)))
    if d == 3:
        return IrrationalTorus((1.0, math.sqrt(2.0), math.sqrt(3.0)))
    raise UsageError(f"Torus dimension must be one of {SUPPORTED_DIMENSIONS}, got: {d}")


def rational_torus(d: int) -> IrrationalTorus:
    """Square control torus alpha = (1, ..., 1)."""
    return IrrationalTorus(tuple([1.0] * d))


def _as_lattice_array(n: LatticeLike, d: int) -> np.ndarray:
    arr = np.asarray(n)
    if arr.ndim == 0 or arr.shape[-1] != d:
        raise UsageError(f"Lattice point dimension {arr.shape[-1] if arr.ndim else 0} does not match torus dimension {d}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise UsageError("Lattice points must have integer coordinates")
        arr = arr.astype(np.int64)
    return arr


def quadratic_form(torus: IrrationalTorus, n: LatticeLike) -> Union[float, np.ndarray]:
    """
    Evaluate Q(n) = sum_j alpha_j n_j^2.

    Accepts a single point or an array of shape (..., d); returns a float or an array
    of shape (...).

    Raises:
        UsageError: If the point dimension differs from the torus dimension
    """
    arr = _as_lattice_array(n, torus.d)
    squares = arr.astype(np.float64) ** 2
    values = squares @ torus.alpha_array
    if np.ndim(values) == 0:
        return float(values)
    return values


def critical_index(d: int, k: int) -> Fraction:
    """
    Critical Sobolev index s_c = d/2 - 1/k as an exact rational.

    Raises:
        DomainError: If k == 0 or either argument is below 1
    """
    if k == 0:
        raise DomainError("Nonlinearity degree k must be nonzero")
    if d < 1 or k < 1:
        raise DomainError(f"Critical index needs d >= 1 and k >= 1, got d={d}, k={k}")
    return Fraction(d, 2) - Fraction(1, k)


def sobolev_weight(n: LatticeLike, s: float) -> Union[float, np.ndarray]:
    """<n>^{2s} = (1 + |n|^2)^s with the Euclidean (unweighted) length."""
    arr = np.asarray(n, dtype=np.float64)
    norm_sq = np.sum(arr ** 2, axis=-1) if arr.ndim else arr ** 2
    values = np.power(1.0 + norm_sq, s)
    if np.ndim(values) == 0:
        return float(values)
    return values
