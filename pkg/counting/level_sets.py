"""
Level sets S_k = {n in S : |f(n) - k| <= r} of a real function on a finite lattice set.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Union

import numpy as np

from norms.mixed_norms import seq_lp
from utils.errors import UsageError


logger = logging.getLogger(__name__)

PhaseFunction = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


def phase_values(points: np.ndarray, f: PhaseFunction) -> np.ndarray:
    """
    f evaluated on every point of S; f may be a callable or precomputed values.

    Raises:
        UsageError: If precomputed values do not match the number of points
    """
    points = np.asarray(points)
    count = len(points)
    if callable(f):
        values = np.asarray(f(points), dtype=np.float64).reshape(-1)
    else:
        values = np.asarray(f, dtype=np.float64).reshape(-1)
    if len(values) != count:
        raise UsageError(f"Got {len(values)} phase values for {count} points")
    return values


def _k_ranges(values: np.ndarray, r: float):
    """Smallest and largest integer k with |v - k| <= r, evaluated with the literal predicate."""
    lo = np.ceil(values - r).astype(np.int64)
    hi = np.floor(values + r).astype(np.int64)
    # floating rounding in v - r can move the boundary by one
    lo = np.where(np.abs(values - (lo - 1)) <= r, lo - 1, lo)
    lo = np.where(np.abs(values - lo) > r, lo + 1, lo)
    hi = np.where(np.abs(values - (hi + 1)) <= r, hi + 1, hi)
    hi = np.where(np.abs(values - hi) > r, hi - 1, hi)
    return lo, hi


@dataclass(frozen=True)
class LevelSetFamily:
    """Counts #S_k for every k with a nonempty level set."""
    size: int
    r: float
    counts: Dict[int, int] = field(default_factory=dict)
    exploratory: bool = False

    @property
    def ks(self) -> list:
        return sorted(self.counts)

    def count(self, k: int) -> int:
        return self.counts.get(int(k), 0)

    def total(self) -> int:
        return sum(self.counts.values())

    def lp(self, p: float) -> float:
        return seq_lp([self.counts[k] for k in self.ks], p)

    def to_dict(self) -> dict:
        return {
            'size': self.size,
            'r': self.r,
            'exploratory': self.exploratory,
            'counts': {str(k): self.counts[k] for k in self.ks},
        }


def level_set_counts(points: np.ndarray, f: PhaseFunction, r: float) -> LevelSetFamily:
    """
    Exact counts #{n in S : |f(n) - k| <= r} for all integers k.

    Each point contributes one to every k in its admissible integer range; the ranges
    are accumulated with a difference array so the result is integer exact. r < 1 is
    allowed for exploration and flagged.

    Raises:
        UsageError: If r is negative
    """
    if r < 0:
        raise UsageError(f"Level-set radius must be nonnegative, got: {r}")
    values = phase_values(points, f)
    exploratory = r < 1
    if exploratory:
        logger.debug(f"Level-set radius {r} below 1, counts are exploratory")
    if len(values) == 0:
        return LevelSetFamily(size=0, r=float(r), counts={}, exploratory=exploratory)

    lo, hi = _k_ranges(values, r)
    keep = hi >= lo
    lo, hi = lo[keep], hi[keep]
    if len(lo) == 0:
        return LevelSetFamily(size=len(values), r=float(r), counts={}, exploratory=exploratory)

    base = int(lo.min())
    diff = np.zeros(int(hi.max()) - base + 2, dtype=np.int64)
    np.add.at(diff, lo - base, 1)
    np.add.at(diff, hi - base + 1, -1)
    running = np.cumsum(diff)[:-1]

    counts = {base + int(i): int(c) for i, c in enumerate(running) if c > 0}
    return LevelSetFamily(size=len(values), r=float(r), counts=counts, exploratory=exploratory)
