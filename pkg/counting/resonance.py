"""
Resonance counts of the trilinear 2d interaction and their level-set majorant.

For fixed a and cubes C2, C3 the pairs (n, m) with |Q(a-n-m) + Q(n) + Q(m) - k| <= 1/2
satisfy |Q(3(n+m) - 2a) + 3Q(n-m) + 2Q(a) - 6k| <= 3. In the substituted variables
(3(n+m) - 2a, n-m) the pair therefore lies in the level set of f = Q(.) + 3Q(.) at
l = floor(6k - 2Q(a)) with radius 4, and the map (n, m) -> (n+m, n-m) is injective.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from counting.level_sets import level_set_counts
from spectral.regions import CubeRegion
from spectral.torus import IrrationalTorus, quadratic_form
from utils.errors import UsageError


logger = logging.getLogger(__name__)

SUBSTITUTED_RADIUS = 4.0


@dataclass(frozen=True)
class ResonanceInstance:
    """Counts for one (a, C2, C3): resonant pairs per k against #S_l of the substituted set."""
    a: tuple
    pairs: int
    worst_ratio: float
    levels_checked: int

    @property
    def passed(self) -> bool:
        return self.worst_ratio <= 1.0

    def to_dict(self) -> dict:
        return {
            'a': list(self.a),
            'pairs': self.pairs,
            'worst_ratio': self.worst_ratio,
            'levels_checked': self.levels_checked,
            'pass': self.passed,
        }


def _pairs(c2: np.ndarray, c3: np.ndarray):
    n = np.repeat(c2, len(c3), axis=0)
    m = np.tile(c3, (len(c2), 1))
    return n, m


def resonance_instance(torus: IrrationalTorus, a: Sequence[int], cube2: CubeRegion, cube3: CubeRegion) -> ResonanceInstance:
    """
    Compare #{(n,m) in C2 x C3 : |Q(a-n-m)+Q(n)+Q(m)-k| <= 1/2} with #S_l for every k.

    Raises:
        UsageError: If the cubes or a do not match the torus dimension
    """
    a = np.asarray(a, dtype=np.int64)
    if len(a) != torus.d or cube2.d != torus.d or cube3.d != torus.d:
        raise UsageError("Resonance instance dimensions must match the torus")

    n, m = _pairs(cube2.lattice_points(), cube3.lattice_points())
    resonance = (
        quadratic_form(torus, a[None, :] - n - m)
        + quadratic_form(torus, n)
        + quadratic_form(torus, m)
    )
    resonant = level_set_counts(n, resonance, 0.5)

    substituted = quadratic_form(torus, 3 * (n + m) - 2 * a[None, :]) + 3.0 * quadratic_form(torus, n - m)
    majorant = level_set_counts(n, substituted, SUBSTITUTED_RADIUS)

    q_a = quadratic_form(torus, a)
    worst = 0.0
    for k in resonant.ks:
        ell = math.floor(6 * k - 2 * q_a)
        bound = majorant.count(ell)
        ratio = math.inf if bound == 0 else resonant.count(k) / bound
        worst = max(worst, ratio)

    return ResonanceInstance(
        a=tuple(int(v) for v in a),
        pairs=len(n),
        worst_ratio=worst,
        levels_checked=len(resonant.ks),
    )
