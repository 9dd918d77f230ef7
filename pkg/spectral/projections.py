"""
Fourier multipliers P_S, P_N, P_{<=N} and the strip decomposition used for almost
orthogonality in time.
"""
import logging
from dataclasses import dataclass
from typing import List, Union

import numpy as np

from spectral.cutoffs import DyadicCutoff, LowPassCutoff, is_dyadic
from spectral.regions import CubeRegion, FrequencyRegion, StripRegion, strip_index
from spectral.state import FourierState
from utils.errors import DegenerateCenterError, UsageError


logger = logging.getLogger(__name__)

Symbol = Union[FrequencyRegion, DyadicCutoff, LowPassCutoff]


def project(state: FourierState, region: Symbol) -> FourierState:
    """
    Apply the multiplier with symbol chi_S (sharp region) or psi_N / psi(|.|/N) (smooth).

    Coefficients multiplied to zero are dropped from the support.
    """
    if len(state) == 0:
        return state
    if isinstance(region, (DyadicCutoff, LowPassCutoff)):
        weights = np.asarray(region(state.modes), dtype=np.float64)
        return state.with_coeffs(state.coeffs * weights)

    if region.d != state.d:
        raise UsageError(f"Region dimension {region.d} does not match state dimension {state.d}")
    mask = region.contains(state.modes)
    return FourierState(state.torus, state.modes[mask], state.coeffs[mask])


@dataclass(frozen=True)
class StripDecomposition:
    """Partition of a cube into slabs orthogonal to its centre xi0, of width M."""
    cube: CubeRegion
    xi0: tuple
    M: float
    strips: List[StripRegion]

    @property
    def indices(self) -> List[int]:
        return [s.ell for s in self.strips]

    def __len__(self) -> int:
        return len(self.strips)


def strip_width(N1: int, N2: int) -> float:
    """M = max{N2^2 / N1, 1}."""
    return max(N2 * N2 / N1, 1.0)


def strip_decompose(cube: CubeRegion, N1: int, N2: int) -> StripDecomposition:
    """
    Split cube (a member of C_{N2} centred at xi0 != 0) into the strips R_l.

    Raises:
        UsageError: If N1, N2 are not dyadic with N1 >= N2, or the cube is wider than N2
        DegenerateCenterError: If the cube is centred at the origin
    """
    if not (is_dyadic(N1) and is_dyadic(N2)):
        raise UsageError(f"Strip scales must be dyadic, got N1={N1}, N2={N2}")
    if N1 < N2:
        raise UsageError(f"Strip decomposition needs N1 >= N2, got N1={N1}, N2={N2}")
    if cube.N > N2:
        raise UsageError(f"Cube half-width {cube.N} exceeds N2={N2}")

    xi0 = np.asarray(cube.center, dtype=np.int64)
    if not np.any(xi0):
        raise DegenerateCenterError("Strip decomposition needs a nonzero cube centre")

    M = strip_width(N1, N2)
    points = cube.lattice_points()
    ells = np.unique(strip_index(points, xi0, M))
    strips = [StripRegion(cube, tuple(xi0), M, int(ell)) for ell in ells]

    logger.debug(
        "Strip decomposition built",
        extra={"xi0": cube.center, "M": M, "strips": len(strips), "points": len(points)}
    )
    return StripDecomposition(cube=cube, xi0=tuple(int(v) for v in xi0), M=M, strips=strips)
