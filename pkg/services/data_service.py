"""
Test data on frequency regions: Dirichlet-kernel, random-phase and Gaussian coefficients.
"""
import logging
import math

import numpy as np

from spectral.regions import FrequencyRegion
from spectral.state import FourierState
from spectral.torus import IrrationalTorus
from utils.errors import UsageError
from utils.seeding import derive_rng


logger = logging.getLogger(__name__)

FAMILIES = ("dirichlet", "random_phase", "gaussian")


def make_data(torus: IrrationalTorus, region: FrequencyRegion, family: str, seed: int = 0, *labels) -> FourierState:
    """
    Coefficients on every lattice point of a region.

    dirichlet: all ones. random_phase: i.i.d. unimodular. gaussian: i.i.d. complex
    standard normal (E|c|^2 = 1). The random stream is derived from (seed, *labels).

    Raises:
        UsageError: On an unknown family, a dimension mismatch, or an empty region
    """
    if family not in FAMILIES:
        raise UsageError(f"Unknown data family '{family}', expected one of {FAMILIES}")
    if region.d != torus.d:
        raise UsageError(f"Region dimension {region.d} does not match torus dimension {torus.d}")
    points = region.lattice_points()
    if len(points) == 0:
        if family == "dirichlet":
            raise UsageError("Dirichlet data needs a nonempty region")
        return FourierState.zero(torus)

    if family == "dirichlet":
        coeffs = np.ones(len(points), dtype=np.complex128)
    else:
        rng = derive_rng(seed, family, *labels)
        if family == "random_phase":
            coeffs = np.exp(2j * math.pi * rng.random(len(points)))
        else:
            coeffs = (rng.standard_normal(len(points)) + 1j * rng.standard_normal(len(points))) / math.sqrt(2.0)

    state = FourierState(torus, points, coeffs)
    logger.debug(
        "Data built",
        extra={"family": family, "modes": len(state), "l2": state.l2_norm()}
    )
    return state
