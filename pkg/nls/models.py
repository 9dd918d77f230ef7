"""
Data models for the split-step NLS solver.
"""
import math
from dataclasses import dataclass, field
from typing import List, Optional

from spectral.state import FourierState
from spectral.torus import IrrationalTorus
from utils.errors import UsageError


FOCUSING = 1
DEFOCUSING = -1

# Step count may differ from T/dt by this much before it counts as a mismatch.
_STEP_SLACK = 1e-9


@dataclass(frozen=True)
class NLSProblem:
    """
    Cauchy problem i u_t - Delta u = sign |u|^{2k} u, u(0) = initial.

    sign = +1 is focusing (the potential enters the energy with a minus sign).
    dt may be negative for backward integration as long as T has the same sign.
    grid_per_dim defaults to the smallest power of two above 2(k+1)K, K the data band.
    """
    torus: IrrationalTorus
    k: int
    sign: int
    initial: FourierState
    T: float
    dt: float
    grid_per_dim: Optional[int] = None
    band: Optional[int] = None
    nonlinear: bool = True
    output_every: int = 1
    blowup_ceiling: float = 1e6

    def __post_init__(self):
        if self.k < 1:
            raise UsageError(f"Nonlinearity degree k must be >= 1, got: {self.k}")
        if self.sign not in (FOCUSING, DEFOCUSING):
            raise UsageError(f"sign must be +1 or -1, got: {self.sign}")
        if self.initial.torus != self.torus:
            raise UsageError("Initial data lives on a different torus")
        if self.dt == 0 or not math.isfinite(self.dt):
            raise UsageError(f"Time step must be nonzero and finite, got: {self.dt}")
        if self.T != 0 and (self.T > 0) != (self.dt > 0):
            raise UsageError(f"T={self.T} and dt={self.dt} must share a sign")
        steps = self.T / self.dt
        if abs(steps - round(steps)) > _STEP_SLACK * max(1.0, abs(steps)):
            raise UsageError(f"T={self.T} is not an integer multiple of dt={self.dt}")
        if self.output_every < 1:
            raise UsageError(f"output_every must be >= 1, got: {self.output_every}")
        if self.band is not None and self.band < self.initial.max_frequency():
            raise UsageError(f"Band {self.band} is narrower than the initial data")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def data_band(self) -> int:
        return self.initial.max_frequency() if self.band is None else int(self.band)


@dataclass(frozen=True)
class ConservedQuantities:
    """Mass, energies and norms of one solution frame."""
    t: float
    mass: float
    energy_weighted: float
    energy_unweighted: float
    h_sc: float
    sup_norm: float

    def to_dict(self) -> dict:
        """Convert to a CSV-ready dictionary."""
        return {
            't': self.t,
            'mass': self.mass,
            'energy_weighted': self.energy_weighted,
            'energy_unweighted': self.energy_unweighted,
            'h_sc': self.h_sc,
            'sup_norm': self.sup_norm,
        }


@dataclass(frozen=True)
class TrajectoryFrame:
    t: float
    state: FourierState
    quantities: ConservedQuantities


@dataclass
class Trajectory:
    """Frames of one solve, in time order."""
    problem: NLSProblem
    grid_size: int
    frames: List[TrajectoryFrame] = field(default_factory=list)

    @property
    def final(self) -> TrajectoryFrame:
        return self.frames[-1]

    def max_drift(self, attribute: str) -> float:
        """max_t |q(t) - q(0)| for a ConservedQuantities field."""
        if not self.frames:
            return 0.0
        start = getattr(self.frames[0].quantities, attribute)
        return max(abs(getattr(f.quantities, attribute) - start) for f in self.frames)

    def rows(self) -> List[dict]:
        return [f.quantities.to_dict() for f in self.frames]
