"""
Strang split-step pseudospectral solver for i u_t - Delta u = sign |u|^{2k} u on an
irrational torus, with Delta_hat(n) = -4 pi^2 Q(n).

Linear sub-flow: u_hat(n) -> exp(4 pi^2 i Q(n) dt) u_hat(n).
Nonlinear sub-flow: u(x) -> exp(-i sign |u(x)|^{2k} dt) u(x), exact since |u| is constant along it.
After every nonlinear step the spectrum is truncated to the data band K; the grid
satisfies G > 2(k+1)K, so the degree-(2k+1) product does not alias into the band and
the potential energy grid mean is exact.
"""
import logging
import math
from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from nls.models import ConservedQuantities, NLSProblem, Trajectory, TrajectoryFrame
from norms.mixed_norms import h_s_norm
from spectral.propagator import PDE_CLOCK, propagate, smallest_power_of_two_above
from spectral.state import FourierState
from spectral.torus import IrrationalTorus, critical_index
from utils.errors import BlowUpError, ResolutionError


logger = logging.getLogger(__name__)


def linear_step(state: FourierState, dt: float) -> FourierState:
    """Exact flow of i u_t = Delta u over dt."""
    return propagate(state, dt, clock="pde")


def nonlinear_step(field_values: np.ndarray, dt: float, k: int, sign: int) -> np.ndarray:
    """Pointwise u * exp(-i sign |u|^{2k} dt)."""
    u = np.asarray(field_values, dtype=np.complex128)
    modulus_sq = (u.real * u.real) + (u.imag * u.imag)
    return u * np.exp(-1j * sign * dt * modulus_sq ** k)


def dealiased_grid_size(k: int, band: int) -> int:
    """Smallest power of two above 2(k+1)K."""
    return smallest_power_of_two_above(2 * (k + 1) * band)


def _frequency_mesh(grid_size: int, d: int) -> np.ndarray:
    freqs = np.rint(sp_fft.fftfreq(grid_size, d=1.0 / grid_size)).astype(np.int64)
    return np.stack(np.meshgrid(*([freqs] * d), indexing="ij"), axis=-1)


class SplitStepSolver:
    """Holds the dense spectral grid of one problem and advances it."""

    def __init__(self, problem: NLSProblem, workers: Optional[int] = None):
        self.problem = problem
        self.torus = problem.torus
        self.d = problem.torus.d
        self.band = problem.data_band
        self.grid_size = problem.grid_per_dim or dealiased_grid_size(problem.k, max(self.band, 1))
        if self.grid_size <= 2 * (problem.k + 1) * self.band:
            raise ResolutionError(
                f"Grid {self.grid_size} must exceed 2(k+1)K = {2 * (problem.k + 1) * self.band}"
            )
        self.workers = workers

        mesh = _frequency_mesh(self.grid_size, self.d)
        self._q = mesh.astype(np.float64) ** 2 @ self.torus.alpha_array
        self._abs_sq = np.sum(mesh.astype(np.float64) ** 2, axis=-1)
        self._band_mask = np.abs(mesh).max(axis=-1) <= self.band
        self._axes = tuple(range(self.d))
        half = problem.dt / 2.0
        self._half_linear = np.exp(1j * PDE_CLOCK * self._q * half)
        self.s_c = float(critical_index(self.d, problem.k))

    def to_field(self, coeffs: np.ndarray) -> np.ndarray:
        return sp_fft.ifftn(coeffs, axes=self._axes, norm="forward", workers=self.workers)

    def to_coeffs(self, field_values: np.ndarray) -> np.ndarray:
        return sp_fft.fftn(field_values, axes=self._axes, norm="forward", workers=self.workers)

    def step(self, coeffs: np.ndarray) -> tuple:
        """One Strang step; returns (new coefficients, sup norm of the nonlinear stage)."""
        p = self.problem
        coeffs = coeffs * self._half_linear
        if p.nonlinear:
            u = nonlinear_step(self.to_field(coeffs), p.dt, p.k, p.sign)
            sup_norm = float(np.abs(u).max())
            coeffs = self.to_coeffs(u)
            coeffs[~self._band_mask] = 0.0
        else:
            sup_norm = math.nan
        coeffs = coeffs * self._half_linear
        return coeffs, sup_norm

    def quantities(self, coeffs: np.ndarray, t: float) -> ConservedQuantities:
        p = self.problem
        power = np.abs(coeffs) ** 2
        kinetic_weighted = 0.5 * PDE_CLOCK * float(np.sum(self._q * power))
        kinetic_unweighted = 0.5 * PDE_CLOCK * float(np.sum(self._abs_sq * power))
        u = self.to_field(coeffs)
        modulus = np.abs(u)
        potential = float(np.mean(modulus ** (2 * p.k + 2))) / (2 * p.k + 2) if p.nonlinear else 0.0
        state = FourierState.from_dense(self.torus, coeffs, band=self.band)
        return ConservedQuantities(
            t=t,
            mass=0.5 * float(np.sum(power)),
            energy_weighted=kinetic_weighted - p.sign * potential,
            energy_unweighted=kinetic_unweighted - p.sign * potential,
            h_sc=h_s_norm(state, self.s_c),
            sup_norm=float(modulus.max()),
        )

    def run(self) -> Trajectory:
        """
        Integrate to T, recording a frame every output_every steps and at the end.

        Raises:
            BlowUpError: If the sup norm exceeds the problem's ceiling
        """
        p = self.problem
        coeffs = p.initial.to_dense(self.grid_size)
        trajectory = Trajectory(problem=p, grid_size=self.grid_size)
        trajectory.frames.append(self._frame(coeffs, 0.0))

        for n in range(1, p.steps + 1):
            coeffs, sup_norm = self.step(coeffs)
            t = n * p.dt
            if not math.isnan(sup_norm) and (sup_norm > p.blowup_ceiling or not math.isfinite(sup_norm)):
                logger.warning(
                    f"Blow-up guard triggered at t={t:.6f}",
                    extra={"sup_norm": sup_norm, "ceiling": p.blowup_ceiling}
                )
                raise BlowUpError(t, sup_norm, p.blowup_ceiling)
            if n % p.output_every == 0 or n == p.steps:
                trajectory.frames.append(self._frame(coeffs, t))

        logger.debug(
            "NLS solve finished",
            extra={"steps": p.steps, "grid": self.grid_size, "frames": len(trajectory.frames)}
        )
        return trajectory

    def _frame(self, coeffs: np.ndarray, t: float) -> TrajectoryFrame:
        quantities = self.quantities(coeffs, t)
        state = FourierState.from_dense(self.torus, coeffs, band=self.band)
        return TrajectoryFrame(t=t, state=state, quantities=quantities)


def solve(problem: NLSProblem, workers: Optional[int] = None) -> Trajectory:
    """Strang-split solution of the problem; see SplitStepSolver.run."""
    return SplitStepSolver(problem, workers=workers).run()


def conserved(
    state: FourierState,
    k: int,
    sign: int,
    grid_per_dim: Optional[int] = None,
    t: float = 0.0,
) -> ConservedQuantities:
    """
    Mass, weighted and unweighted energies, H^{s_c} and sup norms of a state.

    Raises:
        ResolutionError: If grid_per_dim cannot integrate |u|^{2k+2} exactly
    """
    band = state.max_frequency()
    grid = grid_per_dim or dealiased_grid_size(k, max(band, 1))
    problem = NLSProblem(
        torus=state.torus, k=k, sign=sign, initial=state, T=0.0, dt=1.0, grid_per_dim=grid,
    )
    solver = SplitStepSolver(problem)
    return solver.quantities(state.to_dense(solver.grid_size), t)


def plane_wave_solution(torus: IrrationalTorus, n0, amplitude: complex, k: int, sign: int, t: float) -> FourierState:
    """Exact solution A exp(2 pi i n0.x) exp(i (4 pi^2 Q(n0) - sign |A|^{2k}) t)."""
    start = FourierState.single_mode(torus, n0, amplitude)
    phase = -sign * abs(amplitude) ** (2 * k) * t
    return propagate(start, t, clock="pde").with_phase(phase)
