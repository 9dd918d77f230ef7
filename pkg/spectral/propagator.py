"""
Exact linear Schroedinger propagator on Fourier states and evaluation on uniform grids.

Two clocks are available. The estimate clock multiplies phi_hat(n) by exp(2 pi i Q(n) t);
the PDE clock multiplies by exp(4 pi^2 i Q(n) t), the flow of i u_t = Delta u with
Delta_hat = -4 pi^2 Q. The PDE clock at time t equals the estimate clock at 2 pi t.
"""
import logging
import math
from typing import Iterator, List, Sequence

import numpy as np
from scipy import fft as sp_fft

from spectral.state import FourierState
from spectral.torus import quadratic_form
from utils.errors import ResolutionError, UsageError


logger = logging.getLogger(__name__)

ESTIMATE_CLOCK = 2.0 * math.pi
PDE_CLOCK = 4.0 * math.pi ** 2
CLOCKS = {"estimate": ESTIMATE_CLOCK, "pde": PDE_CLOCK}

# Complex entries per batched transform (64 MiB of complex128).
_BATCH_ELEMENTS = 1 << 22


def clock_rate(clock: str) -> float:
    try:
        return CLOCKS[clock]
    except KeyError:
        raise UsageError(f"Unknown clock '{clock}', expected one of {sorted(CLOCKS)}")


def propagate(state: FourierState, t: float, clock: str = "estimate") -> FourierState:
    """e^{it Delta} phi: multiply each coefficient by exp(i rate Q(n) t); support unchanged."""
    if len(state) == 0 or t == 0:
        return state
    phases = np.exp(1j * clock_rate(clock) * t * quadratic_form(state.torus, state.modes))
    return FourierState(state.torus, state.modes, state.coeffs * phases)


def smallest_power_of_two_above(value: float) -> int:
    """Smallest power of two strictly greater than value (at least 1)."""
    g = 1
    while g <= value:
        g *= 2
    return g


def sample_grid(state: FourierState, grid_size_per_dim: int) -> np.ndarray:
    """
    Evaluate u(x_m) = sum_n phi_hat(n) exp(2 pi i n . x_m) at x_m = m / G.

    Raises:
        ResolutionError: If G does not exceed twice the largest |n_j|
    """
    G = int(grid_size_per_dim)
    if G <= 2 * state.max_frequency():
        raise ResolutionError(
            f"Grid size {G} does not exceed twice the max frequency {state.max_frequency()}"
        )
    return sp_fft.ifftn(state.to_dense(G), norm="forward")


def even_ceiling(q: float) -> int:
    """Round q up to an even integer; infinity counts as 2 (max over samples)."""
    if math.isinf(q):
        return 2
    n = math.ceil(q)
    return n if n % 2 == 0 else n + 1


def product_grid_size(factors: Sequence[FourierState], q: float) -> int:
    """
    Smallest power of two giving an exact space quadrature of |prod u_j|^q, with N the
    largest per-factor half-span: > q * J * N for even finite q (|prod u_j|^q then has
    half-span q J N), > 2 * even_ceiling(q) * J * N otherwise.
    """
    J = len(factors)
    radius = max((f.half_span() for f in factors), default=0)
    if not math.isinf(q) and q == even_ceiling(q):
        return smallest_power_of_two_above(max(q * J * radius, 2 * radius))
    return smallest_power_of_two_above(2 * even_ceiling(q) * J * radius)


class ProductSampler:
    """
    Evaluates prod_j (e^{it Delta} phi_j)(x_m) on a grid for batches of times.

    Each factor is recentred by its integer support centre before the transform.
    That multiplies the factor by a unimodular plane wave, so |product| is unchanged
    while the grid only needs to resolve support spans. Phases use absolute modes.
    """

    def __init__(self, factors: Sequence[FourierState], grid_size: int, clock: str = "estimate"):
        if not factors:
            raise UsageError("ProductSampler needs at least one factor")
        torus = factors[0].torus
        if any(f.torus != torus for f in factors):
            raise UsageError("All factors must live on the same torus")

        self.factors = list(factors)
        self.grid_size = int(grid_size)
        self.d = torus.d
        self.rate = clock_rate(clock)

        for f in self.factors:
            if 2 * f.half_span() >= self.grid_size:
                raise ResolutionError(
                    f"Grid size {self.grid_size} cannot hold a factor of half-span {f.half_span()}"
                )

        self._indices: List[tuple] = []
        self._q_values: List[np.ndarray] = []
        for f in self.factors:
            idx = np.mod(f.modes - f.support_center(), self.grid_size)
            self._indices.append(tuple(idx.T))
            self._q_values.append(np.asarray(quadratic_form(torus, f.modes), dtype=np.float64)
                                  if len(f) else np.zeros(0))

    @property
    def time_frequency_spread(self) -> float:
        """sum_j (max Q - min Q) over each support, times the clock rate / 2 pi."""
        spread = sum(float(q.max() - q.min()) for q in self._q_values if len(q))
        return spread * self.rate / (2.0 * math.pi)

    def integer_frequencies(self, atol: float = 1e-9) -> bool:
        """True when every rate * Q(n) / 2 pi is an integer, so fields are 1-periodic in t."""
        scale = self.rate / (2.0 * math.pi)
        return all(np.allclose(q * scale, np.rint(q * scale), rtol=0.0, atol=atol) for q in self._q_values)

    def batch_size(self) -> int:
        return max(1, _BATCH_ELEMENTS // (self.grid_size ** self.d))

    def fields(self, times: np.ndarray) -> np.ndarray:
        """Product field of shape (len(times),) + (G,)*d."""
        times = np.asarray(times, dtype=np.float64).reshape(-1)
        shape = (len(times),) + (self.grid_size,) * self.d
        product = np.ones(shape, dtype=np.complex128)
        axes = tuple(range(1, self.d + 1))
        for f, idx, qv in zip(self.factors, self._indices, self._q_values):
            if len(f) == 0:
                return np.zeros(shape, dtype=np.complex128)
            dense = np.zeros(shape, dtype=np.complex128)
            phases = np.exp(1j * self.rate * np.outer(times, qv))
            dense[(slice(None),) + idx] = phases * f.coeffs[None, :]
            product *= sp_fft.ifftn(dense, axes=axes, norm="forward")
        return product

    def iter_fields(self, times: np.ndarray) -> Iterator[np.ndarray]:
        """Yield product fields batch by batch in time order."""
        times = np.asarray(times, dtype=np.float64).reshape(-1)
        step = self.batch_size()
        for start in range(0, len(times), step):
            yield self.fields(times[start:start + step])
