"""
Finitely supported Fourier coefficient states on Z^d.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np
from scipy import fft as sp_fft

from spectral.torus import IrrationalTorus, LatticePoint
from utils.errors import UsageError


logger = logging.getLogger(__name__)


def _canonicalize(modes: np.ndarray, coeffs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Sort modes lexicographically and merge duplicates by summing their coefficients."""
    if len(modes) == 0:
        return modes, coeffs
    order = np.lexsort(modes.T[::-1])
    modes = modes[order]
    coeffs = coeffs[order]
    unique, inverse = np.unique(modes, axis=0, return_inverse=True)
    if len(unique) == len(modes):
        return modes, coeffs
    merged = np.zeros(len(unique), dtype=np.complex128)
    np.add.at(merged, inverse.reshape(-1), coeffs)
    return unique, merged


@dataclass(frozen=True, eq=False)
class FourierState:
    """
    Coefficients phi_hat(n) on a finite set of lattice points.

    modes has shape (m, d) and is sorted lexicographically without repeats;
    coeffs has shape (m,). Both arrays are read-only.
    """
    torus: IrrationalTorus
    modes: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        modes = np.asarray(self.modes, dtype=np.int64).reshape(-1, self.torus.d)
        coeffs = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if len(modes) != len(coeffs):
            raise UsageError(f"Got {len(modes)} modes but {len(coeffs)} coefficients")
        modes, coeffs = _canonicalize(modes, coeffs)
        modes = np.ascontiguousarray(modes)
        coeffs = np.ascontiguousarray(coeffs)
        modes.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, torus: IrrationalTorus) -> "FourierState":
        return cls(torus, np.zeros((0, torus.d), dtype=np.int64), np.zeros(0, dtype=np.complex128))

    @classmethod
    def from_mapping(cls, torus: IrrationalTorus, coefficients: Mapping[LatticePoint, complex]) -> "FourierState":
        """Build a state from a {lattice point: amplitude} mapping."""
        if not coefficients:
            return cls.zero(torus)
        modes = np.array([tuple(n) for n in coefficients.keys()], dtype=np.int64)
        coeffs = np.array(list(coefficients.values()), dtype=np.complex128)
        return cls(torus, modes, coeffs)

    @classmethod
    def single_mode(cls, torus: IrrationalTorus, n: Iterable[int], amplitude: complex = 1.0) -> "FourierState":
        return cls(torus, np.array([tuple(n)], dtype=np.int64), np.array([amplitude], dtype=np.complex128))

    @property
    def d(self) -> int:
        return self.torus.d

    def __len__(self) -> int:
        return len(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs != 0)

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.coeffs))

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        """Componentwise (min, max) of the support; both zero for the empty state."""
        if len(self) == 0:
            zeros = np.zeros(self.d, dtype=np.int64)
            return zeros, zeros.copy()
        return self.modes.min(axis=0), self.modes.max(axis=0)

    def max_frequency(self) -> int:
        """Largest |n_j| over the support."""
        if len(self) == 0:
            return 0
        return int(np.abs(self.modes).max())

    def support_center(self) -> np.ndarray:
        """Integer centre of the bounding box (rounded down)."""
        lo, hi = self.bounding_box()
        return (lo + hi) // 2

    def half_span(self) -> int:
        """Largest |n_j - c_j| over the support, c the integer box centre."""
        if len(self) == 0:
            return 0
        return int(np.abs(self.modes - self.support_center()).max())

    def l2_norm(self) -> float:
        """(sum |phi_hat(n)|^2)^{1/2}; the L^2 norm on the unit cell by Parseval."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def coefficient(self, n: Iterable[int]) -> complex:
        target = np.asarray(tuple(n), dtype=np.int64)
        hits = np.nonzero(np.all(self.modes == target, axis=1))[0]
        return complex(self.coeffs[hits[0]]) if len(hits) else 0j

    def as_dict(self) -> Dict[LatticePoint, complex]:
        return {tuple(int(v) for v in n): complex(c) for n, c in zip(self.modes, self.coeffs)}

    def with_coeffs(self, coeffs: np.ndarray) -> "FourierState":
        """Same support, new coefficients (zero entries are dropped)."""
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        keep = coeffs != 0
        return FourierState(self.torus, self.modes[keep], coeffs[keep])

    def scaled(self, factor: complex) -> "FourierState":
        return FourierState(self.torus, self.modes, self.coeffs * factor)

    def with_phase(self, theta: float) -> "FourierState":
        return self.scaled(np.exp(1j * theta))

    def add(self, other: "FourierState") -> "FourierState":
        self._check_same_torus(other)
        return FourierState(
            self.torus,
            np.concatenate([self.modes, other.modes]),
            np.concatenate([self.coeffs, other.coeffs]),
        )

    def equals(self, other: "FourierState", atol: float = 0.0) -> bool:
        """Coefficient-by-coefficient comparison on the union of supports."""
        self._check_same_torus(other)
        diff = self.add(other.scaled(-1.0))
        if len(diff) == 0:
            return True
        return bool(np.max(np.abs(diff.coeffs)) <= atol)

    def to_dense(self, grid_size: int, shift: Optional[np.ndarray] = None) -> np.ndarray:
        """
        Place coefficients into a (G,)*d array in FFT index order.

        Mode n lands at index (n - shift) mod G. Callers guarantee that the shifted
        support fits in (-G/2, G/2).
        """
        shift = np.zeros(self.d, dtype=np.int64) if shift is None else np.asarray(shift, dtype=np.int64)
        dense = np.zeros((grid_size,) * self.d, dtype=np.complex128)
        if len(self) == 0:
            return dense
        idx = np.mod(self.modes - shift, grid_size)
        dense[tuple(idx.T)] = self.coeffs
        return dense

    @classmethod
    def from_dense(
        cls,
        torus: IrrationalTorus,
        dense: np.ndarray,
        band: Optional[int] = None,
    ) -> "FourierState":
        """
        Read a (G,)*d FFT-ordered coefficient array back into a state.

        Only modes with max_j |n_j| <= band are kept (default: everything below Nyquist).
        """
        grid_size = dense.shape[0]
        freqs = np.rint(sp_fft.fftfreq(grid_size, d=1.0 / grid_size)).astype(np.int64)
        mesh = np.stack(np.meshgrid(*([freqs] * torus.d), indexing="ij"), axis=-1).reshape(-1, torus.d)
        values = dense.reshape(-1)
        limit = grid_size // 2 - 1 if band is None else band
        keep = (np.abs(mesh).max(axis=1) <= limit) & (values != 0)
        return cls(torus, mesh[keep], values[keep])

    def _check_same_torus(self, other: "FourierState") -> None:
        if other.torus != self.torus:
            raise UsageError("States live on different tori")

    def __repr__(self) -> str:
        return f"FourierState(d={self.d}, modes={len(self)}, l2={self.l2_norm():.6g})"
