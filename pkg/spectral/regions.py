"""
Frequency regions: dyadic annuli, cubes in C_N, rectangles in R_{N,M}, strips and explicit sets.

Every region answers membership for an (m, d) integer array and enumerates its lattice
points in lexicographic order.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Tuple

import numpy as np

from utils.errors import UsageError


logger = logging.getLogger(__name__)


def _box_points(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """All integer points of the box lo <= n <= hi, lexicographically ordered."""
    axes = [np.arange(int(a), int(b) + 1, dtype=np.int64) for a, b in zip(lo, hi)]
    if any(len(axis) == 0 for axis in axes):
        return np.zeros((0, len(lo)), dtype=np.int64)
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, len(lo))


def orthonormal_frame(axis: Iterable[float]) -> np.ndarray:
    """
    Orthonormal basis as columns, first column parallel to axis.

    Coordinate axes map to permutations of the identity, so axis-aligned
    rectangles keep exact integer projections.
    """
    e = np.asarray(tuple(axis), dtype=np.float64)
    norm = np.linalg.norm(e)
    if norm == 0:
        raise UsageError("Rectangle axis must be nonzero")
    e = e / norm
    d = len(e)
    nonzero = np.flatnonzero(e)
    if len(nonzero) == 1:
        j = int(nonzero[0])
        order = [j] + [i for i in range(d) if i != j]
        frame = np.eye(d)[:, order]
        frame[:, 0] *= np.sign(e[j])
        return frame
    seed = np.column_stack([e, np.eye(d)])
    q, _ = np.linalg.qr(seed)
    q = q[:, :d]
    if q[:, 0] @ e < 0:
        q[:, 0] = -q[:, 0]
    return q


def strip_index(points: np.ndarray, xi0: np.ndarray, M: float) -> np.ndarray:
    """Index l with xi . xi0 in [|xi0| M l, |xi0| M (l+1))."""
    dots = points.astype(np.int64) @ np.asarray(xi0, dtype=np.int64)
    width = math.sqrt(float(np.sum(np.asarray(xi0, dtype=np.int64) ** 2))) * M
    return np.floor(dots / width).astype(np.int64)


class FrequencyRegion:
    """Base class of sharp frequency regions (symbol chi_S)."""

    kind = "region"

    @property
    def d(self) -> int:
        raise NotImplementedError

    def contains(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def lattice_points(self) -> np.ndarray:
        lo, hi = self.bounding_box()
        candidates = _box_points(lo, hi)
        if len(candidates) == 0:
            return candidates
        return candidates[self.contains(candidates)]

    def size(self) -> int:
        return len(self.lattice_points())

    def in_family(self, N: float, M: float) -> bool:
        """
        Membership in R_{N,M}, checked on the lattice points through the spreads along
        this region's own frame (the slab condition), not by exhibiting O and z.
        """
        points = self.lattice_points()
        if len(points) == 0:
            return True
        coords = points.astype(np.float64) @ self.frame()
        spreads = coords.max(axis=0) - coords.min(axis=0)
        tol = 1e-9
        return bool(spreads[0] <= 2 * M + tol and np.all(spreads[1:] <= 2 * N + tol))

    def frame(self) -> np.ndarray:
        """Orthonormal columns; the first one is the thin direction."""
        lo, hi = self.bounding_box()
        spans = hi - lo
        order = np.argsort(spans, kind="stable")
        return np.eye(self.d)[:, order]

    def describe(self) -> dict:
        return {'kind': self.kind}


@dataclass(frozen=True)
class AnnulusRegion(FrequencyRegion):
    """
    Dyadic shell at scale N.

    sharp=True: {|n| <= 1} for N = 1 and {N/2 < |n| <= N} otherwise; these shells
    partition Z^d. sharp=False: the lattice support of psi_N, {N/2 < |n| < 2N}
    ({|n| < 2} for N = 1).
    """
    N: int
    dim: int
    sharp: bool = True
    kind = "annulus"

    @property
    def d(self) -> int:
        return self.dim

    def contains(self, points: np.ndarray) -> np.ndarray:
        norm_sq = np.sum(points.astype(np.int64) ** 2, axis=-1)
        N = self.N
        if self.sharp:
            if N == 1:
                return norm_sq <= 1
            return (4 * norm_sq > N * N) & (norm_sq <= N * N)
        if N == 1:
            return norm_sq < 4
        return (4 * norm_sq > N * N) & (norm_sq < 4 * N * N)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        radius = self.N if self.sharp else 2 * self.N
        return np.full(self.dim, -radius, dtype=np.int64), np.full(self.dim, radius, dtype=np.int64)

    def frame(self) -> np.ndarray:
        return np.eye(self.dim)

    def describe(self) -> dict:
        return {'kind': self.kind, 'N': self.N, 'sharp': self.sharp}


@dataclass(frozen=True)
class CubeRegion(FrequencyRegion):
    """center + [-N, N]^d, a member of C_N."""
    center: Tuple[int, ...]
    N: int
    kind = "cube"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))
        if self.N < 0:
            raise UsageError(f"Cube half-width must be non-negative, got: {self.N}")

    @property
    def d(self) -> int:
        return len(self.center)

    def contains(self, points: np.ndarray) -> np.ndarray:
        offset = points.astype(np.int64) - np.asarray(self.center, dtype=np.int64)
        return np.all(np.abs(offset) <= self.N, axis=-1)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        c = np.asarray(self.center, dtype=np.int64)
        return c - self.N, c + self.N

    def frame(self) -> np.ndarray:
        return np.eye(self.d)

    def describe(self) -> dict:
        return {'kind': self.kind, 'center': list(self.center), 'N': self.N}


@dataclass(frozen=True)
class RectangleRegion(FrequencyRegion):
    """
    Points with |(xi - c) . e| <= M along the unit axis e and <= N along each
    direction of an orthonormal completion; a member of R_{N,M}.
    """
    center: Tuple[int, ...]
    axis: Tuple[float, ...]
    N: float
    M: float
    kind = "rectangle"

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))
        object.__setattr__(self, "axis", tuple(float(a) for a in self.axis))
        if len(self.axis) != len(self.center):
            raise UsageError("Rectangle axis and center dimensions differ")
        if self.N < 0 or self.M < 0:
            raise UsageError(f"Rectangle sizes must be non-negative, got N={self.N}, M={self.M}")

    @property
    def d(self) -> int:
        return len(self.center)

    def frame(self) -> np.ndarray:
        return orthonormal_frame(self.axis)

    def contains(self, points: np.ndarray) -> np.ndarray:
        offset = points.astype(np.float64) - np.asarray(self.center, dtype=np.float64)
        coords = offset @ self.frame()
        tol = 1e-9
        thin = np.abs(coords[..., 0]) <= self.M + tol
        wide = np.all(np.abs(coords[..., 1:]) <= self.N + tol, axis=-1)
        return thin & wide

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        reach = math.ceil(math.sqrt((self.d - 1) * self.N ** 2 + self.M ** 2))
        c = np.asarray(self.center, dtype=np.int64)
        return c - reach, c + reach

    def describe(self) -> dict:
        return {'kind': self.kind, 'center': list(self.center), 'axis': list(self.axis), 'N': self.N, 'M': self.M}


@dataclass(frozen=True)
class StripRegion(FrequencyRegion):
    """{xi in cube : xi . xi0 in [|xi0| M l, |xi0| M (l+1))}."""
    cube: CubeRegion
    xi0: Tuple[int, ...]
    M: float
    ell: int
    kind = "strip"

    def __post_init__(self):
        object.__setattr__(self, "xi0", tuple(int(c) for c in self.xi0))

    @property
    def d(self) -> int:
        return self.cube.d

    def contains(self, points: np.ndarray) -> np.ndarray:
        inside = self.cube.contains(points)
        return inside & (strip_index(points, np.asarray(self.xi0), self.M) == self.ell)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.cube.bounding_box()

    def frame(self) -> np.ndarray:
        return orthonormal_frame(self.xi0)

    def in_family(self, N: float, M: float) -> bool:
        """Slab of width M along xi0 cut from a cube in C_N."""
        points = self.lattice_points()
        if len(points) == 0:
            return self.cube.N <= N
        along = points.astype(np.float64) @ self.frame()[:, 0]
        return bool(along.max() - along.min() <= 2 * M + 1e-9 and self.cube.N <= N)

    def describe(self) -> dict:
        return {'kind': self.kind, 'xi0': list(self.xi0), 'M': self.M, 'ell': self.ell}


@dataclass(frozen=True)
class ExplicitRegion(FrequencyRegion):
    """An explicitly listed finite set of lattice points."""
    points: Tuple[Tuple[int, ...], ...]
    dim: int
    _lookup: frozenset = field(init=False, repr=False, compare=False)
    kind = "explicit"

    def __post_init__(self):
        pts = tuple(sorted({tuple(int(v) for v in p) for p in self.points}))
        if any(len(p) != self.dim for p in pts):
            raise UsageError(f"Explicit region points must have dimension {self.dim}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_lookup", frozenset(pts))

    @classmethod
    def empty(cls, dim: int) -> "ExplicitRegion":
        return cls((), dim)

    @property
    def d(self) -> int:
        return self.dim

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.array([tuple(int(v) for v in p) in self._lookup for p in points], dtype=bool)

    def bounding_box(self) -> Tuple[np.ndarray, np.ndarray]:
        if not self.points:
            zeros = np.zeros(self.dim, dtype=np.int64)
            return zeros, zeros - 1
        arr = np.asarray(self.points, dtype=np.int64)
        return arr.min(axis=0), arr.max(axis=0)

    def lattice_points(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, self.dim), dtype=np.int64)
        return np.asarray(self.points, dtype=np.int64)

    def describe(self) -> dict:
        return {'kind': self.kind, 'size': len(self.points)}

