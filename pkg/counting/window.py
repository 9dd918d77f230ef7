"""
Nonnegative time window whose Fourier transform dominates the indicator of [-r, r].

eta(t) = c * (chi_[-a,a] * chi_[-a,a])(t) = c * max(0, 2a - |t|)
eta_hat(tau) = c * (sin(2 pi a tau) / (pi tau))^2

With a = 1/(4r) and c = pi^2 r^2 the transform is decreasing on [0, r] and equals 1 at
tau = r, so eta_hat >= 1 on [-r, r] while eta is supported in I = [-1/(2r), 1/(2r)].
"""
import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from utils.errors import DomainError


ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class Window:
    r: float
    a: float
    c: float

    @property
    def interval(self) -> Tuple[float, float]:
        return (-2.0 * self.a, 2.0 * self.a)

    @property
    def length(self) -> float:
        return 4.0 * self.a

    @property
    def sup_eta(self) -> float:
        """max eta = eta(0) = 2ac."""
        return 2.0 * self.a * self.c

    def eta(self, t: ArrayLike) -> ArrayLike:
        values = self.c * np.maximum(0.0, 2.0 * self.a - np.abs(np.asarray(t, dtype=np.float64)))
        return float(values) if np.ndim(values) == 0 else values

    def eta_hat(self, tau: ArrayLike) -> ArrayLike:
        tau = np.asarray(tau, dtype=np.float64)
        # sin(2 pi a tau) / (pi tau) = 2a * sinc(2 a tau) with numpy's normalized sinc
        values = self.c * (2.0 * self.a * np.sinc(2.0 * self.a * tau)) ** 2
        return float(values) if np.ndim(values) == 0 else values

    def to_dict(self) -> dict:
        return {
            'r': self.r,
            'a': self.a,
            'c': self.c,
            'interval': list(self.interval),
            'sup_eta': self.sup_eta,
        }


def make_window(r: float) -> Window:
    """
    Window for level-set radius r.

    Raises:
        DomainError: If r <= 0
    """
    if not r > 0 or math.isinf(r):
        raise DomainError(f"Window radius must be positive and finite, got: {r}")
    return Window(r=float(r), a=1.0 / (4.0 * r), c=math.pi ** 2 * r * r)
