"""
Exception hierarchy shared by the numerical packages, services and CLI.
"""
from typing import List, Optional


class UsageError(ValueError):
    """Operation called with arguments outside its contract."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of the operation."""


class ResolutionError(ValueError):
    """Spatial grid too coarse for the bandwidth it has to represent."""


class DegenerateCenterError(ValueError):
    """Strip decomposition requested around the zero frequency."""


class DataError(ValueError):
    """Input data cannot be fitted or reduced (e.g. nonpositive values on a log scale)."""


class ConfigError(ValueError):
    """Invalid experiment configuration; carries one message per offending field."""

    def __init__(self, messages: List[str]):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class HypothesisViolation(ConfigError):
    """Exponents or scales violate an estimate's hypotheses."""

    def __init__(self, guard: str, message: str):
        self.guard = guard
        super().__init__([f"{guard}: {message}"])


class ConvergenceError(RuntimeError):
    """Time quadrature did not meet its tolerance before the doubling cap."""

    def __init__(self, message: str, previous: float, last: float, n_t: Optional[int] = None):
        self.previous = previous
        self.last = last
        self.n_t = n_t
        super().__init__(f"{message} (previous={previous!r}, last={last!r}, n_t={n_t})")


class BlowUpError(RuntimeError):
    """NLS solution exceeded the configured sup-norm ceiling."""

    def __init__(self, t: float, sup_norm: float, ceiling: float):
        self.t = t
        self.sup_norm = sup_norm
        self.ceiling = ceiling
        super().__init__(
            f"sup norm {sup_norm:.3e} exceeded ceiling {ceiling:.3e} at t={t:.6f}"
        )
