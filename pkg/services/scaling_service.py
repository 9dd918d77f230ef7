"""
Log-log scaling fits and the report type shared by every sweep.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from utils.errors import DataError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    residual: float

    def predict(self, scale: float) -> float:
        """Fitted log2 value at a scale."""
        return self.intercept + self.slope * math.log2(scale)


def fit_scaling(points: Sequence[Tuple[float, float]]) -> ScalingFit:
    """
    Least squares of log2(value) against log2(scale).

    Raises:
        DataError: With fewer than 3 points or a nonpositive scale or value
    """
    if len(points) < 3:
        raise DataError(f"Scaling fit needs at least 3 points, got {len(points)}")
    scales = np.array([s for s, _ in points], dtype=np.float64)
    values = np.array([v for _, v in points], dtype=np.float64)
    if np.any(scales <= 0) or np.any(values <= 0) or not np.all(np.isfinite(values)):
        raise DataError(f"Scaling fit needs positive finite scales and values, got {list(points)}")

    x = np.log2(scales)
    y = np.log2(values)
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return ScalingFit(slope=float(slope), intercept=float(intercept), residual=residual)


@dataclass
class ScalingReport:
    """
    Sweep rows plus the fitted exponent of the normalized left side.

    points holds (scale, value) pairs that were fitted, sorted by scale; passed
    compares the slope with the predicted exponent plus tolerance, unless the
    experiment decides pass/fail on its own criterion (decay rate, sub-checks).
    """
    experiment: str
    kind: str
    columns: List[str]
    rows: List[dict] = field(default_factory=list)
    points: List[Tuple[float, float]] = field(default_factory=list)
    scale_label: str = "N"
    predicted: Optional[float] = None
    tolerance: float = 0.0
    fit: Optional[ScalingFit] = None
    passed: bool = True
    checks: Dict[str, bool] = field(default_factory=dict)
    extras: Dict[str, object] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    # Binary side outputs (state snapshots), written next to the CSV
    attachments: Dict[str, bytes] = field(default_factory=dict)

    @property
    def slack(self) -> Optional[float]:
        if self.fit is None or self.predicted is None:
            return None
        return self.fit.slope - self.predicted

    def fit_points(self, predicted: Optional[float] = None, upper_bound: bool = True) -> None:
        """
        Fit the stored points and, with a prediction, check slope <= predicted + tolerance.
        """
        self.points = sorted(self.points)
        self.fit = fit_scaling(self.points)
        if predicted is not None:
            self.predicted = predicted
            if upper_bound:
                self.checks["slope"] = self.fit.slope <= predicted + self.tolerance
        self.passed = all(self.checks.values())

    def add_check(self, name: str, ok: bool, note: Optional[str] = None) -> None:
        self.checks[name] = bool(ok)
        if note:
            self.notes.append(note)
        self.passed = all(self.checks.values())

    def summary(self) -> dict:
        """JSON-ready summary consumed by export-plots."""
        return {
            'experiment': self.experiment,
            'kind': self.kind,
            'scale_label': self.scale_label,
            'points': [[s, v] for s, v in self.points],
            'slope': self.fit.slope if self.fit else None,
            'intercept': self.fit.intercept if self.fit else None,
            'residual': self.fit.residual if self.fit else None,
            'predicted': self.predicted,
            'slack': self.slack,
            'tolerance': self.tolerance,
            'checks': dict(self.checks),
            'pass': self.passed,
            'extras': dict(self.extras),
            'notes': list(self.notes),
        }
