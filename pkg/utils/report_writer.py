"""
CSV and JSON emission with fixed schemas.

Floats are written with repr so equal runs give byte-identical files.
"""
import csv
import io
import json
import logging
import math
from pathlib import Path
from typing import Iterable, List, Mapping, Sequence, Union

import numpy as np


logger = logging.getLogger(__name__)

SUMMARY_SCHEMA_VERSION = 1

VERIFY_COLUMNS = [
    "experiment", "d", "alphas", "family", "seed", "trial", "N1", "N2", "N3", "M",
    "p", "q", "eps", "lhs", "rhs_model", "ratio", "n_t_used", "grid_used",
]
POINT_ESTIMATE_COLUMNS = ["trial", "p", "r", "set_size", "lhs", "intermediate", "rhs", "ratio", "pass"]
TRAJECTORY_COLUMNS = ["t", "mass", "energy_weighted", "energy_unweighted", "h_sc", "sup_norm"]
WEYL_COLUMNS = ["M", "p", "exponent", "value", "value_at_zero", "n_t_used"]
ORTHOGONALITY_COLUMNS = [
    "N1", "N2", "trial", "M", "strips", "lhs_sq", "strip_sum", "deficit", "normalized_deficit",
    "n_t_used",
]
SMALL_DATA_COLUMNS = ["delta", "ratio", "h_sc_initial", "h_sc_max", "mass_drift", "energy_drift"]
RESONANCE_COLUMNS = ["trial", "a", "pairs", "levels_checked", "worst_ratio", "pass"]
PLOT_COLUMNS = ["log2_scale", "log2_value", "fitted_log2_value"]

PathLike = Union[str, Path]


def format_cell(value) -> str:
    """Render one CSV cell: repr for floats, lowercase booleans, ';'-joined sequences."""
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(format_cell(v) for v in value)
    return str(value)


def render_csv(columns: Sequence[str], rows: Iterable[Mapping]) -> str:
    """CSV text with a header row; keys outside the schema are ignored."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row.get(c)) for c in columns])
    return buffer.getvalue()


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Mapping]) -> Path:
    """
    Write rows under the given header.

    Returns:
        Path of the written file
    """
    return write_text(path, render_csv(columns, rows))


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    logger.debug(f"Wrote {len(text)} characters to {path}")
    return path


def read_csv(path: PathLike) -> List[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def json_safe(value):
    """Plain JSON types: numpy scalars unwrapped, non-finite floats as null or "inf"."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def write_json(path: PathLike, data: Mapping) -> Path:
    """Write a key-sorted JSON document; non-finite floats become null or "inf"."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(json_safe(dict(data)), indent=2, sort_keys=True) + "\n")
    return path


def read_json(path: PathLike) -> dict:
    return json.loads(Path(path).read_text())
