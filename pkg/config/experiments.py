"""Experiment file loading and validation.

An experiment file is TOML with a ``[run]`` table and one ``[[experiment]]`` block per
experiment::

    [run]
    seed = 7
    only = ["weyl-p3"]          # optional subset by name

    [[experiment]]
    name = "weyl-p3"
    kind = "weyl"
    p = 3.0
    scales = [16, 32, 64]

Every block is validated on load; all field-level messages are collected and raised
together as one ConfigError.
"""

import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field, fields, asdict
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from norms.mixed_norms import NORM_METHODS
from spectral.cutoffs import is_dyadic
from utils.errors import ConfigError, HypothesisViolation

logger = logging.getLogger(__name__)


KIND_DIMENSION = {
    "trilinear-2d": 2,
    "linear-2d": 2,
    "multilinear-2d": 2,
    "linear-3d": 3,
    "trilinear-3d": 3,
    "resonance": 2,
}

KINDS = (
    "point-estimate",
    "weyl",
    "resonance",
    "trilinear-2d",
    "linear-2d",
    "multilinear-2d",
    "linear-3d",
    "trilinear-3d",
    "orthogonality",
    "nls",
    "small-data",
)

KIND_MODES = {
    "linear-2d": ("cube", "rectangle"),
    "linear-3d": ("cube", "rectangle"),
    "multilinear-2d": ("balanced", "separated"),
    "trilinear-3d": ("balanced", "n3", "separated"),
}

FAMILIES = ("dirichlet", "random_phase", "gaussian")
NLS_DATA = ("plane_wave", "random")

# Kinds whose report is a log-log fit over `scales`
SWEEP_KINDS = ("weyl", "trilinear-2d", "linear-2d", "multilinear-2d", "linear-3d",
               "trilinear-3d", "orthogonality")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment block; kind-specific fields are ignored by other kinds."""

    name: str
    kind: str
    d: int = 2
    alphas: Optional[Tuple[float, ...]] = None
    family: str = "dirichlet"
    trials: int = 1
    seed: int = 0

    # Exponents
    p: Optional[float] = None
    q: Optional[float] = None
    eps: float = 0.1
    k: Optional[int] = None

    # Sweeps
    mode: str = "balanced"
    scales: Tuple[int, ...] = ()
    N1: Optional[int] = None
    N2: Optional[int] = None
    N3: Optional[int] = None
    M: Optional[int] = None
    tolerance: float = 0.1

    # Time interval and quadrature
    tau: Tuple[float, float] = (0.0, 1.0)
    margin: float = 0.05
    n_t: int = 64
    rtol: float = 5e-3
    n_t_cap: int = 2 ** 20
    grid_per_dim: Optional[int] = None
    norm_method: str = "auto"

    # Counting
    r_values: Tuple[float, ...] = (1.0, 2.0, 4.0)
    p_values: Tuple[float, ...] = (2.0, 3.0, 4.0)
    set_size: int = 512
    box: int = 16
    floor_factor: int = 64

    # NLS
    sign: int = 1
    T: float = 1.0
    dt: float = 1e-3
    data: str = "random"
    amplitude: float = 0.01
    deltas: Tuple[float, ...] = ()
    nonlinear: bool = True
    output_every: int = 10
    blowup_ceiling: float = 1e6
    snapshot: bool = False
    mass_tolerance: float = 1e-10
    energy_tolerance: float = 1e-6

    @property
    def critical_index(self) -> Fraction:
        return Fraction(self.d, 2) - Fraction(1, self.k or 1)

    def to_dict(self) -> dict:
        """Canonical dictionary (tuples as lists) used for hashing and reports."""
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data


@dataclass
class RunConfig:
    """Parsed experiment file."""

    seed: int = 0
    experiments: List[ExperimentConfig] = field(default_factory=list)
    source: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "experiments": [e.to_dict() for e in self.experiments],
        }


_TUPLE_FIELDS = {"alphas", "scales", "tau", "r_values", "p_values", "deltas"}
_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}


def _coerce(block: dict) -> dict:
    values = {}
    for key, value in block.items():
        if key in _TUPLE_FIELDS and isinstance(value, list):
            value = tuple(value)
        values[key] = value
    return values


def _require(condition: bool, guard: str, message: str) -> None:
    if not condition:
        raise HypothesisViolation(guard, message)


def _check_scales(cfg: ExperimentConfig, minimum: int = 3) -> List[str]:
    errors = []
    if len(cfg.scales) < minimum:
        errors.append(f"scales: need at least {minimum} dyadic values, got {list(cfg.scales)}")
    if any(not is_dyadic(n) for n in cfg.scales):
        errors.append(f"scales: values must be powers of two, got {list(cfg.scales)}")
    elif list(cfg.scales) != sorted(set(cfg.scales)):
        errors.append(f"scales: values must be strictly increasing, got {list(cfg.scales)}")
    for label in ("N1", "N2", "N3", "M"):
        value = getattr(cfg, label)
        if value is not None and not is_dyadic(value):
            errors.append(f"{label}: must be a power of two, got {value}")
    return errors


def _check_guards(cfg: ExperimentConfig) -> None:
    """Hypotheses of each estimate; raises HypothesisViolation naming the guard."""
    p, q = cfg.p, cfg.q
    kind = cfg.kind

    if kind == "trilinear-2d":
        _require(p is not None and 2 < p <= 4, "trilinear-2d p-range", f"need 2 < p <= 4, got p={p}")
        _require(cfg.N1 is not None and all(cfg.N1 >= m for m in cfg.scales),
                 "trilinear-2d ordering", f"need N1 >= every M in scales, got N1={cfg.N1}")
    elif kind == "linear-2d":
        _require(p is not None and p > 6, "linear-2d p-range", f"need p > 6, got p={p}")
        if cfg.mode == "rectangle":
            _require(q is not None and 6 <= q < p, "linear-2d q-range", f"need 6 <= q < p, got q={q}, p={p}")
            _require(cfg.N1 is not None and all(cfg.N1 >= m for m in cfg.scales),
                     "linear-2d ordering", f"need N1 >= every M in scales, got N1={cfg.N1}")
    elif kind == "linear-3d":
        _require(p is not None and p > Fraction(16, 3), "linear-3d p-range", f"need p > 16/3, got p={p}")
        if cfg.mode == "rectangle":
            _require(q is not None and 4 <= q < 0.75 * p, "linear-3d q-range",
                     f"need 4 <= q < 3p/4, got q={q}, p={p}")
            _require(cfg.N1 is not None and all(cfg.N1 >= m for m in cfg.scales),
                     "linear-3d ordering", f"need N1 >= every M in scales, got N1={cfg.N1}")
    elif kind == "multilinear-2d":
        _require(cfg.k is not None and cfg.k >= 3, "multilinear-2d k-range", f"need k >= 3, got k={cfg.k}")
        if cfg.mode == "separated":
            _require(cfg.N2 is not None and all(n >= cfg.N2 for n in cfg.scales),
                     "multilinear-2d ordering", f"need N1 >= N2 for every N1 in scales, got N2={cfg.N2}")
    elif kind == "trilinear-3d":
        _require(cfg.k is not None and cfg.k >= 2, "trilinear-3d k-range", f"need k >= 2, got k={cfg.k}")
        _require(cfg.eps > 0, "trilinear-3d eps", f"need eps > 0, got eps={cfg.eps}")
        if cfg.mode == "n3":
            _require(cfg.N1 is not None and all(cfg.N1 >= n for n in cfg.scales),
                     "trilinear-3d ordering", f"need N1 = N2 >= N3 for every N3 in scales, got N1={cfg.N1}")
        elif cfg.mode == "separated":
            _require(cfg.N2 is not None and all(n >= cfg.N2 for n in cfg.scales),
                     "trilinear-3d ordering", f"need N1 >= N2 = N3 for every N1 in scales, got N2={cfg.N2}")
        if cfg.k > 2:
            _require(cfg.mode == "balanced", "trilinear-3d k-range", "k > 2 only runs the balanced sweep")
    elif kind == "orthogonality":
        _require(cfg.k is not None and cfg.k >= 1, "orthogonality k-range", f"need k >= 1, got k={cfg.k}")
        if cfg.N1 is not None:
            _require(all(cfg.N1 >= n for n in cfg.scales), "orthogonality ordering",
                     f"need N1 >= N2 for every N2 in scales, got N1={cfg.N1}")
    elif kind == "point-estimate":
        _require(all(r >= 1 for r in cfg.r_values), "point-estimate r-range", f"need r >= 1, got {list(cfg.r_values)}")
        _require(all(v >= 2 for v in cfg.p_values), "point-estimate p-range", f"need p >= 2, got {list(cfg.p_values)}")
    elif kind == "weyl":
        _require(p is not None and p > 2, "weyl p-range", f"need p > 2, got p={p}")
    elif kind == "small-data":
        allowed = (cfg.d == 2 and cfg.k is not None and cfg.k >= 3) or (cfg.d == 3 and cfg.k == 2)
        _require(allowed, "small-data (d,k)", f"need d=2 with k >= 3 or d=3 with k=2, got d={cfg.d}, k={cfg.k}")


def validate_experiment(cfg: ExperimentConfig) -> None:
    """
    Validate one experiment block.

    Raises:
        HypothesisViolation: If exponents or scales violate the estimate's hypotheses
        ConfigError: For every other invalid field (all messages at once)
    """
    errors = []
    if cfg.kind not in KINDS:
        raise ConfigError([f"kind: unknown kind '{cfg.kind}', expected one of {list(KINDS)}"])
    if cfg.d not in (2, 3):
        errors.append(f"d: must be 2 or 3, got {cfg.d}")
    expected_d = KIND_DIMENSION.get(cfg.kind)
    if expected_d is not None and cfg.d != expected_d:
        errors.append(f"d: {cfg.kind} runs in dimension {expected_d}, got {cfg.d}")
    if cfg.alphas is not None and len(cfg.alphas) != cfg.d:
        errors.append(f"alphas: need {cfg.d} values, got {list(cfg.alphas)}")
    if cfg.alphas is not None and any(not (a > 0 and math.isfinite(a)) for a in cfg.alphas):
        errors.append(f"alphas: values must be positive and finite, got {list(cfg.alphas)}")
    if cfg.family not in FAMILIES:
        errors.append(f"family: expected one of {list(FAMILIES)}, got '{cfg.family}'")
    if cfg.trials < 1:
        errors.append(f"trials: must be >= 1, got {cfg.trials}")
    modes = KIND_MODES.get(cfg.kind)
    if modes is not None and cfg.mode not in modes:
        errors.append(f"mode: {cfg.kind} supports {list(modes)}, got '{cfg.mode}'")

    if len(cfg.tau) != 2 or not (0.0 <= cfg.tau[0] < cfg.tau[1] <= 1.0):
        errors.append(f"tau: need 0 <= t0 < t1 <= 1, got {list(cfg.tau)}")
    if cfg.margin < 0:
        errors.append(f"margin: must be >= 0, got {cfg.margin}")
    if cfg.n_t < 2 or cfg.n_t_cap < 2 * cfg.n_t:
        errors.append(f"n_t: need 2 <= n_t and n_t_cap >= 2 n_t, got n_t={cfg.n_t}, n_t_cap={cfg.n_t_cap}")
    if cfg.rtol <= 0:
        errors.append(f"rtol: must be positive, got {cfg.rtol}")
    if cfg.norm_method not in NORM_METHODS:
        errors.append(f"norm_method: expected one of {list(NORM_METHODS)}, got '{cfg.norm_method}'")
    if cfg.tolerance < 0:
        errors.append(f"tolerance: must be >= 0, got {cfg.tolerance}")

    if cfg.kind in SWEEP_KINDS:
        errors.extend(_check_scales(cfg))
    if cfg.kind == "resonance" and (cfg.M is None or not is_dyadic(cfg.M)):
        errors.append(f"M: resonance needs a dyadic cube scale, got {cfg.M}")
    if cfg.kind == "point-estimate" and not (1 <= cfg.set_size and cfg.box >= 1):
        errors.append(f"set_size/box: must be >= 1, got set_size={cfg.set_size}, box={cfg.box}")
    if cfg.kind in ("nls", "small-data"):
        if cfg.k is None or cfg.k < 1:
            errors.append(f"k: NLS needs k >= 1, got {cfg.k}")
        if cfg.sign not in (1, -1):
            errors.append(f"sign: must be +1 or -1, got {cfg.sign}")
        if cfg.dt == 0 or (cfg.T != 0 and (cfg.T > 0) != (cfg.dt > 0)):
            errors.append(f"dt: must be nonzero with the sign of T, got dt={cfg.dt}, T={cfg.T}")
        if cfg.data not in NLS_DATA:
            errors.append(f"data: expected one of {list(NLS_DATA)}, got '{cfg.data}'")
        if cfg.N1 is None or cfg.N1 < 0:
            errors.append(f"N1: NLS data band must be given and >= 0, got {cfg.N1}")
        if cfg.output_every < 1:
            errors.append(f"output_every: must be >= 1, got {cfg.output_every}")
    if cfg.kind == "small-data" and (not cfg.deltas or any(dl < 0 for dl in cfg.deltas)):
        errors.append(f"deltas: need a nonempty list of nonnegative scales, got {list(cfg.deltas)}")

    if errors:
        raise ConfigError(errors)
    _check_guards(cfg)


def parse_experiment(block: dict, seed: int, defaults: Optional[Dict[str, object]] = None) -> ExperimentConfig:
    """
    Build and validate an ExperimentConfig from one raw block.

    Values in defaults fill fields the block leaves unset; the run seed is always applied.

    Raises:
        ConfigError: On unknown keys, wrong types or failed validation
    """
    unknown = sorted(set(block) - _FIELD_NAMES)
    if unknown:
        raise ConfigError([f"unknown keys {unknown}"])
    if "name" not in block or "kind" not in block:
        raise ConfigError(["every experiment needs 'name' and 'kind'"])

    values = dict(defaults or {})
    values.update(_coerce(block))
    if "d" not in block and block["kind"] in KIND_DIMENSION:
        values["d"] = KIND_DIMENSION[block["kind"]]
    if block["kind"] in ("trilinear-3d",) and values.get("k") is None:
        values["k"] = 2
    if block["kind"] == "orthogonality" and values.get("k") is None:
        values["k"] = 1
    if block["kind"] == "orthogonality" and "tau" not in block:
        values["tau"] = (0.1, 0.9)
    values["seed"] = int(seed)

    try:
        cfg = ExperimentConfig(**values)
    except TypeError as e:
        raise ConfigError([f"invalid fields: {e}"])
    try:
        validate_experiment(cfg)
    except TypeError as e:
        raise ConfigError([f"invalid field types: {e}"])
    return cfg


def load_run_config(
    source: Union[str, Path, dict],
    seed_override: Optional[int] = None,
    defaults: Optional[Dict[str, object]] = None,
    default_seed: int = 0,
) -> RunConfig:
    """
    Load an experiment file (path) or an already-parsed TOML document (dict).

    The master seed is seed_override, else [run].seed, else default_seed.

    Raises:
        ConfigError: If the file is missing or unparsable, or any block is invalid
    """
    if isinstance(source, dict):
        document = source
        origin = None
    else:
        path = Path(source)
        origin = str(path)
        try:
            with open(path, "rb") as fh:
                document = tomllib.load(fh)
        except FileNotFoundError:
            raise ConfigError([f"config file not found: {path}"])
        except tomllib.TOMLDecodeError as e:
            raise ConfigError([f"config file {path} is not valid TOML: {e}"])

    run_table = document.get("run", {})
    seed = seed_override if seed_override is not None else int(run_table.get("seed", default_seed))
    only = run_table.get("only")
    blocks = document.get("experiment", [])
    if not isinstance(blocks, list):
        raise ConfigError(["experiment: must be an array of tables ([[experiment]])"])

    experiments, messages, names = [], [], set()
    for index, block in enumerate(blocks):
        label = block.get("name", f"#{index}") if isinstance(block, dict) else f"#{index}"
        if label in names:
            messages.append(f"experiment '{label}': duplicate name")
            continue
        names.add(label)
        if only is not None and label not in only:
            continue
        try:
            experiments.append(parse_experiment(block, seed, defaults))
        except ConfigError as e:
            messages.extend(f"experiment '{label}': {m}" for m in e.messages)

    if messages:
        logger.error("Invalid experiment file", extra={"source": origin, "errors": messages})
        raise ConfigError(messages)

    logger.info(f"Loaded {len(experiments)} experiments", extra={"source": origin, "seed": seed})
    return RunConfig(seed=seed, experiments=experiments, source=origin)
