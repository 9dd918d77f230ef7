"""
Almost orthogonality in time: compare ||P_{N1} e^{it Delta} phi_1 prod_j P_{N2} e^{it Delta} phi_j||^2
on tau0 with the sum over strips R_l of the same quantity on the enlarged interval tau1.
"""
import logging
import math
from typing import List, Sequence, Tuple

from config.experiments import ExperimentConfig
from norms.mixed_norms import mixed_norm
from services.data_service import make_data
from services.estimate_service import data_norm, effective_trials, new_report, norm_spec, torus_for
from services.scaling_service import ScalingReport
from spectral.cutoffs import make_cutoff
from spectral.projections import project, strip_decompose
from spectral.regions import AnnulusRegion, CubeRegion
from spectral.state import FourierState
from utils.errors import DataError, DegenerateCenterError
from utils.report_writer import ORTHOGONALITY_COLUMNS


logger = logging.getLogger(__name__)

MIN_POSITIVE_DEFICITS = 2


def enlarge_interval(tau: Tuple[float, float], margin: float) -> Tuple[float, float]:
    """tau1 = [t0 - margin, t1 + margin] clipped to [0, 1]."""
    t0, t1 = tau
    return max(0.0, t0 - margin), min(1.0, t1 + margin)


def orthogonality_factors(cfg: ExperimentConfig, torus, N1: int, N2: int, trial: int) -> Tuple[CubeRegion, List[FourierState]]:
    """
    phi_1: data on the cube of half-width N2 centred at (N1, 0, ...), times psi_{N1}.
    phi_j (j = 2..2k+1): data on supp psi_{N2}, times psi_{N2}.
    """
    d = torus.d
    cube = CubeRegion((N1,) + (0,) * (d - 1), N2)
    first = project(make_data(torus, cube, cfg.family, cfg.seed, cfg.name, N2, trial, 0), make_cutoff(N1))
    shell = AnnulusRegion(N2, d, sharp=False)
    cutoff = make_cutoff(N2)
    rest = [
        project(make_data(torus, shell, cfg.family, cfg.seed, cfg.name, N2, trial, j), cutoff)
        for j in range(1, 2 * cfg.k + 1)
    ]
    return cube, [first] + rest


def measure_deficit(cfg: ExperimentConfig, torus, N1: int, N2: int, trial: int) -> dict:
    """
    One orthogonality measurement.

    Raises:
        DegenerateCenterError: If the cube is centred at the origin
    """
    cube, factors = orthogonality_factors(cfg, torus, N1, N2, trial)
    decomposition = strip_decompose(cube, N1, N2)
    tau1 = enlarge_interval(cfg.tau, cfg.margin)

    lhs = mixed_norm(factors, norm_spec(cfg, 2.0, 2.0, cfg.tau))
    strip_spec = norm_spec(cfg, 2.0, 2.0, tau1)
    strip_sum = 0.0
    for strip in decomposition.strips:
        piece = project(factors[0], strip)
        if piece.is_zero:
            continue
        strip_sum += mixed_norm([piece] + factors[1:], strip_spec).value ** 2

    norm_sq = data_norm(factors) ** 2
    lhs_sq = lhs.value ** 2
    deficit = lhs_sq - strip_sum
    return {
        'N1': N1,
        'N2': N2,
        'M': decomposition.M,
        'strips': len(decomposition),
        'lhs_sq': lhs_sq,
        'strip_sum': strip_sum,
        'deficit': deficit,
        'normalized_deficit': deficit / norm_sq if norm_sq > 0 else 0.0,
        'n_t_used': lhs.n_t_used,
        'trial': trial,
    }


def deficit_envelope(points: Sequence[Tuple[float, float]]) -> Tuple[float, float]:
    """
    (K, sigma0) of the envelope K N2^{-sigma0} through the first positive deficit.

    sigma0 is the largest decay rate for which the envelope still lies on or above
    every later deficit; nonpositive deficits lie below any envelope.

    Raises:
        DataError: With fewer than MIN_POSITIVE_DEFICITS positive deficits
    """
    positive = [(float(n), float(v)) for n, v in sorted(points) if v > 0]
    if len(positive) < MIN_POSITIVE_DEFICITS:
        raise DataError(
            f"need at least {MIN_POSITIVE_DEFICITS} positive deficits to fit sigma0, got {len(positive)}"
        )
    n0, v0 = positive[0]
    sigma0 = min(math.log(v0 / v) / math.log(n / n0) for n, v in positive[1:])
    return v0 * n0 ** sigma0, sigma0


def run_orthogonality_check(cfg: ExperimentConfig) -> ScalingReport:
    """
    Sweep N2 over the configured scales (N1 = cfg.N1, or N2^2 when unset) and bound the
    worst normalized deficit per N2 by the envelope K N2^{-sigma0}.

    Passes only when sigma0 is fitted and positive. A degenerate strip centre skips the
    sweep point with a note.
    """
    torus = torus_for(cfg)
    report = new_report(cfg, torus, "N2")
    report.columns = list(ORTHOGONALITY_COLUMNS)
    tau1 = enlarge_interval(cfg.tau, cfg.margin)
    report.extras['tau0'] = list(cfg.tau)
    report.extras['tau1'] = list(tau1)
    report.extras['factors'] = 2 * cfg.k + 1

    worst = {}
    for N2 in cfg.scales:
        N1 = cfg.N1 if cfg.N1 is not None else N2 * N2
        for trial in range(effective_trials(cfg)):
            try:
                row = measure_deficit(cfg, torus, N1, N2, trial)
            except DegenerateCenterError as e:
                logger.warning(f"Skipping N2={N2} for {cfg.name}: {e}")
                report.notes.append(f"N2={N2} skipped: {e}")
                continue
            report.rows.append(row)
            worst[N2] = max(worst.get(N2, -math.inf), row['normalized_deficit'])
        logger.info(
            f"Orthogonality point measured for {cfg.name}",
            extra={"N1": N1, "N2": N2, "normalized_deficit": worst.get(N2)}
        )

    sweep = sorted(worst.items())
    report.extras['worst_deficits'] = [[N2, value] for N2, value in sweep]
    report.extras['positive_deficits'] = sum(1 for _, value in sweep if value > 0)
    try:
        K, sigma0 = deficit_envelope(sweep)
    except DataError as e:
        report.add_check('sigma_positive', False, f"sigma0 not fitted: {e}")
        return report
    report.extras['K'] = K
    report.extras['sigma0'] = sigma0

    report.points = [(N2, value) for N2, value in sweep if value > 0]
    if len(report.points) >= 3:
        report.fit_points()
        report.extras['sigma0_least_squares'] = -report.fit.slope
    report.add_check('sigma_positive', sigma0 > 0, None if sigma0 > 0 else f"nonpositive sigma0={sigma0:.4g}")
    return report
