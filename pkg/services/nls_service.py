"""
NLS experiments: single trajectories with conservation checks and the small-data
critical-norm sweep.
"""
import logging
import math
from typing import Optional

from config.experiments import ExperimentConfig
from nls.models import FOCUSING, NLSProblem, Trajectory
from nls.solver import linear_step, plane_wave_solution, solve
from norms.mixed_norms import h_s_norm
from services.data_service import make_data
from services.estimate_service import new_report, origin, torus_for
from services.scaling_service import ScalingReport
from spectral.regions import CubeRegion
from spectral.serialization import dumps_state
from spectral.state import FourierState
from spectral.torus import critical_index
from utils.errors import BlowUpError, DataError
from utils.report_writer import SMALL_DATA_COLUMNS, TRAJECTORY_COLUMNS


logger = logging.getLogger(__name__)

PLANE_WAVE_TOLERANCE = 1e-6
LINEAR_ISOMETRY_SLACK = 1e-9


def relative_drift(trajectory: Trajectory, attribute: str) -> float:
    """max_t |q(t) - q(0)| / |q(0)|, or the absolute drift when q(0) = 0."""
    if not trajectory.frames:
        return 0.0
    start = abs(getattr(trajectory.frames[0].quantities, attribute))
    drift = trajectory.max_drift(attribute)
    return drift / start if start > 0 else drift


def initial_data(cfg: ExperimentConfig, torus) -> FourierState:
    """
    plane_wave: amplitude at n0 = (N1, 0, ...). random: configured family on the band
    cube [-N1, N1]^d, scaled to L^2 norm equal to the amplitude.
    """
    K = cfg.N1
    if cfg.data == "plane_wave":
        return FourierState.single_mode(torus, (K,) + (0,) * (torus.d - 1), cfg.amplitude)
    phi = make_data(torus, CubeRegion(origin(torus.d), K), cfg.family, cfg.seed, cfg.name)
    return phi.scaled(cfg.amplitude / phi.l2_norm())


def build_problem(cfg: ExperimentConfig, torus, initial: FourierState, nonlinear: Optional[bool] = None) -> NLSProblem:
    return NLSProblem(
        torus=torus,
        k=cfg.k,
        sign=cfg.sign,
        initial=initial,
        T=cfg.T,
        dt=cfg.dt,
        grid_per_dim=cfg.grid_per_dim,
        band=cfg.N1,
        nonlinear=cfg.nonlinear if nonlinear is None else nonlinear,
        output_every=cfg.output_every,
        blowup_ceiling=cfg.blowup_ceiling,
    )


def _label(report: ScalingReport, cfg: ExperimentConfig) -> None:
    report.extras['clock'] = "pde"
    report.extras['sign'] = cfg.sign
    report.extras['equation'] = "focusing" if cfg.sign == FOCUSING else "defocusing"
    report.extras['k'] = cfg.k


def run_nls(cfg: ExperimentConfig) -> ScalingReport:
    """
    Integrate one problem and check mass drift, weighted energy drift and, for plane
    waves, the distance to the exact solution at every recorded frame.
    """
    torus = torus_for(cfg)
    report = new_report(cfg, torus, "t")
    report.columns = list(TRAJECTORY_COLUMNS)
    _label(report, cfg)
    initial = initial_data(cfg, torus)
    problem = build_problem(cfg, torus, initial)

    try:
        trajectory = solve(problem)
    except BlowUpError as e:
        logger.error(f"NLS run {cfg.name} blew up: {e}")
        report.add_check('no_blowup', False, str(e))
        return report

    report.rows = trajectory.rows()
    report.extras['grid'] = trajectory.grid_size
    report.extras['steps'] = problem.steps
    mass_drift = relative_drift(trajectory, 'mass')
    energy_drift = relative_drift(trajectory, 'energy_weighted')
    report.extras['mass_drift'] = mass_drift
    report.extras['energy_drift'] = energy_drift
    report.extras['energy_unweighted_drift'] = relative_drift(trajectory, 'energy_unweighted')
    report.add_check('mass', mass_drift <= cfg.mass_tolerance)
    report.add_check('energy', energy_drift <= cfg.energy_tolerance)

    if cfg.data == "plane_wave":
        n0 = tuple(int(v) for v in initial.modes[0])
        error = 0.0
        for frame in trajectory.frames:
            if cfg.nonlinear:
                exact = plane_wave_solution(torus, n0, cfg.amplitude, cfg.k, cfg.sign, frame.t)
            else:
                exact = linear_step(FourierState.single_mode(torus, n0, cfg.amplitude), frame.t)
            diff = frame.state.add(exact.scaled(-1.0))
            error = max(error, diff.l2_norm())
        report.extras['plane_wave_error'] = error
        report.add_check('plane_wave', error <= PLANE_WAVE_TOLERANCE)

    if cfg.snapshot:
        report.attachments['final_state'] = dumps_state(trajectory.final.state)

    logger.info(
        f"NLS run {cfg.name} finished",
        extra={"mass_drift": mass_drift, "energy_drift": energy_drift, "passed": report.passed}
    )
    return report


def run_small_data(cfg: ExperimentConfig) -> ScalingReport:
    """
    For u(0) = delta * phi with ||phi||_{H^{s_c}} = 1 on the band cube, report
    sup_t ||u(t)||_{H^{s_c}} / ||delta phi||_{H^{s_c}} per delta (1 by convention at delta = 0).

    The ratio is reported, not asserted. Checks: no blow-up, and the linear isometry
    when the nonlinearity is disabled.
    """
    torus = torus_for(cfg)
    s_c = float(critical_index(torus.d, cfg.k))
    report = new_report(cfg, torus, "delta")
    report.columns = list(SMALL_DATA_COLUMNS)
    _label(report, cfg)
    report.extras['s_c'] = s_c

    phi = make_data(torus, CubeRegion(origin(torus.d), cfg.N1), "gaussian", cfg.seed, cfg.name)
    phi = phi.scaled(1.0 / h_s_norm(phi, s_c))

    blowups = 0
    for delta in sorted(cfg.deltas):
        if delta == 0:
            report.rows.append({'delta': 0.0, 'ratio': 1.0, 'h_sc_initial': 0.0, 'h_sc_max': 0.0,
                                'mass_drift': 0.0, 'energy_drift': 0.0})
            continue
        initial = phi.scaled(delta)
        try:
            trajectory = solve(build_problem(cfg, torus, initial))
        except BlowUpError as e:
            blowups += 1
            report.notes.append(f"delta={delta}: {e}")
            report.rows.append({'delta': float(delta), 'ratio': math.inf})
            continue
        start = h_s_norm(initial, s_c)
        peak = max(f.quantities.h_sc for f in trajectory.frames)
        ratio = peak / start
        report.rows.append({
            'delta': float(delta),
            'ratio': ratio,
            'h_sc_initial': start,
            'h_sc_max': peak,
            'mass_drift': relative_drift(trajectory, 'mass'),
            'energy_drift': relative_drift(trajectory, 'energy_weighted'),
        })
        report.points.append((float(delta), ratio))
        logger.info(f"Small-data ratio at delta={delta}: {ratio:.6g}")

    report.add_check('no_blowup', blowups == 0)
    if not cfg.nonlinear:
        worst = max((ratio for _, ratio in report.points), default=1.0)
        report.add_check('linear_isometry', worst <= 1.0 + LINEAR_ISOMETRY_SLACK)
    if report.points:
        report.extras['ratio_at_smallest_delta'] = min(report.points)[1]
    if len(report.points) >= 3:
        try:
            report.fit_points()
        except DataError as e:
            report.notes.append(f"ratio fit skipped: {e}")
    return report
