"""
Integration tests running each experiment driver at small sizes.
"""
import base64
import math

import pytest

from config.experiments import parse_experiment
from services.counting_service import run_point_estimate, run_resonance, run_weyl
from services.estimate_service import run_linear_2d, run_linear_3d, run_multilinear_2d, run_trilinear_2d
from services.nls_service import run_nls, run_small_data
from services.orthogonality_service import enlarge_interval, run_orthogonality_check
from services.run_service import RUNNERS, execute_experiment
from spectral.serialization import loads_state
from utils.report_writer import TRAJECTORY_COLUMNS


def config(kind, **fields):
    block = dict(fields, kind=kind)
    block.setdefault('name', kind)
    return parse_experiment(block, seed=7)


@pytest.mark.integration
class TestCountingDrivers:
    """Point-estimate, Weyl and resonance drivers."""

    def test_point_estimate(self):
        cfg = config("point-estimate", d=2, trials=6, set_size=24, box=4)

        report = run_point_estimate(cfg)

        assert len(report.rows) == 6
        assert report.checks == {'chain': True}
        assert report.extras['chain_violations'] == 0

    def test_point_estimate_3d(self):
        report = run_point_estimate(config("point-estimate", d=3, trials=3, set_size=16, box=2))
        assert report.passed

    def test_weyl(self):
        cfg = config("weyl", p=3.0, scales=[4, 8, 16], floor_factor=4, tolerance=10.0)

        report = run_weyl(cfg)

        assert [row['M'] for row in report.rows] == [4, 8, 16]
        for row in report.rows:
            assert math.sqrt(row['M']) * (1 - 1e-9) <= row['value'] <= row['M'] * (1 + 1e-9)
        assert report.fit is not None
        assert report.predicted == pytest.approx(2.0 / 3.0)
        assert report.passed

    def test_resonance(self):
        report = run_resonance(config("resonance", M=1, trials=5))

        assert len(report.rows) == 5
        assert all(row['pairs'] == 81 for row in report.rows)
        assert report.passed


@pytest.mark.integration
class TestEstimateDrivers:
    """Linear and multilinear sweep drivers."""

    def test_linear_2d_cube(self):
        cfg = config("linear-2d", mode="cube", p=7.0, scales=[1, 2, 4], tolerance=10.0)

        report = run_linear_2d(cfg)

        assert len(report.rows) == 3
        assert [s for s, _ in report.points] == [1, 2, 4]
        assert report.checks['cardinality_sup']
        assert report.checks['bernstein_sup']
        assert report.predicted == pytest.approx(2.0 / 3.0 - 2.0 / 7.0)
        assert all(row['grid_used'] >= 2 for row in report.rows)

    def test_linear_3d_random_trials(self):
        cfg = config("linear-3d", mode="cube", p=6.0, scales=[1, 2, 4], family="random_phase", trials=2,
                     tolerance=10.0)

        report = run_linear_3d(cfg)

        assert len(report.rows) == 6
        assert report.checks['cardinality_sup']

    def test_rational_control_run(self):
        cfg = config("linear-2d", mode="cube", p=7.0, scales=[1, 2, 4], alphas=[1.0, 1.0], tolerance=10.0)

        report = run_linear_2d(cfg)

        assert report.extras['rational'] is True
        assert "rational torus: control run" in report.notes

    @pytest.mark.slow
    def test_trilinear_2d(self):
        cfg = config("trilinear-2d", p=4.0, N1=4, scales=[1, 2, 4], tolerance=10.0)

        report = run_trilinear_2d(cfg)

        assert [row['M'] for row in report.rows] == [1, 2, 4]
        assert all(row['N1'] == 4 for row in report.rows)
        assert report.fit is not None

    @pytest.mark.slow
    def test_multilinear_separated(self):
        cfg = config("multilinear-2d", k=3, mode="separated", N2=1, scales=[1, 2, 4])

        report = run_multilinear_2d(cfg)

        assert len(report.rows) == 3
        assert 'delta_positive' in report.checks
        assert report.scale_label == "N1"


@pytest.mark.integration
class TestOrthogonalityDriver:
    """Almost-orthogonality driver."""

    def test_enlarge_interval(self):
        assert enlarge_interval((0.1, 0.9), 0.05) == pytest.approx((0.05, 0.95))
        assert enlarge_interval((0.02, 1.0), 0.05) == (0.0, 1.0)

    @pytest.mark.slow
    def test_small_sweep(self):
        cfg = config("orthogonality", scales=[1, 2, 4], N1=4)

        report = run_orthogonality_check(cfg)

        assert len(report.rows) == 3
        assert 'sigma_positive' in report.checks
        for row in report.rows:
            assert row['strips'] >= 1
            assert row['deficit'] == pytest.approx(row['lhs_sq'] - row['strip_sum'])


@pytest.mark.integration
class TestNLSDrivers:
    """NLS trajectory and small-data drivers."""

    def test_plane_wave_run(self):
        cfg = config("nls", d=2, k=1, data="plane_wave", N1=2, amplitude=0.5, T=0.1, dt=1e-3, output_every=10,
                     snapshot=True)

        report = run_nls(cfg)

        assert report.passed
        assert report.extras['plane_wave_error'] <= 1e-6
        assert len(report.rows) == 11
        assert report.columns == TRAJECTORY_COLUMNS
        assert loads_state(report.attachments['final_state']).l2_norm() == pytest.approx(0.5)

    def test_random_run(self):
        cfg = config("nls", d=3, k=2, data="random", family="gaussian", N1=1, amplitude=0.01, T=0.02, dt=1e-3)

        report = run_nls(cfg)

        assert report.checks['mass']
        assert report.extras['grid'] == 8

    def test_blow_up_is_reported(self):
        cfg = config("nls", d=2, k=1, data="plane_wave", N1=1, amplitude=2.0, T=0.01, dt=1e-3,
                     blowup_ceiling=1.0)

        report = run_nls(cfg)

        assert report.checks == {'no_blowup': False}
        assert not report.passed

    def test_small_data_linear_isometry(self):
        cfg = config("small-data", d=2, k=3, N1=1, deltas=[0.0, 0.01, 0.1, 1.0], T=0.01, dt=1e-3,
                     nonlinear=False)

        report = run_small_data(cfg)

        assert report.checks == {'no_blowup': True, 'linear_isometry': True}
        assert report.rows[0]['ratio'] == 1.0
        assert all(r == pytest.approx(1.0, abs=1e-9) for _, r in report.points)

    def test_small_data_nonlinear(self):
        cfg = config("small-data", d=3, k=2, N1=1, deltas=[0.001, 0.01], T=0.01, dt=1e-3)

        report = run_small_data(cfg)

        assert report.checks == {'no_blowup': True}
        assert report.extras['s_c'] == 1.0
        assert report.extras['ratio_at_smallest_delta'] == pytest.approx(1.0, rel=1e-3)


@pytest.mark.integration
class TestExecuteExperiment:
    """Outcome construction used by the run service and its workers."""

    def test_every_kind_has_a_runner(self):
        from config.experiments import KINDS
        assert set(RUNNERS) == set(KINDS)

    def test_outcome_is_deterministic(self):
        cfg = config("point-estimate", trials=3, set_size=8, box=3)

        first = execute_experiment(cfg)
        second = execute_experiment(cfg)

        assert first == second
        assert first['summary']['config']['seed'] == 7
        assert first['csv'].startswith("trial,p,r,set_size,lhs,intermediate,rhs,ratio,pass\n")

    def test_attachments_are_encoded(self):
        cfg = config("nls", d=2, k=1, data="plane_wave", N1=1, amplitude=0.5, T=0.01, dt=1e-3, snapshot=True)

        outcome = execute_experiment(cfg)

        payload = base64.b64decode(outcome['attachments']['final_state'])
        assert loads_state(payload).l2_norm() == pytest.approx(0.5)

    def test_numerical_failure_becomes_failed_report(self):
        cfg = config("linear-2d", mode="cube", p=7.0, scales=[1, 2, 4], n_t=2, n_t_cap=4, rtol=1e-12)

        outcome = execute_experiment(cfg)

        assert outcome['summary']['pass'] is False
        assert outcome['summary']['checks'] == {'completed': False}
        assert outcome['csv'] == ""
        assert "ConvergenceError" in outcome['summary']['notes'][0]
