"""
End-to-end tests for the command-line runner and plot export.
"""
import math
from pathlib import Path

import pytest

from cli.main import main, plot_rows
from utils.report_writer import read_csv, read_json


SMALL_RUN = """
[run]
seed = 3

[[experiment]]
name = "point-estimate"
kind = "point-estimate"
trials = 4
set_size = 16
box = 3

[[experiment]]
name = "resonance"
kind = "resonance"
M = 1
trials = 3

[[experiment]]
name = "weyl"
kind = "weyl"
p = 3.0
scales = [4, 8, 16]
floor_factor = 4
tolerance = 10.0

[[experiment]]
name = "nls"
kind = "nls"
d = 2
k = 1
data = "plane_wave"
N1 = 1
amplitude = 0.5
T = 0.02
dt = 0.001
snapshot = true
"""

BLOW_UP = """
[[experiment]]
name = "nls-blowup"
kind = "nls"
k = 1
data = "plane_wave"
N1 = 1
amplitude = 2.0
T = 0.01
dt = 0.001
blowup_ceiling = 1.0
"""


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """Run against default settings regardless of the developer's .env."""
    monkeypatch.setattr('config.settings.load_dotenv', lambda: None)
    for key in ("WORKERS", "OUT_DIR", "DB_PATH", "MASTER_SEED", "CACHE_ENABLED", "DEBUG_MODE"):
        monkeypatch.delenv(key, raising=False)


@pytest.fixture
def run_file(tmp_path):
    path = tmp_path / "small.toml"
    path.write_text(SMALL_RUN)
    return path


def outputs(directory: Path) -> dict:
    """Every deterministic output file of a run, by name."""
    return {
        p.name: p.read_bytes()
        for p in sorted(directory.iterdir())
        if p.suffix in (".csv", ".fstate") or p.name == "summary.json"
    }


@pytest.mark.integration
class TestRunCommand:
    """Test cases for `run`."""

    def test_run_writes_outputs(self, run_file, tmp_path):
        out = tmp_path / "out"

        code = main(["run", str(run_file), "--out-dir", str(out)])

        assert code == 0
        for name in ("point-estimate", "resonance", "weyl", "nls"):
            assert (out / f"{name}.csv").is_file()
            assert (out / f"{name}.json").is_file()
        assert (out / "nls.final_state.fstate").is_file()
        manifest = read_json(out / "manifest.json")
        assert manifest['exit_code'] == 0
        assert manifest['master_seed'] == 3
        assert [e['name'] for e in manifest['experiments']] == ["nls", "point-estimate", "resonance", "weyl"]
        summary = read_json(out / "summary.json")
        assert summary['schema_version'] == 1
        assert set(summary['experiments']) == {"nls", "point-estimate", "resonance", "weyl"}

    def test_workers_do_not_change_results(self, run_file, tmp_path):
        serial, parallel = tmp_path / "serial", tmp_path / "parallel"

        assert main(["run", str(run_file), "--out-dir", str(serial), "--workers", "1"]) == 0
        assert main(["run", str(run_file), "--out-dir", str(parallel), "--workers", "4"]) == 0

        assert outputs(serial) == outputs(parallel)

    def test_second_run_hits_cache(self, run_file, tmp_path):
        out = tmp_path / "out"
        main(["run", str(run_file), "--out-dir", str(out)])
        first = outputs(out)

        assert main(["run", str(run_file), "--out-dir", str(out)]) == 0

        manifest = read_json(out / "manifest.json")
        assert all(e['cache_hit'] for e in manifest['experiments'])
        assert outputs(out) == first

    def test_seed_override(self, run_file, tmp_path):
        out = tmp_path / "out"

        main(["run", str(run_file), "--out-dir", str(out), "--seed", "11"])

        assert read_json(out / "manifest.json")['master_seed'] == 11

    def test_failed_assertion_exit_code(self, tmp_path, capsys):
        path = tmp_path / "blowup.toml"
        path.write_text(BLOW_UP)

        code = main(["run", str(path), "--out-dir", str(tmp_path / "out")])

        assert code == 1
        assert "assertion failed: nls-blowup" in capsys.readouterr().err

    def test_hypothesis_violation_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text('[[experiment]]\nname = "l3"\nkind = "linear-3d"\np = 5.0\nscales = [1, 2, 4]\n')

        code = main(["run", str(path), "--out-dir", str(tmp_path / "out")])

        assert code == 2
        assert "linear-3d p-range" in capsys.readouterr().err
        assert not (tmp_path / "out").exists()

    def test_missing_config(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.toml"), "--out-dir", str(tmp_path / "out")]) == 2

    def test_invalid_workers(self, run_file, tmp_path):
        assert main(["run", str(run_file), "--workers", "0", "--out-dir", str(tmp_path / "out")]) == 2


@pytest.mark.integration
class TestRunsCommand:
    """Test cases for `runs`."""

    def test_lists_runs_and_failures(self, tmp_path, capsys):
        out = tmp_path / "out"
        path = tmp_path / "blowup.toml"
        path.write_text(BLOW_UP)
        main(["run", str(path), "--out-dir", str(out)])
        capsys.readouterr()

        code = main(["runs", "--out-dir", str(out)])

        printed = capsys.readouterr().out.splitlines()
        assert code == 0
        assert f"Run ledger: {out / 'runs.db'}" in printed
        assert "Runs: 1" in printed
        assert any(line.startswith("  #1 [") and line.endswith("exit 1") for line in printed)
        assert "  #1 nls-blowup (nls)" in printed

    def test_limit(self, run_file, tmp_path, capsys):
        out = tmp_path / "out"
        main(["run", str(run_file), "--out-dir", str(out)])
        main(["run", str(run_file), "--out-dir", str(out)])
        capsys.readouterr()

        assert main(["runs", "--out-dir", str(out), "--limit", "1"]) == 0

        printed = capsys.readouterr().out.splitlines()
        assert "Runs: 2" in printed
        assert [line for line in printed if line.startswith("  #")] == [
            next(line for line in printed if line.startswith("  #2 ["))
        ]

    def test_missing_ledger(self, tmp_path, capsys):
        assert main(["runs", "--out-dir", str(tmp_path / "none")]) == 2
        assert "run ledger not found" in capsys.readouterr().err


@pytest.mark.integration
class TestExportPlots:
    """Test cases for `export-plots`."""

    def test_export_after_run(self, run_file, tmp_path):
        out = tmp_path / "out"
        main(["run", str(run_file), "--out-dir", str(out)])

        code = main(["export-plots", str(out / "summary.json"), "--out-dir", str(tmp_path / "plots")])

        assert code == 0
        fit = read_json(tmp_path / "plots" / "weyl.fit.json")
        rows = read_csv(tmp_path / "plots" / "weyl.plot.csv")
        assert [float(r['log2_scale']) for r in rows] == [2.0, 3.0, 4.0]
        for row in rows:
            expected = fit['intercept'] + fit['slope'] * float(row['log2_scale'])
            assert abs(float(row['fitted_log2_value']) - expected) <= 1e-12
        assert len(read_csv(tmp_path / "plots" / "plots.csv")) == 3

    def test_single_experiment_report(self, tmp_path):
        report = tmp_path / "weyl.json"
        report.write_text('{"experiment": "weyl", "points": [[2, 2.0], [4, 4.0]], "slope": 1.0, "intercept": 0.0}')

        assert main(["export-plots", str(report)]) == 0

        rows = read_csv(tmp_path / "plots" / "weyl.plot.csv")
        assert [r['fitted_log2_value'] for r in rows] == ["1.0", "2.0"]

    def test_empty_report(self, tmp_path):
        report = tmp_path / "summary.json"
        report.write_text('{"experiments": {}}')

        assert main(["export-plots", str(report)]) == 0

        assert (tmp_path / "plots" / "plots.csv").read_text() == "experiment,log2_scale,log2_value,fitted_log2_value\n"

    def test_missing_report(self, tmp_path):
        assert main(["export-plots", str(tmp_path / "missing.json")]) == 2

    def test_invalid_report(self, tmp_path):
        report = tmp_path / "summary.json"
        report.write_text("{broken")

        assert main(["export-plots", str(report)]) == 2

    def test_plot_rows_without_fit(self):
        rows = plot_rows({'points': [[8, 2.0]], 'slope': None, 'intercept': None})
        assert rows == [{'log2_scale': 3.0, 'log2_value': 1.0, 'fitted_log2_value': None}]
        assert plot_rows({}) == []
        assert math.isclose(plot_rows({'points': [[2, 8.0]], 'slope': 1.0, 'intercept': 1.0})[0]['fitted_log2_value'], 2.0)
