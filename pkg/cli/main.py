"""
Command-line entry point.

    python -m cli.main run experiments/smoke.toml --workers 4 --out-dir results
    python -m cli.main export-plots results/summary.json
    python -m cli.main runs --out-dir results --limit 10

Exit codes: 0 when every assertion passes, 1 when an experiment fails its checks,
2 for configuration errors, missing reports and a missing run ledger.
"""
import argparse
import asyncio
import json
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

from config.experiments import load_run_config
from config.settings import Config
from database.connection import DatabaseConnection
from database.repository import CacheRepository, ReportRepository, RunRepository
from services.run_service import EXIT_CONFIG, EXIT_OK, RunService
from utils.cache_manager import CacheManager
from utils.errors import ConfigError
from utils.report_writer import PLOT_COLUMNS, read_json, write_csv, write_json


# Configure logging
def setup_logging(debug_mode: bool = False) -> None:
    """
    Configure logging for the application.

    Args:
        debug_mode: If True, set logging level to DEBUG, otherwise INFO
    """
    log_level = logging.DEBUG if debug_mode else logging.INFO

    # Configure root logger
    logging.basicConfig(
        level=log_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stdout)
        ]
    )

    # Set specific log levels for noisy libraries
    logging.getLogger('aiosqlite').setLevel(logging.WARNING)

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging configured with level: {logging.getLevelName(log_level)}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides the file and MASTER_SEED)")
    common.add_argument("--workers", type=int, default=None, help="worker processes (default: WORKERS)")
    common.add_argument("--out-dir", default=None, help="output directory (default: OUT_DIR)")

    parser = argparse.ArgumentParser(prog="strichartz", description="Irrational-torus Strichartz experiments")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", parents=[common], help="run an experiment file")
    run.add_argument("config", help="TOML experiment file")

    export = commands.add_parser("export-plots", parents=[common], help="export log-log plot tables")
    export.add_argument("report", help="summary.json written by run, or one experiment JSON")

    runs = commands.add_parser("runs", parents=[common], help="list recorded runs and failed experiments")
    runs.add_argument("--limit", type=int, default=5, help="runs and failures to list (default: 5)")
    return parser


async def run_experiments(config_path: str, settings: Config, seed: Optional[int],
                          workers: Optional[int], out_dir: Optional[str]) -> int:
    """
    Load, execute and record one experiment file.

    Returns:
        Exit code
    """
    logger = logging.getLogger(__name__)
    defaults = {
        'rtol': settings.norm_rtol,
        'n_t': settings.nt_start,
        'n_t_cap': settings.nt_cap,
        'blowup_ceiling': settings.blowup_ceiling,
    }
    try:
        run_config = load_run_config(
            config_path, seed_override=seed, defaults=defaults, default_seed=settings.master_seed,
        )
    except ConfigError as e:
        for message in e.messages:
            print(f"config error: {message}", file=sys.stderr)
        return EXIT_CONFIG

    target = Path(out_dir or settings.out_dir)
    db_connection = DatabaseConnection(ledger_path(settings, out_dir))

    try:
        await db_connection.init_db()
        cache_manager = CacheManager(
            CacheRepository(db_connection),
            ttl_minutes=settings.cache_ttl_minutes,
            enabled=settings.cache_enabled,
        )
        await cache_manager.cleanup()
        service = RunService(
            run_repository=RunRepository(db_connection),
            report_repository=ReportRepository(db_connection),
            cache_manager=cache_manager,
            out_dir=target,
            workers=workers or settings.workers,
        )
        manifest = await service.run(run_config)

    finally:
        await db_connection.close()

    for entry in manifest.experiments:
        if not entry.passed:
            print(f"assertion failed: {entry.name} ({entry.json_path})", file=sys.stderr)
    logger.info(f"Manifest written to {target / 'manifest.json'}")
    return manifest.exit_code


def ledger_path(settings: Config, out_dir: Optional[str]) -> str:
    """runs.db inside --out-dir when given, else DB_PATH."""
    return str(Path(out_dir) / "runs.db") if out_dir else settings.db_path


async def ledger_lines(db_connection: DatabaseConnection, limit: int = 5) -> List[str]:
    """Counts, the most recent runs and the failed experiments of a run ledger."""
    run_repository = RunRepository(db_connection)
    report_repository = ReportRepository(db_connection)
    lines = [
        f"Runs: {await run_repository.count()}",
        f"Experiment reports: {await report_repository.count()}",
        f"Cached outcomes (unexpired): {await CacheRepository(db_connection).count()}",
    ]
    runs = await run_repository.recent(limit)
    if not runs:
        lines.append("No runs recorded")
        return lines

    lines.append("Recent runs:")
    for run in runs:
        status = "unfinished" if run['exit_code'] is None else f"exit {run['exit_code']}"
        lines.append(
            f"  #{run['id']} [{run['started_at']}] seed={run['master_seed']} workers={run['workers']} "
            f"config={run['config_hash'][:12]} {status}"
        )
    failures = await report_repository.failed(limit)
    if failures:
        lines.append("Failed experiments:")
        lines.extend(f"  #{report.run_id} {report.experiment} ({report.kind})" for report in failures)
    return lines


async def show_runs(db_path: str, limit: int) -> int:
    """
    Print the run ledger.

    Returns:
        Exit code: 2 if the ledger does not exist, 0 otherwise
    """
    if not Path(db_path).is_file():
        print(f"run ledger not found: {db_path}", file=sys.stderr)
        return EXIT_CONFIG
    db_connection = DatabaseConnection(db_path)
    try:
        await db_connection.init_db()
        lines = await ledger_lines(db_connection, limit)
    finally:
        await db_connection.close()

    print(f"Run ledger: {db_path}")
    for line in lines:
        print(line)
    return EXIT_OK


def plot_rows(summary: dict) -> List[dict]:
    """(log2 scale, log2 value, fitted log2 value) per sweep point of one summary."""
    slope, intercept = summary.get('slope'), summary.get('intercept')
    rows = []
    for scale, value in summary.get('points') or []:
        fitted = None if slope is None else intercept + slope * math.log2(scale)
        rows.append({
            'log2_scale': math.log2(scale),
            'log2_value': math.log2(value),
            'fitted_log2_value': fitted,
        })
    return rows


def export_plots(report_path: str, out_dir: Optional[str] = None) -> int:
    """
    Write <name>.plot.csv and <name>.fit.json per experiment plus a combined plots.csv.

    Returns:
        Exit code: 2 if the report is missing or unreadable, 0 otherwise
    """
    logger = logging.getLogger(__name__)
    path = Path(report_path)
    if not path.is_file():
        print(f"report not found: {path}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = read_json(path)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        print(f"report {path} is not valid JSON: {e}", file=sys.stderr)
        return EXIT_CONFIG

    if 'experiments' in report:
        summaries = report['experiments'] or {}
    elif 'experiment' in report:
        summaries = {report['experiment']: report}
    else:
        summaries = {}

    target = Path(out_dir) if out_dir else path.parent / "plots"
    combined = []
    for name in sorted(summaries):
        summary = summaries[name]
        rows = plot_rows(summary)
        write_csv(target / f"{name}.plot.csv", PLOT_COLUMNS, rows)
        write_json(target / f"{name}.fit.json", {
            'experiment': name,
            'slope': summary.get('slope'),
            'intercept': summary.get('intercept'),
        })
        combined.extend(dict(row, experiment=name) for row in rows)
    write_csv(target / "plots.csv", ["experiment"] + PLOT_COLUMNS, combined)

    logger.info(f"Exported plot tables for {len(summaries)} experiments to {target}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    try:
        settings = Config.from_env()
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    setup_logging(settings.debug_mode)

    if args.command == "export-plots":
        return export_plots(args.report, args.out_dir)
    if args.command == "runs":
        return asyncio.run(show_runs(ledger_path(settings, args.out_dir), args.limit))
    if args.workers is not None and args.workers < 1:
        print(f"config error: --workers must be >= 1, got {args.workers}", file=sys.stderr)
        return EXIT_CONFIG
    return asyncio.run(run_experiments(args.config, settings, args.seed, args.workers, args.out_dir))


if __name__ == "__main__":
    sys.exit(main())
