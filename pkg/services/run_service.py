"""
Run orchestration: experiment dispatch, worker pool, report cache, output files and
the run ledger.
"""
import asyncio
import base64
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from config.experiments import ExperimentConfig, RunConfig
from database.models import ExperimentEntry, ReportModel, RunManifest
from database.repository import ReportRepository, RunRepository
from services.counting_service import run_point_estimate, run_resonance, run_weyl
from services.estimate_service import (
    run_linear_2d,
    run_linear_3d,
    run_multilinear_2d,
    run_trilinear_2d,
    run_trilinear_3d,
)
from services.nls_service import run_nls, run_small_data
from services.orthogonality_service import run_orthogonality_check
from services.scaling_service import ScalingReport
from utils.cache_manager import CacheManager, content_hash
from utils.errors import (
    BlowUpError,
    ConvergenceError,
    DataError,
    DegenerateCenterError,
    DomainError,
    ResolutionError,
    UsageError,
)
from utils.report_writer import (
    SUMMARY_SCHEMA_VERSION,
    json_safe,
    render_csv,
    write_json,
    write_text,
)


logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2

RUNNERS: Dict[str, Callable[[ExperimentConfig], ScalingReport]] = {
    "point-estimate": run_point_estimate,
    "weyl": run_weyl,
    "resonance": run_resonance,
    "trilinear-2d": run_trilinear_2d,
    "linear-2d": run_linear_2d,
    "multilinear-2d": run_multilinear_2d,
    "linear-3d": run_linear_3d,
    "trilinear-3d": run_trilinear_3d,
    "orthogonality": run_orthogonality_check,
    "nls": run_nls,
    "small-data": run_small_data,
}

# Numerical failures turn into a failed report instead of aborting the run
EXPERIMENT_ERRORS = (
    BlowUpError,
    ConvergenceError,
    DataError,
    DegenerateCenterError,
    DomainError,
    ResolutionError,
    UsageError,
)


def execute_experiment(cfg: ExperimentConfig) -> dict:
    """
    Run one experiment and return its JSON-ready outcome.

    The outcome holds the summary, the CSV text and base64 attachments; it carries no
    timing, so equal configurations give equal outcomes. Runs in worker processes.
    """
    runner = RUNNERS[cfg.kind]
    start = time.perf_counter()
    try:
        report = runner(cfg)
    except EXPERIMENT_ERRORS as e:
        logger.error(f"Experiment {cfg.name} failed: {e}", exc_info=True)
        report = ScalingReport(experiment=cfg.name, kind=cfg.kind, columns=[])
        report.add_check('completed', False, f"{type(e).__name__}: {e}")

    summary = report.summary()
    summary['config'] = cfg.to_dict()
    logger.info(
        f"Experiment {cfg.name} finished",
        extra={"kind": cfg.kind, "passed": report.passed, "seconds": time.perf_counter() - start}
    )
    return {
        'summary': json_safe(summary),
        'csv': render_csv(report.columns, report.rows) if report.columns else "",
        'attachments': {name: base64.b64encode(data).decode("ascii") for name, data in report.attachments.items()},
    }


class RunService:
    """Executes a parsed experiment file and records the run."""

    def __init__(
        self,
        run_repository: RunRepository,
        report_repository: ReportRepository,
        cache_manager: CacheManager,
        out_dir: Path,
        workers: int = 1,
    ):
        """
        Initialize run service.

        Args:
            run_repository: Ledger of runs
            report_repository: Per-experiment summaries
            cache_manager: Outcome cache keyed by canonical experiment blocks
            out_dir: Directory receiving CSV, JSON, summary and manifest files
            workers: Process count; 1 runs everything in-process
        """
        self.run_repository = run_repository
        self.report_repository = report_repository
        self.cache_manager = cache_manager
        self.out_dir = Path(out_dir)
        self.workers = max(1, int(workers))

    async def run(self, run_config: RunConfig) -> RunManifest:
        """
        Execute every experiment, write outputs and return the finished manifest.

        Experiments are processed in name order; exit_code is 0 when every report
        passes and 1 otherwise.
        """
        self.out_dir.mkdir(parents=True, exist_ok=True)
        manifest = RunManifest(
            tool_version=TOOL_VERSION,
            config_hash=content_hash(run_config.to_dict()),
            master_seed=run_config.seed,
            workers=self.workers,
            started_at=datetime.now(),
        )
        run_id = await self.run_repository.create(manifest)
        manifest.id = run_id
        logger.info(
            f"Run {run_id} started with {len(run_config.experiments)} experiments",
            extra={"config_hash": manifest.config_hash, "workers": self.workers}
        )

        experiments = sorted(run_config.experiments, key=lambda c: c.name)
        outcomes: Dict[str, Tuple[dict, bool, float]] = {}
        pending: List[ExperimentConfig] = []
        for cfg in experiments:
            cached = await self.cache_manager.get(self._cache_key(cfg))
            if cached is not None:
                outcomes[cfg.name] = (cached, True, 0.0)
            else:
                pending.append(cfg)

        for cfg, (outcome, seconds) in zip(pending, await self._execute(pending)):
            outcomes[cfg.name] = (outcome, False, seconds)
            if outcome['summary'].get('checks', {}).get('completed', True):
                await self.cache_manager.set(self._cache_key(cfg), outcome)

        summaries = {}
        for cfg in experiments:
            outcome, cache_hit, seconds = outcomes[cfg.name]
            entry = self._write_outputs(cfg, outcome, cache_hit, seconds)
            manifest.experiments.append(entry)
            summaries[cfg.name] = outcome['summary']
            await self.report_repository.add(ReportModel(
                run_id=run_id,
                experiment=cfg.name,
                kind=cfg.kind,
                passed=entry.passed,
                wall_clock=seconds,
                summary=outcome['summary'],
                cache_hit=cache_hit,
            ))

        write_json(self.out_dir / "summary.json", {
            'schema_version': SUMMARY_SCHEMA_VERSION,
            'tool_version': TOOL_VERSION,
            'config_hash': manifest.config_hash,
            'master_seed': manifest.master_seed,
            'experiments': summaries,
        })

        manifest.finished_at = datetime.now()
        manifest.exit_code = EXIT_OK if manifest.passed else EXIT_ASSERTION
        write_json(self.out_dir / "manifest.json", manifest.to_dict())
        await self.run_repository.finish(run_id, manifest)

        for entry in manifest.experiments:
            if not entry.passed:
                logger.warning(f"Experiment {entry.name} failed, see {entry.json_path}")
        logger.info(f"Run {run_id} finished with exit code {manifest.exit_code}")
        return manifest

    @staticmethod
    def _cache_key(cfg: ExperimentConfig) -> str:
        return CacheManager.key_for(cfg.to_dict(), TOOL_VERSION)

    async def _execute(self, configs: List[ExperimentConfig]) -> List[Tuple[dict, float]]:
        """Outcomes with wall-clock seconds, in the order of configs."""
        if not configs:
            return []
        if self.workers == 1 or len(configs) == 1:
            results = []
            for cfg in configs:
                start = time.perf_counter()
                outcome = execute_experiment(cfg)
                results.append((outcome, time.perf_counter() - start))
            return results

        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=min(self.workers, len(configs))) as pool:
            async def timed(cfg: ExperimentConfig) -> Tuple[dict, float]:
                start = time.perf_counter()
                outcome = await loop.run_in_executor(pool, execute_experiment, cfg)
                return outcome, time.perf_counter() - start

            return list(await asyncio.gather(*(timed(cfg) for cfg in configs)))

    def _write_outputs(self, cfg: ExperimentConfig, outcome: dict, cache_hit: bool, seconds: float) -> ExperimentEntry:
        summary = outcome['summary']
        json_path = write_json(self.out_dir / f"{cfg.name}.json", summary)
        csv_path: Optional[Path] = None
        if outcome['csv']:
            csv_path = write_text(self.out_dir / f"{cfg.name}.csv", outcome['csv'])
        for name, encoded in sorted(outcome.get('attachments', {}).items()):
            path = self.out_dir / f"{cfg.name}.{name}.fstate"
            path.write_bytes(base64.b64decode(encoded))
        return ExperimentEntry(
            name=cfg.name,
            kind=cfg.kind,
            passed=bool(summary.get('pass', False)),
            wall_clock=seconds,
            csv_path=str(csv_path) if csv_path else None,
            json_path=str(json_path),
            cache_hit=cache_hit,
        )
