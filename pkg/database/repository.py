"""
Repository layer for database operations.
"""
import logging
from datetime import datetime, timedelta
from typing import List, Optional

from database.connection import DatabaseConnection
from database.models import ReportModel, RunManifest


logger = logging.getLogger(__name__)


class RunRepository:
    """Repository for run-ledger operations."""

    def __init__(self, db_connection: DatabaseConnection):
        """
        Initialize run repository.

        Args:
            db_connection: Database connection manager
        """
        self.db_connection = db_connection

    async def create(self, manifest: RunManifest) -> int:
        """
        Insert a started run.

        Args:
            manifest: Manifest of the run; its experiments may still be empty

        Returns:
            ID of the inserted run
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute(
                """
                INSERT INTO runs
                (tool_version, config_hash, master_seed, workers, started_at)
                VALUES (?, ?, ?, ?, ?)
                """,
                (
                    manifest.tool_version,
                    manifest.config_hash,
                    manifest.master_seed,
                    manifest.workers,
                    manifest.started_at
                )
            )
            await conn.commit()

            run_id = cursor.lastrowid
            logger.debug(
                "Run registered",
                extra={"run_id": run_id, "config_hash": manifest.config_hash}
            )
            return run_id

        except Exception as e:
            logger.error(
                f"Failed to create run: {e}",
                extra={"config_hash": manifest.config_hash},
                exc_info=True
            )
            await conn.rollback()
            raise

    async def finish(self, run_id: int, manifest: RunManifest) -> None:
        """
        Store the completed manifest and exit code of a run.

        Args:
            run_id: Run ID returned by create
            manifest: Completed manifest
        """
        conn = await self.db_connection.get_connection()

        try:
            await conn.execute(
                """
                UPDATE runs
                SET finished_at = ?, exit_code = ?, manifest = ?
                WHERE id = ?
                """,
                (manifest.finished_at, manifest.exit_code, manifest.to_json(), run_id)
            )
            await conn.commit()
            logger.debug(f"Run {run_id} finished with exit code {manifest.exit_code}")

        except Exception as e:
            logger.error(f"Failed to finish run {run_id}: {e}", exc_info=True)
            await conn.rollback()
            raise

    async def get_manifest(self, run_id: int) -> Optional[dict]:
        """
        Get the stored manifest JSON of a run.

        Returns:
            Manifest dictionary or None if the run is unknown or unfinished
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute("SELECT manifest FROM runs WHERE id = ?", (run_id,))
            row = await cursor.fetchone()
            if not row or not row['manifest']:
                return None
            return ReportModel.summary_from_json(row['manifest'])

        except Exception as e:
            logger.error(f"Failed to get manifest for run {run_id}: {e}", exc_info=True)
            raise

    async def recent(self, limit: int = 5) -> List[dict]:
        """
        Get the most recent runs, newest first.

        Args:
            limit: Maximum number of runs

        Returns:
            Dictionaries with id, tool_version, config_hash, master_seed, workers,
            started_at, finished_at and exit_code (None while unfinished)
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute(
                """
                SELECT id, tool_version, config_hash, master_seed, workers,
                       started_at, finished_at, exit_code
                FROM runs
                ORDER BY id DESC
                LIMIT ?
                """,
                (limit,)
            )
            rows = await cursor.fetchall()
            return [dict(row) for row in rows]

        except Exception as e:
            logger.error(f"Failed to list runs: {e}", exc_info=True)
            raise

    async def count(self) -> int:
        """
        Get number of recorded runs.

        Returns:
            Number of runs
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute("SELECT COUNT(*) as count FROM runs")
            row = await cursor.fetchone()
            return row['count'] if row else 0

        except Exception as e:
            logger.error(f"Failed to count runs: {e}")
            return 0


class ReportRepository:
    """Repository for per-experiment summaries."""

    def __init__(self, db_connection: DatabaseConnection):
        """
        Initialize report repository.

        Args:
            db_connection: Database connection manager
        """
        self.db_connection = db_connection

    async def add(self, report: ReportModel) -> int:
        """
        Insert or replace the summary of one experiment in a run.

        Args:
            report: Report model to store

        Returns:
            ID of the stored report
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute(
                """
                INSERT INTO reports
                (run_id, experiment, kind, passed, wall_clock, cache_hit, summary)
                VALUES (?, ?, ?, ?, ?, ?, ?)
                ON CONFLICT(run_id, experiment) DO UPDATE SET
                    passed = excluded.passed,
                    wall_clock = excluded.wall_clock,
                    cache_hit = excluded.cache_hit,
                    summary = excluded.summary
                """,
                (
                    report.run_id,
                    report.experiment,
                    report.kind,
                    int(report.passed),
                    report.wall_clock,
                    int(report.cache_hit),
                    report.summary_to_json()
                )
            )
            await conn.commit()
            return cursor.lastrowid

        except Exception as e:
            logger.error(
                f"Failed to store report: {e}",
                extra={"run_id": report.run_id, "experiment": report.experiment},
                exc_info=True
            )
            await conn.rollback()
            raise

    async def get_by_run(self, run_id: int) -> List[ReportModel]:
        """
        Get all reports of a run, ordered by experiment name.

        Args:
            run_id: Run ID

        Returns:
            List of report models
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute(
                """
                SELECT id, run_id, experiment, kind, passed, wall_clock, cache_hit, summary
                FROM reports
                WHERE run_id = ?
                ORDER BY experiment ASC
                """,
                (run_id,)
            )
            rows = await cursor.fetchall()

            return [
                ReportModel(
                    id=row['id'],
                    run_id=row['run_id'],
                    experiment=row['experiment'],
                    kind=row['kind'],
                    passed=bool(row['passed']),
                    wall_clock=row['wall_clock'],
                    cache_hit=bool(row['cache_hit']),
                    summary=ReportModel.summary_from_json(row['summary'])
                )
                for row in rows
            ]

        except Exception as e:
            logger.error(f"Failed to get reports for run {run_id}: {e}", exc_info=True)
            raise

    async def failed(self, limit: int = 5) -> List[ReportModel]:
        """
        Get failed experiment reports, newest run first.

        Args:
            limit: Maximum number of reports

        Returns:
            List of report models
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute(
                """
                SELECT id, run_id, experiment, kind, passed, wall_clock, cache_hit, summary
                FROM reports
                WHERE passed = 0
                ORDER BY run_id DESC, experiment ASC
                LIMIT ?
                """,
                (limit,)
            )
            rows = await cursor.fetchall()

            return [
                ReportModel(
                    id=row['id'],
                    run_id=row['run_id'],
                    experiment=row['experiment'],
                    kind=row['kind'],
                    passed=False,
                    wall_clock=row['wall_clock'],
                    cache_hit=bool(row['cache_hit']),
                    summary=ReportModel.summary_from_json(row['summary'])
                )
                for row in rows
            ]

        except Exception as e:
            logger.error(f"Failed to get failed reports: {e}", exc_info=True)
            raise

    async def count(self) -> int:
        """
        Get number of stored experiment reports.

        Returns:
            Number of reports
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute("SELECT COUNT(*) as count FROM reports")
            row = await cursor.fetchone()
            return row['count'] if row else 0

        except Exception as e:
            logger.error(f"Failed to count reports: {e}")
            return 0


class CacheRepository:
    """Repository for cache-related database operations."""

    def __init__(self, db_connection: DatabaseConnection):
        """
        Initialize cache repository.

        Args:
            db_connection: Database connection manager
        """
        self.db_connection = db_connection

    async def get(self, key: str) -> Optional[str]:
        """
        Get cached value by key, checking expiration.

        Args:
            key: Cache key

        Returns:
            Cached value or None if not found or expired
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute(
                """
                SELECT value, expires_at FROM cache
                WHERE key = ? AND expires_at > ?
                """,
                (key, datetime.now())
            )
            row = await cursor.fetchone()

            if row:
                logger.debug(f"Cache hit: {key}")
                return row['value']

            logger.debug(f"Cache miss: {key}")
            return None

        except Exception as e:
            logger.error(f"Failed to get cache: {e}", exc_info=True)
            raise

    async def set(self, key: str, value: str, ttl_minutes: int) -> None:
        """
        Set cached value with TTL.

        Args:
            key: Cache key
            value: Value to cache
            ttl_minutes: Time to live in minutes
        """
        conn = await self.db_connection.get_connection()

        try:
            created_at = datetime.now()
            expires_at = created_at + timedelta(minutes=ttl_minutes)

            await conn.execute(
                """
                INSERT INTO cache (key, value, created_at, expires_at)
                VALUES (?, ?, ?, ?)
                ON CONFLICT(key) DO UPDATE SET
                    value = excluded.value,
                    created_at = excluded.created_at,
                    expires_at = excluded.expires_at
                """,
                (key, value, created_at, expires_at)
            )
            await conn.commit()
            logger.debug(f"Cache set: {key} (TTL: {ttl_minutes}m)")

        except Exception as e:
            logger.error(f"Failed to set cache: {e}", exc_info=True)
            await conn.rollback()
            raise

    async def cleanup_expired(self) -> None:
        """Delete expired cache entries."""
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute(
                "DELETE FROM cache WHERE expires_at <= ?",
                (datetime.now(),)
            )
            await conn.commit()

            deleted_count = cursor.rowcount
            if deleted_count > 0:
                logger.info(f"Cleaned up {deleted_count} expired cache entries")

        except Exception as e:
            logger.error(f"Failed to cleanup expired cache: {e}", exc_info=True)
            await conn.rollback()
            raise

    async def count(self) -> int:
        """
        Get count of non-expired cache entries.

        Returns:
            Number of cache entries that haven't expired
        """
        conn = await self.db_connection.get_connection()

        try:
            cursor = await conn.execute(
                "SELECT COUNT(*) as count FROM cache WHERE expires_at > ?",
                (datetime.now(),)
            )
            row = await cursor.fetchone()
            return row['count'] if row else 0

        except Exception as e:
            logger.error(f"Failed to count cache entries: {e}")
            return 0
