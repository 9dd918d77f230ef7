"""
Integration tests for database operations.
"""
import pytest
import tempfile
import os
from datetime import datetime

from database.connection import DatabaseConnection
from database.models import ExperimentEntry, ReportModel, RunManifest
from database.repository import CacheRepository, ReportRepository, RunRepository
from utils.cache_manager import CacheManager


@pytest.fixture
async def temp_db():
    """Create temporary database for testing."""
    # Create temporary file
    fd, path = tempfile.mkstemp(suffix='.db')
    os.close(fd)

    # Initialize database
    db_connection = DatabaseConnection(path)
    await db_connection.init_db()

    yield db_connection

    # Cleanup
    await db_connection.close()
    if os.path.exists(path):
        os.unlink(path)


@pytest.fixture
async def run_repo(temp_db):
    """Create run repository with temp database."""
    return RunRepository(temp_db)


@pytest.fixture
async def report_repo(temp_db):
    """Create report repository with temp database."""
    return ReportRepository(temp_db)


@pytest.fixture
async def cache_repo(temp_db):
    """Create cache repository with temp database."""
    return CacheRepository(temp_db)


def make_manifest() -> RunManifest:
    return RunManifest(
        tool_version="1.0.0",
        config_hash="abc123",
        master_seed=7,
        workers=2,
        started_at=datetime.now(),
    )


@pytest.mark.integration
class TestRunRepository:
    """Integration tests for RunRepository."""

    @pytest.mark.asyncio
    async def test_create_and_finish_run(self, run_repo):
        """Test the ledger stores the finished manifest."""
        # Arrange
        manifest = make_manifest()

        # Act
        run_id = await run_repo.create(manifest)
        manifest.id = run_id
        manifest.experiments.append(ExperimentEntry(
            name="weyl", kind="weyl", passed=True, wall_clock=0.5, json_path="out/weyl.json"
        ))
        manifest.finished_at = datetime.now()
        manifest.exit_code = 0
        await run_repo.finish(run_id, manifest)
        stored = await run_repo.get_manifest(run_id)

        # Assert
        assert run_id > 0
        assert stored['exit_code'] == 0
        assert stored['master_seed'] == 7
        assert stored['experiments'][0]['name'] == "weyl"
        assert await run_repo.count() == 1

    @pytest.mark.asyncio
    async def test_unfinished_run_has_no_manifest(self, run_repo):
        run_id = await run_repo.create(make_manifest())

        assert await run_repo.get_manifest(run_id) is None
        assert await run_repo.get_manifest(run_id + 100) is None


@pytest.mark.integration
class TestReportRepository:
    """Integration tests for ReportRepository."""

    @pytest.mark.asyncio
    async def test_add_and_get_reports(self, run_repo, report_repo):
        """Test reports come back ordered by experiment name."""
        # Arrange
        run_id = await run_repo.create(make_manifest())

        # Act
        for name in ("weyl", "resonance"):
            await report_repo.add(ReportModel(
                run_id=run_id, experiment=name, kind=name, passed=True, wall_clock=1.0,
                summary={'slope': 0.5, 'pass': True},
            ))
        reports = await report_repo.get_by_run(run_id)

        # Assert
        assert [r.experiment for r in reports] == ["resonance", "weyl"]
        assert reports[0].summary == {'slope': 0.5, 'pass': True}
        assert reports[0].passed is True

    @pytest.mark.asyncio
    async def test_add_replaces_same_experiment(self, run_repo, report_repo):
        run_id = await run_repo.create(make_manifest())
        report = ReportModel(run_id=run_id, experiment="nls", kind="nls", passed=False, wall_clock=1.0, summary={})
        await report_repo.add(report)

        report.passed = True
        report.cache_hit = True
        await report_repo.add(report)
        reports = await report_repo.get_by_run(run_id)

        assert len(reports) == 1
        assert reports[0].passed is True
        assert reports[0].cache_hit is True


@pytest.mark.integration
class TestCacheRepository:
    """Integration tests for CacheRepository."""

    @pytest.mark.asyncio
    async def test_set_and_get_cache(self, cache_repo):
        """Test setting and getting cache values."""
        # Act
        await cache_repo.set("test_key", "test_value", ttl_minutes=60)
        value = await cache_repo.get("test_key")

        # Assert
        assert value == "test_value"

    @pytest.mark.asyncio
    async def test_expired_entries(self, cache_repo):
        """Test expired entries are invisible and removed by cleanup."""
        # Arrange
        await cache_repo.set("old_key", "old_value", ttl_minutes=-1)
        await cache_repo.set("new_key", "new_value", ttl_minutes=60)

        # Act
        value = await cache_repo.get("old_key")
        await cache_repo.cleanup_expired()

        # Assert
        assert value is None
        assert await cache_repo.count() == 1

    @pytest.mark.asyncio
    async def test_cache_manager_round_trip(self, cache_repo):
        """Test outcomes survive the manager's JSON encoding."""
        manager = CacheManager(cache_repo, ttl_minutes=60)
        outcome = {'summary': {'pass': True, 'points': [[2, 1.5]]}, 'csv': "a\n1\n", 'attachments': {}}
        key = CacheManager.key_for({'name': 'weyl', 'seed': 7}, "1.0.0")

        await manager.set(key, outcome)

        assert await manager.get(key) == outcome


@pytest.mark.integration
class TestLedgerQueries:
    """Integration tests for the ledger queries behind the runs command."""

    @pytest.mark.asyncio
    async def test_recent_runs_newest_first(self, run_repo):
        first = await run_repo.create(make_manifest())
        second = await run_repo.create(make_manifest())

        runs = await run_repo.recent(limit=5)

        assert [run['id'] for run in runs] == [second, first]
        assert runs[0]['exit_code'] is None
        assert runs[0]['config_hash'] == "abc123"
        assert len(await run_repo.recent(limit=1)) == 1

    @pytest.mark.asyncio
    async def test_failed_reports(self, run_repo, report_repo):
        run_id = await run_repo.create(make_manifest())
        await report_repo.add(ReportModel(
            run_id=run_id, experiment="weyl", kind="weyl", passed=True, wall_clock=0.1, summary={}
        ))
        await report_repo.add(ReportModel(
            run_id=run_id, experiment="nls-blowup", kind="nls", passed=False, wall_clock=0.1,
            summary={'checks': {'no_blowup': False}}
        ))

        failed = await report_repo.failed(limit=5)

        assert [r.experiment for r in failed] == ["nls-blowup"]
        assert failed[0].summary == {'checks': {'no_blowup': False}}
        assert await report_repo.count() == 2

    @pytest.mark.asyncio
    async def test_ledger_lines(self, temp_db, run_repo, report_repo):
        from cli.main import ledger_lines

        run_id = await run_repo.create(make_manifest())
        await report_repo.add(ReportModel(
            run_id=run_id, experiment="nls-blowup", kind="nls", passed=False, wall_clock=0.1, summary={}
        ))

        lines = await ledger_lines(temp_db)

        assert "Runs: 1" in lines
        assert "Experiment reports: 1" in lines
        assert any(line.startswith(f"  #{run_id} [") and line.endswith("unfinished") for line in lines)
        assert f"  #{run_id} nls-blowup (nls)" in lines

    @pytest.mark.asyncio
    async def test_empty_ledger(self, temp_db):
        from cli.main import ledger_lines

        lines = await ledger_lines(temp_db)

        assert lines[0] == "Runs: 0"
        assert lines[-1] == "No runs recorded"
