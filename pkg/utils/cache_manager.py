"""
Cache manager for experiment outcomes keyed by the canonical experiment block.
"""
import hashlib
import json
import logging
from functools import lru_cache
from importlib import metadata
from pathlib import Path
from typing import Optional

from database.repository import CacheRepository


logger = logging.getLogger(__name__)

# Packages whose source decides what an experiment computes
CODE_PACKAGES = ("config", "counting", "nls", "norms", "services", "spectral")
NUMERIC_DISTRIBUTIONS = ("numpy", "scipy")


def canonical_json(data: dict) -> str:
    """Key-sorted, whitespace-free JSON; equal configs give equal strings."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)


def content_hash(data: dict) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


@lru_cache(maxsize=None)
def code_fingerprint(root: Optional[str] = None) -> str:
    """
    sha256 over the numerical packages' source files and the installed numpy and
    scipy versions. Any edit to that code gives new cache keys.
    """
    base = Path(root) if root else Path(__file__).resolve().parent.parent
    digest = hashlib.sha256()
    for package in CODE_PACKAGES:
        directory = base / package
        if not directory.is_dir():
            continue
        for path in sorted(directory.rglob("*.py")):
            digest.update(path.relative_to(base).as_posix().encode("utf-8"))
            digest.update(path.read_bytes())
    for distribution in NUMERIC_DISTRIBUTIONS:
        try:
            version = metadata.version(distribution)
        except metadata.PackageNotFoundError:
            version = "missing"
        digest.update(f"{distribution}=={version}".encode("utf-8"))
    return digest.hexdigest()


class CacheManager:
    """Manages caching of experiment outcomes so identical blocks are not recomputed."""

    def __init__(self, cache_repository: CacheRepository, ttl_minutes: int, enabled: bool = True):
        """
        Initialize cache manager.

        Args:
            cache_repository: Repository for cache operations
            ttl_minutes: Time to live of stored outcomes
            enabled: When False every lookup misses and nothing is stored
        """
        self.cache_repository = cache_repository
        self.ttl_minutes = ttl_minutes
        self.enabled = enabled

    @staticmethod
    def key_for(experiment_block: dict, tool_version: str, code_version: Optional[str] = None) -> str:
        """
        Cache key of an experiment block (seed included) under a tool version and a
        code version, by default the current code_fingerprint().
        """
        code = code_version if code_version is not None else code_fingerprint()[:16]
        return f"outcome:{tool_version}:{code}:{content_hash(experiment_block)}"

    async def get(self, key: str) -> Optional[dict]:
        """
        Get a cached outcome by key.

        Automatically checks TTL expiration - expired entries return None.

        Args:
            key: Cache key

        Returns:
            Cached outcome dictionary or None if not found, expired or unreadable
        """
        if not self.enabled:
            return None
        try:
            value = await self.cache_repository.get(key)

            if value:
                logger.info(f"Cache hit for key: {key[:50]}...")
                return json.loads(value)

            logger.info(f"Cache miss for key: {key[:50]}...")
            return None

        except Exception as e:
            logger.error(f"Error getting cache for key {key[:50]}...: {e}")
            return None

    async def set(self, key: str, outcome: dict) -> None:
        """
        Store an outcome with the manager's TTL.

        Args:
            key: Cache key
            outcome: JSON-ready outcome dictionary
        """
        if not self.enabled:
            return
        try:
            await self.cache_repository.set(key, canonical_json(outcome), self.ttl_minutes)
            logger.info(f"Cache set for key: {key[:50]}... (TTL: {self.ttl_minutes}m)")

        except Exception as e:
            logger.error(f"Error setting cache for key {key[:50]}...: {e}")
            raise

    async def cleanup(self) -> None:
        """
        Clean up expired cache entries.
        """
        try:
            await self.cache_repository.cleanup_expired()
            logger.debug("Cache cleanup completed")

        except Exception as e:
            logger.error(f"Error during cache cleanup: {e}")
            raise
