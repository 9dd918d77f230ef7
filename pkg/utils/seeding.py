"""
Deterministic random streams derived from (master seed, experiment, trial).
"""
import hashlib
from typing import Union

import numpy as np


def stable_key(label: Union[str, int]) -> int:
    """32-bit key of a label that does not depend on PYTHONHASHSEED."""
    if isinstance(label, int):
        return label & 0xFFFFFFFF
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def derive_rng(master_seed: int, *labels: Union[str, int]) -> np.random.Generator:
    """Generator for one task; equal (seed, labels) give equal streams in any process."""
    entropy = [int(master_seed) & 0xFFFFFFFF] + [stable_key(label) for label in labels]
    return np.random.default_rng(np.random.SeedSequence(entropy))
