"""Deterministic named substreams from one master seed.

Each (master seed, name) pair maps through SHA-256 to an independent PCG64
stream, so the nondeterminism sources of a run (env resets, policy init,
rollout sampling, degradation noise, ...) are isolated from each other.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["substream", "substream_seed"]


def substream_seed(master_seed: int, name: str) -> int:
    digest = hashlib.sha256(f"{master_seed}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def substream(master_seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(substream_seed(master_seed, name))
