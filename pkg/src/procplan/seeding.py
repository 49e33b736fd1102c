"""Deterministic RNG derivation, independent of PYTHONHASHSEED."""

from __future__ import annotations

import hashlib

import numpy as np


def derive_seed_sequence(*parts) -> np.random.SeedSequence:
    """Build a SeedSequence from arbitrary string/int parts via sha256."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    words = [int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4)]
    return np.random.SeedSequence(words)


def seeded_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(derive_seed_sequence(*parts))
