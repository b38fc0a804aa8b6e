"""Deterministic random-stream derivation.

Every random component in the pipeline draws from a substream derived from
one master seed plus a name/index key, so results do not depend on the order
in which components happen to run.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_to_ints(key) -> list[int]:
    out = []
    for part in key:
        if isinstance(part, (int, np.integer)):
            out.append(int(part) & 0xFFFFFFFF)
        elif isinstance(part, str):
            out.append(zlib.crc32(part.encode("utf-8")))
        else:
            raise TypeError(f"substream key parts must be int or str, got {type(part)}")
    return out


def seed_sequence(seed: int, *key) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFF] + _key_to_ints(key))


def rng_from(seed: int, *key) -> np.random.Generator:
    """Generator for the substream identified by (seed, *key)."""
    return np.random.default_rng(seed_sequence(seed, *key))
