"""Seeded, splittable random streams.

Every stochastic routine in the package takes an explicit
``numpy.random.Generator``.  Streams are derived from a root seed plus a
path of integers (for example ``(seed, trial)``), so a trial's randomness
does not depend on how many trials ran before it or on which worker ran it.
"""
from __future__ import annotations

import zlib

import numpy as np

__all__ = ["stream", "child", "as_generator"]


def _key(part) -> int:
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    return int(part)


def stream(seed: int, *path) -> np.random.Generator:
    """Return the generator for ``seed`` at the given path.

    Path elements may be non-negative ints or short names; names are hashed
    with CRC32 so that ``stream(7, "trial", 3)`` is stable across runs.
    """
    if seed is None:
        raise ValueError("seed is required")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(_key(p) for p in path))
    return np.random.Generator(np.random.PCG64(ss))


def child(rng: np.random.Generator, count: int | None = None):
    """Split independent child generators off ``rng``."""
    if count is None:
        return rng.spawn(1)[0]
    return rng.spawn(count)


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("an explicit random stream or seed is required")
    return stream(int(rng))
