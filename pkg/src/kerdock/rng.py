"""Deterministic random streams keyed by (seed, purpose tags).

Every randomized routine in the package derives its generator here, so a run
is reproducible from its seed alone regardless of call order or threading.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["child_rng", "hashed_normals"]

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _tag_to_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.blake2b(str(tag).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def child_rng(seed: int, *tags) -> np.random.Generator:
    """Derive an independent generator for (seed, tags).

    Same key gives an identical stream on every platform; different tags give
    streams that never collide in practice.
    """
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_to_int(t) for t in tags]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def _splitmix64(x: np.ndarray) -> np.ndarray:
    # finalizer from the splitmix64 reference; x is uint64
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
    x = ((x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
    x = ((x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
    return x ^ (x >> np.uint64(31))


def hashed_normals(seed: int, tag, indices: np.ndarray) -> np.ndarray:
    """Two standard normals per index, computed statelessly.

    Used by synthetic oracles so that position y always sees the same noise
    draw no matter which queries preceded it. Returns an array of shape
    (len(indices), 2).
    """
    base = np.uint64(_tag_to_int(tag) ^ (int(seed) & 0xFFFFFFFFFFFFFFFF))
    idx = np.asarray(indices, dtype=np.uint64)
    h1 = _splitmix64(idx ^ base)
    h2 = _splitmix64(h1 ^ np.uint64(0xD1B54A32D192ED03))
    # 53-bit mantissas, offset half a step away from 0 so log() is safe
    u1 = ((h1 >> np.uint64(11)).astype(np.float64) + 0.5) / float(1 << 53)
    u2 = (h2 >> np.uint64(11)).astype(np.float64) / float(1 << 53)
    r = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * np.pi * u2
    return np.stack([r * np.cos(ang), r * np.sin(ang)], axis=1)
