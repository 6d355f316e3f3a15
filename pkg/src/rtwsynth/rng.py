"""Deterministic per-image random streams and the stable train/test split.

Streams are keyed by a 64-bit FNV-1a hash of (global seed, image id) and
fed to a counter-based bit generator, so worker scheduling can never
change what any image draws.
"""

from __future__ import annotations

import numpy as np

FNV_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes) -> int:
    h = FNV_BASIS
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & _MASK
    return h


def stream_key(global_seed: int, image_id: str) -> int:
    """Hash of the seed's 8 little-endian bytes followed by the UTF-8 id."""
    seed_bytes = (global_seed & _MASK).to_bytes(8, "little")
    return fnv1a_64(seed_bytes + image_id.encode("utf-8"))


def derive_rng(global_seed: int, image_id: str) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(global_seed, image_id)))


def _avalanche(h: int) -> int:
    # fmix64 finalizer: raw FNV-1a leaves sequential ids clumped in the
    # high bits, which the uniform threshold below depends on
    h ^= h >> 33
    h = (h * 0xFF51AFD7ED558CCD) & _MASK
    h ^= h >> 33
    h = (h * 0xC4CEB9FE1A85EC53) & _MASK
    h ^= h >> 33
    return h


def split_assign(image_id: str, train_fraction: float) -> str:
    """'training' or 'test', by id hash alone: assignments survive re-runs,
    re-orderings, and added images."""
    u = _avalanche(fnv1a_64(image_id.encode("utf-8"))) / 2.0**64
    return "training" if u < train_fraction else "test"
