"""Counter-based uniform streams shared by both kernel backends.

Every uniform is a pure function of ``(seed, drop, tag, counter)``, so a
drop can be simulated on any worker in any order and still see exactly
the same numbers.  The mixer is the SplitMix64 finaliser; the key for a
stream is ``mix(mix(seed + G) ^ (drop * 8 + tag))`` and the k-th draw is
``mix(key + (k + 1) * G)`` mapped to the open interval (0, 1).
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)

# stream tags (three bits)
TAG_COUNT = 0
TAG_POINTS = 1
TAG_DESIRED = 2
TAG_CONTENT = 3

_TO_UNIT = 2.0**-53


def mix64(z):
    """SplitMix64 finaliser on uint64 scalars or arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, drop, tag: int):
    """Key of the (drop, tag) stream; ``drop`` may be an array."""
    with np.errstate(over="ignore"):
        s = mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + GOLDEN)
        d = np.asarray(drop, dtype=np.uint64) * np.uint64(8) + np.uint64(tag)
    return mix64(s ^ d)


def uniforms(key, counters):
    """Uniforms in (0, 1) at the given counters of one or more streams."""
    with np.errstate(over="ignore"):
        z = mix64(np.asarray(key, dtype=np.uint64) + (np.asarray(counters, dtype=np.uint64) + np.uint64(1)) * GOLDEN)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * _TO_UNIT
