"""Counter-based pseudo-random numbers (SplitMix64).

Every random quantity in this package is a pure function of a 64-bit seed
and a 64-bit counter, so any run can be reproduced bit for bit regardless
of evaluation order, chunking, or thread count.  The generator is the
SplitMix64 sequence of Steele, Lea and Flood: output k of stream `seed` is

    finalize(seed + (k + 1) * 0x9E3779B97F4A7C15)

with the standard finalizer (xor-shift 30, * 0xBF58476D1CE4E5B9,
xor-shift 27, * 0x94D049BB133111EB, xor-shift 31).  Uniform doubles take
the top 53 bits, giving values in [0, 1).
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK = (1 << 64) - 1
_INV53 = 2.0 ** -53


def _finalize(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def splitmix_at(seed: int, counters) -> np.ndarray:
    """Raw 64-bit outputs of stream `seed` at the given counter positions."""
    c = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & _MASK) + (c + np.uint64(1)) * GOLDEN
        return _finalize(z)


def uniform_at(seed: int, counters) -> np.ndarray:
    """Uniform [0, 1) doubles of stream `seed` at the given counters."""
    bits = splitmix_at(seed, counters)
    return (bits >> np.uint64(11)).astype(np.float64) * _INV53


def derive_seed(master_seed: int, index: int) -> int:
    """Child stream seed: output `index` of the master stream.

    Used for replica seeds (index = replica number) and for auxiliary
    streams such as reference orbits, which get high tag indices so they
    never collide with replica indices.
    """
    return int(splitmix_at(master_seed, np.uint64(index & _MASK)))


# Auxiliary-stream tags, kept far above any plausible replica count.
TAG_REFERENCE = 1 << 48
TAG_QUERY = (1 << 48) + 1
TAG_PROBE = (1 << 48) + 2
