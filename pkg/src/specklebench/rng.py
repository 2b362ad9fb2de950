"""Deterministic random-stream derivation.

Every stochastic stage of the pipeline draws from a stream derived from a
``(master_seed, category, index)`` triple, so any single output can be
regenerated in isolation and parallel generation is order-independent.

Derivation is a two-stage scheme, fixed for the life of the on-disk formats:

1. The triple is mixed into one 64-bit key with the splitmix64 finalizer
   (Steele/Vigna constants), applied as
   ``h = mix64(master); h = mix64(h ^ category); h = mix64(h ^ index)``.
2. The key seeds a Philox4x32-10 counter-based bit generator (numpy's
   ``np.random.Philox``), wrapped in ``np.random.Generator``.

Identical triples therefore always yield identical streams, and streams are
independent of how many other streams were derived before them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer: one full avalanche of a 64-bit word."""
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def stream_key(master_seed: int, category: int, index: int) -> int:
    """Mix a seed triple into the 64-bit Philox key for its stream."""
    h = mix64(master_seed & _MASK64)
    h = mix64(h ^ (category & _MASK64))
    h = mix64(h ^ (index & _MASK64))
    return h


@dataclass(frozen=True)
class SeedSpec:
    """Master seed plus the fixed triple-mixing rule documented above."""

    master_seed: int

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in 64 unsigned bits")

    def stream(self, category: int, index: int) -> np.random.Generator:
        """Derive the uniform-[0,1) stream for (category, index).

        Pure function of the triple: repeated calls return fresh generators
        positioned at the start of the same sequence.
        """
        return derive_stream(self, category, index)


def derive_stream(seed: SeedSpec, category: int, index: int) -> np.random.Generator:
    """Derive the random stream for one (category, index) slot.

    Returns a ``np.random.Generator`` backed by Philox4x32-10 keyed with
    ``stream_key(master, category, index)``. Each stream is single-owner:
    callers must not share one generator across concurrent tasks.
    """
    key = stream_key(seed.master_seed, category, index)
    return np.random.Generator(np.random.Philox(key=key))
