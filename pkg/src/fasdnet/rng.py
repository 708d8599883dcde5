"""Deterministic random number generation.

The generator is SplitMix64 (Steele, Lea & Flood's 64-bit mixer, the
same stream used to seed xoshiro/xoroshiro generators). It is pinned
here on purpose: the algorithm is a handful of integer operations, so
any implementation in any language that follows the constants below
reproduces the exact same stream for the same seed. Every source of
randomness in the toolkit (weight init, shuffles, balancing, synthetic
data) flows through this class, which is what makes whole experiment
runs bit-reproducible from a single seed.

State update per draw:
    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = (z XOR (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z = (z XOR (z >> 27)) * 0x94D049BB133111EB mod 2^64
    output = z XOR (z >> 31)

Uniform doubles take the top 53 bits of the output, giving values in
[0, 1). Gaussians use the Box-Muller transform. Shuffles are
Fisher-Yates with rejection sampling for the index draw, so every
permutation is exactly equally likely.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # 2^64 / golden ratio, the SplitMix64 increment


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, stream: int) -> int:
    """Mix a base seed with a stream index into an independent seed.

    Used to hand each sub-task of an experiment (balancing, splitting,
    weight init, parallel runs) its own generator without correlation.
    The scheme is itself SplitMix64: mix(seed + (stream + 1) * gamma).
    """
    return _mix64((seed + (stream + 1) * _GAMMA) & _MASK64)


class SeededRng:
    """SplitMix64 stream; single-owner, never shared between tasks."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self._state = self.seed

    def next_uint64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix64(self._state)

    def next_uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def next_normal(self) -> float:
        """Standard normal via Box-Muller on two fresh uniforms."""
        # shift into (0, 1] so log() is always defined
        u1 = ((self.next_uint64() >> 11) + 1) * 2.0**-53
        u2 = self.next_uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) with rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError(f"next_below needs n >= 1, got {n}")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            x = self.next_uint64()
            if x < limit:
                return x % n

    def shuffle(self, n: int) -> list[int]:
        """Uniform Fisher-Yates permutation of 0..n-1."""
        perm = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.next_below(i + 1)
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def derive(self, stream: int) -> "SeededRng":
        """Fresh generator for a sub-task; see derive_seed."""
        return SeededRng(derive_seed(self.seed, stream))
