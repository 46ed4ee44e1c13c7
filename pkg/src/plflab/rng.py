"""Deterministic PRNG for scenario replay.

Scenario runs must replay bit-identically from the seed in the scenario
file, across machines and implementations, so the generator is pinned to
xoshiro256** (Blackman & Vigna) with splitmix64 state initialization - both
fully specified integer algorithms. Child streams for parallel batches are
derived by jumping a splitmix64 sequence, one derived seed per index.

Floating-point draws are built from the top 53 bits of the integer stream;
normals use Box-Muller on IEEE doubles, which is deterministic on any
IEEE-754-conforming platform.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1


def splitmix64_next(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, (z ^ (z >> 31)) & _MASK64


def derive_seed(root_seed: int, index: int) -> int:
    """Child seed for stream `index`: splitmix64 output index+1 from root."""
    if index < 0:
        raise ValueError("stream index must be non-negative")
    state = root_seed & _MASK64
    out = 0
    for _ in range(index + 1):
        state, out = splitmix64_next(state)
    return out


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** 1.0; state seeded from four splitmix64 outputs."""

    __slots__ = ("_s",)

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            state, out = splitmix64_next(state)
            s.append(out)
        self._s = s

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def normal(self) -> float:
        """Standard normal via Box-Muller (the cosine branch, no caching)."""
        u1 = self.uniform()
        while u1 == 0.0:
            u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def truncated_normal(self, bound: float = 3.0) -> float:
        """Standard normal conditioned on |z| <= bound, by rejection."""
        while True:
            z = self.normal()
            if abs(z) <= bound:
                return z
