"""Seeded xoshiro256++ generator with Box-Muller normals.

The generator is written out explicitly (rather than using numpy's bit
generators) so that variate streams are fixed by the algorithm alone.
"""
import math

import numpy as np

_MASK = (1 << 64) - 1
_TWO_PI = 2.0 * math.pi


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(x):
    """One splitmix64 output for state ``x`` (used for seeding and hashing)."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master, *keys):
    """Child seed from a master seed and a tuple of integer keys.

    Used to give every trial its own stream, so trials can run in any order.
    """
    h = splitmix64(master & _MASK)
    for k in keys:
        h = splitmix64(h ^ (int(k) & _MASK))
    return h


class SeededRng:
    """xoshiro256++ with a splitmix64-expanded 64-bit seed."""

    def __init__(self, seed=0):
        self.seed = int(seed) & _MASK
        s = [splitmix64((self.seed + i * 0x9E3779B97F4A7C15) & _MASK) for i in range(4)]
        if not any(s):
            s[0] = 1
        self._s = s

    @classmethod
    def from_state(cls, state):
        """Generator with an explicit 4-word state (for reference vectors)."""
        rng = cls.__new__(cls)
        rng.seed = None
        rng._s = [int(w) & _MASK for w in state]
        return rng

    def next_u64(self):
        s0, s1, s2, s3 = self._s
        result = (_rotl((s0 + s3) & _MASK, 23) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def u64_array(self, n):
        return np.array([self.next_u64() for _ in range(n)], dtype=np.uint64)

    def uniform(self, n=None):
        """Uniform variates on [0, 1) with 53 random bits each."""
        if n is None:
            return (self.next_u64() >> 11) * 2.0**-53
        return (self.u64_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def integer(self, bound):
        """Integer in [0, bound) by multiply-shift."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return (self.next_u64() * bound) >> 64

    def normal(self, n):
        """``n`` standard normals; each pair of uniforms yields two variates
        (cos branch first), an odd trailing variate is discarded."""
        pairs = (n + 1) // 2
        u = self.uniform(2 * pairs).reshape(pairs, 2)
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u in (0, 1]
        angle = _TWO_PI * u[:, 1]
        out = np.empty((pairs, 2))
        out[:, 0] = radius * np.cos(angle)
        out[:, 1] = radius * np.sin(angle)
        return out.reshape(-1)[:n]

    def rademacher(self, n):
        return np.where(self.u64_array(n) >> np.uint64(63), -1.0, 1.0)

    def cauchy(self, n):
        return np.tan(math.pi * (self.uniform(n) - 0.5))

    def sample_without_replacement(self, population, k):
        """First ``k`` entries of a partial Fisher-Yates shuffle of range(population)."""
        if not 0 <= k <= population:
            raise ValueError("k must lie in [0, population]")
        swapped = {}
        out = []
        for i in range(k):
            j = i + self.integer(population - i)
            out.append(swapped.get(j, j))
            swapped[j] = swapped.get(i, i)
        return out

    def permutation(self, n):
        return np.array(self.sample_without_replacement(n, n), dtype=np.intp)
