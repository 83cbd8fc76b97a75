"""Seedable, splittable 64-bit random streams.

Every random draw in the package comes from xoshiro256** seeded through
splitmix64.  The draw primitives are numba-compiled so that the Python
reference implementation and the compiled trial kernel consume exactly
the same sequence of draws for the same seed.  Allocation-free
primitives are compiled with numba's reference counting switched off;
with it on, every call that touches an array argument pays several
times the cost of the draw itself.

Stream derivation: ``derive_seed(master, k1, k2, ...)`` folds every key
into the master seed with the splitmix64 finalizer, so streams derived
from different key tuples never share state.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

_U_GOLDEN = np.uint64(_GOLDEN)
_U_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U_M2 = np.uint64(0x94D049BB133111EB)
_U_5 = np.uint64(5)
_U_9 = np.uint64(9)
_U_0 = np.uint64(0)
_U_32 = np.uint64(32)
_U_LOW32 = np.uint64(0xFFFFFFFF)
_U_2_32 = np.uint64(1 << 32)


def splitmix64_mix(value: int) -> int:
    """splitmix64 output for a single step starting from ``value``."""
    z = (value + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *keys: int) -> int:
    """Fold integer keys into a master seed, returning a 64-bit seed."""
    h = splitmix64_mix(master & MASK64)
    for key in keys:
        h = splitmix64_mix(h ^ splitmix64_mix(key & MASK64))
    return h


@njit(cache=True, _nrt=False)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def seed_state(seed):
    """Expand a 64-bit seed into a xoshiro256** state (4 words)."""
    state = np.empty(4, dtype=np.uint64)
    z0 = np.uint64(seed)
    for i in range(4):
        z0 = z0 + _U_GOLDEN
        z = z0
        z = (z ^ (z >> np.uint64(30))) * _U_M1
        z = (z ^ (z >> np.uint64(27))) * _U_M2
        state[i] = z ^ (z >> np.uint64(31))
    return state


@njit(cache=True, _nrt=False)
def next_u64(s):
    result = _rotl(s[1] * _U_5, 7) * _U_9
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True, _nrt=False)
def uniform(s):
    """Uniform double in [0, 1) with 53 random bits."""
    return float(next_u64(s) >> np.uint64(11)) * 1.1102230246251565e-16


@njit(cache=True, _nrt=False)
def below(s, n):
    """Unbiased integer in [0, n).

    Lemire's multiply-shift rejection on the top 32 bits of a draw for
    n < 2**32 (a division only on the rare slow path); plain residue
    rejection above that.
    """
    un = np.uint64(n)
    if un <= _U_LOW32:
        m = (next_u64(s) >> _U_32) * un
        low = m & _U_LOW32
        if low < un:
            threshold = (_U_2_32 - un) % un
            while low < threshold:
                m = (next_u64(s) >> _U_32) * un
                low = m & _U_LOW32
        return np.int64(m >> _U_32)
    threshold = (_U_0 - un) % un
    while True:
        r = next_u64(s)
        if r >= threshold:
            return np.int64(r % un)


@njit(cache=True)
def flip_count_cdf(n, p):
    """CDF of Binomial(n, p) with the last entry pinned to exactly 1."""
    cdf = np.empty(n + 1, dtype=np.float64)
    if p <= 0.0 or p >= 0.5:
        cdf[:] = 1.0
        return cdf
    pmf = math.exp(n * math.log1p(-p))
    ratio = p / (1.0 - p)
    acc = 0.0
    for k in range(n + 1):
        acc += pmf
        cdf[k] = min(acc, 1.0)
        pmf *= (n - k) / (k + 1.0) * ratio
    cdf[n] = 1.0
    return cdf


@njit(cache=True, _nrt=False)
def sample_flips(s, n, p, cdf, mark, out):
    """Write the ascending positions flipped by independent rate-``p`` coins.

    For ``p < 1/2`` the number of flips is drawn by inverting the binomial
    ``cdf`` (from :func:`flip_count_cdf`) and the positions by Floyd's
    uniform subset sampling, i.e. one uniform plus one integer per flip.
    Otherwise one uniform is drawn per position.  ``mark`` is a zeroed
    uint8 scratch array of length ``n`` and is left zeroed.  Returns the
    number of flips.
    """
    if p <= 0.0:
        return 0
    if p >= 0.5:
        k = 0
        for i in range(n):
            if uniform(s) < p:
                out[k] = i
                k += 1
        return k
    u = uniform(s)
    k = 0
    while u >= cdf[k]:
        k += 1
    if k == 0:
        return 0
    m = 0
    for j in range(n - k, n):
        t = below(s, j + 1)
        if mark[t]:
            t = j
        mark[t] = 1
        # insertion into the sorted prefix out[:m]
        i = m
        while i > 0 and out[i - 1] > t:
            out[i] = out[i - 1]
            i -= 1
        out[i] = t
        m += 1
    for i in range(k):
        mark[out[i]] = 0
    return k


@njit(cache=True, _nrt=False)
def sample_flips_naive(s, n, p, out):
    """One Bernoulli draw per position; reference sampler for testing."""
    k = 0
    for i in range(n):
        if uniform(s) < p:
            out[k] = i
            k += 1
    return k


@njit(cache=True, _nrt=False)
def random_bits(s, n, out):
    """Fill ``out[:n]`` with uniform bits; bit i is bit i%64 of word i//64."""
    word = _U_0
    for i in range(n):
        if i % 64 == 0:
            word = next_u64(s)
        out[i] = np.uint8((word >> np.uint64(i % 64)) & np.uint64(1))


@njit(cache=True)
def derive_many(master, keys_prefix, start, count):
    """Vectorised ``derive_seed(master, *keys_prefix, start + i)``."""
    out = np.empty(count, dtype=np.uint64)
    h0 = _mix(np.uint64(master))
    for k in keys_prefix:
        h0 = _mix(h0 ^ _mix(k))
    for i in range(count):
        out[i] = _mix(h0 ^ _mix(np.uint64(start + i)))
    return out


@njit(cache=True, _nrt=False)
def _mix(x):
    z = x + _U_GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _U_M1
    z = (z ^ (z >> np.uint64(27))) * _U_M2
    return z ^ (z >> np.uint64(31))


@lru_cache(maxsize=256)
def _cached_cdf(n: int, p: float) -> np.ndarray:
    return flip_count_cdf(n, p)


class RngStream:
    """A single xoshiro256** stream.

    Two streams built from the same seed produce identical draws; use
    :meth:`derive` to obtain independent streams from a master seed.
    """

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self._state = seed_state(np.uint64(self.seed))
        self._buf = np.empty(0, dtype=np.int64)
        self._mark = np.zeros(0, dtype=np.uint8)

    @classmethod
    def derive(cls, master: int, *keys: int) -> "RngStream":
        return cls(derive_seed(master, *keys))

    @property
    def state(self) -> np.ndarray:
        """The live generator state; kernels advance it in place."""
        return self._state

    def next_u64(self) -> int:
        return int(next_u64(self._state))

    def random(self) -> float:
        return uniform(self._state)

    def below(self, n: int) -> int:
        return int(below(self._state, n))

    def flip_positions(self, n: int, p: float) -> list[int]:
        """Ascending positions hit by independent coins with heads probability ``p``."""
        if self._buf.shape[0] < n:
            self._buf = np.empty(n, dtype=np.int64)
            self._mark = np.zeros(n, dtype=np.uint8)
        k = sample_flips(self._state, n, p, _cached_cdf(n, p), self._mark, self._buf)
        return self._buf[:k].tolist()

    def random_bits(self, n: int) -> list[int]:
        out = np.empty(n, dtype=np.uint8)
        random_bits(self._state, n, out)
        return out.tolist()
