import math

import numpy as np
import pytest

from noisyea.rng import (
    MASK64,
    RngStream,
    derive_many,
    derive_seed,
    flip_count_cdf,
    sample_flips,
    sample_flips_naive,
    seed_state,
    splitmix64_mix,
)

# published splitmix64 outputs for seed 1234567
SPLITMIX_1234567 = [
    6457827717110365317,
    3203168211198807973,
    9817491932198370423,
    4593380528125082431,
    16408922859458223821,
]


def _splitmix_stream(seed, count):
    out, x = [], seed
    for _ in range(count):
        out.append(splitmix64_mix(x))
        x = (x + 0x9E3779B97F4A7C15) & MASK64
    return out


def _xoshiro_ref(state, count):
    s = list(state)
    rotl = lambda x, k: ((x << k) | (x >> (64 - k))) & MASK64
    out = []
    for _ in range(count):
        out.append(rotl((s[1] * 5) & MASK64, 7) * 9 & MASK64)
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
    return out


def test_splitmix_known_vector():
    assert _splitmix_stream(1234567, 5) == SPLITMIX_1234567
    assert [int(v) for v in seed_state(1234567)] == SPLITMIX_1234567[:4]


@pytest.mark.parametrize("seed", [0, 1, 42, MASK64, 0xDEADBEEFCAFEF00D])
def test_xoshiro_matches_pure_python(seed):
    rng = RngStream(seed)
    ref = _xoshiro_ref([int(v) for v in seed_state(np.uint64(seed))], 200)
    assert [rng.next_u64() for _ in range(200)] == ref


def test_same_seed_same_draws():
    a, b = RngStream(99), RngStream(99)
    assert [a.next_u64() for _ in range(50)] == [b.next_u64() for _ in range(50)]
    assert a.flip_positions(100, 0.03) == b.flip_positions(100, 0.03)


def test_derive_seed_separates_keys():
    seeds = {derive_seed(7, n, i) for n in range(20) for i in range(200)}
    assert len(seeds) == 20 * 200
    assert derive_seed(7, 1, 2) != derive_seed(7, 2, 1)
    assert derive_seed(7, 1) != derive_seed(8, 1)


def test_derive_many_matches_scalar():
    keys = np.array([512, 0xABCDEF0123456789], dtype=np.uint64)
    got = derive_many(np.uint64(5), keys, 3, 40)
    assert [int(v) for v in got] == [derive_seed(5, 512, 0xABCDEF0123456789, i) for i in range(3, 43)]


def test_rejects_out_of_range_seed():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(1 << 64)


def test_uniform_range_and_mean():
    rng = RngStream(3)
    xs = np.array([rng.random() for _ in range(100_000)])
    assert xs.min() >= 0.0 and xs.max() < 1.0
    assert abs(xs.mean() - 0.5) < 4 * math.sqrt(1 / 12 / len(xs))


@pytest.mark.parametrize("n", [3, 7, 10, 1000])
def test_below_is_uniform(n):
    rng = RngStream(11 + n)
    draws = 60_000 if n < 100 else 200_000
    counts = np.bincount([rng.below(n) for _ in range(draws)], minlength=n)
    assert counts.sum() == draws and len(counts) == n
    if n <= 10:
        p = 1 / n
        sd = math.sqrt(draws * p * (1 - p))
        assert np.all(np.abs(counts - draws * p) < 4.5 * sd)
    else:
        # chi-square with n-1 dof, far tail cut
        exp = draws / n
        chi2 = ((counts - exp) ** 2 / exp).sum()
        assert chi2 < (n - 1) + 6 * math.sqrt(2 * (n - 1))


def test_below_large_range():
    rng = RngStream(5)
    big = (1 << 40) + 3
    assert all(0 <= rng.below(big) < big for _ in range(1000))


def test_flip_count_cdf_is_binomial():
    from scipy.stats import binom

    for n, p in [(10, 0.1), (64, 1 / 64), (512, 1 / 512), (5, 0.3)]:
        cdf = flip_count_cdf(n, p)
        assert cdf[-1] == 1.0
        np.testing.assert_allclose(cdf[:-1], binom.cdf(np.arange(n), n, p), rtol=1e-10, atol=1e-14)


def _mask_freqs(sampler, n, p, draws, seed):
    s = seed_state(seed)
    out = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)
    cdf = flip_count_cdf(n, p)
    counts = np.zeros(1 << n)
    for _ in range(draws):
        k = sampler(s, n, p, cdf, mark, out) if sampler is sample_flips else sampler(s, n, p, out)
        assert list(out[:k]) == sorted(set(out[:k]))
        counts[sum(1 << int(i) for i in out[:k])] += 1
    return counts / draws


@pytest.mark.parametrize("sampler", [sample_flips, sample_flips_naive])
@pytest.mark.parametrize("n,p", [(4, 0.25), (5, 0.1), (3, 0.6)])
def test_flip_samplers_match_exact_mask_law(sampler, n, p):
    draws = 100_000
    freqs = _mask_freqs(sampler, n, p, draws, seed=17)
    for mask in range(1 << n):
        d = bin(mask).count("1")
        exact = p**d * (1 - p) ** (n - d)
        sd = math.sqrt(exact * (1 - exact) / draws)
        assert abs(freqs[mask] - exact) <= 4 * sd + 1e-12, (mask, freqs[mask], exact)


def test_flip_sampler_leaves_scratch_clean():
    n = 50
    s = seed_state(2)
    out = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)
    cdf = flip_count_cdf(n, 0.2)
    for _ in range(1000):
        sample_flips(s, n, 0.2, cdf, mark, out)
        assert not mark.any()


def test_zero_rate_draws_nothing():
    rng = RngStream(8)
    before = rng.state.copy()
    assert rng.flip_positions(20, 0.0) == []
    assert np.array_equal(before, rng.state)


def test_per_bit_flip_frequency():
    n, p, draws = 8, 1 / 8, 200_000
    rng = RngStream(21)
    hits = np.zeros(n)
    for _ in range(draws):
        for i in rng.flip_positions(n, p):
            hits[i] += 1
    sd = math.sqrt(draws * p * (1 - p))
    assert np.all(np.abs(hits - draws * p) < 4 * sd)
