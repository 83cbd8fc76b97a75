"""Compiled (1+1) EA trial loop.

The parent is held as a uint8 array together with its cached true
LeadingOnes value.  Offspring and noisy copies are never materialised:
each evaluation is computed from the sorted list of flipped positions,
so one iteration costs O(number of flips) instead of O(n).

Draw order per iteration matches the Python reference in ``ea.step``:
mutation, then (re-evaluation only) noise on the parent, then noise on
the offspring.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .rng import below, flip_count_cdf, random_bits, sample_flips, seed_state, uniform

MUT_ONE_BIT = 0
MUT_STANDARD = 1
NOISE_NONE = 0
NOISE_ONE_BIT = 1
NOISE_BITWISE = 2


@njit(cache=True, _nrt=False)
def _first_zero_from(x, lo, n, start):
    # x[:lo] are ones and x[lo] is zero (or lo == n)
    if start <= lo:
        return lo
    i = start
    while i < n and x[i] == 1:
        i += 1
    return i


@njit(cache=True, _nrt=False)
def _lo_with_flips(x, lo, n, flips, k):
    """LeadingOnes of x after toggling the ascending positions flips[:k]."""
    cur = 0
    for j in range(k):
        p = flips[j]
        z = _first_zero_from(x, lo, n, cur)
        if z < p:
            return z
        if z > p:
            return p
        cur = p + 1
    return _first_zero_from(x, lo, n, cur)


@njit(cache=True, _nrt=False)
def _draw_noise(s, n, noise_kind, q, cdf, mark, out):
    if noise_kind == NOISE_ONE_BIT:
        if uniform(s) < q:
            out[0] = below(s, n)
            return 1
        return 0
    if noise_kind == NOISE_BITWISE:
        return sample_flips(s, n, q / n, cdf, mark, out)
    return 0


@njit(cache=True, _nrt=False)
def _sym_diff(a, ka, b, kb, out):
    """Merge two ascending position lists, dropping positions present in both."""
    i = 0
    j = 0
    k = 0
    while i < ka and j < kb:
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif b[j] < a[i]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < ka:
        out[k] = a[i]
        i += 1
        k += 1
    while j < kb:
        out[k] = b[j]
        j += 1
        k += 1
    return k


@njit(cache=True, nogil=True)
def run_trial_kernel(n, mut_kind, chi, noise_kind, q, reeval, budget, seed):
    """Return (found, iterations, evaluations, best_true, best_noisy)."""
    s = seed_state(seed)
    x = np.empty(n, dtype=np.uint8)
    mflips = np.empty(n, dtype=np.int64)
    zflips = np.empty(n, dtype=np.int64)
    merged = np.empty(2 * n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.uint8)
    mut_cdf = flip_count_cdf(n, chi / n)
    noise_cdf = flip_count_cdf(n, q / n)
    stats = np.zeros(5, dtype=np.int64)
    _trial_loop(
        s, n, mut_kind, chi, noise_kind, q, reeval, budget,
        x, mflips, zflips, merged, mark, mut_cdf, noise_cdf, stats,
    )
    return stats[0] == 1, stats[1], stats[2], stats[3], stats[4]


@njit(cache=True, nogil=True, _nrt=False)
def _trial_loop(s, n, mut_kind, chi, noise_kind, q, reeval, budget,
                x, mflips, zflips, merged, mark, mut_cdf, noise_cdf, stats):
    random_bits(s, n, x)
    lo = 0
    while lo < n and x[lo] == 1:
        lo += 1
    kz = _draw_noise(s, n, noise_kind, q, noise_cdf, mark, zflips)
    stored = _lo_with_flips(x, lo, n, zflips, kz)
    evals = 1
    best_true = lo
    best_noisy = stored
    it = 0
    p_mut = chi / n
    while not (lo == n and stored == n) and it < budget:
        if mut_kind == MUT_ONE_BIT:
            mflips[0] = below(s, n)
            km = 1
        else:
            km = sample_flips(s, n, p_mut, mut_cdf, mark, mflips)
        if reeval:
            kz = _draw_noise(s, n, noise_kind, q, noise_cdf, mark, zflips)
            stored = _lo_with_flips(x, lo, n, zflips, kz)
            evals += 1
            if stored > best_noisy:
                best_noisy = stored
        kz = _draw_noise(s, n, noise_kind, q, noise_cdf, mark, zflips)
        if kz == 0:
            f_y = _lo_with_flips(x, lo, n, mflips, km)
        else:
            k = _sym_diff(mflips, km, zflips, kz, merged)
            f_y = _lo_with_flips(x, lo, n, merged, k)
        evals += 1
        it += 1
        if f_y >= stored:
            if km > 0:
                new_lo = _lo_with_flips(x, lo, n, mflips, km) if kz else f_y
                for j in range(km):
                    x[mflips[j]] ^= np.uint8(1)
                lo = new_lo
            stored = f_y
            if lo > best_true:
                best_true = lo
            if stored > best_noisy:
                best_noisy = stored
    stats[0] = 1 if (lo == n and stored == n) else 0
    stats[1] = it
    stats[2] = evals
    stats[3] = best_true
    stats[4] = best_noisy


@njit(cache=True, nogil=True)
def run_trials_kernel(n, mut_kind, chi, noise_kind, q, reeval, budget, seeds):
    m = seeds.shape[0]
    found = np.empty(m, dtype=np.bool_)
    iters = np.empty(m, dtype=np.int64)
    evals = np.empty(m, dtype=np.int64)
    best_true = np.empty(m, dtype=np.int64)
    best_noisy = np.empty(m, dtype=np.int64)
    for i in range(m):
        f, it, ev, bt, bn = run_trial_kernel(n, mut_kind, chi, noise_kind, q, reeval, budget, seeds[i])
        found[i] = f
        iters[i] = it
        evals[i] = ev
        best_true[i] = bt
        best_noisy[i] = bn
    return found, iters, evals, best_true, best_noisy
