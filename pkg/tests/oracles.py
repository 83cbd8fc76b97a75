"""Independent reference computations shared by the test modules."""
import math

import numpy as np


def joint_event_probabilities(n, subset, params):
    """P(each position of ``subset`` flipped by exactly one of mutation and noise,
    at least one of them by mutation, nothing else flipped) for every
    ``(chi, q)`` in ``params``, by summing over all (mutation mask, noise mask)
    pairs."""
    S = 0
    for i in subset:
        S |= 1 << int(i)
    size = 1 << n
    masks = np.arange(size, dtype=np.uint16)
    m = masks[:, None]
    z = masks[None, :]
    S, rest = np.uint16(S), np.uint16(~S & (size - 1))
    event = (((m ^ z) & S) == S) & ((m & z) == 0) & (((m | z) & rest) == 0) & ((m & S) != 0)
    event = event.astype(np.float64)
    pops = np.array([bin(v).count("1") for v in range(size)])
    out = []
    for chi, q in params:
        pm, pn = chi / n, q / n
        p_mut = pm**pops * (1 - pm) ** (n - pops)
        p_noise = pn**pops * (1 - pn) ** (n - pops)
        out.append(float(p_mut @ event @ p_noise))
    return out


def joint_event_probability(n, chi, q, subset):
    return joint_event_probabilities(n, subset, [(chi, q)])[0]


def level_recurrence_noiseless(n):
    """Closed form n^2 / 2 for one-bit mutation on LeadingOnes without noise."""
    return n * n / 2


def welch_p_quadrature(t, df):
    """Two-sided Student-t tail by adaptive quadrature of the density at 40 digits."""
    import mpmath as mp

    with mp.workdps(40):
        df = mp.mpf(df)
        c = mp.gamma((df + 1) / 2) / (mp.sqrt(df * mp.pi) * mp.gamma(df / 2))
        dens = lambda x: c * (1 + x * x / df) ** (-(df + 1) / 2)
        t = abs(mp.mpf(t))
        if t < 1:
            tail = mp.mpf(1) / 2 - mp.quad(dens, [0, t])
        else:
            tail = mp.quad(dens, [t, 2 * t, 10 * t, mp.inf])
        return float(2 * tail)


def welch_by_hand(a, b):
    na, nb = len(a), len(b)
    ma, mb = math.fsum(a) / na, math.fsum(b) / nb
    va = math.fsum((x - ma) ** 2 for x in a) / (na - 1)
    vb = math.fsum((x - mb) ** 2 for x in b) / (nb - 1)
    se = va / na + vb / nb
    t = (ma - mb) / math.sqrt(se)
    df = se**2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
    return t, df
