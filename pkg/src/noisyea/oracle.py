"""Exact expected runtimes for small problem sizes.

The process under the IGNORE policy is a Markov chain on pairs
``(parent, stored_fitness)``.  From ``(x, f)`` an offspring ``y`` is drawn
from the mutation kernel, its noisy value ``v`` from the noise law, and
the chain moves to ``(y, v)`` iff ``v >= f``.  ``(1^n, n)`` is absorbing.

Expected hitting times solve ``(I - Q) t = 1`` on the transient states
reachable from the initial distribution.  Unreachable states are left
out of the system: several of them (e.g. a stored value of ``n`` far from
the optimum under one-bit noise) form closed classes that would make the
full system singular, yet they can never occur in a run.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .bitcore import (
    BitString,
    ConfigurationError,
    MutationKind,
    MutationOp,
    NoiseKind,
    NoiseModel,
    leading_ones,
)
from .ea import EvaluationPolicy

MAX_N = 8
RESIDUAL_TOL = 1e-10


class CapacityError(ValueError):
    """The state space would exceed the supported size."""


class SingularChainError(RuntimeError):
    """Some reachable state cannot reach the absorbing optimum."""


@dataclass(frozen=True)
class ChainSpec:
    n: int
    mut_op: MutationOp
    noise: NoiseModel
    policy: EvaluationPolicy = EvaluationPolicy.IGNORE

    def __post_init__(self):
        if not 1 <= self.n <= MAX_N:
            raise CapacityError(f"exact chains support 1 <= n <= {MAX_N}, got n={self.n}")
        if EvaluationPolicy(self.policy) is not EvaluationPolicy.IGNORE:
            raise ConfigurationError("the exact oracle only models the IGNORE policy")
        self.mut_op.validate(self.n)
        self.noise.validate(self.n)


@dataclass(frozen=True)
class HittingTimeSolution:
    expected_runtime: float
    per_state_times: dict[tuple[BitString, int], float]
    residual_norm: float
    n_states: int

    def time(self, x: BitString, stored: int) -> float:
        return self.per_state_times[(x, stored)]


def noisy_fitness_distribution(y: BitString, noise: NoiseModel) -> np.ndarray:
    """Exact law of LeadingOnes(N(y)) as a vector indexed by value 0..n."""
    n = y.n
    noise.validate(n)
    dist = np.zeros(n + 1)
    if noise.kind is NoiseKind.NONE:
        dist[leading_ones(y)] = 1.0
    elif noise.kind is NoiseKind.ONE_BIT:
        dist[leading_ones(y)] += 1.0 - noise.q
        for k in range(n):
            dist[leading_ones(y.flip([k]))] += noise.q / n
    else:
        # value v <=> positions 0..v-1 read as one and position v reads as zero
        p = noise.q / n
        keep = 1.0
        for i in range(n):
            one = 1.0 - p if y[i] else p
            dist[i] = keep * (1.0 - one)
            keep *= one
        dist[n] = keep
    return dist


def _bit_prob(n: int, op: MutationOp) -> float:
    return op.chi / n


def mutation_kernel(x: BitString, op: MutationOp) -> dict[BitString, float]:
    n = x.n
    if n > MAX_N:
        raise CapacityError(f"mutation kernels are enumerated only for n <= {MAX_N}")
    op.validate(n)
    if op.kind is MutationKind.ONE_BIT:
        return {x.flip([k]): 1.0 / n for k in range(n)}
    p = _bit_prob(n, op)
    out = {}
    for mask in range(1 << n):
        d = mask.bit_count()
        prob = p**d * (1.0 - p) ** (n - d)
        if prob > 0.0:
            out[BitString(n, x.value ^ mask)] = prob
    return out


def _mutation_matrix(n: int, op: MutationOp) -> np.ndarray:
    size = 1 << n
    idx = np.arange(size)
    dist = np.array([int(v).bit_count() for v in range(size)])
    hd = dist[idx[:, None] ^ idx[None, :]]
    if op.kind is MutationKind.ONE_BIT:
        return (hd == 1) / n
    p = _bit_prob(n, op)
    return p**hd * (1.0 - p) ** (n - hd)


def _noise_matrix(n: int, noise: NoiseModel) -> np.ndarray:
    return np.array([noisy_fitness_distribution(BitString(n, v), noise) for v in range(1 << n)])


def transition_matrix(spec: ChainSpec) -> np.ndarray:
    """Dense transition matrix over states ``x * (n + 1) + f``."""
    n = spec.n
    size = 1 << n
    m = n + 1
    mut = _mutation_matrix(n, spec.mut_op)
    noise = _noise_matrix(n, spec.noise)
    P = np.zeros((size * m, size * m))
    for x in range(size):
        joint = mut[x][:, None] * noise  # P(y, v) from parent x
        for f in range(m):
            row = x * m + f
            moved = joint.copy()
            moved[:, :f] = 0.0
            P[row, :] = moved.reshape(-1)
            P[row, row] += 1.0 - moved.sum()
    absorbing = (size - 1) * m + n
    P[absorbing, :] = 0.0
    P[absorbing, absorbing] = 1.0
    return P


def initial_distribution(spec: ChainSpec) -> np.ndarray:
    n = spec.n
    noise = _noise_matrix(n, spec.noise)
    return (noise / (1 << n)).reshape(-1)


def _reachable(P: np.ndarray, start: np.ndarray) -> np.ndarray:
    seen = start.copy()
    queue = deque(np.flatnonzero(start))
    while queue:
        s = queue.popleft()
        for t in np.flatnonzero(P[s] > 0.0):
            if not seen[t]:
                seen[t] = True
                queue.append(t)
    return seen


def exact_expected_runtime(spec: ChainSpec) -> HittingTimeSolution:
    n = spec.n
    m = n + 1
    P = transition_matrix(spec)
    init = initial_distribution(spec)
    absorbing = ((1 << n) - 1) * m + n

    reach = _reachable(P, init > 0.0)
    # states that can reach the optimum: reachability on the reversed graph
    back = np.zeros_like(reach)
    back[absorbing] = True
    back = _reachable((P.T > 0.0) & reach[None, :] & reach[:, None], back)
    stuck = reach & ~back
    if stuck.any():
        s = int(np.flatnonzero(stuck)[0])
        raise SingularChainError(
            f"state (x={BitString(n, s // m)}, stored={s % m}) is reachable "
            f"but cannot reach the correctly evaluated optimum"
        )

    transient = np.flatnonzero(reach)
    transient = transient[transient != absorbing]
    A = np.eye(len(transient)) - P[np.ix_(transient, transient)]
    rhs = np.ones(len(transient))
    t = np.linalg.solve(A, rhs)
    residual = float(np.max(np.abs(A @ t - rhs))) if len(t) else 0.0
    if residual > RESIDUAL_TOL * max(1.0, float(np.max(np.abs(t)))):
        raise SingularChainError(f"hitting-time system is ill-conditioned (residual {residual:.3g})")

    times = np.zeros(len(init))
    times[transient] = t
    per_state = {(BitString(n, s // m), s % m): float(times[s]) for s in transient}
    per_state[(BitString.ones(n), n)] = 0.0
    expected = float(init @ times)
    return HittingTimeSolution(expected, per_state, residual, len(transient) + 1)


def noiseless_one_bit_runtime(n: int) -> float:
    """Exact noiseless runtime of one-bit mutation by a recurrence on fitness levels.

    At level ``i < n`` the bits behind position ``i`` are uniform, the level
    is left after ``n`` iterations in expectation, and the new level is
    ``i + 1 + G`` where ``G`` counts further leading ones of a uniform suffix.
    """
    T = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        rest = n - i - 1
        acc = float(n)
        for g in range(rest + 1):
            prob = 2.0 ** -(g + 1) if g < rest else 2.0 ** -rest
            acc += prob * T[i + 1 + g]
        T[i] = acc
    init = [2.0 ** -(k + 1) for k in range(n)] + [2.0 ** -n]
    return sum(p * T[k] for k, p in enumerate(init))


def lemma8_probability(n: int, chi: float, q: float, i: int) -> float:
    """Exact probability that a fixed set of ``i`` positions is each flipped by
    exactly one of mutation (rate chi/n) and noise (rate q/n), at least one
    of them by mutation, and no other position is flipped by either.

    Per position of the set, "exactly one" has probability ``r/n`` with
    ``r = chi + q - 2 chi q / n``; the excluded case "all by noise alone"
    has probability ``(q/n)^i (1 - chi/n)^i``.
    """
    if not 1 <= i <= n:
        raise ValueError(f"subset size must be in [1, {n}], got {i}")
    r = chi + q - 2.0 * chi * q / n
    inside = (r / n) ** i - (q / n * (1.0 - chi / n)) ** i
    outside = (1.0 - chi / n) * (1.0 - q / n)
    return inside * outside ** (n - i)


def lemma8_simplified(n: int, chi: float, q: float, i: int) -> float:
    """``(r^i - q^i)/n^i * (1 - (chi+q)/n + chi q/n^2)^(n-i)``.

    Drops the factor ``(1 - chi/n)^i`` from the excluded all-noise case, so
    it never exceeds :func:`lemma8_probability` and equals it when
    ``q = 0``.
    """
    if not 1 <= i <= n:
        raise ValueError(f"subset size must be in [1, {n}], got {i}")
    r = chi + q - 2.0 * chi * q / n
    outside = 1.0 - (chi + q) / n + chi * q / n**2
    return (r**i - q**i) / n**i * outside ** (n - i)


def lemma8_lower_bound(n: int, chi: float, q: float, i: int) -> float:
    """Concrete lower bound ``(r^i - q^i)/n^i * (e^{-a} - a^2/(2n))``, ``a = chi + q - chi*q/n``.

    The factor bounds ``(1 - a/n)^(n-i) >= (1 - a/n)^n`` from below; it can
    be negative for small ``n``, in which case the bound is vacuous.
    """
    r = chi + q - 2.0 * chi * q / n
    a = chi + q - chi * q / n
    return (r**i - q**i) / n**i * (math.exp(-a) - a * a / (2.0 * n))
