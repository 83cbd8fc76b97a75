"""The (1+1) EA on LeadingOnes under prior noise.

Two evaluation policies are supported: ``IGNORE`` keeps the noisy value
measured when the parent was accepted, ``REEVALUATE`` measures the parent
again in every iteration.

``init``/``step`` form the readable reference implementation and back
the tracing path.  ``run_trial`` without a trace sink dispatches to the
compiled kernel in :mod:`noisyea._kernel`; both consume identical draws
from the same seed and return identical results.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import _kernel
from .bitcore import (
    BitString,
    ConfigurationError,
    MutationKind,
    MutationOp,
    NoiseKind,
    NoiseModel,
    leading_ones,
    mutate,
    noisy_fitness,
    random_bitstring,
)
from .rng import MASK64, RngStream

UNLIMITED = (1 << 62)


class EvaluationPolicy(str, Enum):
    IGNORE = "ignore"
    REEVALUATE = "reevaluate"


@dataclass(frozen=True)
class SearchState:
    parent: BitString
    stored_fitness: int
    iteration: int = 0
    evaluations: int = 1

    @property
    def true_fitness(self) -> int:
        return leading_ones(self.parent)

    def is_solved(self) -> bool:
        """Optimum found and evaluated properly."""
        return self.parent.is_ones() and self.stored_fitness == self.parent.n


@dataclass(frozen=True)
class StepRecord:
    offspring_true_fitness: int
    offspring_noisy_fitness: int
    accepted: bool
    parent_true_fitness: int
    stored_fitness: int


@dataclass(frozen=True)
class TrialResult:
    found_optimum: bool
    iterations_used: int
    evaluations_used: int
    best_true_fitness: int
    best_noisy_fitness: int
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


TraceSink = Callable[[SearchState, Optional[StepRecord]], None]


def init(n: int, noise: NoiseModel, rng: RngStream) -> SearchState:
    if n < 1:
        raise ConfigurationError(f"problem size must be positive, got {n}")
    parent = random_bitstring(n, rng)
    return SearchState(parent, noisy_fitness(parent, noise, rng), 0, 1)


def step(
    state: SearchState,
    mut_op: MutationOp,
    noise: NoiseModel,
    policy: EvaluationPolicy,
    rng: RngStream,
) -> tuple[SearchState, StepRecord]:
    y = mutate(state.parent, mut_op, rng)
    stored = state.stored_fitness
    evaluations = state.evaluations
    if policy is EvaluationPolicy.REEVALUATE:
        stored = noisy_fitness(state.parent, noise, rng)
        evaluations += 1
    f_y = noisy_fitness(y, noise, rng)
    evaluations += 1

    accepted = f_y >= stored
    if accepted:
        new_state = SearchState(y, f_y, state.iteration + 1, evaluations)
    else:
        new_state = SearchState(state.parent, stored, state.iteration + 1, evaluations)
    record = StepRecord(
        offspring_true_fitness=leading_ones(y),
        offspring_noisy_fitness=f_y,
        accepted=accepted,
        parent_true_fitness=new_state.true_fitness,
        stored_fitness=new_state.stored_fitness,
    )
    return new_state, record


def validate_run(n: int, mut_op: MutationOp, noise: NoiseModel, budget: int) -> None:
    if n < 1:
        raise ConfigurationError(f"problem size must be positive, got {n}")
    if budget < 0:
        raise ConfigurationError(f"iteration budget must be non-negative, got {budget}")
    mut_op.validate(n)
    noise.validate(n)


def _kernel_args(mut_op: MutationOp, noise: NoiseModel, policy: EvaluationPolicy):
    mut_kind = _kernel.MUT_ONE_BIT if mut_op.kind is MutationKind.ONE_BIT else _kernel.MUT_STANDARD
    noise_kind = {
        NoiseKind.NONE: _kernel.NOISE_NONE,
        NoiseKind.ONE_BIT: _kernel.NOISE_ONE_BIT,
        NoiseKind.BITWISE: _kernel.NOISE_BITWISE,
    }[noise.kind]
    return (
        mut_kind,
        float(mut_op.chi),
        noise_kind,
        float(noise.q),
        EvaluationPolicy(policy) is EvaluationPolicy.REEVALUATE,
    )


def run_trial(
    n: int,
    mut_op: MutationOp,
    noise: NoiseModel,
    policy: EvaluationPolicy,
    budget: int,
    seed: int,
    trace: TraceSink | None = None,
) -> TrialResult:
    """Run until the optimum is stored with its correct value or the budget is spent.

    When ``trace`` is given the Python reference loop runs and the sink is
    called with the state at the start of every iteration (and once with
    the final state), together with the record of the step that produced
    it (``None`` for the initial state).
    """
    policy = EvaluationPolicy(policy)
    validate_run(n, mut_op, noise, budget)
    if not 0 <= seed <= MASK64:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if trace is None:
        found, it, ev, bt, bn = _kernel.run_trial_kernel(
            n, *_kernel_args(mut_op, noise, policy), int(budget), np.uint64(seed)
        )
        return TrialResult(bool(found), int(it), int(ev), int(bt), int(bn), int(seed))

    rng = RngStream(seed)
    state = init(n, noise, rng)
    best_true = state.true_fitness
    best_noisy = state.stored_fitness
    trace(state, None)
    while not state.is_solved() and state.iteration < budget:
        state, record = step(state, mut_op, noise, policy, rng)
        best_true = max(best_true, record.parent_true_fitness)
        best_noisy = max(best_noisy, record.stored_fitness)
        trace(state, record)
    return TrialResult(
        state.is_solved(), state.iteration, state.evaluations, best_true, best_noisy, seed
    )


def run_trials(
    n: int,
    mut_op: MutationOp,
    noise: NoiseModel,
    policy: EvaluationPolicy,
    budget: int,
    seeds,
) -> dict[str, np.ndarray]:
    """Vectorised ``run_trial`` over many seeds; returns column arrays."""
    policy = EvaluationPolicy(policy)
    validate_run(n, mut_op, noise, budget)
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    found, iters, evals, best_true, best_noisy = _kernel.run_trials_kernel(
        n, *_kernel_args(mut_op, noise, policy), int(budget), seeds
    )
    return {
        "seed": seeds,
        "found": found,
        "iterations": iters,
        "evaluations": evals,
        "best_true": best_true,
        "best_noisy": best_noisy,
    }
