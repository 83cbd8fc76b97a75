import math

import numpy as np
import pytest

from noisyea.bitcore import BitString, ConfigurationError, MutationOp, NoiseModel, leading_ones
from noisyea.ea import EvaluationPolicy, init, run_trial, run_trials, step
from noisyea.rng import RngStream

IGNORE = EvaluationPolicy.IGNORE
REEVAL = EvaluationPolicy.REEVALUATE

MUTATIONS = [MutationOp.one_bit(), MutationOp.standard(1.0), MutationOp.standard(2.5)]
NOISES = [NoiseModel.none(), NoiseModel.one_bit(0.4), NoiseModel.bitwise(0.5), NoiseModel.bitwise(3.0)]


class Collect:
    def __init__(self):
        self.states, self.records = [], []

    def __call__(self, state, record):
        self.states.append(state)
        self.records.append(record)


@pytest.mark.parametrize("mut_op", MUTATIONS)
@pytest.mark.parametrize("noise", NOISES)
@pytest.mark.parametrize("policy", [IGNORE, REEVAL])
def test_kernel_matches_reference(mut_op, noise, policy):
    for n, budget in [(7, 400), (16, 3000), (70, 2000)]:
        for seed in range(6):
            fast = run_trial(n, mut_op, noise, policy, budget, seed)
            slow = run_trial(n, mut_op, noise, policy, budget, seed, trace=lambda s, r: None)
            assert fast == slow, (n, seed)


def test_run_trials_matches_run_trial():
    seeds = np.arange(40, dtype=np.uint64) * 7919
    cols = run_trials(12, MutationOp.standard(1.0), NoiseModel.bitwise(1.0), REEVAL, 2000, seeds)
    for i, s in enumerate(seeds):
        r = run_trial(12, MutationOp.standard(1.0), NoiseModel.bitwise(1.0), REEVAL, 2000, int(s))
        assert (bool(cols["found"][i]), int(cols["iterations"][i]), int(cols["evaluations"][i]),
                int(cols["best_true"][i]), int(cols["best_noisy"][i])) == (
            r.found_optimum, r.iterations_used, r.evaluations_used, r.best_true_fitness,
            r.best_noisy_fitness)


def test_init_noiseless():
    for seed in range(20):
        s = init(1, NoiseModel.none(), RngStream(seed))
        assert s.stored_fitness == leading_ones(s.parent)
        assert (s.iteration, s.evaluations) == (0, 1)


def test_init_replays_one_bit_noise_draws():
    for seed in range(30):
        replay = RngStream(seed)
        parent = BitString(4, replay.next_u64() & 0b1111)
        assert replay.random() < 1.0
        noisy = parent.flip([replay.below(4)])
        s = init(4, NoiseModel.one_bit(1.0), RngStream(seed))
        assert s.parent == parent
        assert s.stored_fitness == leading_ones(noisy)


def test_init_bits_are_fair():
    from noisyea.rng import random_bits, seed_state

    n, m = 16, 1_000_000
    counts = np.zeros(n)
    s = seed_state(np.uint64(2))
    out = np.empty(n, dtype=np.uint8)
    for _ in range(m):
        random_bits(s, n, out)
        counts += out
    sd = math.sqrt(m / 4)
    assert np.all(np.abs(counts - m / 2) < 3.5 * sd)


def test_noiseless_step_is_elitist():
    rng = RngStream(3)
    state = init(20, NoiseModel.none(), rng)
    for _ in range(500):
        new, rec = step(state, MutationOp.standard(1.0), NoiseModel.none(), IGNORE, rng)
        assert rec.accepted == (rec.offspring_true_fitness >= state.true_fitness)
        assert new.true_fitness >= state.true_fitness
        state = new


def test_ignore_keeps_stored_value_on_rejection():
    rng = RngStream(4)
    state = init(30, NoiseModel.bitwise(1.0), rng)
    for _ in range(2000):
        new, rec = step(state, MutationOp.standard(1.0), NoiseModel.bitwise(1.0), IGNORE, rng)
        if not rec.accepted:
            assert new.stored_fitness == state.stored_fitness and new.parent == state.parent
        assert new.stored_fitness >= state.stored_fitness
        state = new


def test_policies_agree_without_noise():
    for seed in range(10):
        a, b = Collect(), Collect()
        ra = run_trial(25, MutationOp.standard(1.0), NoiseModel.none(), IGNORE, 10_000, seed, trace=a)
        rb = run_trial(25, MutationOp.standard(1.0), NoiseModel.none(), REEVAL, 10_000, seed, trace=b)
        assert [r.accepted for r in a.records[1:]] == [r.accepted for r in b.records[1:]]
        assert ra.iterations_used == rb.iterations_used


@pytest.mark.parametrize("policy", [IGNORE, REEVAL])
def test_evaluation_accounting(policy):
    for seed in range(30):
        for budget in (0, 5, 500):
            r = run_trial(10, MutationOp.standard(1.0), NoiseModel.bitwise(1.0), policy, budget, seed)
            factor = 1 if policy is IGNORE else 2
            assert r.evaluations_used == factor * r.iterations_used + 1
            assert r.iterations_used <= budget
            if r.found_optimum:
                assert r.best_true_fitness == 10


def test_found_means_optimum_stored_correctly():
    for seed in range(20):
        c = Collect()
        r = run_trial(12, MutationOp.one_bit(), NoiseModel.one_bit(0.5), IGNORE, 50_000, seed, trace=c)
        last = c.states[-1]
        assert r.found_optimum == (last.parent.is_ones() and last.stored_fitness == 12)
        assert r.found_optimum


def test_no_termination_on_noisy_n_for_non_optimum():
    # a non-optimal parent stored with value n must keep running
    for seed in range(200):
        c = Collect()
        run_trial(3, MutationOp.one_bit(), NoiseModel.bitwise(3.0), IGNORE, 200, seed, trace=c)
        for s in c.states[:-1]:
            assert not (s.parent.is_ones() and s.stored_fitness == 3)


def test_best_fitness_tracks_accepted_parents():
    for seed in range(20):
        c = Collect()
        r = run_trial(40, MutationOp.standard(1.0), NoiseModel.bitwise(1.0), IGNORE, 800, seed, trace=c)
        assert r.best_true_fitness == max(s.true_fitness for s in c.states)
        assert r.best_noisy_fitness == max(s.stored_fitness for s in c.states)


def test_budget_zero():
    seen_nonoptimal = False
    for seed in range(20):
        r = run_trial(8, MutationOp.one_bit(), NoiseModel.none(), IGNORE, 0, seed)
        assert r.iterations_used == 0 and r.evaluations_used == 1
        if r.best_true_fitness < 8:
            seen_nonoptimal = True
            assert not r.found_optimum
    assert seen_nonoptimal


def test_optimal_start_uses_no_iterations():
    for seed in range(50):
        c = Collect()
        r = run_trial(1, MutationOp.one_bit(), NoiseModel.none(), IGNORE, 10, seed, trace=c)
        assert r.iterations_used == (0 if c.states[0].parent.is_ones() else 1)


def test_single_bit_mean_runtime():
    # parent is 1 w.p. 1/2 (0 iterations), otherwise one flip fixes it
    m = 1_000_000
    cols = run_trials(1, MutationOp.one_bit(), NoiseModel.none(), IGNORE, 10, np.arange(m, dtype=np.uint64))
    it = cols["iterations"]
    assert set(np.unique(it)) <= {0, 1}
    assert abs(it.mean() - 0.5) <= 3 * math.sqrt(0.25 / m)


def test_rejects_bad_configuration():
    with pytest.raises(ConfigurationError):
        run_trial(0, MutationOp.one_bit(), NoiseModel.none(), IGNORE, 10, 1)
    with pytest.raises(ConfigurationError):
        run_trial(4, MutationOp.standard(5.0), NoiseModel.none(), IGNORE, 10, 1)
    with pytest.raises(ConfigurationError):
        run_trial(4, MutationOp.one_bit(), NoiseModel.bitwise(5.0), IGNORE, 10, 1)
    with pytest.raises(ConfigurationError):
        run_trial(4, MutationOp.one_bit(), NoiseModel.none(), IGNORE, -1, 1)
    with pytest.raises(ConfigurationError):
        run_trial(4, MutationOp.one_bit(), NoiseModel.none(), IGNORE, 10, -3)
