"""Per-iteration state labels, phases and super-phases.

At the start of every iteration the algorithm is in one of three states:

* ``EQ``    true fitness equals the stored noisy fitness,
* ``GT``    true fitness exceeds the stored value,
* ``LT(j)`` true fitness is below the stored value and the first
  ``stored_fitness`` positions (the active prefix) contain ``j`` zeros.

Phases are the intervals between consecutive ``EQ`` iterations.  When a
run starts in ``EQ`` the initial phase ``[0 .. tau_1 - 1]`` is empty.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bitcore import BitString, MutationOp, NoiseModel
from .ea import EvaluationPolicy, SearchState, StepRecord, TrialResult, run_trial

TRACE_HEADER = ("iter", "true_fitness", "stored_fitness", "state", "zeros")


@dataclass(frozen=True)
class StateLabel:
    kind: str
    j: int = 0

    def __post_init__(self):
        if self.kind not in ("EQ", "GT", "LT"):
            raise ValueError(f"unknown state kind {self.kind!r}")
        if (self.kind == "LT") != (self.j >= 1):
            raise ValueError(f"{self.kind} state with j={self.j}")

    def __str__(self) -> str:
        return f"LT({self.j})" if self.kind == "LT" else self.kind

    @classmethod
    def parse(cls, text: str) -> "StateLabel":
        if text.startswith("LT(") and text.endswith(")"):
            return cls("LT", int(text[3:-1]))
        return cls(text)


EQ = StateLabel("EQ")
GT = StateLabel("GT")


def zeros_in_active_prefix(x: BitString, stored_fitness: int) -> int:
    if not 0 <= stored_fitness <= x.n:
        raise ValueError(f"stored fitness {stored_fitness} outside [0, {x.n}]")
    prefix = x.value & ((1 << stored_fitness) - 1)
    return stored_fitness - prefix.bit_count()


def classify(true_fitness: int, stored_fitness: int, zeros: int) -> StateLabel:
    if true_fitness == stored_fitness:
        return EQ
    if true_fitness > stored_fitness:
        return GT
    if not 1 <= zeros <= stored_fitness:
        raise ValueError(
            f"true fitness {true_fitness} < stored {stored_fitness} needs 1..{stored_fitness} "
            f"zeros in the active prefix, got {zeros}"
        )
    return StateLabel("LT", zeros)


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    true_fitness: int
    stored_fitness: int
    label: StateLabel
    zeros: int


def record_of(state: SearchState) -> TraceRecord:
    true = state.true_fitness
    zeros = zeros_in_active_prefix(state.parent, state.stored_fitness)
    return TraceRecord(state.iteration, true, state.stored_fitness,
                       classify(true, state.stored_fitness, zeros), zeros)


class TraceRecorder:
    """Trace sink for :func:`noisyea.ea.run_trial` collecting one record per iteration."""

    def __init__(self):
        self.records: list[TraceRecord] = []

    def __call__(self, state: SearchState, step: StepRecord | None) -> None:
        self.records.append(record_of(state))


def traced_trial(
    n: int,
    mut_op: MutationOp,
    noise: NoiseModel,
    policy: EvaluationPolicy,
    budget: int,
    seed: int,
) -> tuple[TrialResult, list[TraceRecord]]:
    recorder = TraceRecorder()
    result = run_trial(n, mut_op, noise, policy, budget, seed, trace=recorder)
    return result, recorder.records


@dataclass(frozen=True)
class PhaseSegmentation:
    """Phase structure of one trace.

    ``phase_boundaries`` lists every EQ iteration (tau_1 < tau_2 < ...);
    complete phase ``i`` spans ``[tau_i, tau_{i+1} - 1]`` and
    ``successful_flags[i - 1]`` tells whether its closing fitness is
    strictly higher than its opening one.  Iterations after the last EQ
    are reported in ``trailing_length`` and never enter phase statistics.
    """

    phase_boundaries: tuple[int, ...]
    successful_flags: tuple[bool, ...]
    super_phase_boundaries: tuple[int, ...]
    initial_length: int
    trailing_length: int
    boundary_fitness: tuple[int, ...] = field(default=(), repr=False)

    @property
    def phase_lengths(self) -> tuple[int, ...]:
        """Lengths of the complete phases 1, 2, ... (phase 0 excluded)."""
        b = self.phase_boundaries
        return tuple(b[i + 1] - b[i] for i in range(len(b) - 1))

    @property
    def n_super_phases(self) -> int:
        return len(self.super_phase_boundaries)


def segment(trace: Sequence[tuple[StateLabel, int]] | Sequence[TraceRecord]) -> PhaseSegmentation:
    """Split a trace of (label, fitness) pairs, one per iteration, into phases."""
    if len(trace) == 0:
        raise ValueError("cannot segment an empty trace")
    pairs = [(r.label, r.true_fitness) if isinstance(r, TraceRecord) else r for r in trace]
    taus = [t for t, (label, _) in enumerate(pairs) if label.kind == "EQ"]
    fit = [pairs[t][1] for t in taus]
    flags = tuple(fit[i + 1] > fit[i] for i in range(len(taus) - 1))
    supers = tuple(taus[i + 1] for i in range(len(taus) - 1) if flags[i])
    initial = taus[0] if taus else len(pairs)
    trailing = len(pairs) - taus[-1] - 1 if taus else 0
    return PhaseSegmentation(tuple(taus), flags, supers, initial, trailing, tuple(fit))


def transition_counts(records: Sequence[TraceRecord]) -> dict[str, int]:
    """Count one-step moves out of EQ, keyed by the label reached ("EQ", "GT", "LT(j)")."""
    counts: dict[str, int] = {}
    for a, b in zip(records, records[1:]):
        if a.label.kind == "EQ":
            key = str(b.label)
            counts[key] = counts.get(key, 0) + 1
    return counts


def write_trace_csv(records: Iterable[TraceRecord], stream: io.TextIOBase) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for r in records:
        writer.writerow((r.iteration, r.true_fitness, r.stored_fitness, str(r.label), r.zeros))


def read_trace_csv(stream: io.TextIOBase) -> list[TraceRecord]:
    reader = csv.reader(stream)
    header = tuple(next(reader))
    if header != TRACE_HEADER:
        raise ValueError(f"unexpected trace header {header}")
    return [
        TraceRecord(int(i), int(t), int(s), StateLabel.parse(label), int(z))
        for i, t, s, label, z in reader
    ]
