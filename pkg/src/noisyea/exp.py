"""Seeded experiment batches, per-trial persistence and figure-ready reports.

A configuration fixes everything except the problem size; the noise
strength is given as a rule evaluated per ``n``.  Trial ``i`` at size ``n``
runs with the seed ``derive_seed(master_seed, n, config_hash, i)``, so a
trial's outcome depends on nothing but its own coordinates.  Adding sizes
or runs to a configuration leaves existing trials untouched.

Config file (JSON), all keys by name::

    {
      "name": "ignore-bitwise-one_over_n",     optional, used for file names
      "sizes": [8, 16, 32],                    ascending, positive
      "noise": "bitwise",                      none | one-bit | bitwise
      "q_rule": "one_over_n",                  const | one_over_n2 | log_n_over_n2 | one_over_n | one
      "q": 0.3,                                only with q_rule "const"
      "mutation": "standard",                  one-bit | standard
      "chi": 1.0,                              only with standard mutation
      "policy": "ignore",                      ignore | reevaluate
      "runs": 128,
      "budget_mult": 100,                      budget = floor(budget_mult * n^2)
      "master_seed": 0,
      "budget_overrides": [{"n": 256, "trial": 8, "budget": null}]
    }

A ``null`` override budget removes the iteration limit for that trial.
"""
from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .bitcore import ConfigurationError, MutationKind, MutationOp, NoiseKind, NoiseModel
from .ea import UNLIMITED, EvaluationPolicy, TrialResult, run_trial, run_trials
from .rng import MASK64, derive_many
from .stats import SampleSummary, summarize

FORMAT_VERSION = 1
TRIAL_HEADER = ("n", "trial", "seed", "found", "iterations", "evaluations", "best_true", "best_noisy")
REPORT_HEADER = ("policy", "q_rule", "n", "mean", "std", "count", "completed_count")
PARALLELISM_ENV = "NOISYEA_PARALLELISM"
_CHUNK = 16


class ReportError(ValueError):
    """Batches cannot be combined into one report."""


class QRule(str, Enum):
    CONST = "const"
    ONE_OVER_N2 = "one_over_n2"
    LOG_N_OVER_N2 = "log_n_over_n2"
    ONE_OVER_N = "one_over_n"
    ONE = "one"

    def value_at(self, n: int, const: Optional[float] = None) -> float:
        if self is QRule.CONST:
            if const is None:
                raise ConfigurationError("q_rule 'const' needs a q value")
            return float(const)
        if self is QRule.ONE_OVER_N2:
            return 1.0 / (n * n)
        if self is QRule.LOG_N_OVER_N2:
            return math.log(n) / (n * n)
        if self is QRule.ONE_OVER_N:
            return 1.0 / n
        return 1.0


class ReportKind(str, Enum):
    FITNESS = "fitness"
    RUNTIME = "runtime"


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple[int, ...]
    noise: NoiseKind
    q_rule: Optional[QRule]
    mutation: MutationKind
    policy: EvaluationPolicy
    runs: int
    budget_mult: float = 100.0
    master_seed: int = 0
    chi: Optional[float] = None
    q: Optional[float] = None
    budget_overrides: tuple[tuple[int, int, Optional[int]], ...] = ()
    name: Optional[str] = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "sizes", tuple(int(n) for n in self.sizes))
        set_(self, "noise", NoiseKind(self.noise))
        set_(self, "mutation", MutationKind(self.mutation))
        set_(self, "policy", EvaluationPolicy(self.policy))
        if self.q_rule is not None:
            set_(self, "q_rule", QRule(self.q_rule))
        set_(self, "budget_overrides", tuple(
            (int(n), int(i), None if b is None else int(b)) for n, i, b in self.budget_overrides
        ))
        self._check()

    def _check(self) -> None:
        if not self.sizes:
            raise ConfigurationError("sizes must be non-empty")
        if any(n < 1 for n in self.sizes) or list(self.sizes) != sorted(set(self.sizes)):
            raise ConfigurationError(f"sizes must be positive and strictly ascending, got {list(self.sizes)}")
        if self.runs < 1:
            raise ConfigurationError(f"runs must be at least 1, got {self.runs}")
        if not self.budget_mult > 0:
            raise ConfigurationError(f"budget_mult must be positive, got {self.budget_mult}")
        if not 0 <= self.master_seed <= MASK64:
            raise ConfigurationError("master_seed must be a 64-bit unsigned integer")
        if self.noise is not NoiseKind.NONE and self.q_rule is None:
            raise ConfigurationError(f"noise {self.noise.value!r} needs a q_rule")
        if (self.q_rule is QRule.CONST) != (self.q is not None):
            raise ConfigurationError("q is given exactly when q_rule is 'const'")
        if (self.mutation is MutationKind.STANDARD) != (self.chi is not None):
            raise ConfigurationError("chi is given exactly when mutation is 'standard'")
        for n, i, b in self.budget_overrides:
            if n not in self.sizes or not 0 <= i < self.runs:
                raise ConfigurationError(f"budget override for (n={n}, trial={i}) is outside the grid")
            if b is not None and b < 0:
                raise ConfigurationError("override budgets must be non-negative")
        for n in self.sizes:
            self.mut_op(n).validate(n)
            self.noise_model(n).validate(n)

    # per-size views

    def q_at(self, n: int) -> float:
        return 0.0 if self.q_rule is None else self.q_rule.value_at(n, self.q)

    def noise_model(self, n: int) -> NoiseModel:
        return NoiseModel(self.noise, self.q_at(n) if self.noise is not NoiseKind.NONE else 0.0)

    def mut_op(self, n: int) -> MutationOp:
        if self.mutation is MutationKind.ONE_BIT:
            return MutationOp.one_bit()
        return MutationOp.standard(self.chi)

    def budget_at(self, n: int) -> int:
        return int(math.floor(self.budget_mult * n * n))

    @property
    def q_label(self) -> str:
        return "none" if self.q_rule is None else self.q_rule.value

    # identity and serialisation

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "sizes": list(self.sizes),
            "noise": self.noise.value,
            "q_rule": None if self.q_rule is None else self.q_rule.value,
            "q": self.q,
            "mutation": self.mutation.value,
            "chi": self.chi,
            "policy": self.policy.value,
            "runs": self.runs,
            "budget_mult": self.budget_mult,
            "master_seed": self.master_seed,
            "budget_overrides": [{"n": n, "trial": i, "budget": b} for n, i, b in self.budget_overrides],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {"name", "sizes", "noise", "q_rule", "q", "mutation", "chi", "policy", "runs",
                 "budget_mult", "master_seed", "budget_overrides"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        missing = {"sizes", "noise", "mutation", "policy", "runs"} - set(data)
        if missing:
            raise ConfigurationError(f"missing config keys: {sorted(missing)}")
        try:
            overrides = tuple(
                (o["n"], o["trial"], o.get("budget")) for o in data.get("budget_overrides", [])
            )
            return cls(
                sizes=tuple(data["sizes"]),
                noise=data["noise"],
                q_rule=data.get("q_rule"),
                mutation=data["mutation"],
                policy=data["policy"],
                runs=int(data["runs"]),
                budget_mult=float(data.get("budget_mult", 100.0)),
                master_seed=int(data.get("master_seed", 0)),
                chi=None if data.get("chi") is None else float(data["chi"]),
                q=None if data.get("q") is None else float(data["q"]),
                budget_overrides=overrides,
                name=data.get("name"),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigurationError(f"malformed config: {exc}") from exc

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def config_hash(self) -> int:
        """64-bit digest of everything that shapes a single trial's distribution.

        Sizes, run count, seed, name and overrides are left out so that
        growing a sweep keeps the seeds of trials already run.
        """
        d = self.to_dict()
        for key in ("name", "sizes", "runs", "master_seed", "budget_overrides"):
            d.pop(key)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little")

    def trial_seeds(self, n: int) -> np.ndarray:
        return derive_many(
            np.uint64(self.master_seed),
            np.array([n, self.config_hash()], dtype=np.uint64),
            0,
            self.runs,
        )

    @property
    def slug(self) -> str:
        if self.name:
            return self.name
        return f"{self.policy.value}-{self.noise.value}-{self.q_label}-{self.config_hash():016x}"


@dataclass(frozen=True)
class SizeResult:
    n: int
    q: float
    budget: int
    trials: tuple[TrialResult, ...]
    runtime: Optional[SampleSummary]  # completed runs only, in units of n^2
    fitness: SampleSummary  # best true fitness / n over all runs

    @property
    def completed_count(self) -> int:
        return sum(t.found_optimum for t in self.trials)

    @property
    def all_completed(self) -> bool:
        return self.completed_count == len(self.trials)

    def column(self, name: str) -> np.ndarray:
        attr = {
            "iterations": "iterations_used",
            "evaluations": "evaluations_used",
            "best_true": "best_true_fitness",
            "best_noisy": "best_noisy_fitness",
            "found": "found_optimum",
            "seed": "seed",
        }[name]
        return np.array([getattr(t, attr) for t in self.trials])


@dataclass(frozen=True)
class BatchResult:
    config: ExperimentConfig
    sizes: dict[int, SizeResult] = field(default_factory=dict)

    def __getitem__(self, n: int) -> SizeResult:
        return self.sizes[n]


def _summaries(n: int, trials: Sequence[TrialResult]) -> tuple[Optional[SampleSummary], SampleSummary]:
    done = [t.iterations_used / (n * n) for t in trials if t.found_optimum]
    fitness = summarize([t.best_true_fitness / n for t in trials])
    return (summarize(done) if done else None), fitness


def size_result(n: int, q: float, budget: int, trials: Sequence[TrialResult]) -> SizeResult:
    runtime, fitness = _summaries(n, trials)
    return SizeResult(n, q, budget, tuple(trials), runtime, fitness)


def default_parallelism() -> int:
    raw = os.environ.get(PARALLELISM_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigurationError(f"{PARALLELISM_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ConfigurationError(f"{PARALLELISM_ENV} must be at least 1, got {value}")
    return value


def _run_size(config: ExperimentConfig, n: int, pool: Optional[ThreadPoolExecutor]) -> SizeResult:
    seeds = config.trial_seeds(n)
    budget = config.budget_at(n)
    mut_op, noise = config.mut_op(n), config.noise_model(n)
    overrides = {i: b for m, i, b in config.budget_overrides if m == n}

    def chunk(lo: int, hi: int) -> dict[str, np.ndarray]:
        return run_trials(n, mut_op, noise, config.policy, budget, seeds[lo:hi])

    bounds = [(lo, min(lo + _CHUNK, len(seeds))) for lo in range(0, len(seeds), _CHUNK)]
    parts = list(pool.map(lambda b: chunk(*b), bounds)) if pool else [chunk(*b) for b in bounds]
    cols = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    trials = [
        TrialResult(
            bool(cols["found"][i]), int(cols["iterations"][i]), int(cols["evaluations"][i]),
            int(cols["best_true"][i]), int(cols["best_noisy"][i]), int(cols["seed"][i]),
        )
        for i in range(len(seeds))
    ]
    for i, b in sorted(overrides.items()):
        trials[i] = run_trial(n, mut_op, noise, config.policy,
                              UNLIMITED if b is None else b, int(seeds[i]))
    return size_result(n, noise.q, budget, trials)


def run_batch(config: ExperimentConfig, parallelism: Optional[int] = None) -> BatchResult:
    """Run every (size, trial) of ``config``; results do not depend on ``parallelism``."""
    workers = default_parallelism() if parallelism is None else int(parallelism)
    if workers < 1:
        raise ConfigurationError(f"parallelism must be at least 1, got {workers}")
    if workers == 1:
        return BatchResult(config, {n: _run_size(config, n, None) for n in config.sizes})
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return BatchResult(config, {n: _run_size(config, n, pool) for n in config.sizes})


# persistence

def write_trials_csv(result: BatchResult, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_HEADER)
        for n, sr in result.sizes.items():
            for i, t in enumerate(sr.trials):
                w.writerow((n, i, t.seed, int(t.found_optimum), t.iterations_used,
                            t.evaluations_used, t.best_true_fitness, t.best_noisy_fitness))


def write_manifest(result: BatchResult, path: str | os.PathLike, timestamp: Optional[str] = None) -> None:
    from . import __version__

    manifest = {
        "format_version": FORMAT_VERSION,
        "code_version": __version__,
        "timestamp": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "config": result.config.to_dict(),
        "config_hash": f"{result.config.config_hash():016x}",
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def save_batch(result: BatchResult, directory: str | os.PathLike) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{result.config.slug}.csv"
    json_path = directory / f"{result.config.slug}.json"
    write_trials_csv(result, csv_path)
    write_manifest(result, json_path)
    return csv_path, json_path


def load_batch(csv_path: str | os.PathLike) -> BatchResult:
    """Rebuild a batch from its trial CSV and the manifest beside it."""
    csv_path = Path(csv_path)
    json_path = csv_path.with_suffix(".json")
    with open(json_path, encoding="utf-8") as fh:
        config = ExperimentConfig.from_dict(json.load(fh)["config"])
    rows: dict[int, list[TrialResult]] = {}
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRIAL_HEADER:
            raise ValueError(f"{csv_path}: unexpected header {header}")
        for n, _, seed, found, it, ev, bt, bn in reader:
            rows.setdefault(int(n), []).append(
                TrialResult(found == "1", int(it), int(ev), int(bt), int(bn), int(seed))
            )
    sizes = {
        n: size_result(n, config.q_at(n), config.budget_at(n), trials)
        for n, trials in sorted(rows.items())
    }
    return BatchResult(config, sizes)


# reports

@dataclass(frozen=True)
class ReportRow:
    policy: str
    q_rule: str
    n: int
    mean: float
    std: float
    count: int
    completed_count: int

    def as_tuple(self) -> tuple:
        return (self.policy, self.q_rule, self.n, self.mean, self.std, self.count, self.completed_count)


def emit_report(
    results: Sequence[BatchResult],
    kind: ReportKind | str,
    allow_partial: bool = False,
) -> list[ReportRow]:
    """Normalised mean and std per (configuration, n).

    Fitness rows (best true fitness / n) cover every run.  Runtime rows
    (iterations / n^2) average completed runs and appear only where all
    runs completed; ``allow_partial`` keeps any point with at least one
    completed run.
    """
    kind = ReportKind(kind)
    if not results:
        raise ReportError("no batches to report")
    grid = sorted(results[0].sizes)
    for r in results[1:]:
        if sorted(r.sizes) != grid:
            raise ReportError(f"size grids differ: {grid} vs {sorted(r.sizes)}")
    rows = []
    for r in results:
        for n in grid:
            sr = r.sizes[n]
            done = sr.completed_count
            if kind is ReportKind.FITNESS:
                s = sr.fitness
            else:
                if sr.runtime is None or (done < len(sr.trials) and not allow_partial):
                    continue
                s = sr.runtime
            rows.append(ReportRow(r.config.policy.value, r.config.q_label, n, s.mean, s.std,
                                  s.count, done))
    return rows


def write_report_csv(rows: Iterable[ReportRow], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for row in rows:
        w.writerow(row.as_tuple())
