"""
(μ+λ) memetic algorithm.

Each generation creates λ offspring by uniform parent choice and standard
bit mutation, runs depth-bounded local search on them when the schedule
fires, and keeps the best μ of parents and offspring, preferring offspring
on ties. Generations are counted from 0, so ``every_tau(τ)`` runs local
search in generations 0, τ, 2τ, ...
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field, replace
from typing import Any

from .core import BitString, RngStream, mutate_value
from .functions import FitnessFunction, Label
from .localsearch import FIRST_IMPROVEMENT, PivotRule, local_search_value

__all__ = [
    "Schedule",
    "every_tau",
    "with_probability",
    "never",
    "Init",
    "uniform_init",
    "copies_of",
    "MAConfig",
    "Outcome",
    "RunRecord",
    "InvariantViolation",
    "classify_population",
    "run",
    "CSV_COLUMNS",
]


class InvariantViolation(RuntimeError):
    """An internal consistency check failed during a run."""


@dataclass(frozen=True)
class Schedule:
    """When local search is applied to an offspring.

    ``kind`` is ``"every_tau"`` (generations with ``t mod tau == 0``),
    ``"probability"`` (independent coin with probability `p_ls` per
    offspring) or ``"never"``.
    """

    kind: str = "never"
    tau: int | None = None
    p_ls: float | None = None

    def __post_init__(self):
        if self.kind == "every_tau":
            if self.tau is None or self.tau < 1:
                raise ValueError(f"tau must be a positive integer, got {self.tau}")
        elif self.kind == "probability":
            if self.p_ls is None or not 0.0 <= self.p_ls <= 1.0:
                raise ValueError(f"local search probability must lie in [0, 1], got {self.p_ls}")
        elif self.kind != "never":
            raise ValueError(f"unknown schedule {self.kind!r}")

    @property
    def parameter(self) -> int | float | None:
        return self.tau if self.kind == "every_tau" else self.p_ls

    def __str__(self) -> str:
        if self.kind == "every_tau":
            return f"every_tau({self.tau})"
        if self.kind == "probability":
            return f"probability({self.p_ls!r})"
        return "never"


def every_tau(tau: int) -> Schedule:
    return Schedule("every_tau", tau=tau)


def with_probability(p_ls: float) -> Schedule:
    return Schedule("probability", p_ls=p_ls)


def never() -> Schedule:
    return Schedule("never")


@dataclass(frozen=True)
class Init:
    """Initial population: ``"uniform"`` random strings or ``"copies"`` of `point`."""

    kind: str = "uniform"
    point: BitString | None = None

    def __post_init__(self):
        if self.kind == "copies" and self.point is None:
            raise ValueError("copies initialisation needs a point")
        if self.kind not in ("uniform", "copies"):
            raise ValueError(f"unknown initialisation {self.kind!r}")

    def __str__(self) -> str:
        return "uniform" if self.kind == "uniform" else f"copies({self.point})"


def uniform_init() -> Init:
    return Init("uniform")


def copies_of(point: BitString) -> Init:
    return Init("copies", point)


@dataclass(frozen=True)
class MAConfig:
    """Complete parametrisation of one run.

    Attributes
    ----------
    n : int
        Dimension.
    mu, lam : int
        Parent population size and offspring per generation.
    p_m : float or None
        Per-bit mutation probability; None means 1/n.
    schedule : Schedule
        Local search schedule.
    delta : int or None
        Local search depth; None means unbounded.
    pivot : PivotRule
    init : Init
    max_generations, max_evaluations : int or None
        Budget; checked before each generation starts.
    seed : int
        Unsigned 64-bit seed of the run's RngStream.
    """

    n: int
    mu: int = 1
    lam: int = 1
    p_m: float | None = None
    schedule: Schedule = field(default_factory=never)
    delta: int | None = 0
    pivot: PivotRule = FIRST_IMPROVEMENT
    init: Init = field(default_factory=uniform_init)
    max_generations: int | None = None
    max_evaluations: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.mu < 1 or self.lam < 1:
            raise ValueError(f"mu and lambda must be at least 1, got mu={self.mu}, lambda={self.lam}")
        if self.p_m is not None and not 0.0 <= self.p_m <= 1.0:
            raise ValueError(f"mutation probability must lie in [0, 1], got {self.p_m}")
        if self.delta is not None and self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")
        if self.init.kind == "copies" and self.init.point.length != self.n:
            raise ValueError(f"initial point has {self.init.point.length} bits, expected {self.n}")
        if self.max_generations is None and self.max_evaluations is None:
            raise ValueError("a budget (max_generations or max_evaluations) is required")

    @property
    def mutation_rate(self) -> float:
        return 1.0 / self.n if self.p_m is None else self.p_m

    def with_seed(self, seed: int) -> "MAConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "mu": self.mu,
            "lambda": self.lam,
            "p_m": self.mutation_rate,
            "schedule": str(self.schedule),
            "delta": self.delta,
            "pivot": str(self.pivot),
            "init": str(self.init),
            "max_generations": self.max_generations,
            "max_evaluations": self.max_evaluations,
            "seed": self.seed,
        }


class Outcome(enum.Enum):
    OPTIMUM_FOUND = "OPTIMUM_FOUND"
    TRAPPED = "TRAPPED"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


CSV_COLUMNS = (
    "function",
    "variant",
    "n",
    "mu",
    "lambda",
    "p_m",
    "schedule",
    "tau_or_pls",
    "delta",
    "pivot",
    "seed",
    "outcome",
    "generations",
    "mutation_evals",
    "ls_evals",
    "ls_invocations",
    "best_fitness",
)


@dataclass(frozen=True)
class RunRecord:
    """Result of one run.

    `generations` is the index of the generation whose selection produced
    the terminal state (0 when the first generation or the initial
    population is already terminal); on budget exhaustion it is the number
    of generations executed. `mutation_evals` includes the evaluations of
    the initial population.
    """

    outcome: Outcome
    generations: int
    mutation_evals: int
    ls_evals: int
    ls_invocations: int
    trace: tuple[tuple[int, int], ...]
    final_best: BitString
    best_fitness: int
    config: MAConfig
    function: dict[str, Any] = field(default_factory=dict)

    @property
    def total_evals(self) -> int:
        return self.mutation_evals + self.ls_evals

    def to_dict(self) -> dict[str, Any]:
        return {
            "function": self.function,
            "config": self.config.to_dict(),
            "outcome": self.outcome.value,
            "generations": self.generations,
            "evaluations": {
                "mutation_evals": self.mutation_evals,
                "ls_evals": self.ls_evals,
                "total": self.total_evals,
            },
            "ls_invocations": self.ls_invocations,
            "best_fitness_trace": [list(p) for p in self.trace],
            "final_best": str(self.final_best),
            "best_fitness": self.best_fitness,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def csv_row(self) -> dict[str, Any]:
        cfg = self.config
        name = self.function.get("name", "")
        return {
            "function": name,
            "variant": self.function.get("variant", ""),
            "n": cfg.n,
            "mu": cfg.mu,
            "lambda": cfg.lam,
            "p_m": repr(cfg.mutation_rate),
            "schedule": cfg.schedule.kind,
            "tau_or_pls": "" if cfg.schedule.parameter is None else cfg.schedule.parameter,
            "delta": "inf" if cfg.delta is None else cfg.delta,
            "pivot": str(cfg.pivot),
            "seed": cfg.seed,
            "outcome": self.outcome.value,
            "generations": self.generations,
            "mutation_evals": self.mutation_evals,
            "ls_evals": self.ls_evals,
            "ls_invocations": self.ls_invocations,
            "best_fitness": self.best_fitness,
        }

    def to_csv_row(self) -> str:
        buf = io.StringIO()
        csv.DictWriter(buf, CSV_COLUMNS, lineterminator="\n").writerow(self.csv_row())
        return buf.getvalue()


def classify_population(population, f: FitnessFunction) -> Outcome | None:
    """Terminal outcome of a population, or None to continue.

    `population` holds BitStrings or integer encodings. A global optimum
    takes precedence over a trap.
    """
    trapped = False
    for x in population:
        label = f.label_value(x.value if isinstance(x, BitString) else x)
        if label is Label.GLOBAL_OPTIMUM:
            return Outcome.OPTIMUM_FOUND
        if label is Label.TRAP:
            trapped = True
    return Outcome.TRAPPED if trapped else None


def run(config: MAConfig, f: FitnessFunction, trace_every: int = 0, observer=None) -> RunRecord:
    """Execute one run of the (μ+λ) MA on `f`.

    Parameters
    ----------
    config : MAConfig
    f : FitnessFunction
        Must have dimension ``config.n``.
    trace_every : int
        Besides every improvement of the best fitness, also record the best
        fitness every `trace_every` generations (0 disables).
    observer : callable, optional
        Called after every selection as ``observer(t, population)`` where
        `population` lists ``(value, fitness, tag)`` triples; tags number the
        individuals in creation order, starting with the initial population.
    """
    if f.dim != config.n:
        raise ValueError(f"config has n={config.n} but the function has dim={f.dim}")
    rng = RngStream(config.seed)
    n, mu, lam = config.n, config.mu, config.lam
    p_m = config.mutation_rate
    ev = f.evaluate_value
    label = f.label_value
    sched = config.schedule
    kind = sched.kind
    delta = config.delta
    pivot = config.pivot
    max_gen = config.max_generations
    max_eval = config.max_evaluations
    full_mask = (1 << n) - 1

    # individuals are (value, fitness, tag) triples kept in selection order
    if config.init.kind == "copies":
        v0 = config.init.point.value
        population = [(v0, ev(v0), i) for i in range(mu)]
    else:
        population = []
        for i in range(mu):
            v = rng.bits(n)
            population.append((v, ev(v), i))
    population.sort(key=lambda ind: -ind[1])
    tag = mu
    mut_evals = mu
    ls_evals = 0
    ls_calls = 0
    best = population[0][1]
    trace = [(0, best)]
    t = 0

    def terminal(pop):
        trapped = False
        for v, _, _ in pop:
            lab = label(v)
            if lab is Label.GLOBAL_OPTIMUM:
                return Outcome.OPTIMUM_FOUND
            if lab is Label.TRAP:
                trapped = True
        return Outcome.TRAPPED if trapped else None

    outcome = terminal(population)
    while outcome is None:
        if (max_gen is not None and t >= max_gen) or (max_eval is not None and mut_evals + ls_evals >= max_eval):
            outcome = Outcome.BUDGET_EXHAUSTED
            break
        ls_now = kind == "every_tau" and t % sched.tau == 0
        offspring = []
        for _ in range(lam):
            parent = population[rng.below(mu)][0] if mu > 1 else population[0][0]
            if p_m == 0.0:
                y = parent
            elif p_m == 1.0:
                y = parent ^ full_mask
            else:
                y = mutate_value(n, parent, p_m, rng)
            fy = ev(y)
            mut_evals += 1
            if ls_now or (kind == "probability" and rng.random() < sched.p_ls):
                y, fy, _, _, used = local_search_value(y, fy, f, delta, pivot, rng)
                ls_evals += used
                ls_calls += 1
            offspring.append((y, fy, tag))
            tag += 1
        # stable sort: offspring first on ties, creation order within each group
        merged = offspring + population
        merged.sort(key=lambda ind: -ind[1])
        population = merged[:mu]
        t += 1
        if observer is not None:
            observer(t - 1, list(population))
        new_best = population[0][1]
        if new_best < best:
            raise InvariantViolation(f"best fitness dropped from {best} to {new_best} in generation {t - 1}")
        if new_best > best or (trace_every and t % trace_every == 0):
            trace.append((t, new_best))
        best = new_best
        outcome = terminal(population)

    if trace[-1][0] != t:
        trace.append((t, best))
    return RunRecord(
        outcome=outcome,
        generations=t if outcome is Outcome.BUDGET_EXHAUSTED else max(t - 1, 0),
        mutation_evals=mut_evals,
        ls_evals=ls_evals,
        ls_invocations=ls_calls,
        trace=tuple(trace),
        final_best=BitString._make(n, population[0][0]),
        best_fitness=best,
        config=config,
        function=_function_info(f),
    )


def _function_info(f: FitnessFunction) -> dict[str, Any]:
    info = dict(f.metadata)
    name = info.get("name", "")
    if name.startswith("race_"):
        info["name"], info["variant"] = "race", name.split("_", 1)[1]
    return info
