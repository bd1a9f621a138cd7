"""
Command-line front-end for reproducible experiments.

Subcommands: ``run``, ``sweep-delta``, ``sweep-tau``, ``race-calibrate``,
``stategraph`` and ``verify-paths``. Every subcommand reads a flat
``key = value`` configuration (``--config``) that ``--set KEY=VALUE`` flags
override; unknown keys are errors. Run ``python -m memetic_balance keys`` to
list the keys of every subcommand.

Every output file starts with a ``#`` header holding the tool version, the
subcommand, the master seed and the full resolved configuration. The
header is itself a valid configuration, so

    python -m memetic_balance sweep-delta --config results/summary.csv --out again

reproduces ``results`` byte for byte.

Exit codes: 0 success, 1 usage or configuration error, 2 infeasible
calibration, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .core import BitString, RngStream, derive_seed
from .engine import (
    CSV_COLUMNS,
    InvariantViolation,
    MAConfig,
    Outcome,
    RunRecord,
    copies_of,
    every_tau,
    never,
    run,
    uniform_init,
    with_probability,
)
from .functions import FUNCTION_NAMES, FUNCTION_PARAMS, FitnessFunction, RaceFn, make_function
from .localsearch import PivotRule
from .paths import build_long_k_path, check_path_invariants, path_length
from .stategraph import (
    DEFAULT_EXHAUSTIVE_LIMIT,
    autocorrelation,
    build_state_graph,
    longest_improving_path,
    pivot_trajectory_stats,
    to_dot,
)

__all__ = [
    "ConfigError",
    "CalibrationInfeasible",
    "ExperimentSpec",
    "SweepResult",
    "CalibrationResult",
    "load_config",
    "resolve_spec",
    "replicate_seed",
    "sweep_seed",
    "pilot_seed",
    "race_calibrate",
    "main",
]

TOOL = "memetic_balance"
PILOT_OFFSET = 1 << 40
EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_INVARIANT = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid configuration; maps to exit code 1."""


class CalibrationInfeasible(RuntimeError):
    """No parameter value met the calibration targets; maps to exit code 2."""

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


# ---------------------------------------------------------------- key schema


def _int(text: str) -> int:
    return int(text)


def _uint64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 1 << 64:
        raise ValueError("must be an unsigned 64-bit integer")
    return v


def _opt_int(text: str) -> int | None:
    return None if text == "none" else int(text)


def _depth(text: str) -> int | None:
    return None if text == "inf" else int(text)


def _opt_float(text: str) -> float | None:
    return None if text == "auto" else float(text)


def _optional(parse: Callable[[str], Any]) -> Callable[[str], Any]:
    def wrapped(text: str) -> Any:
        return None if text == "none" else parse(text)

    return wrapped


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return parse


def _list(item: Callable[[str], Any]) -> Callable[[str], tuple]:
    def parse(text: str) -> tuple:
        parts = [p.strip() for p in text.split(",") if p.strip()]
        if not parts:
            raise ValueError("must be a non-empty comma-separated list")
        return tuple(item(p) for p in parts)

    return parse


def _init(text: str) -> str:
    if text in ("auto", "uniform", "zeros", "ones", "path_start") or (
        text.startswith("bits:") and set(text[5:]) <= {"0", "1"} and len(text) > 5
    ):
        return text
    raise ValueError("must be auto, uniform, zeros, ones, path_start or bits:<0/1 string>")


def _fmt(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class Key:
    parse: Callable[[str], Any]
    default: Any
    doc: str
    fmt: Callable[[Any], str] = _fmt


def _fmt_depth(v):
    return "inf" if v is None else str(v)


def _fmt_depths(vs):
    return ",".join(_fmt_depth(v) for v in vs)


def _fmt_pm(v):
    return "auto" if v is None else repr(v)


_FUNCTION_KEYS = {
    "function": Key(_choice(*FUNCTION_NAMES), None, "function name"),
    "dim": Key(_opt_int, None, "dimension (onemax, longpath, f_d, constant)"),
    "half_dim": Key(_opt_int, None, "bits per half (race)"),
    "k": Key(_opt_int, None, "long k-path parameter"),
    "D": Key(_opt_int, None, "rewarded depth (f_d)"),
    "gap": Key(_opt_int, None, "section length beyond D (f_d)"),
    "sections": Key(_opt_int, None, "number of sections (f_d)"),
    "L_con": Key(_opt_int, None, "connected path length (race)"),
    "L_unc": Key(_opt_int, None, "unconnected peak count (race)"),
    "w": Key(_opt_int, None, "connected path weight, none = 2·half_dim (race)"),
    "value": Key(_opt_int, None, "constant value (constant)"),
}
_FN_PARAM_KEYS = tuple(k for k in _FUNCTION_KEYS if k != "function")

_ALGO_KEYS = {
    "mu": Key(_int, 1, "parent population size"),
    "lambda": Key(_int, 1, "offspring per generation"),
    "p_m": Key(_opt_float, None, "mutation probability, auto = 1/n", _fmt_pm),
    "schedule": Key(_choice("every_tau", "probability", "never"), "every_tau", "local search schedule"),
    "tau": Key(_int, 1, "local search period"),
    "p_ls": Key(float, 0.0, "local search probability per offspring"),
    "delta": Key(_depth, 0, "local search depth, inf = unbounded", _fmt_depth),
    "pivot": Key(PivotRule.parse, PivotRule.parse("first"), "first, first-shuffled, steepest or random"),
    "init": Key(_init, "auto", "auto, uniform, zeros, ones, path_start or bits:<string>"),
    "start_con": Key(_int, 0, "race start position on the connected path"),
    "start_unc": Key(_int, 0, "race start peak on the unconnected path"),
    "max_generations": Key(_opt_int, 100000, "generation budget, none = unlimited"),
    "max_evaluations": Key(_opt_int, None, "evaluation budget, none = unlimited"),
}
_RUN_KEYS = {
    "replicates": Key(_int, 10, "replicates per configuration"),
    "master_seed": Key(_uint64, 0, "master seed"),
}
_BUDGET_KEYS = {
    "budget": Key(_choice("pilot", "fixed"), "pilot", "pilot: 10x pilot median generations; fixed: max_generations"),
    "pilot_replicates": Key(_int, 30, "pilot replicates per value"),
    "pilot_max_generations": Key(_int, 100000, "generation cap of pilot runs"),
    "pilot_values": Key(_list(str), ("all",), "axis values piloted (all or a subset)"),
}

SCHEMAS: dict[str, dict[str, Key]] = {
    "run": {**_FUNCTION_KEYS, **_ALGO_KEYS, **_RUN_KEYS},
    "sweep-delta": {
        **_FUNCTION_KEYS,
        **_ALGO_KEYS,
        **_RUN_KEYS,
        **_BUDGET_KEYS,
        "delta_values": Key(_optional(_list(_depth)), None, "depths to sweep", lambda v: "none" if v is None else _fmt_depths(v)),
    },
    "sweep-tau": {
        **_FUNCTION_KEYS,
        **_ALGO_KEYS,
        **_RUN_KEYS,
        **_BUDGET_KEYS,
        "tau_values": Key(_optional(_list(_int)), None, "periods to sweep"),
    },
    "race-calibrate": {
        "half_dim": _FUNCTION_KEYS["half_dim"],
        "k": Key(_int, 4, "long k-path parameter"),
        "w": _FUNCTION_KEYS["w"],
        **{key: _ALGO_KEYS[key] for key in ("mu", "lambda", "p_m", "tau", "delta", "pivot", "start_con", "start_unc")},
        "max_generations": Key(_int, 20000, "generation budget per run"),
        **_RUN_KEYS,
        "target_high": Key(float, 0.9, "required P(connected wins) at tau"),
        "target_low": Key(float, 0.1, "allowed P(connected wins) at 2·tau"),
        "L_con_grid": Key(_optional(_list(_int)), None, "coarse grid of L_con, none = quarters of the path"),
        "L_unc_min": Key(_int, 1, "lower end of the L_unc search"),
        "L_unc_max": Key(_opt_int, None, "upper end of the L_unc search, none = largest valid"),
    },
    "stategraph": {
        **_FUNCTION_KEYS,
        "analyses": Key(
            _list(_choice("sinks", "longest-path", "trajectories", "autocorrelation", "dot")),
            ("sinks", "longest-path"),
            "sinks, longest-path, trajectories, autocorrelation, dot",
        ),
        "limit": Key(_int, DEFAULT_EXHAUSTIVE_LIMIT, "largest dimension for exhaustive analyses"),
        "pivot": _ALGO_KEYS["pivot"],
        "samples": Key(_int, 1, "runs per start for randomised pivot rules"),
        "walk_length": Key(_int, 100000, "random walk length"),
        "max_lag": Key(_int, 10, "largest autocorrelation lag"),
        "burn_in": Key(_int, 1000, "discarded random walk steps"),
        "master_seed": _RUN_KEYS["master_seed"],
    },
    "verify-paths": {
        "k_values": Key(_list(_int), (2, 3), "values of k"),
        "max_dim": Key(_int, 13, "largest dimension"),
        "master_seed": _RUN_KEYS["master_seed"],
    },
}

# flags that never change file contents, so they are not echoed
_CONTROL = ("out", "format", "workers")


# ------------------------------------------------------------- configuration


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved configuration of one subcommand invocation."""

    command: str
    values: dict[str, Any]
    out: str = "results"
    formats: tuple[str, ...] = ("csv", "jsonl")
    workers: int = 1

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def echo(self) -> list[str]:
        schema = SCHEMAS[self.command]
        return [f"{key}={schema[key].fmt(self.values[key])}" for key in sorted(self.values)]

    @property
    def master_seed(self) -> int:
        return self.values["master_seed"]


def load_config(path: str) -> dict[str, str]:
    """Read a flat ``key = value`` file, or the header of an output file."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    pairs: dict[str, str] = {}
    from_header = bool(lines) and lines[0].startswith(f"# tool: {TOOL}")
    for lineno, raw in enumerate(lines, 1):
        if from_header:
            if not raw.startswith("#"):
                break
            if not raw.startswith("# spec: "):
                continue
            line = raw[len("# spec: ") :]
        else:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        pairs[key] = value
    return pairs


def resolve_spec(command: str, pairs: dict[str, str], **control: Any) -> ExperimentSpec:
    """Validate raw key/value pairs against the schema of `command`."""
    schema = SCHEMAS[command]
    unknown = sorted(set(pairs) - set(schema))
    if unknown:
        raise ConfigError(f"unknown keys for {command}: {', '.join(unknown)}")
    values: dict[str, Any] = {}
    errors = []
    for key, spec in schema.items():
        if key in pairs:
            try:
                values[key] = spec.parse(pairs[key])
            except ValueError as exc:
                errors.append(f"{key}={pairs[key]!r}: {exc}")
        else:
            values[key] = spec.default
    if errors:
        raise ConfigError("invalid values: " + "; ".join(errors))
    if "function" in schema:
        _check_function_keys(values, set(pairs))
    return ExperimentSpec(command, values, **control)


def _check_function_keys(values: dict[str, Any], given: set[str]) -> None:
    name = values["function"]
    if name is None:
        raise ConfigError("missing key: function")
    allowed = set(FUNCTION_PARAMS[name])
    stray = sorted(k for k in _FN_PARAM_KEYS if k in given and k not in allowed)
    if stray:
        raise ConfigError(f"keys not used by function {name}: {', '.join(stray)}")
    # keys of other functions keep their None default and are not echoed
    for k in _FN_PARAM_KEYS:
        if k not in allowed:
            values.pop(k)
    if not name.startswith("race_"):
        stray = sorted(k for k in ("start_con", "start_unc") if k in given)
        if stray:
            raise ConfigError(f"keys not used by function {name}: {', '.join(stray)}")
        for k in ("start_con", "start_unc"):
            values.pop(k, None)


def function_params(spec: ExperimentSpec) -> dict[str, Any]:
    name = spec["function"]
    return {k: spec.values[k] for k in FUNCTION_PARAMS[name] if spec.values.get(k) is not None}


def build_function(name: str, params: dict[str, Any]) -> FitnessFunction:
    try:
        return make_function(name, **params)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def initial_point(spec: ExperimentSpec, f: FitnessFunction):
    mode = spec["init"]
    if mode == "auto":
        mode = "uniform" if spec["function"] in ("onemax", "constant") else "path_start"
    if mode == "uniform":
        return uniform_init()
    if mode == "zeros":
        return copies_of(BitString.zeros(f.dim))
    if mode == "ones":
        return copies_of(BitString.ones(f.dim))
    if mode == "path_start":
        if isinstance(f, RaceFn):
            try:
                return copies_of(f.point(spec["start_con"], spec["start_unc"]))
            except IndexError:
                raise ConfigError("start_con/start_unc lie outside the path") from None
        if not hasattr(f, "path"):
            raise ConfigError(f"init=path_start needs a path function, got {spec['function']}")
        return copies_of(f.path[0])
    point = BitString.from_str(mode[5:])
    if point.length != f.dim:
        raise ConfigError(f"init point has {point.length} bits, function has {f.dim}")
    return copies_of(point)


def make_config(spec: ExperimentSpec, f: FitnessFunction, seed: int, **override: Any) -> MAConfig:
    v = {**spec.values, **override}
    kind = v["schedule"]
    if kind == "every_tau":
        schedule = every_tau(v["tau"])
    elif kind == "probability":
        schedule = with_probability(v["p_ls"])
    else:
        schedule = never()
    try:
        return MAConfig(
            n=f.dim,
            mu=v["mu"],
            lam=v["lambda"],
            p_m=v["p_m"],
            schedule=schedule,
            delta=v["delta"],
            pivot=v["pivot"],
            init=initial_point(spec, f),
            max_generations=v["max_generations"],
            max_evaluations=v["max_evaluations"],
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ------------------------------------------------------------------- seeding


def replicate_seed(master_seed: int, i: int) -> int:
    """Seed of replicate `i` of a single configuration."""
    return derive_seed(master_seed, i)


def sweep_seed(master_seed: int, axis_index: int, replicates: int, i: int) -> int:
    """Seed of replicate `i` at sweep position `axis_index`."""
    return derive_seed(master_seed, axis_index * replicates + i)


def pilot_seed(master_seed: int, axis_index: int, replicates: int, i: int) -> int:
    return derive_seed(master_seed, PILOT_OFFSET + axis_index * replicates + i)


# ----------------------------------------------------------------- execution

_FN_CACHE: dict[tuple, FitnessFunction] = {}


def _cached_function(name: str, params: tuple) -> FitnessFunction:
    key = (name, params)
    f = _FN_CACHE.get(key)
    if f is None:
        f = _FN_CACHE[key] = make_function(name, **dict(params))
    return f


def _execute(task: tuple[str, tuple, MAConfig]) -> RunRecord:
    name, params, config = task
    return run(config, _cached_function(name, params))


def execute_all(tasks: list[tuple[str, tuple, MAConfig]], workers: int = 1) -> list[RunRecord]:
    """Run tasks, in parallel when `workers` > 1; results keep task order."""
    if workers <= 1 or len(tasks) <= 1:
        return [_execute(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_execute, tasks, chunksize=chunk))


# ------------------------------------------------------------------- outputs


def header(spec: ExperimentSpec, derived: Sequence[str] = ()) -> str:
    lines = [f"# tool: {TOOL} {__version__}", f"# command: {spec.command}", f"# master_seed: {spec.master_seed}"]
    lines += [f"# spec: {line}" for line in spec.echo()]
    lines += [f"# derived: {line}" for line in derived]
    return "\n".join(lines) + "\n"


def write_output(spec: ExperimentSpec, name: str, body: str, derived: Sequence[str] = ()) -> str:
    os.makedirs(spec.out, exist_ok=True)
    path = os.path.join(spec.out, name)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header(spec, derived))
        fh.write(body)
    return path


def csv_text(columns: Sequence[str], rows: Sequence[dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_runs(spec: ExperimentSpec, records: Sequence[RunRecord], derived: Sequence[str] = ()) -> list[str]:
    paths = []
    if "csv" in spec.formats:
        paths.append(write_output(spec, "runs.csv", csv_text(CSV_COLUMNS, [r.csv_row() for r in records]), derived))
    if "jsonl" in spec.formats:
        body = "".join(r.to_json() + "\n" for r in records)
        paths.append(write_output(spec, "runs.jsonl", body, derived))
    return paths


# ---------------------------------------------------------------- aggregation


SUMMARY_COLUMNS = (
    "axis",
    "value",
    "variant",
    "replicates",
    "success_rate",
    "trap_rate",
    "exhausted_rate",
    "connected_win_rate",
    "gen_q25",
    "gen_median",
    "gen_q75",
    "evals_q25",
    "evals_median",
    "evals_q75",
)


@dataclass(frozen=True)
class SweepResult:
    """Aggregates per swept value (and race variant).

    `rows` follow the sweep axis order. Rates are fractions of replicates
    and sum to one per row; quartiles are taken over all replicates.
    """

    axis: str
    rows: tuple[dict[str, Any], ...]
    budget: int | None = None
    derived: tuple[str, ...] = field(default=())

    def rate(self, value: Any, column: str = "success_rate", variant: str = "") -> float:
        """Look up `column` for a swept value (``None`` is depth ``inf``)."""
        key = value if isinstance(value, str) else _fmt_depth(value)
        for row in self.rows:
            if row["value"] == key and row["variant"] == variant:
                return row[column]
        raise KeyError((value, variant))


def connected_won(record: RunRecord) -> bool:
    variant = record.function.get("variant")
    if record.outcome is Outcome.OPTIMUM_FOUND:
        return variant == "con"
    if record.outcome is Outcome.TRAPPED:
        return variant == "uncon"
    return False


def summarize(axis: str, value: Any, records: Sequence[RunRecord], variant: str = "") -> dict[str, Any]:
    """Aggregate one group of replicates; independent of record order."""
    r = len(records)
    outcomes = [rec.outcome for rec in records]
    gens = np.array(sorted(rec.generations for rec in records), dtype=float)
    evals = np.array(sorted(rec.total_evals for rec in records), dtype=float)
    gq = np.percentile(gens, [25, 50, 75])
    eq = np.percentile(evals, [25, 50, 75])
    race = bool(records) and records[0].function.get("name") == "race"
    return {
        "axis": axis,
        "value": value,
        "variant": variant,
        "replicates": r,
        "success_rate": outcomes.count(Outcome.OPTIMUM_FOUND) / r,
        "trap_rate": outcomes.count(Outcome.TRAPPED) / r,
        "exhausted_rate": outcomes.count(Outcome.BUDGET_EXHAUSTED) / r,
        "connected_win_rate": sum(map(connected_won, records)) / r if race else "",
        "gen_q25": float(gq[0]),
        "gen_median": float(gq[1]),
        "gen_q75": float(gq[2]),
        "evals_q25": float(eq[0]),
        "evals_median": float(eq[1]),
        "evals_q75": float(eq[2]),
    }


def _summary_body(result: SweepResult) -> str:
    rows = [{k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()} for row in result.rows]
    return csv_text(SUMMARY_COLUMNS, rows)


# ---------------------------------------------------------------- subcommands


def _fn_task_key(spec: ExperimentSpec, name: str | None = None) -> tuple[str, tuple]:
    params = function_params(spec)
    return (name or spec["function"], tuple(sorted(params.items())))


def _function_for(spec: ExperimentSpec, name: str | None = None) -> FitnessFunction:
    name, params = _fn_task_key(spec, name)
    try:
        return _cached_function(name, params)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def cmd_run(spec: ExperimentSpec) -> list[RunRecord]:
    """One configuration × R replicates; writes runs.csv / runs.jsonl."""
    f = _function_for(spec)
    key = _fn_task_key(spec)
    tasks = [(*key, make_config(spec, f, replicate_seed(spec.master_seed, i))) for i in range(spec["replicates"])]
    records = execute_all(tasks, spec.workers)
    write_runs(spec, records)
    return records


def _pilot_budget(spec: ExperimentSpec, axis: str, values: Sequence[Any], configure) -> tuple[int, list[str]]:
    """10x the pilot median generations of the best-performing value."""
    selected = spec["pilot_values"]
    rp = spec["pilot_replicates"]
    if selected == ("all",):
        chosen = list(range(len(values)))
    else:
        names = [_fmt(v) for v in values]
        missing = [s for s in selected if s not in names]
        if missing:
            raise ConfigError(f"pilot_values not on the {axis} axis: {', '.join(missing)}")
        chosen = [names.index(s) for s in selected]
    best = None
    for ai in chosen:
        tasks = [
            configure(values[ai], pilot_seed(spec.master_seed, ai, rp, i), spec["pilot_max_generations"])
            for i in range(rp)
        ]
        records = execute_all([t for group in tasks for t in group], spec.workers)
        done = sorted(r.generations + 1 for r in records if r.outcome is not Outcome.BUDGET_EXHAUSTED)
        if not done:
            continue
        rate = len(done) / len(records)
        median = float(np.median(done))
        if best is None or (rate, -median) > (best[1], -best[2]):
            best = (values[ai], rate, median)
    if best is None:
        raise CalibrationInfeasible(f"pilot: no run of any {axis} value finished within {spec['pilot_max_generations']} generations")
    budget = max(1, int(np.ceil(10 * best[2])))
    derived = [
        f"pilot_value={_fmt(best[0]) if axis != 'delta' else _fmt_depth(best[0])}",
        f"pilot_success_rate={best[1]!r}",
        f"pilot_median_generations={best[2]!r}",
        f"budget_generations={budget}",
    ]
    return budget, derived


def cmd_sweep_delta(spec: ExperimentSpec) -> SweepResult:
    """Success rates over local search depths at a shared budget."""
    values = spec["delta_values"]
    if values is None:
        raise ConfigError("missing key: delta_values")
    if spec["function"] != "f_d":
        _warn(f"sweep-delta is designed for f_d, got {spec['function']}")
    else:
        D, gap = spec["D"], spec["gap"]
        if D not in values or not any(v is not None and v <= D - gap for v in values) or not any(
            v is None or v >= D + gap for v in values
        ):
            _warn(f"delta_values should contain D={D} and values at distance >= {gap} on both sides")
    f = _function_for(spec)
    key = _fn_task_key(spec)
    r = spec["replicates"]

    def configure(delta, seed, budget):
        return [(*key, make_config(spec, f, seed, delta=delta, max_generations=budget))]

    derived: list[str] = []
    budget = spec["max_generations"]
    if spec["budget"] == "pilot":
        budget, derived = _pilot_budget(spec, "delta", values, configure)
    tasks = [
        (*key, make_config(spec, f, sweep_seed(spec.master_seed, ai, r, i), delta=d, max_generations=budget))
        for ai, d in enumerate(values)
        for i in range(r)
    ]
    records = execute_all(tasks, spec.workers)
    rows = tuple(
        summarize("delta", _fmt_depth(d), records[ai * r : (ai + 1) * r]) for ai, d in enumerate(values)
    )
    result = SweepResult("delta", rows, budget, tuple(derived))
    write_runs(spec, records, derived)
    write_output(spec, "summary.csv", _summary_body(result), derived)
    return result


def sanity_conditions(delta: int | None, tau: int, n: int) -> list[str]:
    """Sanity conditions of the frequency result that a run violates."""
    issues = []
    if delta is not None and delta < 36:
        issues.append(f"delta={delta} < 36")
    if delta is not None and delta / tau < 2 / n:
        issues.append(f"delta/tau={delta / tau:.4g} < 2/n={2 / n:.4g}")
    return issues


def cmd_sweep_tau(spec: ExperimentSpec) -> SweepResult:
    """Outcome rates over local search periods for both race variants.

    Both variants share replicate seeds, so per-replicate winners can be
    compared directly.
    """
    values = spec["tau_values"]
    if values is None:
        raise ConfigError("missing key: tau_values")
    if spec["function"] not in ("race_con", "race_uncon"):
        raise ConfigError(f"sweep-tau needs race_con or race_uncon, got {spec['function']}")
    if spec["schedule"] != "every_tau":
        raise ConfigError("sweep-tau needs schedule=every_tau")
    if (spec["mu"], spec["lambda"]) != (1, 1):
        _warn("the frequency result concerns the (1+1) MA; running with mu, lambda as configured")
    variants = ("race_con", "race_uncon")
    fs = {v: _function_for(spec, v) for v in variants}
    keys = {v: _fn_task_key(spec, v) for v in variants}
    n = fs["race_con"].dim
    for tau in values:
        issues = sanity_conditions(spec["delta"], tau, n)
        if issues:
            _warn(f"tau={tau}: sanity conditions violated ({'; '.join(issues)}); proceeding")
    r = spec["replicates"]

    def configure(tau, seed, budget):
        return [(*keys[v], make_config(spec, fs[v], seed, tau=tau, max_generations=budget)) for v in variants]

    derived: list[str] = []
    budget = spec["max_generations"]
    if spec["budget"] == "pilot":
        budget, derived = _pilot_budget(spec, "tau", values, configure)
    tasks = []
    for ai, tau in enumerate(values):
        for v in variants:
            for i in range(r):
                seed = sweep_seed(spec.master_seed, ai, r, i)
                tasks.append((*keys[v], make_config(spec, fs[v], seed, tau=tau, max_generations=budget)))
    records = execute_all(tasks, spec.workers)
    rows = []
    for ai, tau in enumerate(values):
        for vi, v in enumerate(variants):
            lo = (ai * len(variants) + vi) * r
            rows.append(summarize("tau", str(tau), records[lo : lo + r], variant=v.split("_")[1]))
    result = SweepResult("tau", tuple(rows), budget, tuple(derived))
    write_runs(spec, records, derived)
    write_output(spec, "summary.csv", _summary_body(result), derived)
    return result


@dataclass(frozen=True)
class CalibrationResult:
    """Outcome of the race calibration.

    `params` is the chosen ``(L_con, L_unc)`` pair; `trials` lists every
    evaluated pair as ``(L_con, L_unc, p_tau, p_2tau)`` in evaluation order.
    """

    half_dim: int
    k: int
    w: int | None
    L_con: int
    L_unc: int
    p_tau: float
    p_2tau: float
    feasible: bool
    trials: tuple[tuple[int, int, float, float], ...]

    def config_lines(self) -> list[str]:
        return [
            f"half_dim={self.half_dim}",
            f"k={self.k}",
            f"L_con={self.L_con}",
            f"L_unc={self.L_unc}",
            f"w={_fmt(self.w)}",
        ]


def race_calibrate(spec: ExperimentSpec) -> CalibrationResult:
    """Search ``(L_con, L_unc)`` separating the frequencies 1/τ and 1/(2τ).

    For each L_con of the coarse grid, bisection finds the smallest L_unc
    with ``P(connected wins | τ) >= target_high``; the pair is accepted when
    additionally ``P(connected wins | 2τ) <= target_low``. Winning
    probabilities use the race_con variant and common seeds for both
    periods. Raises `CalibrationInfeasible` carrying the best pair (largest
    probability gap) when no pair qualifies.
    """
    h, k, tau = spec["half_dim"], spec["k"], spec["tau"]
    if h is None:
        raise ConfigError("missing key: half_dim")
    try:
        plen = path_length(h, k)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    grid = spec["L_con_grid"]
    if grid is None:
        grid = tuple(sorted({max(1, (plen - 1) * q // 4) for q in (1, 2, 3, 4)}))
    unc_cap = (plen - 1) // 3
    unc_max = unc_cap if spec["L_unc_max"] is None else spec["L_unc_max"]
    unc_min = spec["L_unc_min"]
    if any(not 0 <= c < plen for c in grid):
        raise ConfigError(f"L_con_grid must lie in [0, {plen - 1}]")
    if not 0 <= unc_min <= unc_max <= unc_cap:
        raise ConfigError(f"need 0 <= L_unc_min <= L_unc_max <= {unc_cap}")
    r = spec["replicates"]
    memo: dict[tuple[int, int], tuple[float, float]] = {}
    trials: list[tuple[int, int, float, float]] = []

    def probe(lc: int, lu: int) -> tuple[float, float]:
        if (lc, lu) in memo:
            return memo[(lc, lu)]
        params = (("L_con", lc), ("L_unc", lu), ("half_dim", h), ("k", k), ("w", spec["w"]))
        f = _cached_function("race_con", tuple(sorted(params)))
        probs = []
        for period in (tau, 2 * tau):
            tasks = [
                ("race_con", tuple(sorted(params)), _race_config(spec, f, period, replicate_seed(spec.master_seed, i)))
                for i in range(r)
            ]
            records = execute_all(tasks, spec.workers)
            probs.append(sum(map(connected_won, records)) / r)
        memo[(lc, lu)] = (probs[0], probs[1])
        trials.append((lc, lu, probs[0], probs[1]))
        return memo[(lc, lu)]

    hi_t, lo_t = spec["target_high"], spec["target_low"]
    best = None
    for lc in grid:
        lo, hi = unc_min, unc_max
        p_hi = probe(lc, hi)
        if p_hi[0] < hi_t:
            cand = (lc, hi, *p_hi)
        else:
            while lo < hi:
                mid = (lo + hi) // 2
                if probe(lc, mid)[0] >= hi_t:
                    hi = mid
                else:
                    lo = mid + 1
            cand = (lc, hi, *probe(lc, hi))
            if cand[3] <= lo_t:
                return CalibrationResult(h, k, spec["w"], cand[0], cand[1], cand[2], cand[3], True, tuple(trials))
        if best is None or cand[2] - cand[3] > best[2] - best[3]:
            best = cand
    result = CalibrationResult(h, k, spec["w"], best[0], best[1], best[2], best[3], False, tuple(trials))
    raise CalibrationInfeasible(
        f"no (L_con, L_unc) in range reaches P(connected wins | tau={tau}) >= {hi_t} with "
        f"P(connected wins | tau={2 * tau}) <= {lo_t}; best pair L_con={best[0]}, L_unc={best[1]} "
        f"has {best[2]!r} and {best[3]!r}",
        best=result,
    )


def _race_config(spec: ExperimentSpec, f: RaceFn, tau: int, seed: int) -> MAConfig:
    try:
        start = f.point(spec["start_con"], spec["start_unc"])
    except IndexError:
        raise ConfigError("start_con/start_unc lie outside the path") from None
    try:
        return MAConfig(
            n=f.dim,
            mu=spec["mu"],
            lam=spec["lambda"],
            p_m=spec["p_m"],
            schedule=every_tau(tau),
            delta=spec["delta"],
            pivot=spec["pivot"],
            init=copies_of(start),
            max_generations=spec["max_generations"],
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_race_calibrate(spec: ExperimentSpec) -> CalibrationResult:
    for issue in sanity_conditions(spec["delta"], spec["tau"], 2 * (spec["half_dim"] or 1)):
        _warn(f"sanity condition violated: {issue}; proceeding")
    try:
        result = race_calibrate(spec)
    except CalibrationInfeasible as exc:
        _write_calibration(spec, exc.best)
        raise
    _write_calibration(spec, result)
    return result


def _write_calibration(spec: ExperimentSpec, result: CalibrationResult) -> None:
    rows = [
        {"L_con": lc, "L_unc": lu, "p_connected_tau": repr(a), "p_connected_2tau": repr(b)}
        for lc, lu, a, b in result.trials
    ]
    derived = [f"feasible={result.feasible}", *result.config_lines(), f"p_tau={result.p_tau!r}", f"p_2tau={result.p_2tau!r}"]
    write_output(spec, "calibration.csv", csv_text(("L_con", "L_unc", "p_connected_tau", "p_connected_2tau"), rows), derived)
    write_output(spec, "race_params.txt", "".join(line + "\n" for line in result.config_lines()), derived)


def cmd_stategraph(spec: ExperimentSpec) -> dict[str, str]:
    """Exhaustive landscape analyses; returns the written paths by analysis."""
    f = _function_for(spec)
    analyses = spec["analyses"]
    exhaustive = [a for a in analyses if a != "autocorrelation"]
    if exhaustive and f.dim > spec["limit"]:
        raise ConfigError(f"dimension {f.dim} exceeds the exhaustive limit of {spec['limit']} bits")
    written = {}
    g = build_state_graph(f, spec["limit"]) if exhaustive else None
    n = f.dim
    for a in analyses:
        if a == "sinks":
            rows = [
                {"bits": format(int(v), f"0{n}b"), "fitness": int(g.fitness[v]), "label": f.label_value(int(v)).value}
                for v in g.sink_ids()
            ]
            written[a] = write_output(spec, "sinks.csv", csv_text(("bits", "fitness", "label"), rows))
        elif a == "longest-path":
            length, witness = longest_improving_path(g)
            rows = [{"step": i, "bits": str(x), "fitness": f.evaluate(x)} for i, x in enumerate(witness)]
            written[a] = write_output(
                spec, "longest_path.csv", csv_text(("step", "bits", "fitness"), rows), [f"length={length}"]
            )
        elif a == "trajectories":
            rng = RngStream(derive_seed(spec.master_seed, 0))
            its = pivot_trajectory_stats(f, spec["pivot"], rng, spec["samples"], spec["limit"])
            rows = [{"bits": format(v, f"0{n}b"), "iterations": repr(float(x)) if its.dtype.kind == "f" else int(x)} for v, x in enumerate(its)]
            written[a] = write_output(
                spec, "trajectories.csv", csv_text(("bits", "iterations"), rows), [f"pivot={spec['pivot']}", f"max_iterations={its.max()!r}"]
            )
        elif a == "autocorrelation":
            rng = RngStream(derive_seed(spec.master_seed, 1))
            ac = autocorrelation(f, spec["walk_length"], spec["max_lag"], rng, spec["burn_in"])
            rows = [{"lag": s, "r": repr(float(x))} for s, x in enumerate(ac.r)]
            cl = "none" if ac.correlation_length is None else repr(ac.correlation_length)
            written[a] = write_output(spec, "autocorrelation.csv", csv_text(("lag", "r"), rows), [f"correlation_length={cl}"])
        elif a == "dot":
            try:
                written[a] = write_output(spec, "graph.dot", to_dot(g))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    return written


def cmd_verify_paths(spec: ExperimentSpec) -> list[dict[str, Any]]:
    rows = []
    for k in spec["k_values"]:
        if k < 1:
            raise ConfigError(f"k must be positive, got {k}")
        for dim in range(1, spec["max_dim"] + 1, k):
            path = build_long_k_path(dim, k)
            problems = check_path_invariants(path)
            rows.append(
                {
                    "k": k,
                    "dim": dim,
                    "length": len(path),
                    "expected_length": path_length(dim, k),
                    "violations": len(problems),
                    "first_violation": problems[0] if problems else "",
                }
            )
    write_output(spec, "paths.csv", csv_text(("k", "dim", "length", "expected_length", "violations", "first_violation"), rows))
    return rows


# ----------------------------------------------------------------------- main


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="memetic_balance", description="Memetic algorithm experiments.")
    p.add_argument("--version", action="version", version=f"{TOOL} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in SCHEMAS:
        sp = sub.add_parser(name, help=f"{name} experiment")
        sp.add_argument("--config", metavar="PATH", help="flat key = value file or a previous output file")
        sp.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], help="override one key")
        sp.add_argument("--out", metavar="DIR", default="results", help="output directory")
        sp.add_argument("--format", choices=("csv", "jsonl", "both"), default="both")
        sp.add_argument("--replicates", metavar="N", type=int)
        sp.add_argument("--master-seed", metavar="U64")
        sp.add_argument("--workers", metavar="N", type=int, default=1)
    sub.add_parser("keys", help="list configuration keys per subcommand")
    return p


def _collect_pairs(args: argparse.Namespace) -> dict[str, str]:
    pairs = load_config(args.config) if args.config else {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        pairs[key] = value
    if args.replicates is not None:
        pairs["replicates"] = str(args.replicates)
    if args.master_seed is not None:
        pairs["master_seed"] = args.master_seed
    return pairs


def _print_keys() -> None:
    for command, schema in SCHEMAS.items():
        print(f"[{command}]")
        for key, spec in schema.items():
            default = "(required)" if spec.default is None and key in ("function", "delta_values", "tau_values") else spec.fmt(spec.default)
            print(f"  {key:22s} {default:14s} {spec.doc}")


def _report(command: str, result: Any, spec: ExperimentSpec) -> None:
    if command == "run":
        counts = {o: sum(r.outcome is o for r in result) for o in Outcome}
        print(" ".join(f"{o.value}={c}" for o, c in counts.items()))
    elif command in ("sweep-delta", "sweep-tau"):
        if result.budget is not None:
            print(f"budget: {result.budget} generations")
        for row in result.rows:
            extra = f" connected_win={row['connected_win_rate']}" if row["connected_win_rate"] != "" else ""
            variant = f" {row['variant']}" if row["variant"] else ""
            print(
                f"{row['axis']}={row['value']}{variant}: success={row['success_rate']:.3f} "
                f"trapped={row['trap_rate']:.3f} exhausted={row['exhausted_rate']:.3f}{extra}"
            )
    elif command == "race-calibrate":
        print(" ".join(result.config_lines()) + f" p_tau={result.p_tau!r} p_2tau={result.p_2tau!r}")
    elif command == "stategraph":
        for a, path in result.items():
            print(f"{a}: {path}")
    elif command == "verify-paths":
        for row in result:
            status = "ok" if row["violations"] == 0 else "FAIL"
            print(f"k={row['k']} dim={row['dim']} length={row['length']} violations={row['violations']} {status}")
    print(f"outputs in {spec.out}")


COMMANDS = {
    "run": cmd_run,
    "sweep-delta": cmd_sweep_delta,
    "sweep-tau": cmd_sweep_tau,
    "race-calibrate": cmd_race_calibrate,
    "stategraph": cmd_stategraph,
    "verify-paths": cmd_verify_paths,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "keys":
        _print_keys()
        return EXIT_OK
    try:
        formats = ("csv", "jsonl") if args.format == "both" else (args.format,)
        spec = resolve_spec(
            args.command, _collect_pairs(args), out=args.out, formats=formats, workers=max(1, args.workers)
        )
        result = COMMANDS[args.command](spec)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CalibrationInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    _report(args.command, result, spec)
    if args.command == "verify-paths" and any(row["violations"] for row in result):
        return EXIT_INVARIANT
    return EXIT_OK
