"""Depth-bounded strict-improvement hill climbing on the Hamming neighbourhood."""

from __future__ import annotations

from dataclasses import dataclass

from .core import BitString, RngStream
from .functions import FitnessFunction

__all__ = [
    "PivotRule",
    "FIRST_IMPROVEMENT",
    "FIRST_IMPROVEMENT_SHUFFLED",
    "STEEPEST_ASCENT",
    "RANDOM_IMPROVEMENT",
    "LsOutcome",
    "EvalCounter",
    "local_search",
    "local_search_value",
]


@dataclass(frozen=True)
class PivotRule:
    """How local search picks among strictly improving neighbours.

    ``kind`` is ``"first"`` (first improving neighbour in scan order),
    ``"steepest"`` (best neighbour, ties to the lowest flipped-bit index) or
    ``"random"`` (uniform among improving neighbours). ``order`` sets the
    scan order of ``"first"``: ascending bit index or a fresh random
    permutation per iteration.
    """

    kind: str = "first"
    order: str = "fixed"

    def __post_init__(self):
        if self.kind not in ("first", "steepest", "random"):
            raise ValueError(f"unknown pivot rule {self.kind!r}")
        if self.order not in ("fixed", "shuffled"):
            raise ValueError(f"unknown scan order {self.order!r}")

    @property
    def deterministic(self) -> bool:
        return self.kind == "steepest" or (self.kind == "first" and self.order == "fixed")

    @classmethod
    def parse(cls, text: str) -> "PivotRule":
        try:
            return _PIVOT_NAMES[text]
        except KeyError:
            raise ValueError(f"unknown pivot rule {text!r}; choose from {', '.join(_PIVOT_NAMES)}") from None

    def __str__(self) -> str:
        if self.kind == "first":
            return "first" if self.order == "fixed" else "first-shuffled"
        return self.kind


FIRST_IMPROVEMENT = PivotRule("first", "fixed")
FIRST_IMPROVEMENT_SHUFFLED = PivotRule("first", "shuffled")
STEEPEST_ASCENT = PivotRule("steepest")
RANDOM_IMPROVEMENT = PivotRule("random")

_PIVOT_NAMES = {
    "first": FIRST_IMPROVEMENT,
    "first-shuffled": FIRST_IMPROVEMENT_SHUFFLED,
    "steepest": STEEPEST_ASCENT,
    "random": RANDOM_IMPROVEMENT,
}


class EvalCounter:
    """Mutable evaluation tally shared between callers."""

    __slots__ = ("count",)

    def __init__(self, count: int = 0):
        self.count = count

    def __repr__(self):
        return f"EvalCounter({self.count})"


@dataclass(frozen=True)
class LsOutcome:
    point: BitString
    fitness: int
    iterations_used: int
    converged: bool
    evaluations: int


def local_search_value(
    value: int,
    fitness: int,
    f: FitnessFunction,
    depth: int | None,
    pivot: PivotRule = FIRST_IMPROVEMENT,
    rng: RngStream | None = None,
) -> tuple[int, int, int, bool, int]:
    """Integer-encoded core of `local_search`.

    Returns ``(value, fitness, iterations, converged, evaluations)``.
    `depth` None means unbounded.
    """
    n = f.dim
    ev = f.evaluate_value
    masks = [1 << (n - 1 - i) for i in range(n)]
    kind = pivot.kind
    shuffled = pivot.order == "shuffled"
    if kind != "steepest" and (kind == "random" or shuffled) and rng is None:
        raise ValueError(f"pivot rule {pivot} needs an RngStream")
    it = evals = 0
    while depth is None or it < depth:
        if kind == "first":
            order = masks
            if shuffled:
                order = [masks[i] for i in rng.permutation(n)]
            for m in order:
                z = value ^ m
                fz = ev(z)
                evals += 1
                if fz > fitness:
                    value, fitness = z, fz
                    break
            else:
                return value, fitness, it, True, evals
        elif kind == "steepest":
            best_z, best_f = value, fitness
            for m in masks:
                z = value ^ m
                fz = ev(z)
                if fz > best_f:
                    best_z, best_f = z, fz
            evals += n
            if best_z == value:
                return value, fitness, it, True, evals
            value, fitness = best_z, best_f
        else:
            better = []
            for m in masks:
                z = value ^ m
                fz = ev(z)
                if fz > fitness:
                    better.append((z, fz))
            evals += n
            if not better:
                return value, fitness, it, True, evals
            value, fitness = better[rng.below(len(better))]
        it += 1
    return value, fitness, it, False, evals


def local_search(
    y: BitString,
    f: FitnessFunction,
    depth: int | None,
    pivot: PivotRule = FIRST_IMPROVEMENT,
    rng: RngStream | None = None,
    counter: EvalCounter | None = None,
    fitness: int | None = None,
) -> LsOutcome:
    """Hill-climb from `y` for at most `depth` iterations.

    Each iteration moves to a Hamming neighbour of strictly larger fitness
    chosen by `pivot`, or stops when there is none. ``depth=None`` runs
    until a local optimum is reached; ``depth=0`` returns `y` with
    ``converged=False``.

    Every neighbour evaluation is added to `counter`. If the fitness of `y`
    is already known, pass it as `fitness` to avoid one extra evaluation;
    otherwise that evaluation is counted too.

    Parameters
    ----------
    y : BitString
        Start point.
    f : FitnessFunction
        Function to maximise.
    depth : int or None
        Maximum number of improving moves.
    pivot : PivotRule
        Neighbour selection rule.
    rng : RngStream, optional
        Required by the shuffled and random rules.
    counter : EvalCounter, optional
        Receives the evaluation count.
    fitness : int, optional
        Known fitness of `y`.
    """
    if y.length != f.dim:
        raise ValueError(f"start point has {y.length} bits, function expects {f.dim}")
    if depth is not None and depth < 0:
        raise ValueError(f"depth must be nonnegative, got {depth}")
    extra = 0
    if fitness is None:
        fitness = f.evaluate_value(y.value)
        extra = 1
    v, fv, it, conv, evals = local_search_value(y.value, fitness, f, depth, pivot, rng)
    evals += extra
    if counter is not None:
        counter.count += evals
    return LsOutcome(BitString._make(f.dim, v), fv, it, conv, evals)
