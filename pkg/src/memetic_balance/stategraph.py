"""
Exhaustive landscape analysis for small dimensions.

The state graph has one vertex per bit string (vertex id = integer
encoding, bit 0 leftmost) and an edge from ``x`` to every Hamming neighbour
with strictly larger fitness. Sinks are exactly the local optima.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BitString, RngStream
from .functions import FitnessFunction
from .localsearch import PivotRule, local_search_value

__all__ = [
    "DEFAULT_EXHAUSTIVE_LIMIT",
    "StateGraph",
    "build_state_graph",
    "sinks",
    "longest_improving_path",
    "pivot_trajectory_stats",
    "AutocorrelationUndefined",
    "Autocorrelation",
    "autocorrelation",
    "to_dot",
]

DEFAULT_EXHAUSTIVE_LIMIT = 20


@dataclass(eq=False)
class StateGraph:
    """Improving-move graph over all ``2**dim`` bit strings.

    Attributes
    ----------
    dim : int
    fitness : ndarray of int64, shape (2**dim,)
    improving : ndarray of bool, shape (2**dim, dim)
        ``improving[v, i]`` is True when flipping bit ``i`` of ``v`` gives a
        strictly better neighbour.
    """

    dim: int
    fitness: np.ndarray
    improving: np.ndarray

    @property
    def n_vertices(self) -> int:
        return 1 << self.dim

    @property
    def edge_count(self) -> int:
        return int(self.improving.sum())

    def out_degree(self) -> np.ndarray:
        return self.improving.sum(axis=1)

    def successors(self, v: int) -> list[int]:
        return [v ^ (1 << (self.dim - 1 - i)) for i in np.flatnonzero(self.improving[v])]

    def sink_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.improving.any(axis=1))

    def topological_order(self) -> list[int] | None:
        """Kahn's algorithm on the edge lists; None if a cycle exists."""
        n = self.dim
        indeg = np.zeros(self.n_vertices, dtype=np.int64)
        verts = np.arange(self.n_vertices)
        for i in range(n):
            heads = verts[self.improving[:, i]] ^ (1 << (n - 1 - i))
            np.add.at(indeg, heads, 1)
        stack = list(np.flatnonzero(indeg == 0))
        order = []
        while stack:
            v = int(stack.pop())
            order.append(v)
            for w in self.successors(v):
                indeg[w] -= 1
                if indeg[w] == 0:
                    stack.append(w)
        return order if len(order) == self.n_vertices else None

    def is_acyclic(self) -> bool:
        return self.topological_order() is not None


def _fitness_table(f: FitnessFunction) -> np.ndarray:
    ev = f.evaluate_value
    return np.fromiter((ev(v) for v in range(1 << f.dim)), dtype=np.int64, count=1 << f.dim)


def build_state_graph(f: FitnessFunction, limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> StateGraph:
    """Evaluate `f` everywhere and build its improving-move graph.

    Raises ValueError when ``f.dim`` exceeds `limit` bits.
    """
    if f.dim > limit:
        raise ValueError(f"dimension {f.dim} exceeds the exhaustive limit of {limit} bits")
    fit = _fitness_table(f)
    verts = np.arange(1 << f.dim)
    improving = np.empty((1 << f.dim, f.dim), dtype=bool)
    for i in range(f.dim):
        improving[:, i] = fit[verts ^ (1 << (f.dim - 1 - i))] > fit
    return StateGraph(f.dim, fit, improving)


def sinks(g: StateGraph) -> set[BitString]:
    return {BitString._make(g.dim, int(v)) for v in g.sink_ids()}


def longest_improving_path(g: StateGraph) -> tuple[int, list[BitString]]:
    """Longest directed path (in edges) and a witness vertex sequence.

    Dynamic programming over vertices in decreasing fitness order, which is
    a topological order of the reversed graph. Ties are resolved towards
    the smallest start vertex and the lowest flipped bit.
    """
    n = g.dim
    fit = g.fitness
    longest = np.zeros(g.n_vertices, dtype=np.int64)
    levels = np.unique(fit)[::-1]
    order = np.argsort(-fit, kind="stable")
    bounds = np.searchsorted(-fit[order], -levels, side="left")
    bounds = list(bounds) + [len(order)]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        vs = order[lo:hi]
        best = np.zeros(len(vs), dtype=np.int64)
        for i in range(n):
            mask = g.improving[vs, i]
            if mask.any():
                cand = longest[vs[mask] ^ (1 << (n - 1 - i))] + 1
                best[mask] = np.maximum(best[mask], cand)
        longest[vs] = best
    v = int(np.argmax(longest))
    length = int(longest[v])
    witness = [v]
    while longest[v] > 0:
        for w in g.successors(v):
            if longest[w] == longest[v] - 1:
                v = w
                break
        witness.append(v)
    return length, [BitString._make(n, w) for w in witness]


def pivot_trajectory_stats(
    f: FitnessFunction,
    pivot: PivotRule,
    rng: RngStream | None = None,
    samples: int = 1,
    limit: int = DEFAULT_EXHAUSTIVE_LIMIT,
) -> np.ndarray:
    """Iterations until convergence of unbounded local search from every start.

    Deterministic pivot rules give exact counts. For randomised rules the
    entry is the mean over `samples` runs per start vertex.
    """
    if f.dim > limit:
        raise ValueError(f"dimension {f.dim} exceeds the exhaustive limit of {limit} bits")
    table = _fitness_table(f).tolist()
    tab = _Tabulated(f.dim, table)
    depth = 1 << f.dim
    reps = 1 if pivot.deterministic else samples
    out = np.zeros(1 << f.dim, dtype=float if reps > 1 else np.int64)
    for v in range(1 << f.dim):
        total = 0
        for _ in range(reps):
            _, _, it, conv, _ = local_search_value(v, table[v], tab, depth, pivot, rng)
            assert conv
            total += it
        out[v] = total / reps if reps > 1 else total
    return out


class _Tabulated(FitnessFunction):
    name = "table"

    def __init__(self, dim, table):
        self.dim = dim
        self._table = table
        self._max = max(table)

    def evaluate_value(self, value):
        return self._table[value]

    @property
    def max_fitness(self):
        return self._max


class AutocorrelationUndefined(ValueError):
    """The sampled fitness series has zero variance."""


@dataclass(frozen=True)
class Autocorrelation:
    r: np.ndarray
    correlation_length: float | None


def autocorrelation(
    f: FitnessFunction,
    walk_length: int,
    max_lag: int,
    rng: RngStream,
    burn_in: int = 1000,
    start: BitString | None = None,
) -> Autocorrelation:
    """Random-walk autocorrelation of the fitness series.

    The walk flips one uniformly chosen bit per step, starting from a
    uniform random point (or `start`) and discarding `burn_in` steps.
    Returns ``r[s]`` for ``s = 0..max_lag`` and the correlation length
    ``-1 / ln r(1)`` (None unless ``0 < r(1) < 1``).
    """
    if max_lag < 1:
        raise ValueError(f"max_lag must be positive, got {max_lag}")
    if walk_length < 100 * max_lag:
        raise ValueError(f"walk_length {walk_length} is below 100·max_lag = {100 * max_lag}")
    n = f.dim
    ev = f.evaluate_value
    v = rng.bits(n) if start is None else start.value
    below = rng.below
    for _ in range(burn_in):
        v ^= 1 << below(n)
    series = np.empty(walk_length, dtype=np.float64)
    for t in range(walk_length):
        series[t] = ev(v)
        v ^= 1 << below(n)
    z = series - series.mean()
    var = float(np.dot(z, z)) / walk_length
    if var == 0.0:
        raise AutocorrelationUndefined("autocorrelation undefined: the fitness series has zero variance")
    r = np.empty(max_lag + 1)
    r[0] = 1.0
    for s in range(1, max_lag + 1):
        r[s] = float(np.dot(z[:-s], z[s:])) / ((walk_length - s) * var)
    r1 = r[1]
    length = -1.0 / math.log(r1) if 0.0 < r1 < 1.0 else None
    return Autocorrelation(r, length)


def to_dot(g: StateGraph, max_dim: int = 8) -> str:
    """Graphviz text of the state graph; vertex labels read ``bits:fitness``."""
    if g.dim > max_dim:
        raise ValueError(f"DOT export is limited to {max_dim} bits, graph has {g.dim}")
    lines = ["digraph state_graph {"]
    for v in range(g.n_vertices):
        bits = format(v, f"0{g.dim}b")
        lines.append(f'  v{v} [label="{bits}:{int(g.fitness[v])}"];')
    for v in range(g.n_vertices):
        for w in g.successors(v):
            lines.append(f"  v{v} -> v{w};")
    lines.append("}")
    return "\n".join(lines) + "\n"
