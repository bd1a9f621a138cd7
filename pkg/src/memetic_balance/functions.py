"""
Benchmark fitness functions.

All functions are maximised, integer valued and built from long k-paths:

* `OneMax` -- number of one-bits.
* `LongPathFn` -- a long path with increasing fitness; off-path points are
  guided towards the path start.
* `SectionedPathFn` -- a long path cut into sections of increasing fitness,
  each ending in a local optimum, with a global optimum placed two bit flips
  away from depth ``D`` of every section. Only a local search that stops
  exactly at depth ``D`` parks the population next to a target.
* `RaceFn` -- connected path in the left half, every-third-point "peaks" in
  the right half; the variant decides which path end is the global optimum
  and which one is an absorbing trap.
"""

from __future__ import annotations

import enum
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Any

from .core import BitString, check_fitness
from .paths import LongKPath, build_long_k_path

__all__ = [
    "Label",
    "FitnessFunction",
    "OneMax",
    "ConstantFn",
    "LongPathFn",
    "SectionedPathParams",
    "SectionedPathFn",
    "RaceParams",
    "RaceFn",
    "CountingFunction",
    "onemax_evaluate",
    "longpath_evaluate",
    "build_sectioned_path_fn",
    "build_race_fn",
    "make_function",
    "FUNCTION_NAMES",
    "FUNCTION_PARAMS",
]


class Label(enum.Enum):
    REGULAR = "REGULAR"
    GLOBAL_OPTIMUM = "GLOBAL_OPTIMUM"
    TRAP = "TRAP"


class FitnessFunction(ABC):
    """Pseudo-Boolean function to be maximised.

    Subclasses implement `evaluate_value`, which works on the integer
    encoding of a bit string. Everything else is derived from it.
    """

    name = "function"
    dim: int

    @abstractmethod
    def evaluate_value(self, value: int) -> int:
        """Fitness of the bit string with integer encoding `value`."""

    @property
    @abstractmethod
    def max_fitness(self) -> int:
        """The unique maximum fitness value."""

    def label_value(self, value: int) -> Label:
        if self.evaluate_value(value) == self.max_fitness:
            return Label.GLOBAL_OPTIMUM
        return Label.REGULAR

    def evaluate(self, x: BitString) -> int:
        self._check(x)
        return self.evaluate_value(x.value)

    def is_global_optimum(self, x: BitString) -> bool:
        self._check(x)
        return self.label_value(x.value) is Label.GLOBAL_OPTIMUM

    def classify(self, x: BitString) -> Label:
        self._check(x)
        return self.label_value(x.value)

    @property
    def metadata(self) -> dict[str, Any]:
        return {"name": self.name, "dim": self.dim}

    def _check(self, x: BitString) -> None:
        if x.length != self.dim:
            raise ValueError(f"{self.name} expects {self.dim} bits, got {x.length}")

    def __repr__(self) -> str:
        params = ", ".join(f"{k}={v}" for k, v in self.metadata.items() if k != "name")
        return f"{type(self).__name__}({params})"


class OneMax(FitnessFunction):
    name = "onemax"

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = dim

    def evaluate_value(self, value: int) -> int:
        return value.bit_count()

    @property
    def max_fitness(self) -> int:
        return self.dim


class ConstantFn(FitnessFunction):
    """Flat landscape; every point is a global optimum."""

    name = "constant"

    def __init__(self, dim: int, value: int = 0):
        self.dim = dim
        self.value = check_fitness(value)

    def evaluate_value(self, value: int) -> int:
        return self.value

    @property
    def max_fitness(self) -> int:
        return self.value

    @property
    def metadata(self):
        return {"name": self.name, "dim": self.dim, "value": self.value}


class LongPathFn(FitnessFunction):
    """Long path problem.

    Path point at position ``p`` scores ``dim + 1 + p``; every other point
    scores ``dim - (number of ones)``, which leads towards ``0^dim``, the
    start of the path. The last path point is the global optimum.
    """

    name = "longpath"

    def __init__(self, dim: int, k: int = 2, path: LongKPath | None = None):
        self.dim = dim
        self.k = k
        self.path = path if path is not None else build_long_k_path(dim, k)
        if (self.path.dim, self.path.k) != (dim, k):
            raise ValueError("path does not match (dim, k)")
        self._index = self.path.index
        self._max = check_fitness(dim + len(self.path))

    def evaluate_value(self, value: int) -> int:
        pos = self._index.get(value)
        if pos is None:
            return self.dim - value.bit_count()
        return self.dim + 1 + pos

    @property
    def max_fitness(self) -> int:
        return self._max

    @property
    def metadata(self):
        return {"name": self.name, "dim": self.dim, "k": self.k, "path_length": len(self.path)}


@dataclass(frozen=True)
class SectionedPathParams:
    """Parameters of the sectioned path function.

    Attributes
    ----------
    dim, k : int
        Long k-path parameters.
    D : int
        Local search depth that the function rewards.
    gap : int
        Section length beyond ``D``; every section has ``D + gap`` points.
    sections : int
        Number of sections used; path points beyond them score 0.
    """

    dim: int
    k: int
    D: int
    gap: int
    sections: int

    def validate(self, path_len: int | None = None) -> None:
        if not self.D > self.gap >= 2:
            raise ValueError(f"need D > gap >= 2, got D={self.D}, gap={self.gap}")
        if self.sections < 1:
            raise ValueError(f"need at least one section, got {self.sections}")
        if path_len is not None and self.sections * (self.D + self.gap) > path_len:
            raise ValueError(
                f"{self.sections} sections of length {self.D + self.gap} exceed the path length {path_len}"
            )


class SectionedPathFn(FitnessFunction):
    """Long path cut into sections, with targets next to depth ``D``.

    With ``L = D + gap`` and ``A = 2·gap - 1``, path position
    ``(i - 1)·L + d`` (section ``i`` counted from 1, depth ``0 <= d < L``)
    scores ``1 + i·A + d``. The end of a section is a local optimum because
    the next section starts ``D - gap`` lower. A point of section ``i`` beats
    the end of section ``i - 1`` exactly when ``d >= D - gap + 1``.

    The target of section ``i`` is the point at depth ``D`` with the
    lexicographically smallest bit pair ``(a, b)`` flipped such that the
    result is at least two flips away from every path point and differs
    from earlier targets. Targets score ``1 + (sections + 1)·A + L``; all
    remaining points score 0.
    """

    name = "f_d"

    def __init__(self, params: SectionedPathParams, path: LongKPath | None = None):
        self.params = params
        self.dim = params.dim
        self.path = path if path is not None else build_long_k_path(params.dim, params.k)
        params.validate(len(self.path))
        self.section_length = params.D + params.gap
        self.offset = 2 * params.gap - 1
        self.used = params.sections * self.section_length
        self.target_fitness = check_fitness(1 + (params.sections + 1) * self.offset + self.section_length)
        self._index = self.path.index
        self.target_values = self._place_targets()
        self._targets = frozenset(self.target_values)

    def _place_targets(self) -> tuple[int, ...]:
        n = self.dim
        index = self._index
        targets: list[int] = []
        for i in range(1, self.params.sections + 1):
            base = self.path.values[(i - 1) * self.section_length + self.params.D]
            for a, b in combinations(range(n), 2):
                t = base ^ (1 << (n - 1 - a)) ^ (1 << (n - 1 - b))
                if t in index or t in targets:
                    continue
                if any((t ^ (1 << j)) in index for j in range(n)):
                    continue
                targets.append(t)
                break
            else:
                raise ValueError(f"no valid target pair for section {i}")
        return tuple(targets)

    @property
    def targets(self) -> list[BitString]:
        return [BitString._make(self.dim, t) for t in self.target_values]

    def section_point(self, section: int, depth: int) -> BitString:
        """Path point at `depth` of `section` (sections counted from 1)."""
        if not 1 <= section <= self.params.sections or not 0 <= depth < self.section_length:
            raise IndexError((section, depth))
        return self.path[(section - 1) * self.section_length + depth]

    def section_ends(self) -> list[BitString]:
        return [self.section_point(i, self.section_length - 1) for i in range(1, self.params.sections + 1)]

    def path_fitness(self, section: int, depth: int) -> int:
        return 1 + section * self.offset + depth

    def evaluate_value(self, value: int) -> int:
        if value in self._targets:
            return self.target_fitness
        pos = self._index.get(value)
        if pos is None or pos >= self.used:
            return 0
        section, depth = divmod(pos, self.section_length)
        return 1 + (section + 1) * self.offset + depth

    def label_value(self, value: int) -> Label:
        return Label.GLOBAL_OPTIMUM if value in self._targets else Label.REGULAR

    @property
    def max_fitness(self) -> int:
        return self.target_fitness

    @property
    def metadata(self):
        return {"name": self.name, **asdict(self.params), "path_length": len(self.path)}


@dataclass(frozen=True)
class RaceParams:
    """Parameters of the race functions.

    Attributes
    ----------
    half_dim : int
        Bits per half; the function has ``2·half_dim`` bits.
    k : int
        Long k-path parameter, at least 4.
    L_con : int
        Position on the connected (left) path that ends the race.
    L_unc : int
        Peak index on the unconnected (right) path that ends the race; peak
        ``j`` is the long k-path point at position ``3j``.
    w : int or None
        Weight of the connected path, ``2·half_dim`` when None.
    variant : str
        ``"con"``: the connected path end is the global optimum and the
        unconnected path end is a trap. ``"uncon"``: the reverse.
    """

    half_dim: int
    k: int
    L_con: int
    L_unc: int
    w: int | None = None
    variant: str = "con"

    @property
    def weight(self) -> int:
        return 2 * self.half_dim if self.w is None else self.w

    def validate(self, path_len: int | None = None) -> None:
        if self.k < 4:
            raise ValueError(f"race functions need k >= 4, got {self.k}")
        if self.variant not in ("con", "uncon"):
            raise ValueError(f"variant must be 'con' or 'uncon', got {self.variant!r}")
        if self.L_con < 0 or self.L_unc < 0:
            raise ValueError("path lengths must be nonnegative")
        if self.weight < 1:
            raise ValueError(f"weight must be positive, got {self.weight}")
        if path_len is not None:
            if self.L_con >= path_len:
                raise ValueError(f"L_con={self.L_con} must be below the path length {path_len}")
            if 3 * self.L_unc >= path_len:
                raise ValueError(f"3·L_unc={3 * self.L_unc} must be below the path length {path_len}")


class RaceFn(FitnessFunction):
    """Race between a connected and an unconnected path.

    For ``x = (left, right)``: ``pos_con`` is the position of ``left`` on the
    path if it is at most ``L_con``; ``pos_unc = j`` if ``right`` is peak
    ``j <= L_unc``. A missing position scores 0. Reaching the winning end
    gives ``G = 1 + w·L_con + L_unc + 2``, reaching only the losing end gives
    the trap value ``G - 1``, anything else ``1 + w·pos_con + pos_unc``.
    """

    def __init__(self, params: RaceParams, path: LongKPath | None = None):
        self.params = params
        self.half_dim = params.half_dim
        self.dim = 2 * params.half_dim
        self.path = path if path is not None else build_long_k_path(params.half_dim, params.k)
        params.validate(len(self.path))
        self.name = f"race_{params.variant}"
        self.weight = params.weight
        self.L_con = params.L_con
        self.L_unc = params.L_unc
        self.optimum_fitness = check_fitness(1 + self.weight * params.L_con + params.L_unc + 2)
        self._index = self.path.index
        self._rmask = (1 << self.half_dim) - 1
        self._con_wins = params.variant == "con"

    def peak(self, j: int) -> BitString:
        return self.path[3 * j]

    def point(self, pos_con: int, pos_unc: int) -> BitString:
        """The bit string at connected position `pos_con` and peak `pos_unc`."""
        left = self.path.values[pos_con]
        right = self.path.values[3 * pos_unc]
        return BitString._make(self.dim, (left << self.half_dim) | right)

    def positions_value(self, value: int) -> tuple[int | None, int | None]:
        pc = self._index.get(value >> self.half_dim)
        if pc is not None and pc > self.L_con:
            pc = None
        pu = self._index.get(value & self._rmask)
        if pu is not None:
            j, r = divmod(pu, 3)
            pu = j if r == 0 and j <= self.L_unc else None
        return pc, pu

    def positions(self, x: BitString) -> tuple[int | None, int | None]:
        self._check(x)
        return self.positions_value(x.value)

    def _score(self, pc: int | None, pu: int | None) -> tuple[Label, int]:
        if pc is None or pu is None:
            return Label.REGULAR, 0
        con_end = pc == self.L_con
        unc_end = pu == self.L_unc
        win, lose = (con_end, unc_end) if self._con_wins else (unc_end, con_end)
        if win:
            return Label.GLOBAL_OPTIMUM, self.optimum_fitness
        if lose:
            return Label.TRAP, self.optimum_fitness - 1
        return Label.REGULAR, 1 + self.weight * pc + pu

    def evaluate_value(self, value: int) -> int:
        return self._score(*self.positions_value(value))[1]

    def label_value(self, value: int) -> Label:
        return self._score(*self.positions_value(value))[0]

    @property
    def max_fitness(self) -> int:
        return self.optimum_fitness

    @property
    def metadata(self):
        return {"name": self.name, **asdict(self.params), "path_length": len(self.path)}


class CountingFunction(FitnessFunction):
    """Wrapper counting every evaluation of the wrapped function."""

    def __init__(self, inner: FitnessFunction):
        self.inner = inner
        self.dim = inner.dim
        self.name = inner.name
        self.count = 0

    def evaluate_value(self, value: int) -> int:
        self.count += 1
        return self.inner.evaluate_value(value)

    def label_value(self, value: int) -> Label:
        return self.inner.label_value(value)

    @property
    def max_fitness(self) -> int:
        return self.inner.max_fitness

    @property
    def metadata(self):
        return self.inner.metadata


def onemax_evaluate(x: BitString) -> int:
    return x.count_ones()


def longpath_evaluate(dim: int, x: BitString, k: int = 2) -> int:
    return LongPathFn(dim, k).evaluate(x)


def build_sectioned_path_fn(params: SectionedPathParams) -> SectionedPathFn:
    return SectionedPathFn(params)


def build_race_fn(params: RaceParams) -> RaceFn:
    return RaceFn(params)


FUNCTION_PARAMS = {
    "onemax": ("dim",),
    "longpath": ("dim", "k"),
    "f_d": ("dim", "k", "D", "gap", "sections"),
    "race_con": ("half_dim", "k", "L_con", "L_unc", "w"),
    "race_uncon": ("half_dim", "k", "L_con", "L_unc", "w"),
    "constant": ("dim", "value"),
}
FUNCTION_NAMES = tuple(FUNCTION_PARAMS)
_OPTIONAL = {"longpath": {"k": 2}, "race_con": {"w": None}, "race_uncon": {"w": None}, "constant": {"value": 0}}


def make_function(name: str, **params: Any) -> FitnessFunction:
    """Construct a function by registry name.

    ==============  ==============================================
    name            parameters
    ==============  ==============================================
    onemax          dim
    longpath        dim, k (default 2)
    f_d             dim, k, D, gap, sections
    race_con        half_dim, k, L_con, L_unc, w (default 2·half_dim)
    race_uncon      same as race_con
    constant        dim, value (default 0)
    ==============  ==============================================
    """
    if name not in FUNCTION_PARAMS:
        raise ValueError(f"unknown function {name!r}; choose from {', '.join(FUNCTION_NAMES)}")
    unexpected = set(params) - set(FUNCTION_PARAMS[name])
    if unexpected:
        raise ValueError(f"unexpected parameters for {name}: {', '.join(sorted(unexpected))}")
    p = {**_OPTIONAL.get(name, {}), **params}
    missing = [key for key in FUNCTION_PARAMS[name] if key not in p]
    if missing:
        raise ValueError(f"function {name!r} needs parameters: {', '.join(missing)}")
    if name == "onemax":
        return OneMax(p["dim"])
    if name == "longpath":
        return LongPathFn(p["dim"], p["k"])
    if name == "constant":
        return ConstantFn(p["dim"], p["value"])
    if name == "f_d":
        return SectionedPathFn(SectionedPathParams(p["dim"], p["k"], p["D"], p["gap"], p["sections"]))
    variant = name.split("_")[1]
    return RaceFn(RaceParams(p["half_dim"], p["k"], p["L_con"], p["L_unc"], p["w"], variant=variant))
