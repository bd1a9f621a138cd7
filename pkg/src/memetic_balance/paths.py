"""Long k-paths in the Boolean hypercube.

A long k-path over ``dim`` bits is a sequence of distinct bit strings in
which consecutive points differ in one bit and any two points at path
distance ``d < k`` differ in exactly ``d`` bits, so leaving the path for a
point further ahead needs at least ``k`` simultaneous flips.

Construction (prefixes are the leftmost bits)::

    P(1)     = 0, 1
    P(d + k) = 0^k P(d),  bridge,  1^k reversed(P(d))

where the bridge walks from ``0^k last(P(d))`` to ``1^k last(P(d))`` by
setting the prefix bits from right to left.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import BitString

__all__ = [
    "LongKPath",
    "build_long_k_path",
    "path_length",
    "position_of",
    "check_path_invariants",
]


def path_length(dim: int, k: int) -> int:
    """Length of the long k-path over `dim` bits, ``(k+1)·2^((dim-1)/k) - k + 1``."""
    _check_params(dim, k)
    return (k + 1) * 2 ** ((dim - 1) // k) - k + 1


def _check_params(dim: int, k: int) -> None:
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if dim < 1 or (dim - 1) % k:
        raise ValueError(f"dim must satisfy dim = 1 (mod k); got dim={dim}, k={k}")


@dataclass(frozen=True, eq=False)
class LongKPath:
    """A materialised long k-path with a hash index for position lookup.

    Points are stored as integer encodings (see `BitString`); use indexing
    to get `BitString` objects.
    """

    k: int
    dim: int
    values: tuple[int, ...]
    index: dict[int, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> BitString:
        return BitString._make(self.dim, self.values[i])

    def __iter__(self):
        for v in self.values:
            yield BitString._make(self.dim, v)

    @property
    def points(self) -> list[BitString]:
        return list(self)

    def position_of(self, x: BitString) -> int | None:
        if x.length != self.dim:
            raise ValueError(f"length mismatch: path has dim {self.dim}, point has {x.length} bits")
        return self.index.get(x.value)

    def __contains__(self, x: BitString) -> bool:
        return self.position_of(x) is not None


def build_long_k_path(dim: int, k: int) -> LongKPath:
    """Build the long k-path over `dim` bits; requires ``dim = 1 (mod k)``."""
    _check_params(dim, k)
    pts = [0, 1]
    d = 1
    while d < dim:
        last = pts[-1]
        upper = [((1 << k) - 1) << d | p for p in reversed(pts)]
        bridge = [((1 << i) - 1) << d | last for i in range(1, k)]
        pts = pts + bridge + upper
        d += k
    values = tuple(pts)
    return LongKPath(k=k, dim=dim, values=values, index={v: i for i, v in enumerate(values)})


def position_of(path: LongKPath, x: BitString) -> int | None:
    """Position of `x` on `path`, or None when `x` is off the path."""
    return path.position_of(x)


def check_path_invariants(path: LongKPath) -> list[str]:
    """Exhaustively check the path invariants; returns violation messages.

    Checks distinctness, unit steps, the length recurrence, and that points
    at path distance below k are exactly that many bits apart.
    """
    problems = []
    vals = path.values
    if len(set(vals)) != len(vals):
        problems.append("points are not pairwise distinct")
    if vals and vals[0] != 0:
        problems.append("first point is not all-zeros")
    expected = 2
    d = 1
    while d < path.dim:
        expected = 2 * expected + path.k - 1
        d += path.k
    if len(vals) != expected:
        problems.append(f"length {len(vals)} differs from recurrence value {expected}")
    for dist in range(1, path.k):
        for i in range(len(vals) - dist):
            h = (vals[i] ^ vals[i + dist]).bit_count()
            if h != dist:
                problems.append(f"points {i} and {i + dist} at path distance {dist} have Hamming distance {h}")
    # k = 1 still needs the unit-step check
    if path.k == 1:
        for i in range(len(vals) - 1):
            if (vals[i] ^ vals[i + 1]).bit_count() != 1:
                problems.append(f"points {i} and {i + 1} are not Hamming neighbours")
    return problems
