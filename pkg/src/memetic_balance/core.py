"""
Bit-string genotypes, exact integer fitness and seedable random streams.

A `BitString` stores its bits in a Python int. Bit index 0 is the leftmost
bit, which is the most significant bit of the stored integer, so the string
``"100"`` has integer value 4.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "BitString",
    "FitnessOverflowError",
    "FITNESS_MIN",
    "FITNESS_MAX",
    "check_fitness",
    "RngStream",
    "derive_seed",
    "child_stream",
    "hamming",
    "mutate",
    "neighbors",
]

FITNESS_MIN = -(2**63)
FITNESS_MAX = 2**63 - 1

_U64 = 2**64
_setattr = object.__setattr__
_MASK64 = _U64 - 1
_INV53 = 1.0 / 9007199254740992.0


class FitnessOverflowError(OverflowError):
    """A fitness value does not fit into a signed 64-bit integer."""


def check_fitness(value: int) -> int:
    """Return `value` unchanged, raising if it leaves the signed 64-bit range."""
    if not FITNESS_MIN <= value <= FITNESS_MAX:
        raise FitnessOverflowError(f"fitness value {value} exceeds the signed 64-bit range")
    return value


class BitString:
    """Immutable fixed-length binary string.

    Parameters
    ----------
    length : int
        Number of bits, at least 1.
    value : int, optional
        Integer encoding with bit 0 (leftmost) as the most significant bit.
    """

    __slots__ = ("_n", "_v")

    def __init__(self, length: int, value: int = 0):
        if length < 1:
            raise ValueError(f"length must be positive, got {length}")
        if not 0 <= value < (1 << length):
            raise ValueError(f"value {value} does not fit into {length} bits")
        _setattr(self, "_n", length)
        _setattr(self, "_v", value)

    @classmethod
    def _make(cls, length: int, value: int) -> "BitString":
        # unchecked constructor for hot loops
        obj = object.__new__(cls)
        _setattr(obj, "_n", length)
        _setattr(obj, "_v", value)
        return obj

    @classmethod
    def from_str(cls, text: str) -> "BitString":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"not a bit string: {text!r}")
        return cls(len(text), int(text, 2))

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        bits = list(bits)
        value = 0
        for b in bits:
            if b not in (0, 1):
                raise ValueError(f"bits must be 0 or 1, got {b!r}")
            value = (value << 1) | b
        return cls(len(bits), value)

    @classmethod
    def zeros(cls, length: int) -> "BitString":
        return cls(length, 0)

    @classmethod
    def ones(cls, length: int) -> "BitString":
        return cls(length, (1 << length) - 1)

    @property
    def length(self) -> int:
        return self._n

    @property
    def value(self) -> int:
        return self._v

    def mask(self, i: int) -> int:
        """Integer mask selecting bit `i`."""
        if not 0 <= i < self._n:
            raise IndexError(i)
        return 1 << (self._n - 1 - i)

    def flip(self, *indices: int) -> "BitString":
        v = self._v
        for i in indices:
            v ^= self.mask(i)
        return BitString._make(self._n, v)

    def count_ones(self) -> int:
        return self._v.bit_count()

    def concat(self, other: "BitString") -> "BitString":
        """Concatenation with `self` as the left part."""
        return BitString._make(self._n + other._n, (self._v << other._n) | other._v)

    def split(self, left_length: int) -> tuple["BitString", "BitString"]:
        right_length = self._n - left_length
        if not 0 < left_length < self._n:
            raise ValueError(f"cannot split {self._n} bits at {left_length}")
        return (
            BitString._make(left_length, self._v >> right_length),
            BitString._make(right_length, self._v & ((1 << right_length) - 1)),
        )

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, i: int) -> int:
        if i < 0:
            i += self._n
        if not 0 <= i < self._n:
            raise IndexError(i)
        return (self._v >> (self._n - 1 - i)) & 1

    def __iter__(self) -> Iterator[int]:
        for i in range(self._n):
            yield (self._v >> (self._n - 1 - i)) & 1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitString):
            return NotImplemented
        return self._n == other._n and self._v == other._v

    def __hash__(self) -> int:
        return hash((self._n, self._v))

    def __str__(self) -> str:
        return format(self._v, f"0{self._n}b")

    def __repr__(self) -> str:
        return f"BitString('{self}')"

    def __reduce__(self):
        return (BitString, (self._n, self._v))

    def __setattr__(self, name, value):
        raise AttributeError("BitString is immutable")


def derive_seed(seed: int, index: int) -> int:
    """Seed of the child stream `index` of `seed`.

    Pure function: the first 64-bit word produced by
    ``numpy.random.SeedSequence(seed, spawn_key=(index,))``.
    """
    if not 0 <= seed < _U64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    if index < 0:
        raise ValueError(f"child index must be nonnegative, got {index}")
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class RngStream:
    """Deterministic random stream backed by PCG64.

    The stream is seeded from ``SeedSequence(seed)`` and hands out raw
    64-bit words in blocks, so the sequence of values returned by every
    method depends only on the seed and the sequence of calls.

    Parameters
    ----------
    seed : int
        Unsigned 64-bit seed.
    """

    _BLOCK = 2048

    def __init__(self, seed: int):
        if not 0 <= seed < _U64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.seed = seed
        self._bitgen = np.random.PCG64(np.random.SeedSequence(seed))
        self._next = iter(()).__next__

    def child(self, index: int) -> "RngStream":
        return child_stream(self.seed, index)

    def _refill(self) -> int:
        self._next = iter(self._bitgen.random_raw(self._BLOCK).tolist()).__next__
        return self._next()

    def raw(self) -> int:
        """Next raw unsigned 64-bit word."""
        try:
            return self._next()
        except StopIteration:
            return self._refill()

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        try:
            return (self._next() >> 11) * _INV53
        except StopIteration:
            return (self._refill() >> 11) * _INV53

    def below(self, n: int) -> int:
        """Uniform integer in ``range(n)`` (Lemire's unbiased multiply-shift)."""
        if n <= 0:
            raise ValueError(f"bound must be positive, got {n}")
        if n == 1:
            return 0
        try:
            m = self._next() * n
        except StopIteration:
            m = self._refill() * n
        low = m & _MASK64
        if low < n:
            threshold = (_U64 - n) % n
            while low < threshold:
                m = self.raw() * n
                low = m & _MASK64
        return m >> 64

    def bernoulli(self, p: float) -> bool:
        return self.random() < p

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        items = list(range(n))
        self.shuffle(items)
        return items

    def sample(self, n: int, k: int) -> list[int]:
        """`k` distinct integers from ``range(n)``, uniformly over k-subsets."""
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct values from {n}")
        if 2 * k <= n:
            chosen: set[int] = set()
            out = []
            while len(out) < k:
                i = self.below(n)
                if i not in chosen:
                    chosen.add(i)
                    out.append(i)
            return out
        skipped = set(self.sample(n, n - k))
        return [i for i in range(n) if i not in skipped]

    def bits(self, n: int) -> int:
        """Uniform n-bit integer."""
        value = 0
        while n > 0:
            take = min(n, 64)
            value = (value << take) | (self.raw() >> (64 - take))
            n -= take
        return value


def child_stream(seed: int, index: int) -> RngStream:
    """Stream number `index` derived from `seed` (see `derive_seed`)."""
    return RngStream(derive_seed(seed, index))


def hamming(a: BitString, b: BitString) -> int:
    if a.length != b.length:
        raise ValueError(f"length mismatch: {a.length} vs {b.length}")
    return (a.value ^ b.value).bit_count()


_BINOMIAL_CDF: dict[tuple[int, float], list[float]] = {}


def _binomial_cdf(n: int, p: float) -> list[float]:
    key = (n, p)
    cdf = _BINOMIAL_CDF.get(key)
    if cdf is None:
        # log-space pmf avoids underflow of p**k for large n
        logp, logq = math.log(p), math.log1p(-p)
        acc, cdf = 0.0, []
        for k in range(n + 1):
            acc += math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1) + k * logp + (n - k) * logq)
            cdf.append(acc)
        cdf[-1] = float("inf")
        _BINOMIAL_CDF[key] = cdf
    return cdf


def flip_count(n: int, p: float, rng: RngStream) -> int:
    """Draw the number of flipped bits, Binomial(n, p)."""
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return n
    return bisect_right(_binomial_cdf(n, p), rng.random())


def mutate_value(n: int, value: int, p_m: float, rng: RngStream) -> int:
    """Standard bit mutation on a raw integer encoding (0 < p_m < 1)."""
    cdf = _BINOMIAL_CDF.get((n, p_m)) or _binomial_cdf(n, p_m)
    k = bisect_right(cdf, rng.random())
    if k == 0:
        return value
    if k == 1:
        return value ^ (1 << rng.below(n))
    for i in rng.sample(n, k):
        value ^= 1 << i
    return value


def mutate(x: BitString, p_m: float | None = None, rng: RngStream | None = None) -> BitString:
    """Flip every bit of `x` independently with probability `p_m` (default 1/n).

    The number of flips is drawn from Binomial(n, p_m) and the flipped
    positions uniformly among subsets of that size, which has the same
    distribution as independent per-bit coins.
    """
    n = x.length
    if p_m is None:
        p_m = 1.0 / n
    if not 0.0 <= p_m <= 1.0:
        raise ValueError(f"mutation probability must lie in [0, 1], got {p_m}")
    if p_m == 0.0:
        return x
    if p_m == 1.0:
        return BitString._make(n, x.value ^ ((1 << n) - 1))
    if rng is None:
        raise ValueError("mutation with 0 < p_m < 1 needs an RngStream")
    return BitString._make(n, mutate_value(n, x.value, p_m, rng))


def neighbors(x: BitString, order: str = "fixed", rng: RngStream | None = None) -> list[BitString]:
    """Hamming-1 neighbours of `x`.

    ``order="fixed"`` lists them by ascending flipped-bit index,
    ``order="shuffled"`` in a uniformly random order drawn from `rng`.
    """
    n, v = x.length, x.value
    idx: Sequence[int]
    if order == "fixed":
        idx = range(n)
    elif order == "shuffled":
        if rng is None:
            raise ValueError("shuffled neighbour order needs an RngStream")
        idx = rng.permutation(n)
    else:
        raise ValueError(f"unknown neighbour order {order!r}")
    return [BitString._make(n, v ^ (1 << (n - 1 - i))) for i in idx]
