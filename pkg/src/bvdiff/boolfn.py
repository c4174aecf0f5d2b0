"""Truth-table Boolean functions, Walsh spectra and linear structures.

Bit convention used throughout the package: an input ``x`` is an integer
whose bit ``i`` (LSB = bit 0) is the coordinate ``x_{i+1}``.  Bit strings
written as ``"110"`` list the coordinates ``x_1 x_2 x_3`` left to right, so
``"110"`` is the integer ``0b011 == 3``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

DEFAULT_BRUTE_CAP = 16


class ArityCapExceeded(ValueError):
    """Raised when a brute-force routine is asked for too large an arity."""


def from_bitstring(s: str) -> int:
    """Parse ``"x_1 x_2 ... x_l"`` (left to right) into an integer."""
    s = s.replace(" ", "").replace("_", "")
    if any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    return sum(1 << i for i, c in enumerate(s) if c == "1")


def to_bitstring(x: int, width: int) -> str:
    """Inverse of :func:`from_bitstring`."""
    return "".join("1" if (x >> i) & 1 else "0" for i in range(width))


def dot(a: int, b: int) -> int:
    """Inner product over GF(2) of two bit vectors."""
    return (a & b).bit_count() & 1


def _parity(values: np.ndarray) -> np.ndarray:
    v = values.astype(np.uint64, copy=True)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> np.uint64(shift)
    return (v & np.uint64(1)).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    """``f: F_2^arity -> F_2`` stored as a 0/1 truth table indexed by ``x``."""

    arity: int
    table: np.ndarray

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        table = np.asarray(self.table, dtype=np.uint8)
        if table.shape != (1 << self.arity,):
            raise ValueError(
                f"table must have length 2^{self.arity}={1 << self.arity}, got {table.shape}"
            )
        if table.size and table.max() > 1:
            raise ValueError("truth table entries must be 0 or 1")
        table = table.copy()
        table.flags.writeable = False
        object.__setattr__(self, "table", table)

    def __call__(self, x: int) -> int:
        return eval_bool(self, x)

    def __eq__(self, other):
        if not isinstance(other, BooleanFunction):
            return NotImplemented
        return self.arity == other.arity and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash((self.arity, self.table.tobytes()))

    def __repr__(self):
        return f"BooleanFunction(arity={self.arity}, table_hex={to_hex(self)!r})"

    # constructors -------------------------------------------------------

    @classmethod
    def from_callable(cls, arity: int, fn) -> "BooleanFunction":
        return cls(arity, np.array([fn(x) & 1 for x in range(1 << arity)], dtype=np.uint8))

    @classmethod
    def constant(cls, arity: int, value: int) -> "BooleanFunction":
        return cls(arity, np.full(1 << arity, value & 1, dtype=np.uint8))

    @classmethod
    def linear(cls, arity: int, a: int) -> "BooleanFunction":
        """``x -> a.x``."""
        xs = np.arange(1 << arity, dtype=np.uint64)
        return cls(arity, _parity(xs & np.uint64(a)))

    @classmethod
    def random(cls, arity: int, rng: np.random.Generator) -> "BooleanFunction":
        return cls(arity, rng.integers(0, 2, size=1 << arity, dtype=np.uint8))


@dataclass(frozen=True, eq=False)
class VectorBooleanFunction:
    """``F: F_2^arity -> F_2^out_width``; ``values[x]`` packs ``(F_1(x), ..., F_n(x))``.

    Component ``j`` (1-based, as in ``F_j``) is bit ``j-1`` of each value.
    """

    arity: int
    out_width: int
    values: np.ndarray

    def __post_init__(self):
        if self.arity < 1 or self.out_width < 1:
            raise ValueError("arity and out_width must be >= 1")
        values = np.asarray(self.values, dtype=np.uint64)
        if values.shape != (1 << self.arity,):
            raise ValueError("values must have length 2^arity")
        if values.size and int(values.max()) >> self.out_width:
            raise ValueError("values wider than out_width")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __call__(self, x: int) -> int:
        if not 0 <= x < (1 << self.arity):
            raise IndexError(f"input {x} out of range for arity {self.arity}")
        return int(self.values[x])

    def component(self, j: int) -> BooleanFunction:
        """The 1-based coordinate function ``F_j``."""
        if not 1 <= j <= self.out_width:
            raise IndexError(f"component {j} out of range 1..{self.out_width}")
        bits = (self.values >> np.uint64(j - 1)) & np.uint64(1)
        return BooleanFunction(self.arity, bits.astype(np.uint8))

    @property
    def components(self) -> list[BooleanFunction]:
        return [self.component(j) for j in range(1, self.out_width + 1)]

    @classmethod
    def from_components(cls, comps: Sequence[BooleanFunction]) -> "VectorBooleanFunction":
        if not comps:
            raise ValueError("need at least one component")
        arity = comps[0].arity
        if any(c.arity != arity for c in comps):
            raise ValueError("all components must share one arity")
        values = np.zeros(1 << arity, dtype=np.uint64)
        for j, c in enumerate(comps):
            values |= c.table.astype(np.uint64) << np.uint64(j)
        return cls(arity, len(comps), values)


@dataclass(frozen=True, eq=False)
class WalshSpectrum:
    """``raw[w] = 2^arity * S_f(w) = sum_x (-1)^(f(x) + w.x)``, exact integers."""

    arity: int
    raw: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.raw)

    def value(self, w: int) -> Fraction:
        """``S_f(w)`` as an exact rational."""
        return Fraction(int(self.raw[w]), 1 << self.arity)

    def parseval_sum(self) -> int:
        r = self.raw.astype(object) if self.arity > 28 else self.raw
        return int(np.sum(r * r))


@dataclass(frozen=True)
class LinearStructureSets:
    """``U0`` / ``U1``: vectors whose derivative is constantly 0 / 1."""

    arity: int
    U0: tuple[int, ...]
    U1: tuple[int, ...]

    @property
    def all(self) -> tuple[int, ...]:
        return tuple(sorted(self.U0 + self.U1))

    def __contains__(self, a: int) -> bool:
        return a in self.U0 or a in self.U1


def eval_bool(f: BooleanFunction, x: int) -> int:
    if not 0 <= x < (1 << f.arity):
        raise IndexError(f"input {x} out of range for arity {f.arity}")
    return int(f.table[x])


def fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalised fast Walsh-Hadamard transform of an int64 vector (copy)."""
    a = np.array(values, dtype=np.int64, copy=True)
    n = a.size
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        lo = a[:, 0, :].copy()
        a[:, 0, :] += a[:, 1, :]
        a[:, 1, :] = lo - a[:, 1, :]
        a = a.reshape(n)
        h *= 2
    return a


def walsh_spectrum(f: BooleanFunction) -> WalshSpectrum:
    signs = 1 - 2 * f.table.astype(np.int64)
    raw = fwht(signs)
    raw.flags.writeable = False
    return WalshSpectrum(f.arity, raw)


def autocorrelation(f: BooleanFunction) -> np.ndarray:
    """``ac[a] = sum_x (-1)^(f(x) + f(x+a))``, via the Wiener-Khinchin identity.

    Exact: the inverse transform of ``raw^2`` is divisible by ``2^arity``.
    """
    raw = walsh_spectrum(f).raw
    ac = fwht(raw * raw)
    return ac >> f.arity


def _check_cap(f: BooleanFunction, cap: int | None):
    cap = DEFAULT_BRUTE_CAP if cap is None else cap
    if f.arity > cap:
        raise ArityCapExceeded(f"arity {f.arity} exceeds brute-force cap {cap}")


def derivative_histogram(f: BooleanFunction, a: int) -> tuple[int, int]:
    """``(#x: f(x+a)+f(x)=0, #x: f(x+a)+f(x)=1)``."""
    size = 1 << f.arity
    if not 0 <= a < size:
        raise IndexError(f"direction {a} out of range for arity {f.arity}")
    xs = np.arange(size, dtype=np.int64)
    ones = int(np.count_nonzero(f.table[xs ^ a] ^ f.table))
    return size - ones, ones


def linear_structures_exact(f: BooleanFunction, cap: int | None = None) -> LinearStructureSets:
    """Brute force over every pair ``(a, x)``."""
    _check_cap(f, cap)
    size = 1 << f.arity
    xs = np.arange(size, dtype=np.int64)
    t = f.table
    u0, u1 = [], []
    for a in range(size):
        d = t[xs ^ a] ^ t
        if not d.any():
            u0.append(a)
        elif d.all():
            u1.append(a)
    return LinearStructureSets(f.arity, tuple(u0), tuple(u1))


def derivative_counts(f: BooleanFunction, cap: int | None = None) -> np.ndarray:
    """Count of ``x`` with ``f(x+a)+f(x)=0`` for every ``a`` (shape ``2^arity``)."""
    _check_cap(f, cap)
    size = 1 << f.arity
    return (size + autocorrelation(f)) // 2


def delta_prime(f: BooleanFunction, cap: int | None = None) -> Fraction:
    """Largest fraction of inputs on which a non-structure's derivative is constant.

    Defined as 0 when every vector is a linear structure (empty maximum).
    """
    size = 1 << f.arity
    c0 = derivative_counts(f, cap)
    c1 = size - c0
    nonstruct = (c0 != size) & (c1 != size)
    if not nonstruct.any():
        return Fraction(0)
    best = int(np.maximum(c0, c1)[nonstruct].max())
    return Fraction(best, size)


# serialisation ---------------------------------------------------------


def to_hex(f: BooleanFunction) -> str:
    """Packed truth table; entry ``x`` is bit ``x % 8`` of byte ``x // 8``."""
    return np.packbits(f.table, bitorder="little").tobytes().hex()


def from_hex(arity: int, table_hex: str) -> BooleanFunction:
    raw = np.frombuffer(bytes.fromhex(table_hex), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")
    size = 1 << arity
    if bits.size < size or bits.size - size >= 8:
        raise ValueError(f"hex table of {raw.size} bytes does not fit arity {arity}")
    if bits[size:].any():
        raise ValueError("padding bits beyond 2^arity must be zero")
    return BooleanFunction(arity, bits[:size])


def to_json(f: BooleanFunction) -> str:
    return json.dumps({"arity": f.arity, "table_hex": to_hex(f)})


def from_json(text: str | dict) -> BooleanFunction:
    obj = json.loads(text) if isinstance(text, str) else text
    return from_hex(int(obj["arity"]), obj["table_hex"])


def walsh_support_structures(f: BooleanFunction, support: Iterable[int] | None = None) -> LinearStructureSets:
    """Linear structures recovered from the Walsh support alone.

    ``U^i = {a : w.a = i for every w in N_f}``, solved as a GF(2) system.
    """
    from . import gf2

    if support is None:
        support = walsh_spectrum(f).support
    rows = [int(w) for w in support]
    sets = []
    for i in (0, 1):
        sol = gf2.solve(gf2.LinearSystemGF2(f.arity, [(w, i) for w in rows]))
        sets.append(tuple(gf2.enumerate_members(sol, cap=1 << f.arity)))
    return LinearStructureSets(f.arity, sets[0], sets[1])
