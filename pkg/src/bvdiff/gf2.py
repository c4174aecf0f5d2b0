"""GF(2) linear algebra on int bitsets.

A vector of width ``w`` is a Python int below ``2**w``; a row of a linear
system is ``(coefficients, rhs)``.  Elimination works a whole row per XOR.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class OpCounter:
    """Tally of elementary row operations, for classical-cost ledgers."""

    def __init__(self):
        self.ops = 0

    def __repr__(self):
        return f"OpCounter(ops={self.ops})"


@dataclass(frozen=True)
class LinearSystemGF2:
    width: int
    rows: tuple[tuple[int, int], ...] = field(default=())

    def __init__(self, width: int, rows: Iterable[tuple[int, int]] = ()):
        rows = tuple((int(w), int(i) & 1) for w, i in rows)
        limit = 1 << width
        for w, _ in rows:
            if not 0 <= w < limit:
                raise ValueError(f"coefficient vector {w:#x} wider than {width} bits")
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "rows", rows)


def _reduce(rows: Iterable[int], counter: OpCounter | None = None) -> list[int]:
    """Reduced row echelon form, pivot = highest set bit, sorted by pivot descending."""
    basis: dict[int, int] = {}
    ops = 0
    for r in rows:
        while r:
            p = r.bit_length() - 1
            if p not in basis:
                break
            r ^= basis[p]
            ops += 1
        if not r:
            continue
        p = r.bit_length() - 1
        # keep the basis fully reduced so the result is canonical
        for q in basis:
            if q < p and (r >> q) & 1:
                r ^= basis[q]
                ops += 1
        for q, b in basis.items():
            if (b >> p) & 1:
                basis[q] = b ^ r
                ops += 1
        basis[p] = r
    if counter is not None:
        counter.ops += ops
    return [basis[p] for p in sorted(basis, reverse=True)]


def rank(vectors: Iterable[int]) -> int:
    return len(_reduce(vectors))


def null_space(rows: Iterable[int], width: int, counter: OpCounter | None = None) -> "Subspace":
    """``{x : x.r = 0 for every r in rows}``."""
    ech = _reduce(rows, counter)
    pivots = {r.bit_length() - 1: r for r in ech}
    basis = []
    for f in range(width):
        if f in pivots:
            continue
        v = 1 << f
        for p, r in pivots.items():
            if (r >> f) & 1:
                v |= 1 << p
        basis.append(v)
    return Subspace(width, basis)


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of ``F_2^width`` kept as a reduced echelon basis."""

    width: int
    basis: tuple[int, ...]

    def __init__(self, width: int, basis: Iterable[int] = ()):
        basis = [int(b) for b in basis]
        if any(not 0 <= b < (1 << width) for b in basis):
            raise ValueError("basis vector wider than the space")
        ech = _reduce(basis)
        if len(ech) != len(basis):
            raise ValueError("basis vectors are linearly dependent")
        object.__setattr__(self, "width", width)
        object.__setattr__(self, "basis", tuple(ech))

    @classmethod
    def full(cls, width: int) -> "Subspace":
        return cls(width, [1 << i for i in range(width)])

    @classmethod
    def zero(cls, width: int) -> "Subspace":
        return cls(width, [])

    @classmethod
    def span(cls, width: int, vectors: Iterable[int]) -> "Subspace":
        """Span of possibly dependent vectors."""
        return cls(width, _reduce(int(v) for v in vectors))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return 1 << self.dim

    def is_trivial(self) -> bool:
        return not self.basis

    def __contains__(self, x: int) -> bool:
        for b in self.basis:
            if (x >> (b.bit_length() - 1)) & 1:
                x ^= b
        return x == 0

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.width == other.width and self.basis == other.basis

    def __hash__(self):
        return hash((self.width, self.basis))

    def __repr__(self):
        rows = ", ".join(f"{b:#x}" for b in self.basis)
        return f"Subspace(width={self.width}, dim={self.dim}, basis=[{rows}])"

    def complement(self) -> "Subspace":
        """Orthogonal complement ``{x : x.b = 0 for all b}``."""
        return null_space(self.basis, self.width)

    def min_nonzero(self) -> int | None:
        """Smallest nonzero member as an integer (``None`` if trivial).

        In reduced echelon form this is the basis vector with the lowest pivot.
        """
        return self.basis[-1] if self.basis else None

    def dump(self) -> list[str]:
        digits = max(1, (self.width + 3) // 4)
        return [format(b, f"0{digits}x") for b in self.basis]


@dataclass(frozen=True, eq=False)
class AffineSolutionSet:
    """``particular + span(basis)``, or the empty set."""

    width: int
    empty: bool
    particular: int
    basis: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def size(self) -> int:
        return 0 if self.empty else 1 << self.dim

    def __contains__(self, x: int) -> bool:
        if self.empty:
            return False
        return (x ^ self.particular) in Subspace(self.width, self.basis)

    def __repr__(self):
        if self.empty:
            return f"AffineSolutionSet(width={self.width}, empty)"
        return (
            f"AffineSolutionSet(width={self.width}, particular={self.particular:#x}, "
            f"dim={self.dim})"
        )


def solve(system: LinearSystemGF2, counter: OpCounter | None = None) -> AffineSolutionSet:
    """Exact solution set of ``{x : x.w = i for every (w, i)}``."""
    width = system.width
    # rhs in bit 0 so that pivots always land on coefficient columns
    ech = _reduce(((w << 1) | i for w, i in system.rows), counter)
    if ech and ech[-1] == 1:
        return AffineSolutionSet(width, True, 0, ())
    particular = 0
    for r in ech:
        if r & 1:
            particular |= 1 << (r.bit_length() - 2)
    null = null_space([r >> 1 for r in ech], width)
    return AffineSolutionSet(width, False, particular, null.basis)


def common_derivative_space(
    H: Sequence[int], width: int, counter: OpCounter | None = None
) -> Subspace:
    """``{x : x.w takes the same value for every w in H}``.

    Equal to ``solve(H, 0) | solve(H, 1)``; the common value for a member
    ``x`` is ``x.H[0]``.
    """
    H = list(H)
    if not H:
        raise ValueError("H must be nonempty")
    w0 = H[0]
    return null_space((w ^ w0 for w in H[1:]), width, counter)


def intersect(spaces: Sequence[Subspace], counter: OpCounter | None = None) -> Subspace:
    if not spaces:
        raise ValueError("need at least one subspace")
    width = spaces[0].width
    if any(s.width != width for s in spaces):
        raise ValueError("width mismatch")
    if len(spaces) == 1:
        return spaces[0]
    rows: list[int] = []
    for s in spaces:
        rows.extend(s.complement().basis)
    return null_space(rows, width, counter)


class EnumerationCapExceeded(ValueError):
    pass


def enumerate_members(sol: AffineSolutionSet | Subspace, cap: int = 1 << 16) -> list[int]:
    """All members in increasing integer order."""
    if isinstance(sol, AffineSolutionSet):
        if sol.empty:
            return []
        offset, basis = sol.particular, sol.basis
    else:
        offset, basis = 0, sol.basis
    if (1 << len(basis)) > cap:
        raise EnumerationCapExceeded(f"2^{len(basis)} members exceed cap {cap}")
    members = [offset]
    for b in basis:
        members += [m ^ b for m in members]
    return sorted(members)
