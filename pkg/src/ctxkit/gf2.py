"""Exact linear algebra over GF(2).

Equations are stored as int bitsets (bit ``j`` = variable ``j``); the right-hand
side of an equation lives in bit ``nvars``.  Elimination is delegated to
:mod:`ctxkit.core`, which picks the compiled or pure-Python kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import core


def bits_of(x: int):
    """Yield the indices of the set bits of ``x`` in ascending order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m ^= 1 << i
    return m


@dataclass(frozen=True)
class Gf2Vector:
    """A vector of GF(2); addition is XOR."""

    length: int
    bits: int = 0

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __len__(self) -> int:
        return self.length

    def __iter__(self):
        return ((self.bits >> i) & 1 for i in range(self.length))

    def __add__(self, other: "Gf2Vector") -> "Gf2Vector":
        if self.length != other.length:
            raise ValueError("length mismatch")
        return Gf2Vector(self.length, self.bits ^ other.bits)

    def support(self) -> list:
        return list(bits_of(self.bits))

    def __repr__(self) -> str:
        return "Gf2Vector(" + "".join(str(b) for b in self) + ")"


@dataclass
class Gf2System:
    """Sparse GF(2) equations plus pinned variables.

    Each row is an int whose bits ``0..nvars-1`` select variables and whose bit
    ``nvars`` is the right-hand side.
    """

    nvars: int
    rows: list = field(default_factory=list)
    pins: dict = field(default_factory=dict)

    @classmethod
    def from_equations(cls, nvars: int, equations: Iterable = (), pins: Mapping | None = None):
        """Build from ``(variables, rhs)`` pairs; repeated variables cancel."""
        system = cls(nvars, [], dict(pins or {}))
        for variables, rhs in equations:
            system.add_equation(variables, rhs)
        return system

    def add_equation(self, variables: Iterable[int], rhs: int = 0) -> None:
        row = mask_of(variables)
        if row >> self.nvars:
            raise IndexError("variable index out of range")
        self.rows.append(row | ((rhs & 1) << self.nvars))

    def pin(self, var: int, value: int) -> None:
        if not 0 <= var < self.nvars:
            raise IndexError(var)
        self.pins[var] = value & 1

    def all_rows(self) -> list:
        pinned = [(1 << v) | (b << self.nvars) for v, b in sorted(self.pins.items())]
        return self.rows + pinned

    def satisfied_by(self, x: Gf2Vector) -> bool:
        full = x.bits & ((1 << self.nvars) - 1)
        for row in self.all_rows():
            lhs = bin(row & full & ((1 << self.nvars) - 1)).count("1") & 1
            if lhs != (row >> self.nvars) & 1:
                return False
        return True


def rref(rows: Iterable[int], ncols: int) -> list:
    """Reduced row echelon form as ``(pivot, row)`` pairs; see :mod:`ctxkit.core`."""
    return core.rref(list(rows), ncols)


def rank(rows: Iterable[int], ncols: int) -> int:
    return len(rref(rows, ncols))


def gf2_solve(system: Gf2System) -> Gf2Vector | None:
    """A solution of ``system`` (free variables set to 0), or None if infeasible."""
    n = system.nvars
    reduced = rref(system.all_rows(), n + 1)
    x = 0
    for col, row in reduced:
        if col == n:
            return None
        if (row >> n) & 1:
            x |= 1 << col
    solution = Gf2Vector(n, x)
    assert system.satisfied_by(solution), "elimination produced a non-solution"
    return solution


def nullspace(rows: Iterable[int], nvars: int) -> list:
    """Basis of the solutions of the homogeneous system, as bitsets.

    One basis vector per free column, in ascending column order.
    """
    reduced = rref(rows, nvars)
    pivots = [c for c, _ in reduced]
    pivmask = mask_of(pivots)
    free_to_pivots: dict = {}
    for col, row in reduced:
        for f in bits_of(row & ~pivmask):
            free_to_pivots[f] = free_to_pivots.get(f, 0) | (1 << col)
    basis = []
    for f in range(nvars):
        if not (pivmask >> f) & 1:
            basis.append((1 << f) | free_to_pivots.get(f, 0))
    return basis


def dependencies(vectors: list) -> list:
    """Basis of the linear relations among ``vectors``.

    Each relation is a bitset over vector positions whose selected vectors sum
    to zero.
    """
    k = len(vectors)
    shift = max((v.bit_length() for v in vectors), default=0)
    tagged = [(v) | (1 << (shift + i)) for i, v in enumerate(vectors)]
    out = []
    for _, row in rref(tagged, shift + k):
        if row & ((1 << shift) - 1) == 0:
            out.append(row >> shift)
    return out


__all__ = [
    "Gf2System",
    "Gf2Vector",
    "bits_of",
    "dependencies",
    "gf2_solve",
    "mask_of",
    "nullspace",
    "rank",
    "rref",
]
