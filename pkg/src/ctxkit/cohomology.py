"""Degree-0 Čech coboundary over GF(2) and the cohomological obstruction.

The obstruction at a section ``s0`` of ``C0`` vanishes exactly when the GF(2)
system ``δ⁰x = 0`` with ``x[C0, s0] = 1`` and ``x[C0, t] = 0`` for every other
section ``t`` of ``C0`` is feasible.  The obstruction class itself is never
built; feasibility is all the analyses consume.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DisconnectedCover
from .gf2 import Gf2System, Gf2Vector, bits_of, dependencies, gf2_solve, mask_of, rank, rref
from .model import EmpiricalModel, ModelTable, Verdict
from .scenario import render, restrict_section


class CochainIndex:
    """Basis positions of the 0- and 1-cochains of a model.

    Degree 0: ``(context, section)`` pairs in canonical order.  Degree 1:
    ``(edge, intersection section)`` pairs, one per class actually realised.
    """

    def __init__(self, model: EmpiricalModel):
        self.model = model
        self.degree0 = [(c, s) for c, s in model.sections()]
        self._pos0 = {cs: i for i, cs in enumerate(self.degree0)}
        sc = model.scenario
        self.degree1 = []
        for (i, j), (_, _, ncls) in zip(sc.graph.edges, model.table.classes):
            c, d = sc.contexts[i], sc.contexts[j]
            common = c & d
            reps = sorted({restrict_section(s, common) for s in model.support[c]} | {restrict_section(t, common) for t in model.support[d]})
            assert len(reps) == ncls
            self.degree1.extend((frozenset((c, d)), r) for r in reps)

    def position(self, context, section) -> int:
        return self._pos0[(context, section)]

    def label(self, pos: int) -> tuple:
        return self.degree0[pos]

    def __len__(self) -> int:
        return len(self.degree0)


def table_delta0(table: ModelTable) -> tuple:
    """Rows of δ⁰ for an integer table, with ``(edge, class)`` labels."""
    rows, labels = [], []
    offs = table.offsets
    for e, ((c, d), (cc, cd, ncls)) in enumerate(zip(table.edges, table.classes)):
        acc = [0] * ncls
        oc, od = offs[c], offs[d]
        for p, r in enumerate(cc):
            acc[r] |= 1 << (oc + p)
        for q, r in enumerate(cd):
            acc[r] |= 1 << (od + q)
        for r, row in enumerate(acc):
            if row:
                rows.append(row)
                labels.append((e, r))
    return rows, labels


@dataclass(frozen=True)
class Delta0:
    """The coboundary as sparse GF(2) rows over ``index`` columns."""

    rows: tuple
    labels: tuple
    index: CochainIndex

    @property
    def ncols(self) -> int:
        return len(self.index)

    def apply(self, x: Gf2Vector) -> Gf2Vector:
        out = 0
        for k, row in enumerate(self.rows):
            if bin(row & x.bits).count("1") & 1:
                out |= 1 << k
        return Gf2Vector(len(self.rows), out)

    def equations(self) -> list:
        """Each row as a list of ``(context, section)`` labels summing to zero."""
        return [[self.index.label(j) for j in bits_of(row)] for row in self.rows]


def _require_connected(table: ModelTable) -> None:
    n = table.ncontexts
    adj = [[] for _ in range(n)]
    for c, d in table.edges:
        adj[c].append(d)
        adj[d].append(c)
    seen, stack = {0}, [0]
    while stack:
        for w in adj[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != n:
        raise DisconnectedCover("the cover is not connected; analyse each component separately")


def delta0(model: EmpiricalModel) -> Delta0:
    _require_connected(model.table)
    rows, labels = table_delta0(model.table)
    index = CochainIndex(model)
    # CochainIndex lists classes edge by edge, in class order
    starts, base = [], 0
    for _, _, ncls in model.table.classes:
        starts.append(base)
        base += ncls
    named = tuple(index.degree1[starts[e] + r] for e, r in labels)
    return Delta0(tuple(rows), named, index)


def pinned_system(table: ModelTable, c0: int, p0: int) -> Gf2System:
    rows, _ = table_delta0(table)
    system = Gf2System(table.nsections, list(rows))
    off = table.offsets[c0]
    for p in range(table.sizes[c0]):
        system.pin(off + p, 1 if p == p0 else 0)
    return system


def table_vanishes(table: ModelTable, c0: int, p0: int) -> Gf2Vector | None:
    """A certificate 0-cochain if the obstruction at ``(c0, p0)`` vanishes, else None."""
    return gf2_solve(pinned_system(table, c0, p0))


class Obstructions:
    """Obstruction status of every section of a table from one factorisation.

    With ``R`` the reduced echelon form of δ⁰, each column is an affine
    function of the free columns.  Pinning the columns of a context to a unit
    vector is feasible iff no linear relation among those column functions
    involves the pinned-to-one column.
    """

    def __init__(self, table: ModelTable):
        self.table = table
        _require_connected(table)
        rows, _ = table_delta0(table)
        n = table.nsections
        self.reduced = rref(rows, n)
        self.pivot_rows = {c: r for c, r in self.reduced}

    def column_function(self, col: int) -> int:
        row = self.pivot_rows.get(col)
        if row is None:
            return 1 << col
        return row ^ (1 << col)

    def vanishing(self, c: int) -> int:
        """Bitmask of sections of context ``c`` whose obstruction vanishes."""
        off, n = self.table.offsets[c], self.table.sizes[c]
        funcs = [self.column_function(off + p) for p in range(n)]
        involved = 0
        for dep in dependencies(funcs):
            involved |= dep
        return ((1 << n) - 1) & ~involved

    def all_vanishing(self) -> list:
        return [self.vanishing(c) for c in range(self.table.ncontexts)]


def obstructions(table: ModelTable) -> list:
    """Cached per-context bitmasks of vanishing obstructions."""
    return table.memo("vanishing", lambda: Obstructions(table).all_vanishing())


def obstruction_vanishes(model: EmpiricalModel, C0, s0) -> bool:
    """Whether ``s0`` at ``C0`` extends to a compatible family of the free GF(2) presheaf."""
    c, p = model.locate(C0, s0)
    _require_connected(model.table)
    return table_vanishes(model.table, c, p) is not None


def is_clc_at(model: EmpiricalModel, C0, s0) -> Verdict:
    c, p = model.locate(C0, s0)
    _require_connected(model.table)
    cert = table_vanishes(model.table, c, p)
    return Verdict("CLC_at", cert is None, cert, 0, model.section(c, p))


def is_csc(model: EmpiricalModel) -> Verdict:
    table = model.table
    vanish = obstructions(table)
    for c, mask in enumerate(vanish):
        if mask:
            p = next(bits_of(mask))
            cert = table_vanishes(table, c, p)
            return Verdict("CSC", False, cert, 0, model.section(c, p))
    return Verdict("CSC", True, None, 0)


def vanishing_sections(model: EmpiricalModel) -> list:
    """``(context, section)`` pairs whose obstruction vanishes (the non-CLC sections)."""
    vanish = obstructions(model.table)
    return [
        (ctx, model.support[ctx][p])
        for c, ctx in enumerate(model.contexts)
        for p in bits_of(vanish[c])
    ]


def h0_dimension(model: EmpiricalModel) -> int:
    """Dimension of ker δ⁰ over GF(2)."""
    _require_connected(model.table)
    rows, _ = table_delta0(model.table)
    return model.table.nsections - rank(rows, model.table.nsections)


def family_cochain(model: EmpiricalModel, family) -> Gf2Vector:
    """Indicator 0-cochain of a compatible family."""
    cols = [model.table.column(*model.locate(c, s)) for c, s in family.choice.items()]
    return Gf2Vector(model.table.nsections, mask_of(cols))


def describe_certificate(model: EmpiricalModel, cert: Gf2Vector) -> list:
    """Rendered ``context: section`` lines for the support of a certificate."""
    out = []
    for col in cert.support():
        c, p = model.table.locate(col)
        out.append(f"{render(model.contexts[c])}: {model.section(c, p).render()}")
    return out


__all__ = [
    "CochainIndex",
    "Delta0",
    "Obstructions",
    "delta0",
    "describe_certificate",
    "family_cochain",
    "h0_dimension",
    "is_clc_at",
    "is_csc",
    "obstruction_vanishes",
    "obstructions",
    "table_delta0",
    "table_vanishes",
    "vanishing_sections",
]
