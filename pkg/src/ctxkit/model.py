"""Possibilistic empirical models and the exhaustive LC/SC oracle.

A model stores its support only at the contexts.  Everything the analyses need
is compiled once into a :class:`ModelTable`: per-context section counts, the
edges of the cover graph and, for each edge, which intersection section every
context section restricts to.  Joint models (:mod:`ctxkit.joint`) produce
tables of the same shape without materialising nested sections.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping

from . import core
from .errors import (
    EmptyContextSupport,
    FlasquenessViolation,
    NotBeneathCover,
    NotSubcover,
    SectionOutsideEvents,
    UnknownMeasurement,
    UnknownSection,
)
from .scenario import (
    MeasurementScenario,
    Section,
    _coerce,
    build_scenario,
    render,
    require_connected,
    restrict_section,
    sort_key,
)


# integer tables ---------------------------------------------------------

@dataclass(eq=False)
class ModelTable:
    """Integer form of a model.

    ``classes[e]`` is ``(cls_c, cls_d, nclass)`` for edge ``e = (c, d)``:
    ``cls_c[p]`` is the intersection class of section ``p`` of ``c``.  Two
    sections agree on the intersection iff their classes are equal.
    """

    sizes: tuple
    edges: tuple
    classes: tuple
    _memo: dict = field(default_factory=dict, repr=False)
    _lock: Any = field(default_factory=threading.Lock, repr=False)

    @property
    def ncontexts(self) -> int:
        return len(self.sizes)

    @cached_property
    def offsets(self) -> tuple:
        out, acc = [], 0
        for n in self.sizes:
            out.append(acc)
            acc += n
        return tuple(out)

    @property
    def nsections(self) -> int:
        return sum(self.sizes)

    def column(self, c: int, p: int) -> int:
        return self.offsets[c] + p

    def locate(self, col: int) -> tuple:
        """Inverse of :meth:`column`."""
        lo, hi = 0, len(self.sizes) - 1
        offs = self.offsets
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if offs[mid] <= col:
                lo = mid
            else:
                hi = mid - 1
        return lo, col - offs[lo]

    @cached_property
    def links(self) -> tuple:
        """For each context, ``(d, masks)`` with ``masks[p]`` = compatible sections of ``d``."""
        links = [[] for _ in self.sizes]
        for (c, d), (cc, cd, ncls) in zip(self.edges, self.classes):
            by_cls = [0] * ncls
            for q, r in enumerate(cd):
                by_cls[r] |= 1 << q
            links[c].append((d, [by_cls[r] for r in cc]))
            by_cls = [0] * ncls
            for p, r in enumerate(cc):
                by_cls[r] |= 1 << p
            links[d].append((c, [by_cls[r] for r in cd]))
        return tuple(links)

    def memo(self, key, compute):
        """Per-table memoisation, safe under concurrent callers."""
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        value = compute()
        with self._lock:
            return self._memo.setdefault(key, value)

    # oracle ------------------------------------------------------------

    def search_order(self, first: int | None = None) -> list:
        rest = sorted((c for c in range(self.ncontexts) if c != first), key=lambda c: (self.sizes[c], c))
        return ([first] if first is not None else []) + rest

    def families(self, c0: int | None = None, p0: int | None = None):
        """Generate compatible families as lists of section indices."""
        allowed = [(1 << n) - 1 for n in self.sizes]
        if c0 is not None:
            allowed[c0] = 1 << p0
        return core.search_family(self.search_order(c0), allowed, self.links)

    def extend(self, c0: int, p0: int) -> list | None:
        return next(self.families(c0, p0), None)

    def any_family(self) -> list | None:
        return next(self.families(), None)

    def extendable(self) -> list:
        """Bitmask per context of the sections lying in some compatible family."""

        def compute():
            ext = [0] * self.ncontexts
            dead = [0] * self.ncontexts
            for c in range(self.ncontexts):
                for p in range(self.sizes[c]):
                    if (ext[c] | dead[c]) >> p & 1:
                        continue
                    fam = self.extend(c, p)
                    if fam is None:
                        dead[c] |= 1 << p
                    else:
                        for d, q in enumerate(fam):
                            ext[d] |= 1 << q
            return ext

        return self.memo("extendable", compute)


# models -----------------------------------------------------------------

class CompatibleFamily:
    """One section per context, pairwise agreeing on intersections."""

    def __init__(self, choice: Mapping):
        self.choice = dict(choice)

    def __getitem__(self, context):
        return self.choice[context]

    def __iter__(self):
        return iter(self.choice)

    def __len__(self) -> int:
        return len(self.choice)

    def __eq__(self, other) -> bool:
        return isinstance(other, CompatibleFamily) and self.choice == other.choice

    def __hash__(self) -> int:
        return hash(frozenset(self.choice.items()))

    def check(self) -> bool:
        """Direct pairwise-agreement check."""
        items = list(self.choice.items())
        for i, (c, s) in enumerate(items):
            for d, t in items[i + 1:]:
                common = c & d
                if common and restrict_section(s, common) != restrict_section(t, common):
                    return False
        return True

    def global_section(self) -> Section:
        merged = {}
        for s in self.choice.values():
            merged.update(s.items)
        return Section(merged)

    def __repr__(self) -> str:
        body = ", ".join(f"{render(c)}: {s.render()}" for c, s in sorted(self.choice.items(), key=lambda kv: sort_key(kv[0])))
        return f"CompatibleFamily({body})"


@dataclass(frozen=True)
class Verdict:
    """Answer to a contextuality query.

    ``witness`` is a :class:`CompatibleFamily` refuting LC/SC, a
    :class:`~ctxkit.gf2.Gf2Vector` certificate refuting CLC/CSC, or None.
    """

    property: str
    holds: bool
    witness: Any = None
    level: int | None = None
    section: Any = None

    def __bool__(self) -> bool:
        return self.holds


class EmpiricalModel:
    """A validated possibilistic empirical model.  Use :func:`build_model`."""

    def __init__(self, scenario: MeasurementScenario, support: Mapping):
        self.scenario = scenario
        self.support = {c: tuple(support[c]) for c in scenario.contexts}
        self._index = {c: {s: i for i, s in enumerate(self.support[c])} for c in scenario.contexts}
        self._memo: dict = {}
        self._lock = threading.Lock()

    @property
    def contexts(self) -> tuple:
        return self.scenario.contexts

    def context(self, ctx) -> frozenset:
        c = ctx if isinstance(ctx, frozenset) else frozenset(_coerce(m) for m in ctx)
        if c not in self.support:
            raise UnknownSection(f"{render(c)} is not a context of the model")
        return c

    def locate(self, ctx, section) -> tuple:
        """Integer coordinates ``(context index, section index)`` of a context section."""
        c = self.context(ctx)
        s = section if isinstance(section, Section) else Section.of(self.scenario.ordered_contexts[self.scenario.context_index[c]], section)
        try:
            return self.scenario.context_index[c], self._index[c][s]
        except KeyError:
            raise UnknownSection(f"{s.render()} is not a possible section at {render(c)}") from None

    def find(self, section: Section) -> tuple:
        """Coordinates of a section given only by its value; its domain names the context."""
        return self.locate(section.domain, section)

    def section(self, c: int, p: int) -> Section:
        return self.support[self.scenario.contexts[c]][p]

    def sections(self):
        """All ``(context, section)`` pairs in canonical order."""
        for c in self.scenario.contexts:
            for s in self.support[c]:
                yield c, s

    @cached_property
    def table(self) -> ModelTable:
        sc = self.scenario
        classes = []
        for i, j in sc.graph.edges:
            ci, cj = sc.contexts[i], sc.contexts[j]
            common = ci & cj
            ri = [restrict_section(s, common) for s in self.support[ci]]
            rj = [restrict_section(t, common) for t in self.support[cj]]
            ids = {r: n for n, r in enumerate(sorted(set(ri) | set(rj)))}
            classes.append((tuple(ids[r] for r in ri), tuple(ids[r] for r in rj), len(ids)))
        sizes = tuple(len(self.support[c]) for c in sc.contexts)
        return ModelTable(sizes, tuple(sc.graph.edges), tuple(classes))

    def family_from_indices(self, idx: list) -> CompatibleFamily:
        return CompatibleFamily({c: self.support[c][p] for c, p in zip(self.scenario.contexts, idx)})

    def memo(self, key, compute):
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        value = compute()
        with self._lock:
            return self._memo.setdefault(key, value)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmpiricalModel):
            return NotImplemented
        return self.scenario == other.scenario and self.support == other.support

    __hash__ = object.__hash__

    def __repr__(self) -> str:
        n = sum(len(v) for v in self.support.values())
        return f"EmpiricalModel({len(self.contexts)} contexts, {n} possible sections)"


def _as_section(scenario: MeasurementScenario, ctx: frozenset, raw) -> Section:
    if isinstance(raw, Section):
        return raw
    if isinstance(raw, Mapping):
        return Section(raw)
    order = scenario.ordered_contexts[scenario.context_index[ctx]]
    values = tuple(raw)
    if len(values) != len(order):
        raise SectionOutsideEvents(f"section {values!r} has {len(values)} values, context {render(ctx)} needs {len(order)}")
    return Section.of(order, values)


def build_model(scenario: MeasurementScenario, support: Mapping) -> EmpiricalModel:
    """Validate a support table against conditions 1 and 2.

    ``support`` maps contexts (any iterable of measurements) to possible
    sections, each a :class:`Section`, a mapping, or a tuple of outcomes in the
    canonical measurement order of the context.
    """
    table = {}
    for key, sections in support.items():
        ctx = frozenset(_coerce(m) for m in key) if not isinstance(key, frozenset) else key
        if ctx not in scenario.context_index:
            raise NotSubcover(f"{render(ctx)} is not a context of the scenario")
        out = set()
        for raw in sections:
            s = _as_section(scenario, ctx, raw)
            if s.domain != ctx:
                raise SectionOutsideEvents(f"section {s.render()} does not have domain {render(ctx)}")
            for m, v in s.items:
                if v not in scenario.outcomes[m]:
                    raise SectionOutsideEvents(f"section {s.render()}: {render(v)} is not an outcome of {render(m)}")
            out.add(s)
        table[ctx] = tuple(sorted(out))
    for c in scenario.contexts:
        if not table.get(c):
            err = EmptyContextSupport(f"context {render(c)} has no possible section")
            err.context = c
            raise err
    for i, j in scenario.graph.edges:
        c, d = scenario.contexts[i], scenario.contexts[j]
        common = c & d
        img_c = {restrict_section(s, common) for s in table[c]}
        img_d = {restrict_section(t, common) for t in table[d]}
        for (a, b, img_b) in ((c, d, img_d), (d, c, img_c)):
            for s in table[a]:
                if restrict_section(s, common) not in img_b:
                    raise FlasquenessViolation(
                        f"section {s.render()} at {render(a)} has no partner at {render(b)}",
                        context=a,
                        section=s,
                        other=b,
                    )
    return EmpiricalModel(scenario, table)


def full_model(scenario: MeasurementScenario) -> EmpiricalModel:
    """The model in which every event is possible."""
    from .scenario import event_sections

    return build_model(scenario, {c: event_sections(scenario, c) for c in scenario.contexts})


def sections_at(model: EmpiricalModel, U: Iterable) -> set:
    """S(U) for ``U`` beneath the cover, or the global sections for ``U = X``."""
    U = frozenset(_coerce(m) for m in U)
    unknown = U - frozenset(model.scenario.measurements)
    if unknown:
        raise UnknownMeasurement(f"unknown measurements {render(unknown)}")

    def compute():
        containing = [c for c in model.contexts if U <= c]
        if containing:
            return frozenset(restrict_section(s, U) for c in containing for s in model.support[c])
        if U == frozenset(model.scenario.measurements):
            return frozenset(model.family_from_indices(f).global_section() for f in model.table.families())
        raise NotBeneathCover(f"{render(U)} is neither contained in a context nor the whole measurement set")

    return set(model.memo(("sections_at", U), compute))


def extend_to_global(model: EmpiricalModel, C0, s0) -> CompatibleFamily | None:
    """A compatible family through ``s0`` at ``C0``, or None if there is none."""
    c, p = model.locate(C0, s0)
    idx = model.table.extend(c, p)
    if idx is None:
        return None
    fam = model.family_from_indices(idx)
    assert fam.check()
    return fam


def is_lc_at(model: EmpiricalModel, C0, s0) -> Verdict:
    fam = extend_to_global(model, C0, s0)
    c, p = model.locate(C0, s0)
    return Verdict("LC_at", fam is None, fam, 0, model.section(c, p))


def is_sc(model: EmpiricalModel) -> Verdict:
    # one compatible family through any section refutes SC
    idx = model.table.any_family()
    fam = None if idx is None else model.family_from_indices(idx)
    return Verdict("SC", fam is None, fam, 0)


def lc_sections(model: EmpiricalModel) -> list:
    """All logically contextual ``(context, section)`` pairs."""
    ext = model.table.extendable()
    return [
        (c, s)
        for ci, c in enumerate(model.contexts)
        for p, s in enumerate(model.support[c])
        if not ext[ci] >> p & 1
    ]


def restrict_model(model: EmpiricalModel, subcover: Iterable) -> EmpiricalModel:
    """The model on a connected subcover, with support inherited."""
    sub = []
    for ctx in subcover:
        c = frozenset(_coerce(m) for m in ctx)
        if c not in model.support:
            raise NotSubcover(f"{render(c)} is not a context of the model")
        sub.append(c)
    if not sub:
        raise NotSubcover("empty subcover")
    require_connected(sub)
    X = frozenset().union(*sub)
    outcomes = {m: model.scenario.outcomes[m] for m in X}
    scenario = build_scenario(X, outcomes, sub)
    return EmpiricalModel(scenario, {c: model.support[c] for c in scenario.contexts})


__all__ = [
    "CompatibleFamily",
    "EmpiricalModel",
    "ModelTable",
    "Verdict",
    "build_model",
    "extend_to_global",
    "full_model",
    "is_lc_at",
    "is_sc",
    "lc_sections",
    "restrict_model",
    "sections_at",
]
