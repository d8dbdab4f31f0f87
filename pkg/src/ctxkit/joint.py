"""The tower of joint scenarios and joint models.

Level ``k`` has the contexts of level ``k-1`` as measurements and the
intersecting pairs of them as contexts.  A possible section at a pair is a pair
of possible sections agreeing on the intersection (the pullback).

Levels are built on integer tables: a level-``k`` section is stored as two
indices into the supports of its parent contexts.  Nested :class:`Section`
values, the level's :class:`MeasurementScenario` and :class:`EmpiricalModel`
are only materialised on request.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from functools import cached_property

from .cohomology import obstructions
from .errors import AcyclicScenario, ResourceLimit, UnknownSection, ValidationFailure
from .gf2 import bits_of
from .model import EmpiricalModel, ModelTable, Verdict, build_model
from .scenario import EventSpace, MeasurementScenario, Section, build_scenario, graham_reduce, render, require_connected

DEFAULT_BUDGET = 10**6


def budget() -> int:
    """Maximum number of possible sections per level (``CTXKIT_BUDGET`` overrides)."""
    raw = os.environ.get("CTXKIT_BUDGET")
    return int(raw) if raw else DEFAULT_BUDGET


def _check_analysable(scenario: MeasurementScenario) -> None:
    require_connected(scenario)
    if graham_reduce(scenario)[0]:
        raise AcyclicScenario("the cover is Graham-acyclic; every model on it is non-contextual")


def joint_scenario(scenario: MeasurementScenario) -> MeasurementScenario:
    """The first joint scenario: contexts become measurements with outcomes E(C)."""
    _check_analysable(scenario)
    return _joint_scenario(scenario)


def _joint_scenario(scenario: MeasurementScenario) -> MeasurementScenario:
    X = scenario.contexts
    outcomes = {c: EventSpace(scenario, c) for c in X}
    if len(X) == 1:
        return build_scenario(X, outcomes, [X])
    cover = [frozenset((X[i], X[j])) for i, j in scenario.graph.edges]
    return build_scenario(X, outcomes, cover)


class JointLevel:
    """Level ``k`` of the tower of a model.

    ``members[a] = (i, j)`` names the two parent contexts of context ``a`` and
    ``pairs[a]`` lists its sections as ``(p, q)`` parent-section indices, both
    in canonical order.  Level 0 wraps the input model (``parent`` is None).
    """

    def __init__(self, level: int, table: ModelTable, parent: "JointLevel | None" = None,
                 members: tuple | None = None, pairs: tuple | None = None, base: EmpiricalModel | None = None):
        self.level = level
        self.table = table
        self.parent = parent
        self.members = members
        self.pairs = pairs
        self.base = base if base is not None else parent.base
        self._lock = threading.Lock()
        self._child = None

    @classmethod
    def wrap(cls, model: EmpiricalModel) -> "JointLevel":
        return cls(0, model.table, base=model)

    @property
    def ncontexts(self) -> int:
        return self.table.ncontexts

    @property
    def nsections(self) -> int:
        return self.table.nsections

    @cached_property
    def contexts(self) -> tuple:
        """Context labels: level-0 contexts, then nested frozensets of pairs."""
        if self.parent is None:
            return self.base.contexts
        up = self.parent.contexts
        return tuple(frozenset((up[i], up[j])) for i, j in self.members)

    @cached_property
    def scenario(self) -> MeasurementScenario:
        if self.parent is None:
            return self.base.scenario
        return _joint_scenario(self.parent.scenario)

    def section(self, a: int, t: int) -> Section:
        """The nested section value of section ``t`` at context ``a``."""
        if self.parent is None:
            return self.base.section(a, t)
        i, j = self.members[a]
        p, q = self.pairs[a][t]
        up = self.parent
        return Section(((up.contexts[i], up.section(i, p)), (up.contexts[j], up.section(j, q))))

    @cached_property
    def model(self) -> EmpiricalModel:
        """This level as an ordinary (validated) empirical model."""
        if self.parent is None:
            return self.base
        support = {self.contexts[a]: [self.section(a, t) for t in range(self.table.sizes[a])] for a in range(self.ncontexts)}
        model = build_model(self.scenario, support)
        if model.contexts != self.contexts:
            raise ValidationFailure("joint context order disagrees with the canonical order")
        return model

    def child(self, limit: int | None = None) -> "JointLevel":
        with self._lock:
            if self._child is None:
                self._child = _next_level(self, budget() if limit is None else limit)
            return self._child

    def flatten_indices(self, a: int, t: int) -> set:
        """Level-0 ``(context, section)`` indices nested in section ``t`` of ``a``."""
        if self.parent is None:
            return {(a, t)}
        i, j = self.members[a]
        p, q = self.pairs[a][t]
        return self.parent.flatten_indices(i, p) | self.parent.flatten_indices(j, q)

    def marks(self, c0: int, p0: int) -> list:
        """Per-context bitmask of the sections whose flattening contains level-0 ``(c0, p0)``."""
        if self.parent is None:
            out = [0] * self.ncontexts
            out[c0] = 1 << p0
            return out
        below = self.parent.marks(c0, p0)
        out = []
        for (i, j), pairs in zip(self.members, self.pairs):
            mi, mj = below[i], below[j]
            m = 0
            if mi or mj:
                for t, (p, q) in enumerate(pairs):
                    if (mi >> p) & 1 or (mj >> q) & 1:
                        m |= 1 << t
            out.append(m)
        return out

    def __repr__(self) -> str:
        return f"JointLevel(k={self.level}, contexts={self.ncontexts}, sections={self.nsections})"


def _next_level(jl: JointLevel, limit: int) -> JointLevel:
    t = jl.table
    members = t.edges
    if not members:
        raise AcyclicScenario("the cover graph has no edges; the tower is trivial")
    pairs = []
    total = 0
    for (c, d), (cc, cd, ncls) in zip(members, t.classes):
        buckets = [[] for _ in range(ncls)]
        for q, r in enumerate(cd):
            buckets[r].append(q)
        sec = [(p, q) for p, r in enumerate(cc) for q in buckets[r]]
        if not sec:
            raise ValidationFailure("empty pullback: the parent model is not flasque")
        total += len(sec)
        if total > limit:
            raise ResourceLimit(f"level {jl.level + 1} exceeds the budget of {limit} possible sections")
        pairs.append(tuple(sec))

    # contexts sharing a parent context intersect; the class is that context's section
    incident = [[] for _ in range(t.ncontexts)]
    for a, (c, d) in enumerate(members):
        incident[c].append((a, 0))
        incident[d].append((a, 1))
    found = []
    for c, inc in enumerate(incident):
        for x in range(len(inc)):
            for y in range(x + 1, len(inc)):
                (a, sa), (b, sb) = inc[x], inc[y]
                if a > b:
                    a, sa, b, sb = b, sb, a, sa
                found.append(((a, b), c, sa, sb))
    found.sort()
    edges, classes = [], []
    for (a, b), c, sa, sb in found:
        edges.append((a, b))
        classes.append((tuple(pr[sa] for pr in pairs[a]), tuple(pr[sb] for pr in pairs[b]), t.sizes[c]))
    table = ModelTable(tuple(len(p) for p in pairs), tuple(edges), tuple(classes))
    child = JointLevel(jl.level + 1, table, jl, tuple(members), tuple(pairs))
    if len(edges) != len(set(edges)):
        raise ValidationFailure("two joint contexts share more than one parent context")
    return child


def joint_model(jl: JointLevel) -> JointLevel:
    """The next level of the tower."""
    if jl.level == 0:
        _check_analysable(jl.base.scenario)
    return jl.child()


def tower(model: EmpiricalModel, k: int, limit: int | None = None) -> JointLevel:
    """Level ``k`` of the tower of ``model``; level 0 is the model itself."""
    if k < 0:
        raise ValueError("tower level must be nonnegative")
    root = model.memo("tower", lambda: JointLevel.wrap(model))
    if k > 0:
        _check_analysable(model.scenario)
    jl = root
    for _ in range(k):
        jl = jl.child(limit)
    return jl


@dataclass(frozen=True)
class LeveledSection:
    """A possible section of level ``level`` together with its context."""

    level: int
    context: object
    value: Section

    def render(self) -> str:
        return f"[k={self.level}] {render(self.context)}: {self.value.render()}"


def flatten(t, level: int | None = None) -> set:
    """The level-0 sections nested inside a level-``k`` section."""
    if isinstance(t, LeveledSection):
        value, k = t.value, t.level
    else:
        value, k = t, level
    if k is None:
        raise ValueError("pass a LeveledSection or give the level explicitly")
    if k == 0:
        return {value}
    out = set()
    for _, inner in value.items:
        out |= flatten(inner, k - 1)
    return out


def _locate0(jl: JointLevel, s: Section) -> tuple:
    try:
        return jl.base.find(s)
    except (UnknownSection, KeyError):
        raise UnknownSection(f"{s.render()} is not a possible section of the model") from None


def sections_containing(jl: JointLevel, s: Section) -> list:
    """All level-``k`` possible sections whose flattening contains ``s``."""
    c0, p0 = _locate0(jl, s)
    marks = jl.marks(c0, p0)
    return [
        LeveledSection(jl.level, jl.contexts[a], jl.section(a, t))
        for a, m in enumerate(marks)
        for t in bits_of(m)
    ]


def _coords(model: EmpiricalModel, s, context=None) -> tuple:
    if context is not None:
        return model.locate(context, s)
    return model.find(s)


def lc_k(model: EmpiricalModel, s, k: int, context=None) -> Verdict:
    """LC at every level-``k`` section containing ``s``."""
    c0, p0 = _coords(model, s, context)
    if k == 0:
        fam = model.table.extend(c0, p0)
        return Verdict("LC_k_at", fam is None, None if fam is None else model.family_from_indices(fam), 0, model.section(c0, p0))
    jl = tower(model, k)
    ext = jl.table.extendable()
    for a, m in enumerate(jl.marks(c0, p0)):
        hit = m & ext[a]
        if hit:
            t = next(bits_of(hit))
            return Verdict("LC_k_at", False, (a, t), k, model.section(c0, p0))
    return Verdict("LC_k_at", True, None, k, model.section(c0, p0))


def clc_k(model: EmpiricalModel, s, k: int, context=None) -> Verdict:
    """Non-vanishing obstruction at every level-``k`` section containing ``s``.

    A refuting witness is the ``(context, section)`` index pair at level ``k``
    whose obstruction vanishes.
    """
    c0, p0 = _coords(model, s, context)
    jl = tower(model, k)
    vanish = obstructions(jl.table)
    for a, m in enumerate(jl.marks(c0, p0)):
        hit = m & vanish[a]
        if hit:
            return Verdict("CLC_k_at", False, (a, next(bits_of(hit))), k, model.section(c0, p0))
    return Verdict("CLC_k_at", True, None, k, model.section(c0, p0))


def csc_k(model: EmpiricalModel, k: int) -> Verdict:
    jl = tower(model, k)
    vanish = obstructions(jl.table)
    for a, m in enumerate(vanish):
        if m:
            return Verdict("CSC_k", False, (a, next(bits_of(m))), k)
    return Verdict("CSC_k", True, None, k)


def sc_k(model: EmpiricalModel, k: int) -> Verdict:
    """Strong contextuality of the level-``k`` model."""
    jl = tower(model, k)
    fam = jl.table.any_family()
    return Verdict("SC", fam is None, fam, k)


__all__ = [
    "DEFAULT_BUDGET",
    "JointLevel",
    "LeveledSection",
    "budget",
    "clc_k",
    "csc_k",
    "flatten",
    "joint_model",
    "joint_scenario",
    "lc_k",
    "sc_k",
    "sections_containing",
    "tower",
]
