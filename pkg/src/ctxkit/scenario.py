"""Measurement scenarios, the sheaf of events and cover combinatorics.

Identifiers at level 0 are strings.  Joint scenarios (see :mod:`ctxkit.joint`)
reuse the same classes with structured identifiers: a measurement of a joint
scenario is a context of the level below (a ``frozenset``) and its outcomes are
:class:`Section` objects of the level below.  :func:`sort_key` gives every such
identifier a canonical order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import (
    AntichainViolation,
    CoverageGap,
    DisconnectedCover,
    DuplicateContext,
    EmptyOutcomeSet,
    NotAPartition,
    NotSubdomain,
    UnknownMeasurement,
)


def sort_key(x):
    """Canonical ordering key for identifiers at any tower level."""
    if isinstance(x, str):
        return x
    if isinstance(x, Section):
        return x.key
    if isinstance(x, (frozenset, set)):
        return tuple(sorted(sort_key(e) for e in x))
    if isinstance(x, tuple):
        return tuple(sort_key(e) for e in x)
    raise TypeError(f"unsupported identifier type {type(x).__name__}")


def _coerce(x):
    # plain ints are accepted as a convenience for level-0 outcomes/measurements
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    return x


def render(x) -> str:
    """Human-readable string for an identifier, context or section."""
    if isinstance(x, str):
        return x
    if isinstance(x, Section):
        return x.render()
    if isinstance(x, (frozenset, set)):
        return "{" + ",".join(render(e) for e in sorted(x, key=sort_key)) + "}"
    return str(x)


class Section:
    """A local section: an assignment of outcomes to a finite set of measurements.

    Sections are immutable and hashable; equality compares the full assignment.
    """

    __slots__ = ("_items", "_hash", "_key")

    def __init__(self, assignment: Mapping | Iterable = ()):
        if isinstance(assignment, Mapping):
            pairs = assignment.items()
        else:
            pairs = assignment
        items = {}
        for m, v in pairs:
            items[_coerce(m)] = _coerce(v)
        ordered = sorted(items.items(), key=lambda mv: sort_key(mv[0]))
        self._items = tuple(ordered)
        self._hash = hash(self._items)
        self._key = None

    @classmethod
    def of(cls, domain: Sequence, values: Sequence) -> "Section":
        if len(domain) != len(values):
            raise ValueError("domain and values differ in length")
        return cls(zip(domain, values))

    @property
    def items(self) -> tuple:
        return self._items

    @property
    def domain(self) -> frozenset:
        return frozenset(m for m, _ in self._items)

    @property
    def values(self) -> tuple:
        return tuple(v for _, v in self._items)

    @property
    def key(self):
        if self._key is None:
            self._key = tuple((sort_key(m), sort_key(v)) for m, v in self._items)
        return self._key

    def __getitem__(self, m):
        for k, v in self._items:
            if k == m:
                return v
        raise KeyError(m)

    def __contains__(self, m) -> bool:
        return any(k == m for k, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Section):
            return NotImplemented
        return self._hash == other._hash and self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Section") -> bool:
        return self.key < other.key

    def render(self) -> str:
        if not self._items:
            return "()"
        names = ",".join(render(m) for m, _ in self._items)
        vals = ",".join(render(v) for _, v in self._items)
        return f"({names})=({vals})"

    def __repr__(self) -> str:
        return f"Section<{self.render()}>"


EMPTY_SECTION = Section()


def restrict_section(s: Section, V: Iterable) -> Section:
    """Project ``s`` onto the measurement subset ``V``."""
    V = frozenset(_coerce(m) for m in V)
    if not V <= s.domain:
        raise NotSubdomain(f"{render(V)} is not contained in the domain {render(s.domain)}")
    return Section((m, v) for m, v in s.items if m in V)


class EventSpace:
    """Lazy view of E(U), the product of the outcome sets over ``U``.

    Joint scenarios use these as outcome sets; they can be astronomically
    large, so only size, membership and ordered iteration are provided.
    """

    __slots__ = ("scenario", "domain", "_ordered")

    def __init__(self, scenario: "MeasurementScenario", domain: Iterable):
        self.scenario = scenario
        self.domain = frozenset(domain)
        self._ordered = tuple(sorted(self.domain, key=sort_key))

    def __len__(self) -> int:
        return math.prod(len(self.scenario.outcomes[m]) for m in self._ordered)

    def __contains__(self, s) -> bool:
        if not isinstance(s, Section) or s.domain != self.domain:
            return False
        return all(v in self.scenario.outcomes[m] for m, v in s.items)

    def __iter__(self):
        spaces = [self.scenario.outcomes[m] for m in self._ordered]
        for combo in itertools.product(*spaces):
            yield Section(zip(self._ordered, combo))

    def __repr__(self) -> str:
        return f"EventSpace({render(self.domain)}, size={len(self)})"


@dataclass(frozen=True)
class CoverGraph:
    """Intersection graph of a cover (the 1-skeleton of its nerve)."""

    vertices: tuple
    edges: tuple  # sorted (i, j) index pairs, i < j

    @cached_property
    def adjacency(self) -> tuple:
        adj = [[] for _ in self.vertices]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def _edge_set(self) -> frozenset:
        return frozenset(self.edges)

    def adjacent(self, i: int, j: int) -> bool:
        if i > j:
            i, j = j, i
        return (i, j) in self._edge_set

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def index(self, vertex) -> int:
        return self.vertices.index(vertex)

    def edge_pairs(self) -> list:
        """Edges as unordered pairs of vertex labels."""
        return [frozenset((self.vertices[i], self.vertices[j])) for i, j in self.edges]

    def components(self) -> list:
        seen = set()
        comps = []
        for start in range(len(self.vertices)):
            if start in seen:
                continue
            stack, comp = [start], []
            seen.add(start)
            while stack:
                v = stack.pop()
                comp.append(v)
                for w in self.adjacency[v]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps


class MeasurementScenario:
    """A validated measurement scenario ``<X, M, (O_m)>``.

    Build instances with :func:`build_scenario`; the constructor trusts its input.
    """

    def __init__(self, measurements: tuple, outcomes: Mapping, contexts: tuple):
        self.measurements = measurements
        self.outcomes = dict(outcomes)
        self.contexts = contexts
        self.index = {m: i for i, m in enumerate(measurements)}
        self.context_index = {c: i for i, c in enumerate(contexts)}

    @cached_property
    def ordered_contexts(self) -> tuple:
        """Each context as a tuple of measurements in canonical order."""
        return tuple(tuple(sorted(c, key=self.index.__getitem__)) for c in self.contexts)

    @cached_property
    def graph(self) -> CoverGraph:
        return intersection_graph(self.contexts)

    def __len__(self) -> int:
        return len(self.contexts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MeasurementScenario):
            return NotImplemented
        return (
            self.measurements == other.measurements
            and self.contexts == other.contexts
            and all(tuple(self.outcomes[m]) == tuple(other.outcomes[m]) for m in self.measurements)
        )

    __hash__ = object.__hash__

    def __repr__(self) -> str:
        cover = ", ".join(render(c) for c in self.contexts)
        return f"MeasurementScenario(X={len(self.measurements)}, M=[{cover}])"


def _canonical_contexts(contexts: Iterable) -> tuple:
    return tuple(sorted(contexts, key=sort_key))


def build_scenario(measurements: Iterable, outcomes: Mapping, contexts: Iterable) -> MeasurementScenario:
    """Validate and canonicalise a measurement scenario.

    ``outcomes`` maps each measurement to its outcome set; at level 0 these are
    sorted, deduplicated and coerced to strings.  Contexts may be given as any
    iterables of measurement identifiers.
    """
    X = [_coerce(m) for m in measurements]
    if not X:
        raise CoverageGap("the measurement set is empty")
    Xset = frozenset(X)
    ordered_X = tuple(sorted(Xset, key=sort_key))

    outs = {}
    for m in ordered_X:
        raw = outcomes.get(m) if m in outcomes else None
        if raw is None:
            raise EmptyOutcomeSet(f"no outcome set for measurement {render(m)}")
        if isinstance(raw, EventSpace):
            if len(raw) == 0:
                raise EmptyOutcomeSet(f"empty outcome set for {render(m)}")
            outs[m] = raw
            continue
        vals = tuple(sorted({_coerce(o) for o in raw}, key=sort_key))
        if not vals:
            raise EmptyOutcomeSet(f"empty outcome set for {render(m)}")
        outs[m] = vals
    extra = {_coerce(m) for m in outcomes} - Xset
    if extra:
        raise UnknownMeasurement(f"outcomes given for unknown measurements {sorted(map(render, extra))}")

    cover = []
    seen = set()
    for ctx in contexts:
        c = frozenset(_coerce(m) for m in ctx)
        if not c:
            raise AntichainViolation("empty context")
        unknown = c - Xset
        if unknown:
            raise UnknownMeasurement(f"context {render(c)} uses unknown measurements {render(unknown)}")
        if c in seen:
            raise DuplicateContext(f"context {render(c)} listed twice")
        seen.add(c)
        cover.append(c)
    if not cover:
        raise CoverageGap("the cover has no contexts")
    for c, d in itertools.permutations(cover, 2):
        if c < d:
            raise AntichainViolation(f"context {render(c)} is contained in {render(d)}")
    covered = frozenset().union(*cover)
    if covered != Xset:
        raise CoverageGap(f"measurements {render(Xset - covered)} lie in no context")
    return MeasurementScenario(ordered_X, outs, _canonical_contexts(cover))


def event_sections(scenario: MeasurementScenario, U: Iterable) -> list:
    """All sections of E(U) in canonical order (the empty section when U is empty)."""
    U = frozenset(_coerce(m) for m in U)
    unknown = U - frozenset(scenario.measurements)
    if unknown:
        raise UnknownMeasurement(f"unknown measurements {render(unknown)}")
    return list(EventSpace(scenario, U))


def _as_cover(cover) -> tuple:
    if isinstance(cover, MeasurementScenario):
        return cover.contexts
    if isinstance(cover, CoverGraph):
        return cover.vertices
    return tuple(frozenset(_coerce(m) for m in c) for c in cover)


def intersection_graph(cover) -> CoverGraph:
    """Graph on the contexts with an edge for every intersecting pair."""
    if isinstance(cover, MeasurementScenario) and "graph" in cover.__dict__:
        return cover.graph
    contexts = _as_cover(cover)
    edges = []
    for i, j in itertools.combinations(range(len(contexts)), 2):
        if contexts[i] & contexts[j]:
            edges.append((i, j))
    return CoverGraph(contexts, tuple(edges))


def is_connected(cover) -> bool:
    graph = cover if isinstance(cover, CoverGraph) else intersection_graph(cover)
    return len(graph.components()) <= 1


def components(cover) -> list:
    """Connected components of a cover, each a list of contexts."""
    graph = cover if isinstance(cover, CoverGraph) else intersection_graph(cover)
    return [[graph.vertices[i] for i in comp] for comp in graph.components()]


def require_connected(cover) -> None:
    if not is_connected(cover):
        raise DisconnectedCover("the cover is not connected; analyse each of components() separately")


def graham_reduce(cover) -> tuple:
    """Graham (GYO) reduction of the cover hypergraph.

    Returns ``(is_acyclic, residual_cover)``.  Deletions happen one at a time,
    lowest index first; the verdict does not depend on that order.
    """
    edges = [set(c) for c in _as_cover(cover)]
    changed = True
    while changed:
        changed = False
        edges = [e for e in edges if e]
        counts = {}
        for e in edges:
            for m in e:
                counts[m] = counts.get(m, 0) + 1
        lonely = sorted((m for m, n in counts.items() if n == 1), key=sort_key)
        if lonely:
            m = lonely[0]
            for e in edges:
                e.discard(m)
            changed = True
            continue
        for i, e in enumerate(edges):
            if any(j != i and e <= f for j, f in enumerate(edges)):
                del edges[i]
                changed = True
                break
    residual = tuple(frozenset(e) for e in edges if e)
    return (not residual, residual)


def is_acyclic(cover) -> bool:
    return graham_reduce(cover)[0]


def is_bell_type(scenario: MeasurementScenario, partition: Iterable[Iterable]) -> bool:
    """Whether ``scenario`` is Bell-type with respect to the given parts."""
    parts = [frozenset(_coerce(m) for m in p) for p in partition]
    X = frozenset(scenario.measurements)
    union = frozenset().union(*parts) if parts else frozenset()
    if union != X or sum(len(p) for p in parts) != len(X) or any(not p for p in parts):
        raise NotAPartition("the parts do not partition the measurement set")
    for c in scenario.contexts:
        if any(len(c & p) != 1 for p in parts):
            return False
    transversals = {frozenset(t) for t in itertools.product(*(sorted(p, key=sort_key) for p in parts))}
    return transversals == set(scenario.contexts)


__all__ = [
    "CoverGraph",
    "EventSpace",
    "MeasurementScenario",
    "Section",
    "build_scenario",
    "components",
    "event_sections",
    "graham_reduce",
    "intersection_graph",
    "is_acyclic",
    "is_bell_type",
    "is_connected",
    "render",
    "require_connected",
    "restrict_section",
    "sort_key",
]
