"""Paths and cycles of cover graphs, the full-invariant driver and the search harness."""

from __future__ import annotations

import itertools
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import AcyclicScenario, NotContextualSection, ResourceLimit
from .joint import clc_k
from .model import EmpiricalModel, build_model, restrict_model
from .scenario import (
    CoverGraph,
    MeasurementScenario,
    Section,
    build_scenario,
    event_sections,
    graham_reduce,
    intersection_graph,
    is_connected,
    render,
    require_connected,
    restrict_section,
    sort_key,
)


# paths and cycles -------------------------------------------------------

@dataclass(frozen=True)
class Path:
    """Distinct vertices with consecutive members intersecting.

    For a cycle the last vertex also meets the first.
    """

    vertices: tuple
    is_cycle: bool = False

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def edge_form(self) -> list:
        vs = self.vertices
        pairs = [frozenset((vs[i], vs[i + 1])) for i in range(len(vs) - 1)]
        if self.is_cycle:
            pairs.append(frozenset((vs[-1], vs[0])))
        return pairs

    def canonical_key(self) -> tuple:
        return (len(self.vertices), tuple(sorted(sort_key(v) for v in self.vertices)))

    def render(self) -> str:
        sep = " - "
        body = sep.join(render(v) for v in self.vertices)
        return body + (sep + render(self.vertices[0]) if self.is_cycle else "")


def _graph(obj) -> CoverGraph:
    return obj if isinstance(obj, CoverGraph) else intersection_graph(obj)


def enumerate_cycles(graph, max_len: int | None = None) -> list:
    """Every simple cycle of length ``3..max_len``, once each.

    A cycle is rooted at its lowest vertex and traversed towards the lower of
    that vertex's two cycle neighbours.  Output is sorted by length, then by
    vertex indices.
    """
    g = _graph(graph)
    n = len(g.vertices)
    limit = n if max_len is None else min(max_len, n)
    adj = g.adjacency
    found = []

    def dfs(root, path, on_path):
        last = path[-1]
        for w in adj[last]:
            if w == root and len(path) >= 3 and path[1] < path[-1]:
                found.append(tuple(path))
            elif w > root and w not in on_path and len(path) < limit:
                on_path.add(w)
                path.append(w)
                dfs(root, path, on_path)
                path.pop()
                on_path.discard(w)

    for root in range(n):
        dfs(root, [root], {root})
    found.sort(key=lambda p: (len(p), p))
    return [Path(tuple(g.vertices[i] for i in p), True) for p in found]


def _adjacent(graph: CoverGraph, a, b) -> bool:
    return graph.adjacent(graph.index(a), graph.index(b))


def is_chordal_path(path: Path, graph) -> bool:
    """Whether two non-consecutive members (other than first and last) meet."""
    g = _graph(graph)
    vs = path.vertices
    n = len(vs)
    for i, j in itertools.combinations(range(n), 2):
        if j == i + 1 or (i == 0 and j == n - 1):
            continue
        if _adjacent(g, vs[i], vs[j]):
            return True
    return False


def is_cyclic_scenario(scenario: MeasurementScenario) -> bool:
    """Whether the cover graph is one chordless cycle through every context."""
    require_connected(scenario)
    g = scenario.graph
    n = len(g.vertices)
    return n >= 3 and len(g.edges) == n and all(g.degree(i) == 2 for i in range(n))


def is_improper_3cycle(contexts) -> bool:
    """Three joint contexts (pairs) sharing one lower-level context: a star, not a triangle."""
    cs = list(contexts)
    if len(cs) != 3:
        return False
    if any(not (a & b) for a, b in itertools.combinations(cs, 2)):
        return False
    return bool(cs[0] & cs[1] & cs[2])


def lift_path(path: Path) -> Path:
    """The path of consecutive pairs, one level up."""
    return Path(tuple(path.edge_form), path.is_cycle)


def lower_cycle(path: Path) -> Path:
    """The cycle of pairwise intersections, one level down.

    Requires a chordless cycle of joint contexts that is not an improper
    3-cycle.
    """
    vs = path.vertices
    if not path.is_cycle or is_improper_3cycle(vs):
        raise ValueError("lower_cycle needs a proper cycle")
    ks = []
    for i in range(len(vs)):
        common = vs[i] & vs[(i + 1) % len(vs)]
        if len(common) != 1:
            raise ValueError("consecutive joint contexts must share exactly one lower context")
        ks.append(next(iter(common)))
    return Path(tuple(ks), True)


# contextual cycles and the invariant -------------------------------------

def _lc(model: EmpiricalModel, c: int, p: int) -> bool:
    return model.table.extend(c, p) is None


def find_contextual_cycle(model: EmpiricalModel, C0, s0, max_len: int | None = None,
                          chordless: bool = True) -> Path | None:
    """Smallest cycle through ``C0`` on which ``s0`` stays logically contextual.

    Ties are broken by the canonical order of the cycle's contexts.  By default
    only chordless cycles qualify, so that the restricted scenario is cyclic.
    """
    c, p = model.locate(C0, s0)
    if not _lc(model, c, p):
        raise NotContextualSection(f"{model.section(c, p).render()} extends to a compatible family")
    ctx = model.contexts[c]
    s = model.section(c, p)
    graph = model.scenario.graph
    cycles = [
        cy for cy in enumerate_cycles(graph, max_len)
        if ctx in cy.vertices and not (chordless and is_chordal_path(cy, graph))
    ]
    cycles.sort(key=Path.canonical_key)
    for cy in cycles:
        sub = restrict_model(model, cy.vertices)
        if _lc(sub, *sub.locate(ctx, s)):
            return cy
    return None


@dataclass
class InvariantReport:
    section: Section
    context: frozenset
    lc: bool
    route: str
    clc_levels: dict = field(default_factory=dict)
    decisive_level: int | None = None
    status: str = "inconclusive"
    cycle: Path | None = None
    restricted_levels: dict = field(default_factory=dict)
    level_reached: int = -1
    notes: list = field(default_factory=list)

    @property
    def consistent(self) -> bool:
        """No detection without logical contextuality."""
        return self.lc or not any(self.clc_levels.values())

    def to_dict(self) -> dict:
        return {
            "section": self.section.render(),
            "context": render(self.context),
            "lc": self.lc,
            "route": self.route,
            "clc_levels": {str(k): v for k, v in sorted(self.clc_levels.items())},
            "decisive_level": self.decisive_level,
            "status": self.status,
            "cycle": None if self.cycle is None else [sorted(c) for c in self.cycle.vertices],
            "restricted_levels": {str(k): v for k, v in sorted(self.restricted_levels.items())},
            "level_reached": self.level_reached,
            "notes": list(self.notes),
        }


def _levels(model, s, ctx, top, out) -> tuple:
    """Evaluate clc_k for k = 0..top until detection; returns (first true level, last level reached)."""
    reached = -1
    for k in range(top + 1):
        try:
            held = clc_k(model, s, k, context=ctx).holds
        except ResourceLimit:
            return None, reached
        out[k] = held
        reached = k
        if held:
            return k, reached
    return None, reached


def full_invariant(model: EmpiricalModel, C0, s0, level_cap: int = 3, route: str = "auto") -> InvariantReport:
    """Decide LC at a section through the cohomology of the joint tower.

    Routes: ``cyclic`` (definitive at level |M|-1), ``ccp`` (via the smallest
    contextual cycle, checked at level n-1 on the restricted model) and
    ``general`` (levels up to ``level_cap``; a negative is inconclusive).
    """
    sc = model.scenario
    require_connected(sc)
    if graham_reduce(sc)[0]:
        raise AcyclicScenario("the cover is Graham-acyclic; every model on it is non-contextual")
    c, p = model.locate(C0, s0)
    ctx, s = model.contexts[c], model.section(c, p)
    lc = _lc(model, c, p)
    cyclic = is_cyclic_scenario(sc)
    if route == "auto":
        route = "cyclic" if cyclic else ("ccp" if lc else "general")
    if route == "cyclic" and not cyclic:
        raise ValueError("the cyclic route needs a cyclic scenario")

    if route == "cyclic":
        n = len(sc.contexts)
        rep = InvariantReport(s, ctx, lc, "cyclic")
        rep.decisive_level, rep.level_reached = _levels(model, s, ctx, n - 1, rep.clc_levels)
        if rep.decisive_level is not None:
            rep.status = "contextual"
        elif rep.level_reached == n - 1:
            rep.status = "non-contextual"
            rep.decisive_level = n - 1
        else:
            rep.notes.append("budget exhausted before level |M|-1")
        return rep

    if route == "ccp":
        cycle = find_contextual_cycle(model, ctx, s) if lc else None
        if cycle is not None:
            n = len(cycle)
            rep = InvariantReport(s, ctx, lc, f"ccp-cycle({n})", cycle=cycle)
            sub = restrict_model(model, cycle.vertices)
            restricted: dict = {}
            first_r, _ = _levels(sub, s, ctx, n - 1, restricted)
            rep.restricted_levels = restricted
            # detection on the cycle does not carry over to the full model at
            # level n-1, so the full model is followed up to the cap as well
            rep.decisive_level, rep.level_reached = _levels(model, s, ctx, max(n - 1, level_cap), rep.clc_levels)
            if rep.decisive_level is not None:
                rep.status = "contextual"
                if rep.decisive_level > n - 1:
                    rep.notes.append("full model detected only above level n-1")
            elif first_r is not None:
                rep.status = "contextual"
                rep.notes.append("detected on the contextual cycle only")
            else:
                rep.notes.append("no detection up to the level cap: inconclusive under the conjecture")
            return rep
        if lc:
            route = "general"
            note = "no contextual cycle found"
        else:
            route = "general"
            note = "section extends to a compatible family"
    else:
        note = None

    rep = InvariantReport(s, ctx, lc, "general-capped")
    if note:
        rep.notes.append(note)
    rep.decisive_level, rep.level_reached = _levels(model, s, ctx, level_cap, rep.clc_levels)
    if rep.decisive_level is not None:
        rep.status = "contextual"
    elif not lc:
        rep.status = "non-contextual"
    else:
        rep.notes.append("no detection up to the level cap: inconclusive under the conjecture")
    return rep


# random models and the search harness -------------------------------------

def random_model(scenario: MeasurementScenario, density: float, seed: int) -> EmpiricalModel:
    """A reproducible random model: sample events, then repair conditions 1 and 2."""
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    rng = random.Random(seed)
    events = {c: event_sections(scenario, c) for c in scenario.contexts}
    support = {}
    for c in scenario.contexts:
        chosen = [e for e in events[c] if rng.random() < density]
        if not chosen:
            chosen = [rng.choice(events[c])]
        support[c] = set(chosen)
    contexts = scenario.contexts
    changed = True
    while changed:
        changed = False
        for i, j in scenario.graph.edges:
            for a, b in ((contexts[i], contexts[j]), (contexts[j], contexts[i])):
                common = a & b
                have = {restrict_section(t, common) for t in support[b]}
                for s in sorted(support[a]):
                    r = restrict_section(s, common)
                    if r in have:
                        continue
                    options = [t for t in events[b] if restrict_section(t, common) == r]
                    support[b].add(rng.choice(options))
                    have.add(r)
                    changed = True
    return build_model(scenario, support)


def cyclic_scenario(n: int, outcomes: int = 2) -> MeasurementScenario:
    """The n-cycle scenario: contexts {x_i, x_{i+1}}."""
    X = [f"x{i}" for i in range(n)]
    return build_scenario(X, {m: range(outcomes) for m in X}, [(X[i], X[(i + 1) % n]) for i in range(n)])


def random_cover(size: int, rng: random.Random, acyclic: bool | None = False, max_tries: int = 1000) -> MeasurementScenario:
    """A connected random cover with ``size`` contexts of two or three measurements.

    ``acyclic`` selects Graham-acyclic (True), non-acyclic (False) or either (None).
    """
    for _ in range(max_tries):
        nmeas = rng.randint(max(3, size - 1), size + 2)
        X = [f"m{i}" for i in range(nmeas)]
        ctxs = set()
        for _ in range(20 * size):
            ctxs.add(frozenset(rng.sample(X, rng.choice((2, 2, 3)))))
            if len(ctxs) == size:
                break
        else:
            continue
        ctxs = list(ctxs)
        if any(a < b for a, b in itertools.permutations(ctxs, 2)):
            continue
        used = sorted(frozenset().union(*ctxs))
        if not is_connected(ctxs):
            continue
        if acyclic is not None and graham_reduce(ctxs)[0] != acyclic:
            continue
        return build_scenario(used, {m: ("0", "1") for m in used}, ctxs)
    raise RuntimeError("could not sample a cover with the requested shape")


@dataclass
class SearchReport:
    family: str
    size: int
    count: int
    density: float | None
    level_cap: int
    seed: int
    models: int = 0
    skipped: int = 0
    lc_sections: int = 0
    sections: int = 0
    levels_evaluated: int = 0
    counterexamples: list = field(default_factory=list)
    soundness_violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _sample(family: str, size: int, density, seed: int, index: int) -> tuple:
    sub_seed = seed * 1_000_003 + index
    rng = random.Random(sub_seed)
    if family == "cyclic":
        scenario = cyclic_scenario(size)
    elif family == "random":
        scenario = random_cover(size, rng)
    else:
        raise ValueError(f"unknown family {family!r}")
    d = density if density is not None else rng.choice((0.3, 0.5, 0.7))
    return random_model(scenario, d, sub_seed), sub_seed, d


def _examine(args) -> dict:
    from .io import emit_model

    family, size, density, level_cap, seed, index = args
    model, sub_seed, d = _sample(family, size, density, seed, index)
    out = {"index": index, "seed": sub_seed, "density": d, "sections": 0, "lc": 0, "levels": 0,
           "counterexamples": [], "violations": [], "skipped": False}
    ext = model.table.extendable()
    try:
        for c, ctx in enumerate(model.contexts):
            for p, s in enumerate(model.support[ctx]):
                out["sections"] += 1
                lc = not (ext[c] >> p & 1)
                out["lc"] += lc
                detected = None
                for k in range(level_cap + 1):
                    out["levels"] += 1
                    if clc_k(model, s, k, context=ctx).holds:
                        detected = k
                        break
                if detected is not None and not lc:
                    out["violations"].append({"section": s.render(), "level": detected, "model": emit_model(model)})
                if lc and detected is None:
                    out["counterexamples"].append({"section": s.render(), "seed": sub_seed, "model": emit_model(model)})
    except ResourceLimit:
        out["skipped"] = True
    return out


def search_counterexample(family: str, size: int, count: int, level_cap: int, seed: int,
                          density: float | None = None, workers: int = 1) -> SearchReport:
    """Look for LC sections that no level up to ``level_cap`` detects."""
    report = SearchReport(family, size, count, density, level_cap, seed)
    jobs = [(family, size, density, level_cap, seed, i) for i in range(count)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_examine, jobs))
    else:
        results = [_examine(j) for j in jobs]
    for r in results:
        if r["skipped"]:
            report.skipped += 1
            continue
        report.models += 1
        report.sections += r["sections"]
        report.lc_sections += r["lc"]
        report.levels_evaluated += r["levels"]
        report.counterexamples.extend(r["counterexamples"])
        report.soundness_violations.extend(r["violations"])
    return report


__all__ = [
    "InvariantReport",
    "Path",
    "SearchReport",
    "cyclic_scenario",
    "enumerate_cycles",
    "find_contextual_cycle",
    "full_invariant",
    "is_chordal_path",
    "is_cyclic_scenario",
    "is_improper_3cycle",
    "lift_path",
    "lower_cycle",
    "random_cover",
    "random_model",
    "search_counterexample",
]
