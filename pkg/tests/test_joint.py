import random

import pytest

import oracle as O
from ctxkit.cohomology import table_delta0
from ctxkit.cycles import cyclic_scenario, random_cover, random_model
from ctxkit.errors import AcyclicScenario, DisconnectedCover, ResourceLimit, UnknownSection
from ctxkit.gf2 import bits_of
from ctxkit.joint import (
    LeveledSection,
    clc_k,
    csc_k,
    flatten,
    joint_model,
    joint_scenario,
    lc_k,
    sc_k,
    sections_containing,
    tower,
)
from ctxkit.model import build_model, is_lc_at, is_sc
from ctxkit.scenario import Section, build_scenario, event_sections

from conftest import sec
from test_model import to_oracle

C1, C2, C3, C4 = (frozenset(p) for p in (("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")))


def hardy_enum():
    """s1..s13 in row order, columns (0,0), (1,0), (0,1), (1,1)."""
    cols = [(0, 0), (1, 0), (0, 1), (1, 1)]
    rows = [(("a1", "b1"), [0, 1, 2, 3]), (("a1", "b2"), [1, 2, 3]), (("a2", "b1"), [1, 2, 3]), (("a2", "b2"), [0, 1, 2])]
    out = []
    for (a, b), idx in rows:
        for i in idx:
            x, y = cols[i]
            out.append(Section({a: str(x), b: str(y)}))
    return {f"s{i + 1}": s for i, s in enumerate(out)}


S = hardy_enum()


def test_hardy_cov1(hardy):
    j = joint_scenario(hardy.scenario)
    assert set(j.contexts) == {frozenset(p) for p in ((C1, C2), (C2, C4), (C3, C4), (C1, C3))}
    assert len(j.outcomes[C1]) == 4


def test_six_context_joint():
    cover = ["abc", "bcd", "acd", "abd", "bef", "eg"]
    X = sorted(set("".join(cover)))
    sc = build_scenario(X, {m: "01" for m in X}, cover)
    j = joint_scenario(sc)
    assert len(j.contexts) == 10
    g = j.graph
    eg = frozenset("eg")
    bef = frozenset("bef")
    # {bef, eg} meets only the pairs through bef
    v = g.index(frozenset((bef, eg)))
    assert g.degree(v) == 3


def test_triangle_joint():
    sc = build_scenario("abc", {m: "01" for m in "abc"}, ["ab", "bc", "ca"])
    j = joint_scenario(sc)
    assert len(j.contexts) == 3
    assert len(j.graph.edges) == 3


def test_acyclic_rejected():
    sc = build_scenario("abc", {m: "01" for m in "abc"}, ["ab", "bc"])
    with pytest.raises(AcyclicScenario):
        joint_scenario(sc)


def test_disconnected_rejected():
    sc = build_scenario("abcdef", {m: "01" for m in "abcdef"}, ["ab", "bc", "ca", "de", "ef", "fd"])
    with pytest.raises(DisconnectedCover):
        joint_scenario(sc)


def test_hardy_s1_level1(hardy):
    jl = tower(hardy, 1)
    found = [t for t in sections_containing(jl, S["s1"]) if t.context == frozenset((C1, C2))]
    assert len(found) == 1
    assert found[0].value == Section({C1: S["s1"], C2: S["s6"]})


def test_table3_s2_level1(table3):
    jl = tower(table3, 1)
    s2 = sec(a1=1, b1=1)
    c12 = frozenset((C1, C2))
    found = [t for t in sections_containing(jl, s2) if t.context == c12]
    assert len(found) == 1
    assert found[0].value[C2] == sec(a1=1, b2=1)


def test_hardy_level1_cohomology_loop(hardy):
    """The published level-1 loop through (s1, s6) lies in the kernel of the coboundary."""
    jl = tower(hardy, 1)
    m1 = jl.model

    def pair(x, y):
        a, b = S[x], S[y]
        return m1.locate(frozenset((a.domain, b.domain)), Section({a.domain: a, b.domain: b}))

    terms = [("s1", "s6"), ("s6", "s13"), ("s5", "s11"), ("s5", "s12"),
             ("s13", "s9"), ("s11", "s9"), ("s12", "s8"), ("s8", "s1")]
    x = 0
    for a, b in terms:
        x ^= 1 << m1.table.column(*pair(a, b))
    rows, _ = table_delta0(m1.table)
    assert all(bin(r & x).count("1") % 2 == 0 for r in rows)
    assert not clc_k(hardy, S["s1"], 1).holds


def test_tower_levels(hardy, table7):
    assert tower(hardy, 0).model is hardy
    assert tower(hardy, 3).ncontexts == 4
    # the table7 cover graph has eight intersecting pairs
    assert tower(table7, 1).ncontexts == 8


def test_joint_model_step(hardy):
    jl = joint_model(tower(hardy, 0))
    assert jl.level == 1 and jl is tower(hardy, 1)


def test_flatten_examples():
    s = [Section({"x": str(i)}) for i in range(9)]
    l1 = lambda a, b: Section({f"A{a}": s[a], f"A{b}": s[b]})  # noqa: E731
    p12, p34, p56, p78 = l1(1, 2), l1(3, 4), l1(5, 6), l1(7, 8)
    l2a = Section({"B1": p12, "B2": p34})
    l2b = Section({"B3": p56, "B4": p78})
    l3 = Section({"D1": l2a, "D2": l2b})
    assert flatten(l3, 3) == set(s[1:9])
    assert flatten(LeveledSection(0, "C", s[0])) == {s[0]}
    assert flatten(l1(1, 6), 1) == {s[1], s[6]}
    with pytest.raises(ValueError):
        flatten(l3)


def test_sections_containing_level0(hardy):
    out = sections_containing(tower(hardy, 0), S["s1"])
    assert [t.value for t in out] == [S["s1"]]


def test_sections_containing_hardy_level3(hardy):
    jl = tower(hardy, 3)
    out = sections_containing(jl, S["s1"])
    # one per level-3 context
    assert len({t.context for t in out}) == len(out) == 4
    for t in out:
        assert S["s1"] in flatten(t)


def test_sections_containing_unknown(hardy):
    with pytest.raises(UnknownSection):
        sections_containing(tower(hardy, 1), sec(a1=0, b2=0))


def test_hardy_clc_profile(hardy):
    assert [clc_k(hardy, S["s1"], k).holds for k in range(4)] == [False, False, False, True]


def test_fig3_csc_profile(fig3):
    assert [csc_k(fig3, k).holds for k in range(4)] == [False, False, False, True]


def test_lc_k_ladder(hardy, table7):
    for model in (hardy, table7):
        for c, s in model.sections():
            lc = is_lc_at(model, c, s).holds
            for k in (1, 2):
                assert lc_k(model, s, k, context=c).holds == lc


def test_sc_transfer(ks5, hardy, fig3):
    for m in (ks5, hardy, fig3):
        assert sc_k(m, 1).holds == is_sc(m).holds


def test_materialised_level_matches_table(table7):
    jl = tower(table7, 2)
    m2 = jl.model
    assert m2.table.sizes == jl.table.sizes
    assert m2.table.edges == jl.table.edges
    assert m2.table.classes == jl.table.classes


def test_pullback_soundness():
    rng = random.Random(3)
    for i in range(20):
        m = random_model(random_cover(4, rng), 0.5, i)
        jl = tower(m, 2)
        parent = jl.parent
        for a, (ci, cj) in enumerate(jl.members):
            for p, q in jl.pairs[a]:
                assert p < parent.table.sizes[ci] and q < parent.table.sizes[cj]
            val = jl.model.support[jl.contexts[a]]
            for t in val:
                (x, u), (y, v) = t.items
                assert u in parent.model.support[x] and v in parent.model.support[y]


def test_tower_matches_naive_oracle():
    rng = random.Random(17)
    for i in range(15):
        m = random_model(random_cover(rng.randint(3, 4), rng), 0.5, i)
        om = to_oracle(m)
        for k in (1, 2):
            om = O.joint(om)
            jl = tower(m, k)
            assert sorted(len(v) for v in om.values()) == sorted(jl.table.sizes)
        for c, s in list(m.sections())[:4]:
            for k in (0, 1, 2):
                assert clc_k(m, s, k, context=c).holds == O.clc_k(to_oracle(m), c, frozenset(s.items), k)


def test_cyclic_levels_stay_cycles():
    for n in (3, 4, 5):
        m = random_model(cyclic_scenario(n), 0.6, n)
        for k in range(4):
            jl = tower(m, k)
            assert jl.ncontexts == n
            deg = [0] * n
            for a, b in jl.table.edges:
                deg[a] += 1
                deg[b] += 1
            assert len(jl.table.edges) == n and set(deg) == {2}


def test_budget(hardy, monkeypatch):
    from ctxkit.model import build_model as bm

    fresh = bm(hardy.scenario, hardy.support)
    with pytest.raises(ResourceLimit):
        tower(fresh, 2, limit=10)
    monkeypatch.setenv("CTXKIT_BUDGET", "20")
    other = bm(hardy.scenario, hardy.support)
    with pytest.raises(ResourceLimit):
        tower(other, 2)


def test_no_z_and_standardness_small():
    rng = random.Random(8)
    checked = 0
    for i in range(40):
        m = random_model(random_cover(rng.randint(3, 4), rng), 0.5, i)
        for k in (1, 2):
            t = tower(m, k).table
            checked += _check_context_lemmas(t, tower(m, k).pairs, rng)
    assert checked > 100


def _check_context_lemmas(table, pairs, rng, subsets=64):
    """No-Z and single-context standardness on every context of a level; returns the count."""
    n = 0
    for sec_pairs in pairs:
        sup = set(sec_pairs)
        firsts = {p for p, _ in sup}
        seconds = {q for _, q in sup}
        for (s1, t1) in sup:
            for (s2, t2) in sup:
                if (s2, t1) in sup:
                    assert (s1, t2) in sup
        m = len(sec_pairs)
        draws = range(1 << m) if m <= 10 else (rng.getrandbits(m) for _ in range(subsets))
        for x in draws:
            left = right = 0
            for i in bits_of(x):
                p, q = sec_pairs[i]
                left ^= 1 << p
                right ^= 1 << q
            if bin(left).count("1") == 1 and bin(right).count("1") == 1:
                p, q = left.bit_length() - 1, right.bit_length() - 1
                assert p in firsts and q in seconds
                assert (p, q) in sup
        n += 1
    return n


def test_clc_monotone_random():
    rng = random.Random(5)
    for i in range(25):
        m = random_model(random_cover(rng.randint(3, 4), rng), 0.5, i)
        for c, s in m.sections():
            prof = [clc_k(m, s, k, context=c).holds for k in range(4)]
            assert prof == sorted(prof)
        cprof = [csc_k(m, k).holds for k in range(4)]
        assert cprof == sorted(cprof)


def test_unknown_section_clc(hardy):
    with pytest.raises(UnknownSection):
        clc_k(hardy, sec(a2=1, b2=1), 1)


def test_single_context_joint_definition():
    sc = build_scenario("ab", {m: "01" for m in "ab"}, ["ab"])
    from ctxkit.joint import _joint_scenario

    j = _joint_scenario(sc)
    assert j.contexts == (frozenset((frozenset("ab"),)),)


def test_level_model_valid(table7):
    model = tower(table7, 1).model
    rebuilt = build_model(model.scenario, model.support)
    assert rebuilt == model
    assert len(event_sections(model.scenario, [model.scenario.measurements[0]])) == 4
