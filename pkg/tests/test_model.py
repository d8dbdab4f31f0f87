import random
import threading

import pytest

import oracle as O
from ctxkit.cohomology import family_cochain, table_delta0
from ctxkit.cycles import random_cover, random_model
from ctxkit.errors import (
    DisconnectedCover,
    EmptyContextSupport,
    FlasquenessViolation,
    NotBeneathCover,
    NotSubcover,
    SectionOutsideEvents,
    UnknownSection,
)
from ctxkit.io import model_to_document
from ctxkit.model import (
    build_model,
    extend_to_global,
    full_model,
    is_lc_at,
    is_sc,
    lc_sections,
    restrict_model,
    sections_at,
)
from ctxkit.scenario import build_scenario

from conftest import sec


def to_oracle(model):
    return {ctx: [frozenset(s.items) for s in model.support[ctx]] for ctx in model.contexts}


def test_hardy_support(hardy):
    assert model_to_document(hardy).support["a1,b1"] == [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]
    assert hardy.table.nsections == 13


def test_full_model_valid(hardy):
    full = full_model(hardy.scenario)
    assert full.table.nsections == 16
    assert not is_sc(full).holds


def test_table3_deletion_breaks_flasqueness(table3):
    sup = {c: list(table3.support[c]) for c in table3.contexts}
    key = frozenset(("a1", "b2"))
    sup[key] = [s for s in sup[key] if s != sec(a1=0, b2=0)]
    with pytest.raises(FlasquenessViolation) as info:
        build_model(table3.scenario, sup)
    err = info.value
    assert err.context is not None and err.section is not None and err.other is not None


def test_empty_context(hardy):
    sup = {c: list(hardy.support[c]) for c in hardy.contexts}
    sup[hardy.contexts[0]] = []
    with pytest.raises(EmptyContextSupport):
        build_model(hardy.scenario, sup)


def test_missing_context(hardy):
    sup = {c: list(hardy.support[c]) for c in hardy.contexts[1:]}
    with pytest.raises(EmptyContextSupport):
        build_model(hardy.scenario, sup)


def test_section_outside_events(hardy):
    sup = {c: list(hardy.support[c]) for c in hardy.contexts}
    sup[frozenset(("a1", "b1"))] = [sec(a1=0, b1=7)]
    with pytest.raises(SectionOutsideEvents):
        build_model(hardy.scenario, sup)


def test_sections_beneath_cover(hardy):
    assert sections_at(hardy, {"a1"}) == {sec(a1=0), sec(a1=1)}


def test_global_sections(hardy, ks5):
    assert sections_at(hardy, hardy.scenario.measurements)
    assert sections_at(ks5, ks5.scenario.measurements) == set()


def test_not_beneath_cover(hardy):
    with pytest.raises(NotBeneathCover):
        sections_at(hardy, {"a1", "a2"})


def test_hardy_lc(hardy):
    s1 = sec(a1=0, b1=0)
    assert extend_to_global(hardy, s1.domain, s1) is None
    v = is_lc_at(hardy, s1.domain, s1)
    assert v.holds and v.property == "LC_at"
    assert not is_sc(hardy).holds


def test_hardy_extendable_section(hardy):
    s = sec(a1=1, b1=1)
    fam = extend_to_global(hardy, s.domain, s)
    assert fam is not None and fam.check()
    assert fam[s.domain] == s
    v = is_lc_at(hardy, s.domain, s)
    assert not v.holds and v.witness == fam


def test_table7_lc(table7):
    s = sec(b=1, d=1)
    assert extend_to_global(table7, s.domain, s) is None


def test_ks_strongly_contextual(ks5):
    assert is_sc(ks5).holds


def test_unknown_section(hardy):
    with pytest.raises(UnknownSection):
        is_lc_at(hardy, frozenset(("a2", "b2")), sec(a2=1, b2=1))


def test_restrict_to_cycle(table7):
    sub = restrict_model(table7, [("b", "d"), ("b", "c"), ("c", "d")])
    assert len(sub.contexts) == 3
    assert set(sub.scenario.measurements) == {"b", "c", "d"}


def test_restrict_to_full_cover(hardy):
    assert restrict_model(hardy, hardy.contexts) == hardy


def test_restrict_two_contexts(hardy):
    sub = restrict_model(hardy, [("a1", "b1"), ("a1", "b2")])
    assert lc_sections(sub) == []


def test_restrict_errors(hardy):
    with pytest.raises(DisconnectedCover):
        restrict_model(hardy, [("a1", "b1"), ("a2", "b2")])
    with pytest.raises(NotSubcover):
        restrict_model(hardy, [("a1", "b1"), ("a1", "b3")])


def test_family_cochain_in_kernel(hardy, table7):
    for model in (hardy, table7):
        rows, _ = table_delta0(model.table)
        for c, s in model.sections():
            fam = extend_to_global(model, c, s)
            if fam is None:
                continue
            x = family_cochain(model, fam)
            assert all(bin(r & x.bits).count("1") % 2 == 0 for r in rows)


def test_full_model_extends_everywhere():
    rng = random.Random(1)
    for _ in range(20):
        sc = random_cover(rng.randint(3, 5), rng)
        full = full_model(sc)
        assert not is_sc(full).holds
        for c, s in full.sections():
            assert extend_to_global(full, c, s) is not None


def test_oracle_agreement_random():
    rng = random.Random(4)
    for i in range(60):
        sc = random_cover(rng.randint(3, 4), rng)
        m = random_model(sc, rng.choice((0.3, 0.5)), i)
        expect = O.lc_sections(to_oracle(m))
        got = {(c, frozenset(s.items)) for c, s in lc_sections(m)}
        assert got == expect
        assert is_sc(m).holds == (len(expect) == m.table.nsections)


def test_restriction_stays_valid():
    rng = random.Random(9)
    for i in range(30):
        m = random_model(random_cover(4, rng), 0.5, i)
        g = m.scenario.graph
        for a, b in g.edge_pairs():
            sub = restrict_model(m, [a, b])
            assert len(sub.contexts) == 2


def test_witness_families_check(table7):
    for c, s in table7.sections():
        fam = extend_to_global(table7, c, s)
        if fam is not None:
            assert fam.check()
            assert fam.global_section()


def test_concurrent_queries(ks5):
    sc = build_scenario(ks5.scenario.measurements, ks5.scenario.outcomes, ks5.scenario.contexts)
    model = build_model(sc, ks5.support)
    results = []

    def work():
        results.append((is_sc(model).holds, len(lc_sections(model))))

    ts = [threading.Thread(target=work) for _ in range(6)]
    for t in ts:
        t.start()
    for t in ts:
        t.join()
    assert set(results) == {(True, 15)}
