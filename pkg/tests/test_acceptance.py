"""Acceptance criteria 1-9.

Each criterion gathers named checks, times itself against its limit and prints
one PASS/FAIL line before asserting.  Run directly with ``python
tests/test_acceptance.py`` for the summary lines alone.
"""

import os
import random
import sys
import time
import warnings

import pytest

sys.path.insert(0, os.path.dirname(__file__))

import oracle as O  # noqa: E402
from ctxkit.cohomology import delta0, h0_dimension, vanishing_sections  # noqa: E402
from ctxkit.cycles import (  # noqa: E402
    cyclic_scenario,
    find_contextual_cycle,
    is_cyclic_scenario,
    random_cover,
    random_model,
    search_counterexample,
    full_invariant,
)
from ctxkit.io import emit_document, parse_document  # noqa: E402
from ctxkit.joint import clc_k, csc_k, sc_k, tower  # noqa: E402
from ctxkit.model import is_lc_at, is_sc, lc_sections  # noqa: E402
from ctxkit.scenario import Section  # noqa: E402
from ctxkit.zoo import NAMES, zoo, zoo_text  # noqa: E402

LIMITS = {1: 5.0, 2: 2.0, 3: 2.0, 4: 10.0, 5: 60.0, 6: 300.0, 7: 120.0, 8: 30.0, 9: None}
TITLES = {
    1: "hardy golden run",
    2: "table3 golden run",
    3: "table7 golden run",
    4: "ks5 golden run",
    5: "soundness sweep",
    6: "cyclic completeness sweep",
    7: "structural sweeps",
    8: "acyclic vacuity",
    9: "round-trip and determinism",
}
SEED = 20240601


def sec(**kw):
    return Section({k: str(v) for k, v in kw.items()})


def fresh(name):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return zoo(name).model


def profile(model, s, levels, context=None):
    return {k: clc_k(model, s, k, context=context).holds for k in levels}


# criteria ---------------------------------------------------------------

def criterion_1():
    m = fresh("hardy")
    s = sec(a1=0, b1=0)
    return [
        ("lc", is_lc_at(m, s.domain, s).holds is True),
        ("sc", is_sc(m).holds is False),
        ("clc 0..3 = F,F,F,T", profile(m, s, range(4)) == {0: False, 1: False, 2: False, 3: True}),
    ]


TABLE3_NINE = ["ad", "be", "cf", "deg", "fh", "hi", "gj", "ia", "jbc"]


def _nine_equations(model):
    jl = tower(model, 1)
    d = delta0(jl.model)
    cols = list(d.index.degree0)
    rows = [{cols[j] for j in range(len(cols)) if r >> j & 1} for r in d.rows]
    s2 = sec(a1=1, b1=1)
    a = [cs for cs in cols if len(jl.model.support[cs[0]]) == 3
         and any(inner == s2 for _, inner in cs[1].items)]
    if len(a) != 1:
        return False
    ctx = a[0][0]
    b, c = [(ctx, t) for t in jl.model.support[ctx] if (ctx, t) != a[0]]
    return any(
        O.match_equations(rows, [set(t) for t in TABLE3_NINE], fixed={a[0]: "a", b: x, c: y}) is not None
        for x, y in (("b", "c"), ("c", "b"))
    )


def criterion_2():
    m = fresh("table3")
    s = sec(a1=1, b1=1)
    return [
        ("lc", is_lc_at(m, s.domain, s).holds is True),
        ("clc_0 false", clc_k(m, s, 0).holds is False),
        ("clc_1 true", clc_k(m, s, 1).holds is True),
        ("nine level-1 equations up to renaming", _nine_equations(m)),
    ]


def criterion_3():
    m = fresh("table7")
    s = sec(b=1, d=1)
    cy = find_contextual_cycle(m, s.domain, s)
    want = {frozenset("bd"), frozenset("bc"), frozenset("cd")}
    return [
        ("lc", is_lc_at(m, s.domain, s).holds is True),
        ("clc_0 false", clc_k(m, s, 0).holds is False),
        ("clc_1 true", clc_k(m, s, 1).holds is True),
        ("contextual cycle {bd,bc,cd}", cy is not None and set(cy.vertices) == want),
    ]


def criterion_4():
    m = fresh("ks5")
    four = [sec(A=1, B=0, C=0), sec(B=0, D=0, E=1), sec(C=0, D=0, E=1), sec(A=1, D=0, F=0)]
    vanish = {s for _, s in vanishing_sections(m)}
    return [
        ("sc", is_sc(m).holds is True),
        ("csc_0 false", csc_k(m, 0).holds is False),
        ("vanishing exactly at the four sections", vanish == set(four)),
        ("four sections non-vanishing at level 1", all(clc_k(m, s, 1).holds for s in four)),
        ("kernel has two free parameters", h0_dimension(m) == 2),
    ]


def _soundness_models(count, rng):
    for i in range(count):
        sc = random_cover(rng.randint(3, 5), rng)
        yield random_model(sc, rng.choice((0.3, 0.5, 0.7)), SEED + i)


def criterion_5(count=500):
    rng = random.Random(SEED)
    lc_violations = sc_violations = checked = 0
    for m in _soundness_models(count, rng):
        lc = {(c, s) for c, s in lc_sections(m)}
        strong = is_sc(m).holds
        for k in range(4):
            for c, s in m.sections():
                checked += 1
                if clc_k(m, s, k, context=c).holds and (c, s) not in lc:
                    lc_violations += 1
            if csc_k(m, k).holds and not strong:
                sc_violations += 1
    return [
        (f"{count} models, {checked} section-level checks", checked > 0),
        ("CLC_k => LC", lc_violations == 0),
        ("CSC_k => SC", sc_violations == 0),
    ]


def criterion_6(count=510):
    discrepancies = 0
    checked = 0
    sizes = (3, 4, 5)
    for i in range(count):
        n = sizes[i % 3]
        rng = random.Random(SEED + i)
        m = random_model(cyclic_scenario(n), rng.choice((0.3, 0.5, 0.7, 0.85)), SEED + i)
        lc = {(c, s) for c, s in lc_sections(m)}
        for c, s in m.sections():
            checked += 1
            if clc_k(m, s, n - 1, context=c).holds != ((c, s) in lc):
                discrepancies += 1
        if csc_k(m, n - 1).holds != is_sc(m).holds:
            discrepancies += 1
    return [
        (f"{count} models, {checked} sections", checked > 0),
        ("LC <=> CLC_{|M|-1} and SC <=> CSC_{|M|-1}", discrepancies == 0),
    ]


def criterion_7():
    from test_joint import _check_context_lemmas

    rng = random.Random(SEED)
    sc_bad = mono_bad = 0
    for i in range(150):
        m = random_model(random_cover(rng.randint(3, 5), rng), rng.choice((0.3, 0.5, 0.7)), SEED + i)
        if sc_k(m, 1).holds != is_sc(m).holds:
            sc_bad += 1
        for c, s in m.sections():
            prof = [clc_k(m, s, k, context=c).holds for k in range(4)]
            if prof != sorted(prof):
                mono_bad += 1
    cyc_bad = 0
    for n in (3, 4, 5, 6):
        for i in range(5):
            m = random_model(cyclic_scenario(n), 0.6, SEED + 10 * n + i)
            for k in range(4):
                jl = tower(m, k)
                if jl.ncontexts != n or not is_cyclic_scenario(jl.scenario):
                    cyc_bad += 1
    instances = 0
    i = 0
    lemma_ok = True
    while instances < 10_000:
        m = random_model(random_cover(rng.randint(3, 5), rng), rng.choice((0.4, 0.6, 0.8)), SEED + 7919 * i)
        i += 1
        for k in (1, 2):
            jl = tower(m, k)
            try:
                instances += _check_context_lemmas(jl.table, jl.pairs, rng)
            except AssertionError:
                lemma_ok = False
    return [
        ("SC <=> SC of first joint model", sc_bad == 0),
        ("CLC_k monotone in k", mono_bad == 0),
        ("cyclic joint levels are chordless n-cycles", cyc_bad == 0),
        (f"No-Z and standardness on {instances} instances", lemma_ok and instances >= 10_000),
    ]


def criterion_8(count=200):
    rng = random.Random(SEED)
    found = 0
    for i in range(count):
        m = random_model(random_cover(rng.randint(2, 5), rng, acyclic=True), rng.choice((0.3, 0.5, 0.7)), SEED + i)
        found += len(lc_sections(m))
    return [(f"{count} acyclic models, no LC section", found == 0)]


def criterion_9():
    round_trip = all(emit_document(parse_document(zoo_text(n))) == zoo_text(n) for n in NAMES)
    a = search_counterexample("random", 4, 30, 3, SEED)
    b = search_counterexample("random", 4, 30, 3, SEED)
    m = fresh("table7")
    s = sec(b=1, d=1)
    r1 = full_invariant(m, s.domain, s).to_dict()
    r2 = full_invariant(fresh("table7"), s.domain, s).to_dict()
    return [
        ("parse/emit identity on zoo files", round_trip),
        ("identical search reports for identical seeds", a.to_dict() == b.to_dict()),
        ("identical invariant reports", r1 == r2),
    ]


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 10)}


def evaluate(n):
    start = time.perf_counter()
    checks = CRITERIA[n]()
    elapsed = time.perf_counter() - start
    limit = LIMITS[n]
    timed_ok = limit is None or elapsed < limit
    ok = timed_ok and all(v for _, v in checks)
    failed = [name for name, v in checks if not v]
    if not timed_ok:
        failed.append("time limit")
    budget = f"{elapsed:.2f} s" + (f" < {limit:g} s" if limit else "")
    line = f"criterion {n} {'PASS' if ok else 'FAIL'} [{budget}] {TITLES[n]}"
    if failed:
        line += " | failed: " + "; ".join(failed)
    return ok, line, checks, elapsed


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n, capsys):
    ok, line, checks, elapsed = evaluate(n)
    with capsys.disabled():
        print("\n" + line)
    for name, value in checks:
        assert value, f"criterion {n}: {name}"
    if LIMITS[n] is not None:
        assert elapsed < LIMITS[n], f"criterion {n}: {elapsed:.2f} s over {LIMITS[n]} s"


if __name__ == "__main__":
    results = [evaluate(n) for n in range(1, 10)]
    for _, line, _, _ in results:
        print(line)
    sys.exit(0 if all(r[0] for r in results) else 1)
