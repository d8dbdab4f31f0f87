"""Command-line interface.

Exit codes: 0 when the analysis completed without finding contextuality,
1 for usage or input errors, 2 when contextuality (or a counterexample) was
found, 3 when the section budget was exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

from .cohomology import describe_certificate, h0_dimension, table_vanishes, vanishing_sections
from .cycles import (
    enumerate_cycles,
    find_contextual_cycle,
    full_invariant,
    is_chordal_path,
    is_cyclic_scenario,
    search_counterexample,
)
from .errors import AcyclicScenario, CtxkitError, InputError, NotContextualSection, ResourceLimit
from .io import bundle_counts, emit_document, emit_model, export_bundle_dot, level_document, parse_model
from .joint import tower
from .model import EmpiricalModel, extend_to_global, is_sc, lc_sections
from .scenario import Section, graham_reduce, is_connected, render, sort_key
from .zoo import NAMES, zoo, zoo_text

EXIT_OK, EXIT_USAGE, EXIT_CONTEXTUAL, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def load_source(src: str, strict: bool = False) -> EmpiricalModel:
    """A model from ``zoo:<name>`` or a file path."""
    if src.startswith("zoo:"):
        entry = zoo(src[4:])
        if entry.warning:
            print(f"warning: {entry.warning}", file=sys.stderr)
        return entry.model
    try:
        with open(src, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {src}: {exc.strerror}") from None
    return parse_model(text, strict=strict)


def parse_section(model: EmpiricalModel, text: str) -> tuple:
    """Parse ``m1,m2=o1,o2`` into ``(context, Section)``."""
    if text.count("=") != 1:
        raise UsageError(f"section {text!r} must look like m1,m2=o1,o2")
    lhs, rhs = text.split("=")
    ms = [m.strip() for m in lhs.split(",")]
    os_ = [o.strip() for o in rhs.split(",")]
    if len(ms) != len(os_) or not all(ms) or not all(os_):
        raise UsageError(f"section {text!r}: measurement and outcome counts differ")
    if ms != sorted(ms, key=sort_key) or len(set(ms)) != len(ms):
        raise UsageError(f"section {text!r}: list measurements once each in canonical order")
    s = Section(dict(zip(ms, os_)))
    ctx = s.domain
    if ctx not in model.support:
        raise UsageError(f"section {text!r}: {render(ctx)} is not a context")
    return ctx, s


def _emit(args, payload: dict, lines: list) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


# subcommands ---------------------------------------------------------------

def cmd_validate(args) -> int:
    model = load_source(args.src, args.strict)
    sc = model.scenario
    acyclic, _ = graham_reduce(sc)
    payload = {
        "valid": True,
        "measurements": len(sc.measurements),
        "contexts": len(sc.contexts),
        "sections": model.table.nsections,
        "connected": is_connected(sc),
        "graham_acyclic": acyclic,
        "cyclic": is_connected(sc) and is_cyclic_scenario(sc),
    }
    lines = [
        "valid model",
        f"  measurements: {payload['measurements']}",
        f"  contexts:     {payload['contexts']}",
        f"  sections:     {payload['sections']}",
        f"  connected:    {payload['connected']}",
        f"  acyclic:      {acyclic}",
        f"  cyclic:       {payload['cyclic']}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def _section_payload(model, rep) -> dict:
    d = rep.to_dict()
    fam = extend_to_global(model, rep.context, rep.section)
    if fam is not None:
        d["family"] = {render(c): s.render() for c, s in sorted(fam.choice.items(), key=lambda kv: sort_key(kv[0]))}
    cert = table_vanishes(model.table, *model.locate(rep.context, rep.section))
    d["gf2_solution"] = None if cert is None else describe_certificate(model, cert)
    return d


def cmd_analyze(args) -> int:
    model = load_source(args.src, args.strict)
    if args.section:
        targets = [parse_section(model, args.section)]
    else:
        targets = [(ctx, s) for ctx in model.contexts for s in model.support[ctx]]
    try:
        reports = [full_invariant(model, ctx, s, level_cap=args.max_level, route=args.route) for ctx, s in targets]
    except AcyclicScenario:
        payload = {"graham_acyclic": True, "sc": False, "reports": []}
        _emit(args, payload, ["Graham-acyclic scenario: every section extends, no contextuality"])
        return EXIT_OK
    sc = is_sc(model).holds if not args.section else None
    payload = {"sc": sc, "reports": [_section_payload(model, r) for r in reports]}
    if not args.section:
        payload["h0_dimension"] = h0_dimension(model)
        payload["lc_sections"] = len(lc_sections(model))
    lines = []
    if sc is not None:
        lines.append(f"strongly contextual: {sc}")
        lines.append(f"logically contextual sections: {payload['lc_sections']} of {model.table.nsections}")
    for r in reports:
        levels = " ".join(f"{k}:{'T' if v else 'F'}" for k, v in sorted(r.clc_levels.items()))
        lines.append(f"{render(r.context)} {r.section.render()}")
        lines.append(f"  lc={r.lc} route={r.route} status={r.status} decisive_level={r.decisive_level}")
        lines.append(f"  clc_levels {levels}")
        if r.cycle is not None:
            rl = " ".join(f"{k}:{'T' if v else 'F'}" for k, v in sorted(r.restricted_levels.items()))
            lines.append(f"  cycle {r.cycle.render()}  restricted {rl}")
        for note in r.notes:
            lines.append(f"  note: {note}")
    _emit(args, payload, lines)
    return EXIT_CONTEXTUAL if any(r.lc for r in reports) else EXIT_OK


def cmd_joint(args) -> int:
    model = load_source(args.src, args.strict)
    jl = tower(model, args.level)
    if args.emit:
        sys.stdout.write(emit_document(level_document(jl)))
        return EXIT_OK
    from .cohomology import obstructions

    vanish = obstructions(jl.table)
    nv = sum(bin(m).count("1") for m in vanish)
    payload = {
        "level": jl.level,
        "contexts": jl.ncontexts,
        "sections": jl.nsections,
        "edges": len(jl.table.edges),
        "vanishing": nv,
    }
    lines = [
        f"level {jl.level}",
        f"  contexts:  {jl.ncontexts}",
        f"  sections:  {jl.nsections}",
        f"  edges:     {len(jl.table.edges)}",
        f"  vanishing obstructions: {nv}",
    ]
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_cycles(args) -> int:
    model = load_source(args.src, args.strict)
    graph = model.scenario.graph
    cycles = enumerate_cycles(graph, args.max_len)
    rows = [{"cycle": [sorted(c) for c in cy.vertices], "length": len(cy), "chordal": is_chordal_path(cy, graph)} for cy in cycles]
    lines = [f"{len(cy)}  {'chordal  ' if r['chordal'] else 'chordless'}  {cy.render()}" for cy, r in zip(cycles, rows)]
    lines.append(f"{len(cycles)} cycle(s)")
    _emit(args, {"cycles": rows}, lines)
    return EXIT_OK


def cmd_zoo(args) -> int:
    if args.name is None:
        _emit(args, {"names": list(NAMES)}, list(NAMES))
        return EXIT_OK
    if args.emit:
        sys.stdout.write(zoo_text(args.name))
        return EXIT_OK
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        entry = zoo(args.name)
    model = entry.model
    payload = {"name": entry.name, "provenance": entry.provenance, "expected": entry.expected,
               "contexts": len(model.contexts), "sections": model.table.nsections}
    lines = [f"{entry.name}: {len(model.contexts)} contexts, {model.table.nsections} sections",
             f"  provenance: {entry.provenance}"]
    if entry.warning:
        lines.append(f"  warning: {entry.warning}")
    lines.append("  expected: " + json.dumps(entry.expected, sort_keys=True))
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_export_dot(args) -> int:
    model = load_source(args.src, args.strict)
    if args.level:
        model = tower(model, args.level).model
    if args.format == "json":
        print(json.dumps(bundle_counts(model), sort_keys=True))
    else:
        sys.stdout.write(export_bundle_dot(model))
    return EXIT_OK


def cmd_search(args) -> int:
    if args.density is not None and not 0 < args.density <= 1:
        raise UsageError("--density must lie in (0, 1]")
    report = search_counterexample(args.family, args.size, args.count, args.level_cap, args.seed,
                                   density=args.density, workers=args.workers)
    payload = report.to_dict()
    lines = [
        f"family={report.family} size={report.size} seed={report.seed} level_cap={report.level_cap}",
        f"  models examined:  {report.models} (skipped {report.skipped})",
        f"  sections:         {report.sections} ({report.lc_sections} logically contextual)",
        f"  levels evaluated: {report.levels_evaluated}",
        f"  counterexamples:  {len(report.counterexamples)}",
        f"  soundness violations: {len(report.soundness_violations)}",
    ]
    for ce in report.counterexamples:
        lines.append(f"  undetected {ce['section']} (seed {ce['seed']})")
    _emit(args, payload, lines)
    return EXIT_CONTEXTUAL if report.counterexamples or report.soundness_violations else EXIT_OK


# parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctxkit", description="Contextuality analysis of possibilistic empirical models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, src=True):
        if src:
            sp.add_argument("src", help="model file or zoo:<name>")
            sp.add_argument("--strict", action="store_true", help="reject unknown document fields")
        sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("validate", help="check a model document")
    common(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("analyze", help="run the full invariant")
    common(sp)
    sp.add_argument("--section", help='section such as "a1,b1=0,0"')
    sp.add_argument("--max-level", type=int, default=3)
    sp.add_argument("--route", choices=("auto", "cyclic", "ccp", "general"), default="auto")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("joint", help="build a level of the joint tower")
    common(sp)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--emit", action="store_true", help="print the level as a model document")
    sp.set_defaults(func=cmd_joint)

    sp = sub.add_parser("cycles", help="list cycles of the cover graph")
    common(sp)
    sp.add_argument("--max-len", type=int)
    sp.set_defaults(func=cmd_cycles)

    sp = sub.add_parser("zoo", help="built-in models")
    common(sp, src=False)
    sp.add_argument("name", nargs="?")
    sp.add_argument("--emit", action="store_true", help="print the model document")
    sp.set_defaults(func=cmd_zoo)

    sp = sub.add_parser("export-dot", help="bundle diagram in DOT")
    common(sp)
    sp.add_argument("--level", type=int, default=0)
    sp.set_defaults(func=cmd_export_dot)

    sp = sub.add_parser("search", help="randomized counterexample search")
    common(sp, src=False)
    sp.add_argument("--family", choices=("cyclic", "random"), required=True)
    sp.add_argument("--size", type=int, required=True)
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--level-cap", type=int, required=True)
    sp.add_argument("--density", type=float)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_search)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "max_level", 0) is not None and getattr(args, "max_level", 0) < 0:
            raise UsageError("--max-level must be nonnegative")
        if getattr(args, "level", 0) < 0:
            raise UsageError("--level must be nonnegative")
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NotContextualSection as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        where = f" at {exc.location}" if getattr(exc, "location", None) else ""
        print(f"error{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CtxkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
