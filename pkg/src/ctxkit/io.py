"""Model documents (JSON and a compact text table), DOT export and level export.

A JSON document looks like::

    {"format_version": 1,
     "measurements": ["a", "b"],
     "outcomes": {"a": ["0", "1"], "b": ["0", "1"]},
     "contexts": [["a", "b"]],
     "support": {"a,b": [["0", "0"], ["1", "1"]]},
     "metadata": {}}

Support keys are the sorted measurements of a context joined by commas and each
outcome tuple follows that order.  The text dialect has one line per context::

    outcomes: 0 1
    a1 b1 | 0,0 1,0 0,1 1,1
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import CtxkitError, InputError, ModelSyntaxError, SectionOutsideEvents
from .model import EmpiricalModel, build_model
from .scenario import Section, build_scenario, render, sort_key

FORMAT_VERSION = 1
FIELDS = ("format_version", "measurements", "outcomes", "contexts", "support", "metadata")


class UnknownField(InputError):
    pass


@dataclass
class ModelDocument:
    measurements: list
    outcomes: dict
    contexts: list
    support: dict
    metadata: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION
    extra: dict = field(default_factory=dict)

    def canonical(self) -> "ModelDocument":
        """Same content with every list in canonical order."""
        meas = sorted(self.measurements)
        outs = {m: sorted(self.outcomes[m]) for m in meas}
        ctxs = sorted((sorted(c) for c in self.contexts))
        sup = {k: sorted(list(map(list, v))) for k, v in sorted(self.support.items())}
        return ModelDocument(meas, outs, ctxs, sup, dict(self.metadata), self.format_version, dict(self.extra))


def context_key(ctx) -> str:
    return ",".join(sorted(ctx, key=sort_key))


# JSON ------------------------------------------------------------------

def _dump(value) -> str:
    return json.dumps(value, sort_keys=True, ensure_ascii=False, separators=(", ", ": "))


def emit_document(doc: ModelDocument) -> str:
    """Canonical, byte-stable JSON text."""
    body = {
        "format_version": doc.format_version,
        "measurements": doc.measurements,
        "outcomes": doc.outcomes,
        "contexts": doc.contexts,
        "support": doc.support,
        "metadata": doc.metadata,
    }
    lines = []
    keys = list(FIELDS) + sorted(doc.extra)
    for i, key in enumerate(keys):
        value = body[key] if key in body else doc.extra[key]
        comma = "," if i < len(keys) - 1 else ""
        if key == "support" and value:
            inner = ",\n".join(f"    {_dump(k)}: {_dump(v)}" for k, v in sorted(value.items()))
            lines.append(f'  "support": {{\n{inner}\n  }}{comma}')
        else:
            lines.append(f"  {_dump(key)}: {_dump(value)}{comma}")
    return "{\n" + "\n".join(lines) + "\n}\n"


def _require(cond, msg, where):
    if not cond:
        err = ModelSyntaxError(msg)
        err.location = where
        raise err


def parse_document(text: str, strict: bool = False) -> ModelDocument:
    """Parse JSON or text-table input into a :class:`ModelDocument`."""
    if not text.lstrip().startswith("{"):
        return parse_table(text)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    _require(isinstance(raw, dict), "a model document must be a JSON object", "$")
    extra = {k: v for k, v in raw.items() if k not in FIELDS}
    if strict and extra:
        err = UnknownField(f"unknown fields {sorted(extra)}")
        err.location = "$." + sorted(extra)[0]
        raise err
    version = raw.get("format_version")
    _require(version == FORMAT_VERSION, f"unsupported format_version {version!r}", "$.format_version")
    for key in ("measurements", "outcomes", "contexts"):
        _require(key in raw, f"missing field {key!r}", "$")

    def strs(values, where):
        _require(isinstance(values, list), "expected a list", where)
        out = []
        for i, v in enumerate(values):
            _require(isinstance(v, (str, int)) and not isinstance(v, bool), "expected a string", f"{where}[{i}]")
            out.append(str(v))
        return out

    meas = strs(raw["measurements"], "$.measurements")
    _require(isinstance(raw["outcomes"], dict), "expected an object", "$.outcomes")
    outs = {str(m): strs(v, f"$.outcomes.{m}") for m, v in raw["outcomes"].items()}
    _require(isinstance(raw["contexts"], list), "expected a list", "$.contexts")
    ctxs = [strs(c, f"$.contexts[{i}]") for i, c in enumerate(raw["contexts"])]
    support = raw.get("support", {})
    _require(isinstance(support, dict), "expected an object", "$.support")
    sup = {}
    for key, rows in support.items():
        _require(isinstance(rows, list), "expected a list of outcome tuples", f"$.support.{key}")
        sup[key] = [strs(r, f"$.support.{key}[{i}]") for i, r in enumerate(rows)]
    metadata = raw.get("metadata", {})
    _require(isinstance(metadata, dict), "expected an object", "$.metadata")
    return ModelDocument(meas, outs, ctxs, sup, metadata, version, extra)


_TABLE_LINE = re.compile(r"^(?P<ctx>[^|]+)\|(?P<rows>.*)$")


def parse_table(text: str) -> ModelDocument:
    """Parse the text-table dialect."""
    default_out = None
    outs: dict = {}
    ctxs, sup = [], {}
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        col = len(body) - len(body.lstrip()) + 1
        stripped = body.strip()
        if stripped.startswith("outcomes"):
            head, sep, values = stripped.partition(":")
            if not sep or not values.split():
                raise ModelSyntaxError("expected 'outcomes [measurement]: o1 o2 ...'", lineno, col)
            names = head.split()[1:]
            if not names:
                default_out = values.split()
            for m in names:
                outs[m] = values.split()
            continue
        match = _TABLE_LINE.match(stripped)
        if not match:
            raise ModelSyntaxError("expected 'm1 m2 | o1,o2 ...'", lineno, col)
        ctx = match["ctx"].split()
        if not ctx:
            raise ModelSyntaxError("missing context measurements", lineno, col)
        order = sorted(ctx, key=sort_key)
        key = context_key(ctx)
        rows = []
        offset = col + stripped.index("|") + 1
        for tok_match in re.finditer(r"\S+", match["rows"]):
            tok = tok_match.group()
            vals = tok.split(",")
            if len(vals) != len(ctx):
                pos = offset + tok_match.start()
                raise ModelSyntaxError(f"section {tok!r} has {len(vals)} values for {len(ctx)} measurements", lineno, pos)
            by_m = dict(zip(ctx, vals))
            rows.append([by_m[m] for m in order])
        ctxs.append(ctx)
        sup.setdefault(key, []).extend(rows)
    meas = sorted({m for c in ctxs for m in c}, key=sort_key)
    for m in meas:
        if m not in outs:
            if default_out is None:
                raise ModelSyntaxError(f"no outcome set for measurement {m!r}", None, None)
            outs[m] = list(default_out)
    return ModelDocument(meas, outs, ctxs, sup, {})


def document_to_model(doc: ModelDocument) -> EmpiricalModel:
    try:
        scenario = build_scenario(doc.measurements, doc.outcomes, doc.contexts)
    except CtxkitError as exc:
        exc.location = exc.location or "$.contexts"
        raise
    support = {}
    for ctx in scenario.contexts:
        key = context_key(ctx)
        order = scenario.ordered_contexts[scenario.context_index[ctx]]
        rows = doc.support.get(key, [])
        secs = []
        for i, row in enumerate(rows):
            if len(row) != len(order):
                err = SectionOutsideEvents(f"expected {len(order)} outcomes, got {len(row)}")
                err.location = f"$.support.{key}[{i}]"
                raise err
            secs.append(Section.of(order, row))
        support[ctx] = secs
    unknown = set(doc.support) - {context_key(c) for c in scenario.contexts}
    if unknown:
        err = InputError(f"support given for unknown contexts {sorted(unknown)}")
        err.location = f"$.support.{sorted(unknown)[0]}"
        raise err
    try:
        return build_model(scenario, support)
    except CtxkitError as exc:
        ctx = getattr(exc, "context", None)
        if exc.location is None:
            exc.location = f"$.support.{context_key(ctx)}" if ctx is not None else "$.support"
        raise


def model_to_document(model: EmpiricalModel, metadata: dict | None = None) -> ModelDocument:
    sc = model.scenario
    support = {}
    for ctx, order in zip(sc.contexts, sc.ordered_contexts):
        support[context_key(ctx)] = [[s[m] for m in order] for s in model.support[ctx]]
    return ModelDocument(
        [render(m) for m in sc.measurements],
        {render(m): [render(o) for o in sc.outcomes[m]] for m in sc.measurements},
        [list(order) for order in sc.ordered_contexts],
        support,
        dict(metadata or {}),
    )


def parse_model(text: str, strict: bool = False) -> EmpiricalModel:
    return document_to_model(parse_document(text, strict))


def emit_model(model: EmpiricalModel, metadata: dict | None = None) -> str:
    return emit_document(model_to_document(model, metadata))


# DOT -------------------------------------------------------------------

def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_bundle_dot(model: EmpiricalModel, name: str = "bundle") -> str:
    """Bundle-diagram data as an undirected DOT graph.

    One cluster per context holding a node per possible section, one base node
    per measurement, and an edge from each section to each of its measurements
    labelled with the chosen outcome.
    """
    sc = model.scenario
    out = [f"graph {_q(name)} {{", "  compound=true;", "  node [fontsize=10];"]
    out.append("  subgraph cluster_base {")
    out.append('    label="measurements";')
    for i, m in enumerate(sc.measurements):
        out.append(f"    m{i} [label={_q(render(m))}, shape=box];")
    out.append("  }")
    edges = []
    for c, ctx in enumerate(sc.contexts):
        out.append(f"  subgraph cluster_c{c} {{")
        out.append(f"    label={_q(render(ctx))};")
        for p, s in enumerate(model.support[ctx]):
            node = f"s{c}_{p}"
            vals = ",".join(render(v) for v in s.values)
            out.append(f"    {node} [label={_q(vals)}, shape=ellipse];")
            for m, v in s.items:
                edges.append(f"  {node} -- m{sc.index[m]} [label={_q(render(v))}];")
        out.append("  }")
    out.extend(edges)
    out.append("}")
    return "\n".join(out) + "\n"


def bundle_counts(model: EmpiricalModel) -> dict:
    """Counts of the exported diagram: fiber sections per context and outcome edges."""
    return {
        "contexts": len(model.contexts),
        "fiber_sections": sum(len(v) for v in model.support.values()),
        "outcome_edges": sum(len(s) for v in model.support.values() for s in v),
    }


# tower levels ----------------------------------------------------------

def level_document(jl) -> ModelDocument:
    """A tower level as a standalone document.

    Level-``k`` measurements are named ``c<i>`` after the index of the
    level-``k-1`` context, outcomes are indices into that context's possible
    sections, and the metadata legend spells both out.  Outcome sets list the
    possible sections only.
    """
    if jl.parent is None:
        return model_to_document(jl.base, {"level": 0})
    up = jl.parent
    meas = [f"c{i}" for i in range(up.ncontexts)]
    outs = {f"c{i}": [str(p) for p in range(up.table.sizes[i])] for i in range(up.ncontexts)}
    contexts, support = [], {}
    for (i, j), pairs in zip(jl.members, jl.pairs):
        names = [f"c{i}", f"c{j}"]
        contexts.append(sorted(names))
        order = sorted(names)
        rows = []
        for p, q in pairs:
            val = {f"c{i}": str(p), f"c{j}": str(q)}
            rows.append([val[m] for m in order])
        support[context_key(names)] = rows
    legend = {
        f"c{i}": {
            "context": render(up.contexts[i]),
            "sections": [up.section(i, p).render() for p in range(up.table.sizes[i])],
        }
        for i in range(up.ncontexts)
    } if jl.level <= 2 else {f"c{i}": {"context_members": list(up.members[i])} for i in range(up.ncontexts)}
    meta = {"level": jl.level, "legend": legend, "outcomes": "possible sections of the level below only"}
    return ModelDocument(meas, outs, contexts, support, meta)


__all__ = [
    "FORMAT_VERSION",
    "ModelDocument",
    "UnknownField",
    "bundle_counts",
    "context_key",
    "document_to_model",
    "emit_document",
    "emit_model",
    "export_bundle_dot",
    "level_document",
    "model_to_document",
    "parse_document",
    "parse_model",
    "parse_table",
]
