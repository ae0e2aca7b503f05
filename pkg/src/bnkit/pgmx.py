"""Reading and writing networks in the PGMX XML knowledge format.

Format summary (UTF-8, extension ``.pgmx``):

* Root ``<ProbModelXML formatVersion="1.0">`` containing one
  ``<ProbNet type="BayesianNetwork">``.
* ``<Variables>``: ``<Variable name=".." type="finiteStates">`` with
  ``<States><State name=".."/>...</States>``; the optional attribute
  ``ordered="true"`` marks domains usable by MAX/MIN/INV/MINUS and noisy
  MAX.
* ``<Links>``: ``<Link directed="true">`` naming parent then child.
* ``<Potentials>``: one potential per variable; the first listed variable
  is the conditioned child.  ``Table`` values are whitespace-separated
  decimals with the child index varying fastest and later parents
  progressively slower.  ``ICIModel`` potentials carry one
  ``<Subpotential parent="..">`` per parent (a c scalar for OR/AND, the
  c-matrix rows for MAX, plus an ``s`` attribute for AND) and an optional
  ``<Leak>`` block.  ``Function`` potentials name a deterministic function.
* Root priors are Table potentials with no parent variables.

Serialization is deterministic: fixed element order, two-space indentation,
and shortest round-trip positional decimals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from xml.parsers import expat
from xml.sax.saxutils import escape, quoteattr

import numpy as np

from .canonical import (
    DETERMINISTIC_FUNCTIONS,
    DeterministicPotential,
    NoisyAndPotential,
    NoisyMaxPotential,
    NoisyOrPotential,
    Potential,
    TablePotential,
    flat_from_table,
)
from .errors import FormatError, ModelError
from .network import BayesianNetwork, validate_network
from .variables import DiscreteVariable, Finding, ValidationReport

FORMAT_VERSION = "1.0"


@dataclass
class ModelDocument:
    format_version: str
    network: BayesianNetwork
    provenance: str | None = None


# ---------------------------------------------------------------------------
# Position-aware XML reading (expat keeps line/column for every element)
# ---------------------------------------------------------------------------


@dataclass
class _Element:
    tag: str
    attrs: dict[str, str]
    line: int
    column: int
    children: list["_Element"] = field(default_factory=list)
    text_parts: list[str] = field(default_factory=list)

    @property
    def location(self) -> str:
        return f"line {self.line}, column {self.column}"

    def text(self) -> str:
        return "".join(self.text_parts)

    def find_all(self, tag: str) -> list["_Element"]:
        return [c for c in self.children if c.tag == tag]

    def find(self, tag: str) -> "_Element | None":
        found = self.find_all(tag)
        return found[0] if found else None


def _read_xml(data: bytes | str) -> _Element:
    if isinstance(data, str):
        data = data.encode("utf-8")
    parser = expat.ParserCreate("UTF-8")
    root: list[_Element] = []
    stack: list[_Element] = []

    def start(tag, attrs):
        elem = _Element(
            tag, dict(attrs), parser.CurrentLineNumber, parser.CurrentColumnNumber + 1
        )
        if stack:
            stack[-1].children.append(elem)
        else:
            root.append(elem)
        stack.append(elem)

    def end(tag):
        stack.pop()

    def chars(text):
        if stack:
            stack[-1].text_parts.append(text)

    parser.StartElementHandler = start
    parser.EndElementHandler = end
    parser.CharacterDataHandler = chars
    try:
        parser.Parse(data, True)
    except expat.ExpatError as err:
        raise FormatError(
            "malformed-xml",
            expat.errors.messages[err.code],
            location=f"line {err.lineno}, column {err.offset + 1}",
        ) from None
    if not root:
        raise FormatError("malformed-xml", "document has no root element")
    return root[0]


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_ALLOWED = {
    "ProbModelXML": (("formatVersion",), ("ProbNet",)),
    "ProbNet": (("type",), ("Comment", "Variables", "Links", "Potentials")),
    "Comment": ((), ()),
    "Variables": ((), ("Variable",)),
    "Variable": (("name", "type", "ordered"), ("States",)),
    "States": ((), ("State",)),
    "State": (("name",), ()),
    "Links": ((), ("Link",)),
    "Link": (("directed",), ("Variable",)),
    "Potentials": ((), ("Potential",)),
    "Potential": (("type", "role", "model", "name"), ("Variables", "Values", "Subpotential", "Leak")),
    "Subpotential": (("parent", "s"), ("Values",)),
    "Leak": ((), ("Values",)),
    "Values": ((), ()),
}
# inside a Potential, nested Variable elements carry only a name
_POTENTIAL_VARIABLE = (("name",), ())


class _Collector:
    def __init__(self):
        self.report = ValidationReport()

    def error(self, code: str, message: str, where: str):
        self.report.add_error(code, message, where)


def _check_shape(elem: _Element, collector: _Collector, inside_potential=False):
    if elem.tag == "Variable" and inside_potential:
        allowed_attrs, allowed_children = _POTENTIAL_VARIABLE
    elif elem.tag in _ALLOWED:
        allowed_attrs, allowed_children = _ALLOWED[elem.tag]
    else:
        collector.error("unknown-element", f"unexpected element <{elem.tag}>", elem.location)
        return
    for attr in elem.attrs:
        if attr not in allowed_attrs:
            collector.error(
                "unknown-attribute",
                f"unexpected attribute {attr!r} on <{elem.tag}>",
                elem.location,
            )
    nested = inside_potential or elem.tag in ("Potential", "Subpotential", "Leak")
    for child in elem.children:
        if child.tag not in allowed_children and not (
            nested and child.tag == "Variable"
        ):
            collector.error(
                "unknown-element",
                f"unexpected element <{child.tag}> inside <{elem.tag}>",
                child.location,
            )
        else:
            _check_shape(child, collector, nested)


def _parse_values(elem: _Element | None, collector: _Collector, where: str):
    if elem is None:
        collector.error("missing-values", "potential has no <Values>", where)
        return []
    out = []
    for token in elem.text().split():
        try:
            out.append(float(token))
        except ValueError:
            collector.error(
                "bad-number", f"cannot parse number {token!r}", elem.location
            )
            return []
    return out


def _parse_potential(
    elem: _Element,
    variables: dict[str, DiscreteVariable],
    collector: _Collector,
):
    """Returns (child name, parent names, Potential) or None on failure."""
    names: list[str] = []
    vars_block = elem.find("Variables")
    if vars_block is None:
        collector.error(
            "missing-variables", "potential lists no variables", elem.location
        )
        return None
    for v in vars_block.find_all("Variable"):
        name = v.attrs.get("name")
        if name is None:
            collector.error("missing-attribute", "<Variable> lacks name", v.location)
            return None
        if name not in variables:
            collector.error(
                "unknown-variable",
                f"potential references undeclared variable {name!r}",
                v.location,
            )
            return None
        names.append(name)
    if not names:
        collector.error(
            "missing-variables", "potential lists no variables", vars_block.location
        )
        return None
    child, parents = names[0], names[1:]

    kind = elem.attrs.get("type")
    if kind == "Table":
        values = _parse_values(elem.find("Values"), collector, elem.location)
        expected = variables[child].cardinality * int(
            np.prod([variables[p].cardinality for p in parents], dtype=np.int64)
        )
        if len(values) != expected:
            collector.error(
                "table-size-mismatch",
                f"table for {child!r} has {len(values)} values, expected {expected}",
                elem.location,
            )
            return None
        return child, parents, TablePotential(values)

    if kind == "Function":
        fn = elem.attrs.get("name")
        if fn not in DETERMINISTIC_FUNCTIONS:
            collector.error(
                "unknown-function",
                f"unknown deterministic function {fn!r}",
                elem.location,
            )
            return None
        return child, parents, DeterministicPotential(fn)

    if kind == "ICIModel":
        model = elem.attrs.get("model")
        subs: dict[str, _Element] = {}
        for sub in elem.find_all("Subpotential"):
            parent = sub.attrs.get("parent")
            if parent is None:
                collector.error(
                    "missing-attribute", "<Subpotential> lacks parent", sub.location
                )
                return None
            if parent in subs:
                collector.error(
                    "duplicate-potential",
                    f"two subpotentials for parent {parent!r}",
                    sub.location,
                )
                return None
            subs[parent] = sub
        if sorted(subs) != sorted(parents):
            collector.error(
                "links-mismatch",
                f"subpotentials {sorted(subs)} do not cover parents {sorted(parents)}",
                elem.location,
            )
            return None
        leak_elem = elem.find("Leak")
        leak_values = None
        if leak_elem is not None:
            leak_values = _parse_values(
                leak_elem.find("Values"), collector, leak_elem.location
            )

        if model == "OR" or model == "AND":
            c, s = [], []
            for p in parents:
                values = _parse_values(
                    subs[p].find("Values"), collector, subs[p].location
                )
                if len(values) != 1:
                    collector.error(
                        "table-size-mismatch",
                        f"subpotential for {p!r} must hold one c value",
                        subs[p].location,
                    )
                    return None
                c.append(values[0])
                if model == "AND":
                    try:
                        s.append(float(subs[p].attrs.get("s", "0")))
                    except ValueError:
                        collector.error(
                            "bad-number",
                            f"cannot parse s attribute on {p!r}",
                            subs[p].location,
                        )
                        return None
            if model == "OR":
                leak = None
                if leak_values is not None:
                    if len(leak_values) != 1:
                        collector.error(
                            "table-size-mismatch",
                            "noisy OR leak must hold one value",
                            leak_elem.location,
                        )
                        return None
                    leak = leak_values[0]
                return child, parents, NoisyOrPotential(c, leak)
            if leak_values is not None:
                collector.error(
                    "unknown-element", "noisy AND takes no leak", leak_elem.location
                )
                return None
            return child, parents, NoisyAndPotential(c, s)

        if model == "MAX":
            n_child = variables[child].cardinality
            matrices = []
            for p in parents:
                values = _parse_values(
                    subs[p].find("Values"), collector, subs[p].location
                )
                rows = variables[p].cardinality
                if len(values) != rows * n_child:
                    collector.error(
                        "table-size-mismatch",
                        f"noisy MAX block for {p!r} has {len(values)} values, "
                        f"expected {rows * n_child}",
                        subs[p].location,
                    )
                    return None
                matrices.append(
                    tuple(
                        tuple(values[r * n_child : (r + 1) * n_child])
                        for r in range(rows)
                    )
                )
            return child, parents, NoisyMaxPotential(matrices, leak_values)

        collector.error(
            "unknown-element", f"unknown ICI model {model!r}", elem.location
        )
        return None

    collector.error(
        "unknown-element", f"unknown potential type {kind!r}", elem.location
    )
    return None


def inspect_model(data: bytes | str) -> tuple[ModelDocument | None, ValidationReport]:
    """Parse leniently: collect every finding instead of stopping at the
    first, and return whatever document could be built."""
    collector = _Collector()
    try:
        root = _read_xml(data)
    except FormatError as err:
        collector.error(err.code, str(err), err.location or "document")
        return None, collector.report

    if root.tag != "ProbModelXML":
        collector.error(
            "unknown-element", f"root element is <{root.tag}>", root.location
        )
        return None, collector.report
    _check_shape(root, collector)
    version = root.attrs.get("formatVersion")
    if version != FORMAT_VERSION:
        collector.error(
            "unsupported-version",
            f"format version {version!r} is not supported",
            root.location,
        )
        return None, collector.report
    prob_net = root.find("ProbNet")
    if prob_net is None:
        collector.error("unknown-element", "missing <ProbNet>", root.location)
        return None, collector.report
    if prob_net.attrs.get("type") != "BayesianNetwork":
        collector.error(
            "unsupported-model-type",
            f"ProbNet type {prob_net.attrs.get('type')!r} is not supported",
            prob_net.location,
        )
        return None, collector.report

    comment = prob_net.find("Comment")
    provenance = comment.text().strip() if comment is not None else None

    variables: dict[str, DiscreteVariable] = {}
    var_order: list[str] = []
    var_locations: dict[str, str] = {}
    vars_block = prob_net.find("Variables")
    for v in vars_block.find_all("Variable") if vars_block is not None else []:
        name = v.attrs.get("name")
        if name is None:
            collector.error("missing-attribute", "<Variable> lacks name", v.location)
            continue
        if v.attrs.get("type") != "finiteStates":
            collector.error(
                "unsupported-variable-type",
                f"variable {name!r} must have type=\"finiteStates\"",
                v.location,
            )
            continue
        if name in variables:
            collector.error(
                "duplicate-variable", f"variable {name!r} declared twice", v.location
            )
            continue
        states_block = v.find("States")
        states = [
            s.attrs.get("name", "")
            for s in (states_block.find_all("State") if states_block else [])
        ]
        ordered = v.attrs.get("ordered", "false").lower() == "true"
        try:
            variables[name] = DiscreteVariable(name, tuple(states), ordered)
        except ModelError as err:
            collector.error(err.code, str(err), v.location)
            continue
        var_order.append(name)
        var_locations[name] = v.location

    links: list[tuple[str, str]] = []
    links_block = prob_net.find("Links")
    for link in links_block.find_all("Link") if links_block is not None else []:
        if link.attrs.get("directed", "true").lower() != "true":
            collector.error(
                "unsupported-link", "links must be directed", link.location
            )
            continue
        ends = [v.attrs.get("name") for v in link.find_all("Variable")]
        if len(ends) != 2 or None in ends:
            collector.error(
                "dangling-link", "link must name parent and child", link.location
            )
            continue
        missing = [e for e in ends if e not in variables]
        if missing:
            collector.error(
                "dangling-link",
                f"link references undeclared variable {missing[0]!r}",
                link.location,
            )
            continue
        links.append((ends[0], ends[1]))

    potentials: dict[str, Potential] = {}
    parents_by_child: dict[str, list[str]] = {}
    potential_locations: dict[str, str] = {}
    pot_block = prob_net.find("Potentials")
    for p in pot_block.find_all("Potential") if pot_block is not None else []:
        parsed = _parse_potential(p, variables, collector)
        if parsed is None:
            continue
        child, parents, potential = parsed
        if child in potentials:
            collector.error(
                "duplicate-potential",
                f"variable {child!r} has two potentials",
                p.location,
            )
            continue
        declared = sorted(a for a, b in links if b == child)
        if sorted(parents) != declared:
            collector.error(
                "links-mismatch",
                f"potential parents {sorted(parents)} of {child!r} do not match "
                f"declared links {declared}",
                p.location,
            )
            continue
        potentials[child] = potential
        parents_by_child[child] = list(parents)
        potential_locations[child] = p.location

    for name in var_order:
        if name not in potentials:
            collector.error(
                "missing-potential",
                f"variable {name!r} has no potential",
                var_locations.get(name, "document"),
            )

    if not collector.report.ok:
        return None, collector.report

    net = BayesianNetwork(
        [variables[name] for name in var_order], parents_by_child, potentials
    )
    semantic = validate_network(net)
    for finding in semantic.errors:
        # re-home findings at the defective potential's source position
        location = finding.location
        for name in var_order:
            if location == f"variable {name}":
                location = potential_locations.get(name, location)
                break
        collector.report.errors.append(
            Finding(finding.code, finding.message, location)
        )
    collector.report.warnings.extend(semantic.warnings)
    return ModelDocument(version, net, provenance), collector.report


def parse_model(data: bytes | str) -> ModelDocument:
    """Strict parse: any finding raises a FormatError carrying the report."""
    doc, report = inspect_model(data)
    if not report.ok:
        first = report.errors[0]
        structural = doc is None
        err = FormatError(
            first.code if structural else "invalid-model",
            first.message,
            location=first.location,
        )
        err.report = report
        raise err
    return doc


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def format_number(value: float) -> str:
    """Shortest positional decimal that round-trips to the same float."""
    return np.format_float_positional(float(value), unique=True, trim="-")


def _values_line(values) -> str:
    return " ".join(format_number(v) for v in np.asarray(values).ravel())


def serialize_model(doc: ModelDocument, expand: bool = False) -> bytes:
    net = doc.network
    lines: list[str] = ['<?xml version="1.0" encoding="UTF-8"?>']
    lines.append(f'<ProbModelXML formatVersion="{doc.format_version}">')
    lines.append('  <ProbNet type="BayesianNetwork">')
    if doc.provenance:
        lines.append(f"    <Comment>{escape(doc.provenance)}</Comment>")
    lines.append("    <Variables>")
    for var in net.variables:
        ordered = ' ordered="true"' if var.ordered else ""
        lines.append(
            f'      <Variable name={quoteattr(var.name)} type="finiteStates"{ordered}>'
        )
        lines.append("        <States>")
        for state in var.states:
            lines.append(f"          <State name={quoteattr(state)}/>")
        lines.append("        </States>")
        lines.append("      </Variable>")
    lines.append("    </Variables>")
    lines.append("    <Links>")
    for i, var in enumerate(net.variables):
        for p in net.parents[i]:
            lines.append('      <Link directed="true">')
            lines.append(
                f"        <Variable name={quoteattr(net.variables[p].name)}/>"
            )
            lines.append(f"        <Variable name={quoteattr(var.name)}/>")
            lines.append("      </Link>")
    lines.append("    </Links>")
    lines.append("    <Potentials>")
    for i, var in enumerate(net.variables):
        parent_names = [net.variables[p].name for p in net.parents[i]]
        potential = net.potentials[i]
        if expand and not isinstance(potential, TablePotential):
            potential = TablePotential(flat_from_table(net.cpt(i)))
        lines.extend(_potential_lines(var.name, parent_names, potential))
    lines.append("    </Potentials>")
    lines.append("  </ProbNet>")
    lines.append("</ProbModelXML>")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _variables_block(child: str, parents, indent: str) -> list[str]:
    out = [f"{indent}<Variables>"]
    out.append(f"{indent}  <Variable name={quoteattr(child)}/>")
    for p in parents:
        out.append(f"{indent}  <Variable name={quoteattr(p)}/>")
    out.append(f"{indent}</Variables>")
    return out


def _potential_lines(child: str, parents, potential: Potential) -> list[str]:
    pad = "      "
    out: list[str] = []
    if isinstance(potential, TablePotential):
        out.append(f'{pad}<Potential type="Table" role="conditionalProbability">')
        out.extend(_variables_block(child, parents, pad + "  "))
        out.append(f"{pad}  <Values>{_values_line(potential.values)}</Values>")
    elif isinstance(potential, DeterministicPotential):
        out.append(f'{pad}<Potential type="Function" name="{potential.fn}">')
        out.extend(_variables_block(child, parents, pad + "  "))
    elif isinstance(potential, NoisyOrPotential):
        out.append(f'{pad}<Potential type="ICIModel" model="OR">')
        out.extend(_variables_block(child, parents, pad + "  "))
        for p, c in zip(parents, potential.c):
            out.append(f"{pad}  <Subpotential parent={quoteattr(p)}>")
            out.append(f"{pad}    <Values>{format_number(c)}</Values>")
            out.append(f"{pad}  </Subpotential>")
        if potential.leak is not None:
            out.append(f"{pad}  <Leak>")
            out.append(f"{pad}    <Values>{format_number(potential.leak)}</Values>")
            out.append(f"{pad}  </Leak>")
    elif isinstance(potential, NoisyAndPotential):
        out.append(f'{pad}<Potential type="ICIModel" model="AND">')
        out.extend(_variables_block(child, parents, pad + "  "))
        for p, c, s in zip(parents, potential.c, potential.s):
            out.append(
                f"{pad}  <Subpotential parent={quoteattr(p)} s={quoteattr(format_number(s))}>"
            )
            out.append(f"{pad}    <Values>{format_number(c)}</Values>")
            out.append(f"{pad}  </Subpotential>")
    elif isinstance(potential, NoisyMaxPotential):
        out.append(f'{pad}<Potential type="ICIModel" model="MAX">')
        out.extend(_variables_block(child, parents, pad + "  "))
        for p, matrix in zip(parents, potential.c):
            out.append(f"{pad}  <Subpotential parent={quoteattr(p)}>")
            flat = [v for row in matrix for v in row]
            out.append(f"{pad}    <Values>{_values_line(flat)}</Values>")
            out.append(f"{pad}  </Subpotential>")
        if potential.leak is not None:
            out.append(f"{pad}  <Leak>")
            out.append(f"{pad}    <Values>{_values_line(potential.leak)}</Values>")
            out.append(f"{pad}  </Leak>")
    else:
        raise ModelError(
            "unknown-potential", f"cannot serialize {type(potential).__name__}"
        )
    out.append(f"{pad}</Potential>")
    return out


def networks_equal(a: BayesianNetwork, b: BayesianNetwork) -> bool:
    """Same variables (names, states, order flags), edges, and potentials."""
    return (
        a.variables == b.variables
        and a.parents == b.parents
        and a.potentials == b.potentials
    )
