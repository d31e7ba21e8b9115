"""Text formats: the plumbing file grammar, series JSON, and DOT export.

Plumbing files are line based (UTF-8, one statement per line):

    # comment
    v <id> <integer-weight>
    e <id1> <id2>
    root <id>

Ids are alphanumeric-plus-underscore tokens; edges must follow the vertex
statements they cite, and at most one root statement is allowed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from .dagcat import ColoredDag
from .plumbing import PlumbedGraph, RootedTree, Tree, TreeStructureError
from .qseries import QSeries

_ID = re.compile(r"^[A-Za-z0-9_]+$")


class PlumbingParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class PlumbingDocument:
    """Parsed statement list, order preserved."""

    statements: tuple[tuple, ...]  # ("v", id, w) | ("e", a, b) | ("root", id), each with a line no


def _column_of(line: str, token_index: int) -> int:
    pos = 0
    for i, tok in enumerate(line.split()):
        pos = line.index(tok, pos)
        if i == token_index:
            return pos + 1
        pos += len(tok)
    return 1


def parse_document(text: str) -> PlumbingDocument:
    statements = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind == "v":
            if len(tokens) != 3:
                raise PlumbingParseError("expected: v <id> <weight>", lineno)
            if not _ID.match(tokens[1]):
                raise PlumbingParseError(f"bad vertex id {tokens[1]!r}", lineno,
                                         _column_of(raw, 1))
            try:
                weight = int(tokens[2])
            except ValueError:
                raise PlumbingParseError(f"bad weight {tokens[2]!r}", lineno,
                                         _column_of(raw, 2)) from None
            statements.append(("v", tokens[1], weight, lineno))
        elif kind == "e":
            if len(tokens) != 3:
                raise PlumbingParseError("expected: e <id1> <id2>", lineno)
            for i in (1, 2):
                if not _ID.match(tokens[i]):
                    raise PlumbingParseError(f"bad vertex id {tokens[i]!r}", lineno,
                                             _column_of(raw, i))
            statements.append(("e", tokens[1], tokens[2], lineno))
        elif kind == "root":
            if len(tokens) != 2:
                raise PlumbingParseError("expected: root <id>", lineno)
            statements.append(("root", tokens[1], lineno))
        else:
            raise PlumbingParseError(f"unknown statement {kind!r}", lineno)
    return PlumbingDocument(tuple(statements))


def parse_plumbing(text: str) -> PlumbedGraph:
    doc = parse_document(text)
    weights: dict[str, int] = {}
    edges: list[tuple[str, str]] = []
    root: Optional[str] = None
    for st in doc.statements:
        if st[0] == "v":
            _, vid, w, lineno = st
            if vid in weights:
                raise PlumbingParseError(f"duplicate vertex {vid!r}", lineno)
            weights[vid] = w
        elif st[0] == "e":
            _, a, b, lineno = st
            for vid in (a, b):
                if vid not in weights:
                    raise PlumbingParseError(f"unknown vertex {vid!r}", lineno)
            if a == b:
                raise PlumbingParseError(f"self-loop at {a!r}", lineno)
            pair = (a, b) if a < b else (b, a)
            if pair in edges:
                raise PlumbingParseError(f"duplicate edge {a!r}-{b!r}", lineno)
            edges.append(pair)
        else:
            _, vid, lineno = st
            if root is not None:
                raise PlumbingParseError("duplicate root statement", lineno)
            if vid not in weights:
                raise PlumbingParseError(f"unknown root vertex {vid!r}", lineno)
            root = vid
    if not weights:
        raise PlumbingParseError("empty document", 1)
    try:
        tree = Tree(frozenset(weights), frozenset(edges))
    except TreeStructureError as exc:
        raise PlumbingParseError(str(exc), 1) from None
    rooting = RootedTree(tree, root) if root is not None else None
    return PlumbedGraph(tree, weights, rooting)


def print_plumbing(pg: PlumbedGraph) -> str:
    """Canonical text form: sorted vertices, sorted edges, root last."""
    lines = [f"v {v} {pg.weights[v]}" for v in pg.vertex_order()]
    lines += [f"e {a} {b}" for a, b in pg.edges_sorted()]
    if pg.rooting is not None:
        lines.append(f"root {pg.rooting.root}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# DOT export


def _quote(s: str) -> str:
    return '"' + s.replace('"', r'\"') + '"'


def emit_dot(obj: Union[Tree, RootedTree, PlumbedGraph, ColoredDag]) -> str:
    if isinstance(obj, ColoredDag):
        return _dot_dag(obj)
    if isinstance(obj, PlumbedGraph):
        return _dot_tree(obj.tree, weights=obj.weights,
                         rooted=obj.rooting)
    if isinstance(obj, RootedTree):
        return _dot_tree(obj.tree, rooted=obj)
    if isinstance(obj, Tree):
        return _dot_tree(obj)
    raise TypeError(f"cannot export {type(obj).__name__} as DOT")


def _dot_tree(tree: Tree, weights=None, rooted: Optional[RootedTree] = None) -> str:
    lines = ["digraph tree {"]
    for v in sorted(tree.vertices):
        if weights is not None:
            lines.append(f"  {_quote(v)} [label={_quote(f'{v} ({weights[v]})')}];")
        else:
            lines.append(f"  {_quote(v)};")
    for a, b in sorted(tree.edges):
        if rooted is not None and rooted.parent.get(a) == b:
            a, b = b, a
        lines.append(f"  {_quote(a)} -> {_quote(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_dag(dag: ColoredDag) -> str:
    order = sorted(dag.nodes,
                   key=lambda n: (dag.comps[n], dag.nodes[n], repr(n)))
    names = {n: f"n{i}" for i, n in enumerate(order)}
    lines = ["digraph dag {"]
    for n in order:
        color = dag.nodes[n]
        label = f"{color.bits.word()},{color.depth}"
        lines.append(f"  {names[n]} [label={_quote(label)}];")
    for a, b in sorted(dag.edges, key=lambda e: (names[e[0]], names[e[1]])):
        lines.append(f"  {names[a]} -> {names[b]};")
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# series JSON


def serialize_series(s: QSeries) -> str:
    """JSON array of exponent/coefficient pairs, exponents as exact fraction
    strings in lowest terms, ascending."""
    entries = [
        {"exponent": f"{e.numerator}/{e.denominator}", "coefficient": c}
        for e, c in s.items_sorted()
    ]
    return json.dumps(entries)


def _parse_fraction(text: str) -> Fraction:
    num, _, den = text.partition("/")
    if not den:
        raise ValueError(f"exponent {text!r} is not a fraction string")
    return Fraction(int(num), int(den))


def deserialize_series(text: str, order: Fraction | int) -> QSeries:
    data = json.loads(text)
    terms = {_parse_fraction(item["exponent"]): int(item["coefficient"])
             for item in data}
    return QSeries(terms, order)
