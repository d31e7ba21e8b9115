"""Parameter structures on rooted trees and the nested series reconstruction.

Each node v of a centered, node-version tree splits its neighbors into one
3-parameter (parent plus two children; three children at the root) and
deg(v)-3 single parameters.  Averaging the per-node alternating products
over all sign assignments and substituting the exact lattice exponents
reproduces the direct series; zhat_nested performs exactly that assembly
and never calls the direct evaluator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Optional

from .dagcat import Bits, MINUS, PLUS
from .kgroup import tree_terms
from .plumbing import (
    NotNegativeDefiniteError,
    PlumbedGraph,
    QuadraticForm,
    RootedTree,
    is_negative_definite,
    theta_form,
)
from .qseries import QSeries
from .zhat import FormGrid, enumeration_bound, lattice_denominator, map_shells


class ParameterStructureError(ValueError):
    """The tree or the parameter assignment violates the structure rules."""


@dataclass(frozen=True)
class ParameterStructure:
    """Per-node neighbor split: delta[v] is an ordered vertex triple (for the
    root: three children; otherwise parent first), one_params[v] the rest."""

    rooted: RootedTree
    delta: Mapping[str, tuple[str, str, str]]
    one_params: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        tree = self.rooted.tree
        _, mids, nodes = tree.degree_partition()
        if mids:
            raise ParameterStructureError("tree has degree-2 vertices")
        if set(self.delta) != nodes or set(self.one_params) != nodes:
            raise ParameterStructureError("parameter maps must cover exactly the nodes")
        for v in nodes:
            triple = self.delta[v]
            ones = self.one_params[v]
            neighbors = set(tree.neighbors(v))
            if len(triple) != 3 or len(set(triple)) != 3:
                raise ParameterStructureError(f"3-parameter of {v} must be a triple")
            if v != self.rooted.root:
                parent = self.rooted.parent[v]
                if triple[0] != parent:
                    raise ParameterStructureError(
                        f"3-parameter of {v} must start with its parent")
                if parent in ones:
                    raise ParameterStructureError(
                        f"the parent of {v} cannot be a 1-parameter")
            if set(triple) | set(ones) != neighbors or \
                    len(triple) + len(ones) != len(neighbors):
                raise ParameterStructureError(
                    f"parameters of {v} must use each neighbor exactly once")
            if self.m_value(v) != 1 + len(ones):
                raise ParameterStructureError(f"recursion number mismatch at {v}")

    def m_value(self, v: str) -> int:
        return self.rooted.tree.degree(v) - 2

    def node_order(self) -> tuple[str, ...]:
        _, _, nodes = self.rooted.tree.degree_partition()
        return tuple(sorted(nodes))

    def m_vector(self) -> dict[str, int]:
        return {v: self.m_value(v) for v in self.node_order()}


def _check_node_version(rt: RootedTree) -> frozenset:
    leaves, mids, nodes = rt.tree.degree_partition()
    if mids:
        raise ParameterStructureError(
            "tree has degree-2 vertices; grow leaves to reach the node version")
    if not nodes:
        raise ParameterStructureError("tree has no vertex of degree >= 3")
    if not rt.is_centered():
        raise ParameterStructureError(
            f"root {rt.root!r} is not a center; re-root at one of {sorted(rt.tree.centers())}")
    if rt.root not in nodes:
        raise ParameterStructureError("root must be a node")
    return nodes


def default_parameter_structure(rt: RootedTree) -> ParameterStructure:
    """Deterministic choice: bottoms are the smallest children by id."""
    nodes = _check_node_version(rt)
    delta = {}
    ones = {}
    for v in sorted(nodes):
        kids = rt.children[v]
        if v == rt.root:
            delta[v] = (kids[0], kids[1], kids[2])
            ones[v] = tuple(kids[3:])
        else:
            delta[v] = (rt.parent[v], kids[0], kids[1])
            ones[v] = tuple(kids[2:])
    return ParameterStructure(rt, delta, ones)


def all_parameter_structures(rt: RootedTree) -> Iterator[ParameterStructure]:
    """Every valid bottom choice at every node (1-parameter order is canonical)."""
    nodes = sorted(_check_node_version(rt))
    options = []
    for v in nodes:
        kids = rt.children[v]
        take = 3 if v == rt.root else 2
        options.append([tuple(c) for c in itertools.combinations(kids, take)])
    for chosen in itertools.product(*options):
        delta, ones = {}, {}
        for v, picked in zip(nodes, chosen):
            rest = tuple(c for c in rt.children[v] if c not in picked)
            if v == rt.root:
                delta[v] = picked
            else:
                delta[v] = (rt.parent[v],) + picked
            ones[v] = rest
        yield ParameterStructure(rt, delta, ones)


@dataclass(frozen=True)
class InitialCondition:
    e: Mapping[str, int]
    eps: Mapping[str, int]

    def parameter(self, x: str) -> int:
        if x in self.e:
            return self.e[x]
        return self.eps[x]


def all_initial_conditions(ps: ParameterStructure) -> Iterator[InitialCondition]:
    leaves, _, nodes = ps.rooted.tree.degree_partition()
    nodes = sorted(nodes)
    leaves = sorted(leaves)
    for evals in itertools.product((PLUS, MINUS), repeat=len(nodes)):
        for epsvals in itertools.product((PLUS, MINUS), repeat=len(leaves)):
            yield InitialCondition(dict(zip(nodes, evals)),
                                   dict(zip(leaves, epsvals)))


def nu_bits(ps: ParameterStructure, ic: InitialCondition, v: str) -> Bits:
    """First coordinate: product of the triple's parameters; then the
    1-parameters in canonical order."""
    triple = ps.delta[v]
    first = 1
    for x in triple:
        first *= ic.parameter(x)
    rest = tuple(ic.parameter(x) for x in ps.one_params[v])
    return Bits((first,) + rest)


def sign_prefactor(pg: PlumbedGraph, ic: InitialCondition) -> int:
    """The product of e_v^(deg(v)-#leaf-neighbors) over nodes times all leaf signs."""
    tree = pg.tree
    leaves, _, nodes = tree.degree_partition()
    sign = 1
    for v in nodes:
        exponent = tree.degree(v) - len(tree.leaf_neighbors(v))
        sign *= ic.e[v] ** exponent
    for i in leaves:
        sign *= ic.eps[i]
    return sign


# ---------------------------------------------------------------------------
# connected components of the 3-parameters


@dataclass(frozen=True)
class DeltaComponent:
    members: frozenset[str]
    vertices: frozenset[str]
    top: Optional[str]
    bottoms: frozenset[str]
    kind: str  # "contains_root_delta" | "top_is_root" | "top_is_one_parameter"


def connected_components(ps: ParameterStructure) -> tuple[DeltaComponent, ...]:
    """Components of the 3-parameters under sharing a non-root vertex."""
    rt = ps.rooted
    nodes = sorted(ps.delta)
    root = rt.root
    adj = {v: set() for v in nodes}
    for v, w in itertools.combinations(nodes, 2):
        shared = (set(ps.delta[v]) & set(ps.delta[w])) - {root}
        if shared:
            adj[v].add(w)
            adj[w].add(v)
    seen = set()
    out = []
    for v in nodes:
        if v in seen:
            continue
        comp = {v}
        stack = [v]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in comp:
                    comp.add(y)
                    stack.append(y)
        seen |= comp
        vertices = set()
        for w in comp:
            vertices |= set(ps.delta[w])
        tops_used = {ps.delta[w][0] for w in comp if w != root}
        if root in comp:
            kind, top = "contains_root_delta", None
        else:
            depths = {x: rt.depth(x) for x in vertices}
            top = min(vertices, key=lambda x: (depths[x], x))
            assert sum(1 for x in vertices if depths[x] == depths[top]) == 1, \
                "component top is not unique"
            if top == root:
                kind = "top_is_root"
            else:
                parent = rt.parent[top]
                assert top in ps.one_params.get(parent, ()), \
                    "non-root component top must be a 1-parameter of its parent"
                kind = "top_is_one_parameter"
        bottoms = frozenset(x for x in vertices if x not in tops_used and x != top)
        out.append(DeltaComponent(frozenset(comp), frozenset(vertices), top,
                                  bottoms, kind))
    return tuple(sorted(out, key=lambda c: sorted(c.members)))


@dataclass(frozen=True)
class ScheduleStep:
    kind: str  # "delta" | "one"
    node: str
    parameter: tuple[str, ...]
    finalized: tuple[str, ...]


@dataclass(frozen=True)
class Schedule:
    steps: tuple[ScheduleStep, ...]
    pre_evaluated: str  # the root, evaluated unconditionally


def evaluation_order(ps: ParameterStructure) -> Schedule:
    """One step per parameter, descendants first; vertices inside a component
    stay lazy until its top (or the root component) has been evaluated."""
    rt = ps.rooted
    comps = connected_components(ps)
    evaluated = {rt.root}
    delta_done: set[str] = set()
    steps = []

    def ripe(comp: DeltaComponent) -> bool:
        if not comp.members <= delta_done:
            return False
        return comp.top is None or comp.top in evaluated

    def settle() -> list[str]:
        new = []
        changed = True
        while changed:
            changed = False
            for comp in comps:
                if ripe(comp):
                    for x in sorted(comp.vertices - evaluated):
                        evaluated.add(x)
                        new.append(x)
                        changed = True
        return new

    for v in rt.postorder():
        if v not in ps.delta:
            continue
        delta_done.add(v)
        steps.append(ScheduleStep("delta", v, ps.delta[v], tuple(settle())))
        for x in ps.one_params[v]:
            fresh = [x] if x not in evaluated else []
            evaluated.add(x)
            fresh += settle()
            steps.append(ScheduleStep("one", v, (x,), tuple(fresh)))

    missing = ps.rooted.tree.vertices - evaluated
    assert not missing, f"vertices never evaluated: {sorted(missing)}"
    assert len(steps) == sum(ps.m_vector().values())
    return Schedule(tuple(steps), rt.root)


# ---------------------------------------------------------------------------
# the nested series


@dataclass(frozen=True)
class ZhatTerm:
    ic: InitialCondition
    n: Mapping[str, int]
    sign: int
    multiplicity: int
    lattice_vector: Mapping[str, Fraction]
    exponent: Fraction


def _leaf_offset(pg: PlumbedGraph, ic: InitialCondition, v: str) -> Fraction:
    total = Fraction(0)
    for i in pg.tree.leaf_neighbors(v):
        total += Fraction(ic.eps[i], 2 * pg.weights[i])
    return total


def _validate_nested_inputs(pg: PlumbedGraph, ps: ParameterStructure) -> QuadraticForm:
    tree = pg.tree
    if ps.rooted.tree != tree:
        raise ParameterStructureError("parameter structure is over a different tree")
    if not is_negative_definite(pg.linking_matrix()):
        raise NotNegativeDefiniteError("linking matrix is not negative definite")
    _, mids, _ = tree.degree_partition()
    if mids:
        raise ParameterStructureError(
            "tree has degree-2 vertices: use the direct evaluator zhat_bosonic")
    return theta_form(pg)


class _ShellPrefix:
    """Stateful exact pruning of the term stream: mirrors the partial n
    assignment as a scaled lattice prefix and keeps the incremental running
    numerators of the form's completion minimum."""

    def __init__(self, grid: FormGrid, order: Fraction, signs, base_u):
        self.grid = grid
        self.order = order
        self.signs = signs
        self.base_u = base_u
        self.d = grid.lattice_denominator
        self.u: list[int] = []
        self.runnings: list[int] = []

    def __call__(self, partial) -> bool:
        j = len(partial) - 1
        del self.u[j:]
        del self.runnings[j:]
        self.u.append(self.signs[j] * (partial[j] * self.d + self.base_u[j]))
        running = self.grid.push(self.u, self.runnings[-1] if self.runnings else 0)
        self.runnings.append(running)
        return self.grid.exceeds(running, self.order)

    def accepted_exponent(self, size: int) -> Optional[Fraction]:
        """Exponent of the current full assignment, or None beyond the order;
        valid right after the stream yielded a term of that size."""
        if len(self.runnings) != size:
            return None
        running = self.runnings[-1]
        if self.grid.exceeds(running, self.order):
            return None
        return Fraction(running, self.grid.denominator)


def _ic_shell(pg: PlumbedGraph, ps: ParameterStructure, form: QuadraticForm,
              grid: FormGrid, bounds: Mapping[str, int], order: Fraction,
              ic: InitialCondition, bound_slack: int):
    """Per-initial-condition setup: the sign (validated against the per-node
    alternating products), scaled offsets, index ranges, and the pruner."""
    tree = pg.tree
    nodes = list(form.vertices)
    m_vec = ps.m_vector()
    # canonical node order of the stream matches the form's coordinate order
    assert sorted(m_vec) == nodes
    nu = {v: nu_bits(ps, ic, v) for v in nodes}
    sign = sign_prefactor(pg, ic)
    alternating = 1
    for v in nodes:
        alternating *= (-1) ** nu[v].weight
    assert sign == alternating, "sign prefactor identity violated"

    d = grid.lattice_denominator
    offsets = {}
    base_u = []
    for v in nodes:
        off = Fraction(tree.degree(v) - 2, 2) + _leaf_offset(pg, ic, v)
        offsets[v] = off
        scaled = off * d
        assert scaled.denominator == 1
        base_u.append(int(scaled))
    ranges = {}
    for j, v in enumerate(nodes):
        top = (bounds[v] + bound_slack) * d - base_u[j]
        if top < 0:
            return None
        ranges[v] = top // d
    signs = [ic.e[v] for v in nodes]
    pruner = _ShellPrefix(grid, order, signs, base_u)
    return m_vec, nu, ranges, sign, offsets, pruner


def _ic_terms(pg: PlumbedGraph, ps: ParameterStructure, form: QuadraticForm,
              grid: FormGrid, bounds: Mapping[str, int], order: Fraction,
              ic: InitialCondition, bound_slack: int) -> Iterator[ZhatTerm]:
    shell = _ic_shell(pg, ps, form, grid, bounds, order, ic, bound_slack)
    if shell is None:
        return
    m_vec, nu, ranges, sign, offsets, pruner = shell
    nodes = list(form.vertices)
    for term in tree_terms(m_vec, nu, ranges, prune=pruner):
        expo = pruner.accepted_exponent(len(nodes))
        if expo is None:
            continue
        n = dict(zip(nodes, term.n))
        y = {v: ic.e[v] * (n[v] + offsets[v]) for v in nodes}
        yield ZhatTerm(ic, n, sign, term.multiplicity, y, expo)


def nested_terms(pg: PlumbedGraph, ps: ParameterStructure,
                 order: Fraction | int, bound_slack: int = 0) -> Iterator[ZhatTerm]:
    """Stream every summand of the nested assembly over all initial conditions."""
    order = Fraction(order)
    form = _validate_nested_inputs(pg, ps)
    grid = FormGrid(form, lattice_denominator(pg))
    bounds = enumeration_bound(form, order)
    for ic in all_initial_conditions(ps):
        yield from _ic_terms(pg, ps, form, grid, bounds, order, ic, bound_slack)


def zhat_nested(pg: PlumbedGraph, ps: ParameterStructure, order: Fraction | int,
                bound_slack: int = 0) -> QSeries:
    """Assemble the series from the per-initial-condition nested term stream."""
    order = Fraction(order)
    form = _validate_nested_inputs(pg, ps)
    grid = FormGrid(form, lattice_denominator(pg))
    bounds = enumeration_bound(form, order)
    shells = list(all_initial_conditions(ps))

    size = len(form.vertices)

    def shell_series(ic: InitialCondition) -> dict:
        acc: dict[Fraction, int] = {}
        shell = _ic_shell(pg, ps, form, grid, bounds, order, ic, bound_slack)
        if shell is None:
            return acc
        m_vec, nu, ranges, sign, _, pruner = shell
        for term in tree_terms(m_vec, nu, ranges, prune=pruner):
            expo = pruner.accepted_exponent(size)
            if expo is None:
                continue
            acc[expo] = acc.get(expo, 0) + sign * term.multiplicity
        return acc

    total: dict[Fraction, int] = {}
    for partial in map_shells(shell_series, shells):
        for e, c in partial.items():
            total[e] = total.get(e, 0) + c
    return QSeries({e: c for e, c in total.items() if c}, order)
