"""Finite weighted trees, linking matrices, and the exact exponent form.

Everything here is exact: negative definiteness is decided through integer
leading principal minors (Bareiss), and the inverse linking matrix is
computed over `fractions.Fraction`, never floats.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence


class TreeStructureError(ValueError):
    """The input is not a finite tree (connected, acyclic, simple)."""


class NotNegativeDefiniteError(ValueError):
    """A linking matrix fails the negative definiteness requirement."""


def _norm_edge(a: str, b: str) -> tuple[str, str]:
    if a == b:
        raise TreeStructureError(f"self-loop at vertex {a!r}")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Tree:
    """Undirected connected acyclic graph on string vertex ids."""

    vertices: frozenset[str]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        if not self.vertices:
            raise TreeStructureError("tree needs at least one vertex")
        seen = set()
        for a, b in self.edges:
            if (a, b) != _norm_edge(a, b):
                raise TreeStructureError(f"edge {(a, b)!r} not normalized")
            if a not in self.vertices or b not in self.vertices:
                raise TreeStructureError(f"edge {(a, b)!r} uses unknown vertex")
            if (a, b) in seen:
                raise TreeStructureError(f"duplicate edge {(a, b)!r}")
            seen.add((a, b))
        if len(self.edges) != len(self.vertices) - 1:
            raise TreeStructureError(
                f"{len(self.edges)} edges on {len(self.vertices)} vertices: not a tree"
            )
        if len(self._component(next(iter(self.vertices)))) != len(self.vertices):
            raise TreeStructureError("graph is disconnected")

    @classmethod
    def from_pairs(cls, vertices, edges) -> "Tree":
        return cls(frozenset(vertices), frozenset(_norm_edge(a, b) for a, b in edges))

    def _component(self, start: str) -> set[str]:
        reached = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for u in self.neighbors(v):
                if u not in reached:
                    reached.add(u)
                    queue.append(u)
        return reached

    def neighbors(self, v: str) -> tuple[str, ...]:
        return tuple(sorted(u for a, b in self.edges for u in (a, b)
                            if v in (a, b) and u != v))

    def degree(self, v: str) -> int:
        return sum(1 for a, b in self.edges if v in (a, b))

    def leaf_neighbors(self, v: str) -> tuple[str, ...]:
        """Adjacent leaves of v (the set written v-bar in the series formulas)."""
        leaves, _, _ = self.degree_partition()
        return tuple(u for u in self.neighbors(v) if u in leaves)

    def degree_partition(self) -> tuple[frozenset, frozenset, frozenset]:
        """Split vertices into leaves (deg <= 1), degree-2, and nodes (deg >= 3)."""
        leaves, mid, nodes = set(), set(), set()
        for v in self.vertices:
            d = self.degree(v)
            if d <= 1:
                leaves.add(v)
            elif d == 2:
                mid.add(v)
            else:
                nodes.add(v)
        return frozenset(leaves), frozenset(mid), frozenset(nodes)

    def eccentricity(self, v: str) -> int:
        dist = {v: 0}
        queue = deque([v])
        far = 0
        while queue:
            x = queue.popleft()
            for u in self.neighbors(x):
                if u not in dist:
                    dist[u] = dist[x] + 1
                    far = max(far, dist[u])
                    queue.append(u)
        return far

    def centers(self) -> frozenset[str]:
        """The one or two adjacent vertices of minimal height."""
        ecc = {v: self.eccentricity(v) for v in self.vertices}
        best = min(ecc.values())
        cs = frozenset(v for v, e in ecc.items() if e == best)
        assert 1 <= len(cs) <= 2
        if len(cs) == 2:
            assert _norm_edge(*sorted(cs)) in self.edges
        return cs


@dataclass(frozen=True)
class RootedTree:
    tree: Tree
    root: str
    parent: Mapping[str, Optional[str]] = field(compare=False, default=None)
    children: Mapping[str, tuple[str, ...]] = field(compare=False, default=None)

    def __post_init__(self):
        if self.root not in self.tree.vertices:
            raise TreeStructureError(f"root {self.root!r} is not a vertex")
        parent: dict[str, Optional[str]] = {self.root: None}
        children: dict[str, list[str]] = {v: [] for v in self.tree.vertices}
        queue = deque([self.root])
        while queue:
            v = queue.popleft()
            for u in self.tree.neighbors(v):
                if u not in parent:
                    parent[u] = v
                    children[v].append(u)
                    queue.append(u)
        object.__setattr__(self, "parent", parent)
        object.__setattr__(self, "children",
                           {v: tuple(sorted(c)) for v, c in children.items()})

    def depth(self, v: str) -> int:
        d = 0
        while self.parent[v] is not None:
            v = self.parent[v]
            d += 1
        return d

    def height(self, v: str) -> int:
        """Longest downward path length from v."""
        kids = self.children[v]
        return 0 if not kids else 1 + max(self.height(c) for c in kids)

    def is_centered(self) -> bool:
        return self.root in self.tree.centers()

    def postorder(self) -> tuple[str, ...]:
        out: list[str] = []

        def walk(v):
            for c in self.children[v]:
                walk(c)
            out.append(v)

        walk(self.root)
        return tuple(out)


def grow_leaves(rt: RootedTree) -> RootedTree:
    """Attach leaves until every internal vertex has degree >= 3.

    Adds max(0, 3 - deg(v)) fresh leaves at each non-leaf v; leaves of the
    input are untouched, so the output restricted to the original vertex
    set is the input.
    """
    tree = rt.tree
    if len(tree.vertices) < 2:
        raise TreeStructureError("cannot grow a single-vertex tree")
    vertices = set(tree.vertices)
    edges = set(tree.edges)
    for v in sorted(tree.vertices):
        deg = tree.degree(v)
        if deg <= 1:
            continue
        for i in range(max(0, 3 - deg)):
            name = f"{v}_w{i}"
            while name in vertices:
                name += "x"
            vertices.add(name)
            edges.add(_norm_edge(v, name))
    return RootedTree(Tree(frozenset(vertices), frozenset(edges)), rt.root)


@dataclass(frozen=True)
class PlumbedGraph:
    """Base tree plus an integer weight per vertex, optionally rooted."""

    tree: Tree
    weights: Mapping[str, int]
    rooting: Optional[RootedTree] = None

    def __post_init__(self):
        if set(self.weights) != set(self.tree.vertices):
            raise TreeStructureError("weights must cover exactly the vertex set")
        if self.rooting is not None and self.rooting.tree != self.tree:
            raise TreeStructureError("rooting is over a different tree")

    def vertex_order(self) -> tuple[str, ...]:
        return tuple(sorted(self.tree.vertices))

    def linking_matrix(self) -> list[list[int]]:
        """Weights on the diagonal, 1 per edge, 0 elsewhere (sorted vertex order)."""
        order = self.vertex_order()
        index = {v: i for i, v in enumerate(order)}
        n = len(order)
        w = [[0] * n for _ in range(n)]
        for i, v in enumerate(order):
            w[i][i] = self.weights[v]
        for a, b in self.edges_sorted():
            w[index[a]][index[b]] = 1
            w[index[b]][index[a]] = 1
        return w

    def edges_sorted(self) -> list[tuple[str, str]]:
        return sorted(self.tree.edges)

    def determinant(self) -> int:
        return bareiss_determinant(self.linking_matrix())


# ---------------------------------------------------------------------------
# exact integer / rational linear algebra


def bareiss_determinant(rows: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant of an integer matrix."""
    n = len(rows)
    if n == 0:
        return 1
    m = [list(map(int, r)) for r in rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def leading_principal_minors(rows: Sequence[Sequence[int]]) -> list[int]:
    return [bareiss_determinant([r[: k + 1] for r in rows[: k + 1]])
            for k in range(len(rows))]


def is_negative_definite(w: Sequence[Sequence[int]]) -> bool:
    """Exact test: all leading principal minors of -W positive."""
    n = len(w)
    for row in w:
        if len(row) != n:
            raise ValueError("matrix is not square")
    for i in range(n):
        for j in range(i + 1, n):
            if w[i][j] != w[j][i]:
                raise ValueError("matrix is not symmetric")
    neg = [[-x for x in row] for row in w]
    return all(mk > 0 for mk in leading_principal_minors(neg))


def invert_matrix(rows: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Gauss-Jordan inverse over exact rationals; verifies W * W^-1 = I."""
    n = len(rows)
    a = [[Fraction(x) for x in row] for row in rows]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        a[col], a[pivot] = a[pivot], a[col]
        inv[col], inv[pivot] = inv[pivot], inv[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        inv[col] = [x / p for x in inv[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    for i in range(n):
        for j in range(n):
            check = sum(Fraction(rows[i][k]) * inv[k][j] for k in range(n))
            assert check == (1 if i == j else 0)
    return inv


def _fraction_matrix_is_pd(rows: Sequence[Sequence[Fraction]]) -> bool:
    # clear denominators; scaling a leading block by L^k keeps the minor's sign
    denoms = [x.denominator for row in rows for x in row]
    lcm = 1
    for d in denoms:
        g = _gcd(lcm, d)
        lcm = lcm // g * d
    scaled = [[int(x * lcm) for x in row] for row in rows]
    return all(mk > 0 for mk in leading_principal_minors(scaled))


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


@dataclass(frozen=True)
class QuadraticForm:
    """Positive definite form on the internal vertices, entries exact rationals."""

    vertices: tuple[str, ...]
    matrix: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.vertices)
        assert len(self.matrix) == n and all(len(r) == n for r in self.matrix)
        for i in range(n):
            for j in range(n):
                assert self.matrix[i][j] == self.matrix[j][i]
        assert _fraction_matrix_is_pd(self.matrix)

    def evaluate(self, x: Mapping[str, Fraction]) -> Fraction:
        """The value x^T S x; x must be indexed exactly by the form's vertices."""
        if set(x) != set(self.vertices):
            raise ValueError("vector index set does not match the form")
        vec = [Fraction(x[v]) for v in self.vertices]
        total = Fraction(0)
        for i, row in enumerate(self.matrix):
            for j, s in enumerate(row):
                total += vec[i] * s * vec[j]
        return total

    def inverse(self) -> list[list[Fraction]]:
        return invert_matrix([list(r) for r in self.matrix])


def theta_form(pg: PlumbedGraph) -> QuadraticForm:
    """Restrict -W^-1 to the vertices of degree >= 2, exactly."""
    w = pg.linking_matrix()
    if not is_negative_definite(w):
        raise NotNegativeDefiniteError("linking matrix is not negative definite")
    order = pg.vertex_order()
    internal = [v for v in order if pg.tree.degree(v) >= 2]
    if not internal:
        raise ValueError("no internal vertices: the form is empty")
    inv = invert_matrix([[Fraction(x) for x in row] for row in w])
    idx = {v: i for i, v in enumerate(order)}
    sub = tuple(
        tuple(-inv[idx[a]][idx[b]] for b in internal) for a in internal
    )
    return QuadraticForm(tuple(internal), sub)
