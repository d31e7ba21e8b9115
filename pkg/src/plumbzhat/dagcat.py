"""Colored DAG calculus: hypercubes, Cartesian products, fragments, shifts.

A color couples a sign word over {+,-} (the bits) with an integer depth.
Hypercube edges move a single coordinate: the left word grows toward +,
the right word shrinks toward -, so the grading |left| - |right| drops by
exactly one along every edge and the graphs are acyclic by construction.

Objects built over the even depth chain are infinite; every constructor
therefore takes a depth truncation, records the effective truncation it
could honour, and refuses comparisons past it.  Fragments enrich a
hypercube slice with edges pulled back from the opposite slice along the
color-preserving depth-shifted inclusion; the shifted target node must
exist (slimness guarantees it) and is looked up, never assumed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional

PLUS, MINUS = 1, -1


class ShapeError(ValueError):
    """Operands have incompatible bit lengths or the wrong family shape."""


class SlimnessError(ValueError):
    """Fragmentation was requested over a base that is not slim."""


class IsomorphismError(AssertionError):
    """A structurally asserted isomorphism failed to hold."""


class Bits(tuple):
    """Sign word over {+1, -1}; the componentwise product is the group law."""

    __slots__ = ()

    def __new__(cls, entries: Iterable[int] = ()):
        t = tuple(entries)
        if any(x not in (PLUS, MINUS) for x in t):
            raise ValueError(f"bits must be +1/-1, got {t!r}")
        return super().__new__(cls, t)

    @classmethod
    def from_word(cls, word: str) -> "Bits":
        table = {"+": PLUS, "-": MINUS}
        try:
            return cls(table[ch] for ch in word)
        except KeyError:
            raise ValueError(f"bad bits word {word!r}") from None

    @classmethod
    def plus(cls, m: int) -> "Bits":
        return cls((PLUS,) * m)

    @classmethod
    def minus(cls, m: int) -> "Bits":
        return cls((MINUS,) * m)

    def word(self) -> str:
        return "".join("+" if x is PLUS or x == PLUS else "-" for x in self)

    def mul(self, other: "Bits") -> "Bits":
        if len(self) != len(other):
            raise ShapeError(f"bit-length mismatch: {len(self)} vs {len(other)}")
        return Bits(a * b for a, b in zip(self, other))

    def conj(self) -> "Bits":
        return Bits(-x for x in self)

    @property
    def weight(self) -> int:
        return sum(1 for x in self if x == MINUS)

    def concat(self, other: "Bits") -> "Bits":
        return Bits(tuple.__add__(self, other))

    def flips_down(self):
        """Words obtained by flipping one + to - (one covering step down)."""
        for i, x in enumerate(self):
            if x == PLUS:
                yield Bits(self[:i] + (MINUS,) + self[i + 1:])

    def flips_up(self):
        for i, x in enumerate(self):
            if x == MINUS:
                yield Bits(self[:i] + (PLUS,) + self[i + 1:])

    def __repr__(self):
        return f"Bits({self.word()!r})"


def all_bits(m: int) -> tuple[Bits, ...]:
    return tuple(Bits(p) for p in itertools.product((PLUS, MINUS), repeat=m))


class Color(NamedTuple):
    bits: Bits
    depth: int


class ColoredDag:
    """Immutable-by-convention DAG with a color and a component word per node."""

    __slots__ = ("nodes", "comps", "edges", "truncation", "provenance")

    def __init__(self, nodes, comps, edges, truncation, provenance=None):
        self.nodes: dict = dict(nodes)
        self.comps: dict = dict(comps)
        self.edges: frozenset = frozenset(edges)
        self.truncation: Optional[int] = truncation
        self.provenance = provenance
        for a, b in self.edges:
            assert a in self.nodes and b in self.nodes

    def node_count(self) -> int:
        return len(self.nodes)

    def edge_count(self) -> int:
        return len(self.edges)

    def color_multiset(self) -> dict[Color, int]:
        out: dict[Color, int] = {}
        for c in self.nodes.values():
            out[c] = out.get(c, 0) + 1
        return out

    def min_depth(self) -> Optional[int]:
        return min((c.depth for c in self.nodes.values()), default=None)

    def bit_length(self) -> int:
        for c in self.nodes.values():
            return len(c.bits)
        return 0

    def canonical_key(self, node):
        return (self.comps[node], self.nodes[node])

    def restrict(self, keep: Callable, provenance=None) -> "ColoredDag":
        kept = {n: c for n, c in self.nodes.items() if keep(n)}
        return ColoredDag(
            kept,
            {n: self.comps[n] for n in kept},
            {(a, b) for a, b in self.edges if a in kept and b in kept},
            self.truncation,
            provenance,
        )


def single_node(bits: Bits = Bits(), depth: int = 0) -> ColoredDag:
    node = ("pt", bits, depth)
    return ColoredDag({node: Color(bits, depth)}, {node: Bits()}, set(), None,
                      ("single", bits, depth))


def chain(max_depth: int) -> ColoredDag:
    """The even depth chain 0, 2, 4, ... with empty bits and no arrows."""
    nodes = {d: Color(Bits(), d) for d in range(0, max_depth + 1, 2)}
    return ColoredDag(nodes, {d: Bits() for d in nodes}, set(), max_depth,
                      ("chain",))


def hypercube(left: Iterable[Bits], right: Iterable[Bits],
              max_depth: Optional[int] = None) -> ColoredDag:
    """Induced subgraph of the 2m-cube on the given left/right word sets.

    Node (lam|mu) has bits lam*mu and depth |lam|+|mu|; edges flip one left
    coordinate up or one right coordinate down.
    """
    left = sorted(set(left))
    right = sorted(set(right))
    if not left or not right:
        raise ShapeError("left and right word sets must be nonempty")
    m = len(left[0])
    if any(len(w) != m for w in left) or any(len(w) != m for w in right):
        raise ShapeError("bit-length mismatch between left and right sets")
    nodes = {}
    for lam in left:
        for mu in right:
            c = Color(lam.mul(mu), lam.weight + mu.weight)
            if max_depth is None or c.depth <= max_depth:
                nodes[(lam, mu)] = c
    left_set, right_set = set(left), set(right)
    edges = set()
    for (lam, mu) in nodes:
        for lam2 in lam.flips_up():
            if lam2 in left_set and (lam2, mu) in nodes:
                edges.add(((lam, mu), (lam2, mu)))
        for mu2 in mu.flips_down():
            if mu2 in right_set and (lam, mu2) in nodes:
                edges.add(((lam, mu), (lam, mu2)))
    return ColoredDag(nodes, {n: Bits() for n in nodes}, edges, max_depth,
                      ("hypercube", tuple(left), tuple(right)))


def product(a: ColoredDag, b: ColoredDag) -> ColoredDag:
    """Cartesian product; bits concatenate, depths add, components concatenate."""
    if a.truncation is None:
        trunc = b.truncation
    elif b.truncation is None:
        trunc = a.truncation
    else:
        trunc = min(a.truncation, b.truncation)
    nodes = {}
    comps = {}
    for x, cx in a.nodes.items():
        for y, cy in b.nodes.items():
            c = Color(cx.bits.concat(cy.bits), cx.depth + cy.depth)
            if trunc is not None and c.depth > trunc:
                continue
            nodes[(x, y)] = c
            comps[(x, y)] = a.comps[x].concat(b.comps[y])
    edges = set()
    for (x1, x2) in a.edges:
        for y in b.nodes:
            if (x1, y) in nodes and (x2, y) in nodes:
                edges.add(((x1, y), (x2, y)))
    for (y1, y2) in b.edges:
        for x in a.nodes:
            if (x, y1) in nodes and (x, y2) in nodes:
                edges.add(((x, y1), (x, y2)))
    return ColoredDag(nodes, comps, edges, trunc, ("product", a, b))


def shift(q: ColoredDag, bits: Optional[Bits] = None, depth: int = 0) -> ColoredDag:
    """Transform every color (b, k) to (bits*b, k+depth); structure unchanged."""
    nodes = {}
    for n, c in q.nodes.items():
        nb = c.bits if bits is None else bits.mul(c.bits)
        nodes[n] = Color(nb, c.depth + depth)
    trunc = None if q.truncation is None else q.truncation + depth
    return ColoredDag(nodes, q.comps, q.edges, trunc, ("shift", q, bits, depth))


def reverse(q: ColoredDag) -> ColoredDag:
    return ColoredDag(q.nodes, q.comps, {(b, a) for a, b in q.edges},
                      q.truncation, ("reverse", q))


def is_slim(q: ColoredDag) -> bool:
    """Injectively colored and closed under depth+2, up to the truncation."""
    colors = set()
    for c in q.nodes.values():
        if c in colors:
            return False
        colors.add(c)
    for b, d in colors:
        if q.truncation is not None and d + 2 > q.truncation:
            continue
        if Color(b, d + 2) not in colors:
            return False
    return True


def _color_index(q: ColoredDag) -> dict[Color, object]:
    index = {}
    for n, c in q.nodes.items():
        if c in index:
            raise SlimnessError("base is not injectively colored")
        index[c] = n
    return index


def fragment_left(q: ColoredDag, lam: Bits, max_depth: int) -> ColoredDag:
    """The left fragment: the slice at lam plus edges pulled back from the
    opposite slice along the inclusion lifting base depths by 2(|lam|+|mu|)."""
    if not is_slim(q):
        raise SlimnessError("left fragment requires a slim base")
    m = len(lam)
    teff = max_depth if q.truncation is None else min(max_depth, q.truncation - 2 * m)
    index = _color_index(q)
    mus = all_bits(m)

    nodes = {}
    comps = {}
    iota = {}
    for x, cx in q.nodes.items():
        for mu in mus:
            depth = cx.depth + lam.weight + mu.weight
            if depth > teff:
                continue
            nid = (x, (lam, mu))
            nodes[nid] = Color(cx.bits.concat(lam.mul(mu)), depth)
            comps[nid] = q.comps[x].concat(lam)
            target = Color(cx.bits, cx.depth + 2 * (lam.weight + mu.weight))
            lifted = index.get(target)
            if lifted is None:
                raise SlimnessError(
                    f"shifted node {target} absent below truncation {q.truncation}"
                )
            iota[nid] = lifted

    edges = set()
    # slice edges: base edges at fixed mu, plus one right coordinate down
    for (x1, x2) in q.edges:
        for mu in mus:
            n1, n2 = (x1, (lam, mu)), (x2, (lam, mu))
            if n1 in nodes and n2 in nodes:
                edges.add((n1, n2))
    for nid, c in nodes.items():
        x, (_, mu) = nid
        for mu2 in mu.flips_down():
            n2 = (x, (lam, mu2))
            if n2 in nodes:
                edges.add((nid, n2))
    # pulled-back edges from the opposite slice
    for (y1, y2) in q.edges:
        c1, c2 = q.nodes[y1], q.nodes[y2]
        for mu in mus:
            off = 2 * (lam.weight + mu.weight)
            x1 = index.get(Color(c1.bits, c1.depth - off))
            x2 = index.get(Color(c2.bits, c2.depth - off))
            if x1 is None or x2 is None:
                continue
            n1, n2 = (x1, (lam, mu)), (x2, (lam, mu))
            if n1 in nodes and n2 in nodes:
                edges.add((n1, n2))
    for nid in nodes:
        x1, (_, mu1) = nid
        c1 = q.nodes[x1]
        for mu2 in mu1.flips_down():
            x2 = index.get(Color(c1.bits, c1.depth - 2))
            if x2 is None:
                continue
            n2 = (x2, (lam, mu2))
            if n2 in nodes:
                edges.add((nid, n2))

    return ColoredDag(nodes, comps, edges, teff, ("fragment_left", q, lam))


def fragment_right(q: ColoredDag, lam_bar: Bits, max_depth: int) -> ColoredDag:
    """Mirror of the left fragment: the slice at fixed right word lam_bar,
    enriched from the slice at the complementary left word."""
    if not is_slim(q):
        raise SlimnessError("right fragment requires a slim base")
    m = len(lam_bar)
    teff = max_depth if q.truncation is None else min(max_depth, q.truncation - 2 * m)
    index = _color_index(q)
    nus = all_bits(m)

    nodes = {}
    comps = {}
    for x, cx in q.nodes.items():
        for nu in nus:
            depth = cx.depth + nu.weight + lam_bar.weight
            if depth > teff:
                continue
            nid = (x, (nu, lam_bar))
            nodes[nid] = Color(cx.bits.concat(nu.mul(lam_bar)), depth)
            comps[nid] = q.comps[x].concat(lam_bar)
            target = Color(cx.bits, cx.depth + 2 * (nu.weight + lam_bar.weight))
            if target not in index:
                raise SlimnessError(
                    f"shifted node {target} absent below truncation {q.truncation}"
                )

    edges = set()
    for (x1, x2) in q.edges:
        for nu in nus:
            n1, n2 = (x1, (nu, lam_bar)), (x2, (nu, lam_bar))
            if n1 in nodes and n2 in nodes:
                edges.add((n1, n2))
    for nid in nodes:
        x, (nu, _) = nid
        for nu2 in nu.flips_up():
            n2 = (x, (nu2, lam_bar))
            if n2 in nodes:
                edges.add((nid, n2))
    # pulled back from the complementary left slice
    for (y1, y2) in q.edges:
        c1, c2 = q.nodes[y1], q.nodes[y2]
        for nu in nus:
            off = 2 * (nu.weight + lam_bar.weight)
            x1 = index.get(Color(c1.bits, c1.depth - off))
            x2 = index.get(Color(c2.bits, c2.depth - off))
            if x1 is None or x2 is None:
                continue
            n1, n2 = (x1, (nu, lam_bar)), (x2, (nu, lam_bar))
            if n1 in nodes and n2 in nodes:
                edges.add((n1, n2))
    for nid in nodes:
        x1, (nu1, _) = nid
        c1 = q.nodes[x1]
        for nu2 in nu1.flips_up():
            x2 = index.get(Color(c1.bits, c1.depth + 2))
            if x2 is None:
                continue
            n2 = (x2, (nu2, lam_bar))
            if n2 in nodes:
                edges.add((nid, n2))

    return ColoredDag(nodes, comps, edges, teff, ("fragment_right", q, lam_bar))


def restrict_right(f: ColoredDag, right: Iterable[Bits]) -> ColoredDag:
    """Induced subgraph of a fragment (family) on the given right words."""
    right = set(right)
    prov = None
    if f.provenance and f.provenance[0] == "family_left":
        _, q, d, _ = f.provenance
        prov = ("family_left", q, d, frozenset(right))
    out = f.restrict(lambda nid: nid[1][1] in right, prov)
    return out


def restrict_left(f: ColoredDag, left: Iterable[Bits]) -> ColoredDag:
    left = set(left)
    prov = None
    if f.provenance and f.provenance[0] == "family_left":
        _, q, _, e = f.provenance
        prov = ("family_left", q, frozenset(left), e)
    return f.restrict(lambda nid: nid[1][0] in left, prov)


def fragment_family_left(q: ColoredDag, left: Iterable[Bits],
                         right: Iterable[Bits], max_depth: int) -> ColoredDag:
    """Disjoint union over lam in `left` of the lam-fragment restricted to
    right words in `right`; node identity keeps the (lam, mu) coordinates."""
    left = sorted(set(left))
    right_set = frozenset(right)
    nodes, comps, edges = {}, {}, set()
    trunc = None
    for lam in left:
        frag = restrict_right(fragment_left(q, lam, max_depth), right_set)
        nodes.update(frag.nodes)
        comps.update(frag.comps)
        edges.update(frag.edges)
        trunc = frag.truncation if trunc is None else min(trunc, frag.truncation)
    return ColoredDag(nodes, comps, edges, trunc,
                      ("family_left", q, frozenset(left), right_set))


def isomorphic(a: ColoredDag, b: ColoredDag, up_to: Optional[int] = None,
               a_key: Optional[Callable] = None,
               b_key: Optional[Callable] = None) -> bool:
    """Canonical-relabeling isomorphism: nodes are matched by their
    (component word, color) key, which the constructions keep injective."""
    bound = None
    for t in (a.truncation, b.truncation, up_to):
        if t is not None:
            bound = t if bound is None else min(bound, t)

    def keymap(dag, keyfn):
        table = {}
        for n, c in dag.nodes.items():
            if bound is not None and c.depth > bound:
                continue
            k = keyfn(n) if keyfn else dag.canonical_key(n)
            if k in table:
                raise IsomorphismError(f"key collision at {k}; not canonically labeled")
            table[k] = n
        return table

    ka = keymap(a, a_key)
    kb = keymap(b, b_key)
    if set(ka) != set(kb):
        return False
    inv_a = {n: k for k, n in ka.items()}
    inv_b = {n: k for k, n in kb.items()}
    ea = {(inv_a[x], inv_a[y]) for x, y in a.edges if x in inv_a and y in inv_a}
    eb = {(inv_b[x], inv_b[y]) for x, y in b.edges if x in inv_b and y in inv_b}
    return ea == eb


def op_h0(f: ColoredDag, lam1: int) -> ColoredDag:
    """Keep the sub-family whose first right coordinate is +, and check the
    asserted identification with the base extended by the single (lam1|+) cell."""
    if not (f.provenance and f.provenance[0] == "family_left"):
        raise ShapeError("operation expects a left fragment family")
    _, q, left, right = f.provenance
    m_plus_1 = len(next(iter(left)))
    m = m_plus_1 - 1
    if any(w[0] != lam1 for w in left) or {w[1:] for w in left} != {
        tuple(v) for v in all_bits(m)
    }:
        raise ShapeError("family left words must be lam1 followed by every word")
    if set(right) != set(all_bits(m_plus_1)):
        raise ShapeError("family right words must be unrestricted")

    result = restrict_right(f, {w for w in right if w[0] == PLUS})

    base = product(q, hypercube([Bits((lam1,))], [Bits.plus(1)]))
    rhs = fragment_family_left(base, all_bits(m), all_bits(m),
                               f.truncation if f.truncation is not None else 0)

    def strip_key(n):
        comp, color = result.comps[n], result.nodes[n]
        # drop lam1 from the family word appended by the constructor
        pos = len(comp) - m_plus_1
        return (comp[:pos] + comp[pos + 1:], color)

    if not isomorphic(result, rhs, a_key=strip_key):
        raise IsomorphismError("H0 family does not match its product form")
    return result


def op_quot(f: ColoredDag) -> ColoredDag:
    """Keep the sub-family whose first left coordinate is -, and check the
    identification with fragmenting first at - and then at the remaining words."""
    if not (f.provenance and f.provenance[0] == "family_left"):
        raise ShapeError("operation expects a left fragment family")
    _, q, left, right = f.provenance
    m = len(next(iter(left)))
    if m == 0:
        raise ShapeError("quotient needs at least one coordinate")
    if set(left) != set(all_bits(m)) or set(right) != set(all_bits(m)):
        raise ShapeError("quotient expects the full fragmented family")

    result = restrict_left(f, {w for w in left if w[0] == MINUS})

    inner_depth = f.truncation + 2 * (m - 1) if f.truncation is not None else 0
    base = fragment_left(q, Bits((MINUS,)), inner_depth)
    rhs = fragment_family_left(base, all_bits(m - 1), all_bits(m - 1),
                               f.truncation if f.truncation is not None else 0)
    if not isomorphic(result, rhs):
        raise IsomorphismError("quotient family does not match its nested form")
    return result


@dataclass(frozen=True)
class BilateralObject:
    """Weight-graded two-sided family: left fragments above the base weight,
    right fragments below, with the all-plus right/left sub-family exposed."""

    lam1: Bits
    components: dict
    plus_components: dict

    def component(self, h: int) -> ColoredDag:
        return self.components[h]

    def plus_component(self, h: int) -> ColoredDag:
        return self.plus_components[h]


def bilateral(lam1: Bits, h_min: int, h_max: int, max_depth: int) -> BilateralObject:
    if len(lam1) != 1:
        raise ShapeError("bilateral objects take a single base bit")
    w = lam1.weight
    if (h_min - w) % 2 or (h_max - w) % 2:
        raise ShapeError(f"weights {h_min}..{h_max} violate the parity of |{lam1.word()}|")
    comps: dict[int, ColoredDag] = {}
    plus: dict[int, ColoredDag] = {}
    for h in range(h_min, h_max + 1, 2):
        if h >= w:
            d = h - w
            base = chain(max_depth - d + 2)
            frag = fragment_left(base, lam1, max_depth - d)
            comps[h] = shift(frag, depth=d)
            plus[h] = shift(restrict_right(frag, [Bits.plus(1)]), depth=d)
        else:
            d = w - h - 2
            base = chain(max_depth - d + 2)
            frag = fragment_right(base, lam1.conj(), max_depth - d)
            comps[h] = shift(frag, depth=d)
            plus[h] = shift(restrict_left(frag, [Bits.minus(1)]), depth=d)
    return BilateralObject(lam1, comps, plus)
