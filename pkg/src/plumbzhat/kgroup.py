"""Characters of colored DAGs and the alternating closed forms they satisfy.

A character (KElement) is the formal sum of a DAG's node colors: a finitely
supported integer combination of (bits, depth) pairs carrying the depth
truncation it is complete to.  The verify_* functions build the left-hand
objects honestly as DAGs, enumerate their characters, and compare against
the alternating binomial sums exactly; nothing is ever checked numerically.
"""

from __future__ import annotations

from math import comb
from typing import Iterable, Iterator, Mapping, NamedTuple, Optional, Sequence

from .dagcat import (
    Bits,
    ColoredDag,
    MINUS,
    PLUS,
    all_bits,
    chain,
    fragment_family_left,
    fragment_left,
    fragment_right,
    hypercube,
    product,
    restrict_left,
    restrict_right,
    reverse,
    shift,
    single_node,
)
from .qseries import TruncationError


class KElement:
    """Integer combination of colors with a uniform bit length and a depth bound."""

    __slots__ = ("terms", "truncation", "bit_length")

    def __init__(self, terms: Mapping[tuple[Bits, int], int], truncation: int,
                 bit_length: int):
        self.truncation = truncation
        self.bit_length = bit_length
        clean: dict[tuple[Bits, int], int] = {}
        for (b, d), c in terms.items():
            if len(b) != bit_length:
                raise ValueError(f"bits {b!r} have length {len(b)}, want {bit_length}")
            if d > truncation:
                raise ValueError(f"depth {d} beyond truncation {truncation}")
            if c:
                clean[(b, d)] = c
        self.terms = clean

    @classmethod
    def zero(cls, truncation: int, bit_length: int) -> "KElement":
        return cls({}, truncation, bit_length)

    @classmethod
    def unit(cls, truncation: int) -> "KElement":
        return cls({(Bits(), 0): 1}, truncation, 0)

    def add(self, other: "KElement") -> "KElement":
        if self.bit_length != other.bit_length:
            raise ValueError("bit-length mismatch in addition")
        t = min(self.truncation, other.truncation)
        out = {k: c for k, c in self.terms.items() if k[1] <= t}
        for k, c in other.terms.items():
            if k[1] <= t:
                out[k] = out.get(k, 0) + c
        return KElement(out, t, self.bit_length)

    def scale(self, c: int) -> "KElement":
        return KElement({k: c * v for k, v in self.terms.items()},
                        self.truncation, self.bit_length)

    def shifted(self, bits: Optional[Bits] = None, depth: int = 0) -> "KElement":
        out = {}
        for (b, d), c in self.terms.items():
            nb = b if bits is None else bits.mul(b)
            out[(nb, d + depth)] = c
        return KElement(out, self.truncation + depth, self.bit_length)

    def mul(self, other: "KElement") -> "KElement":
        t = min(self.truncation, other.truncation)
        out: dict[tuple[Bits, int], int] = {}
        for (b1, d1), c1 in self.terms.items():
            for (b2, d2), c2 in other.terms.items():
                d = d1 + d2
                if d > t:
                    continue
                key = (b1.concat(b2), d)
                out[key] = out.get(key, 0) + c1 * c2
        return KElement(out, t, self.bit_length + other.bit_length)

    def permute_bits(self, positions: Sequence[int]) -> "KElement":
        """Reorder bit coordinates: positions[j] is where built coordinate j
        belongs in the result (0-based)."""
        out = {}
        for (b, d), c in self.terms.items():
            arranged = [PLUS] * len(b)
            for j, p in enumerate(positions):
                arranged[p] = b[j]
            out[(Bits(arranged), d)] = c
        return KElement(out, self.truncation, self.bit_length)

    def restricted(self, depth: int) -> "KElement":
        return KElement({k: c for k, c in self.terms.items() if k[1] <= depth},
                        min(self.truncation, depth), self.bit_length)

    def equal_to_depth(self, other: "KElement", depth: int) -> bool:
        if self.truncation < depth or other.truncation < depth:
            raise TruncationError("insufficient truncation for comparison")
        return ({k: c for k, c in self.terms.items() if k[1] <= depth}
                == {k: c for k, c in other.terms.items() if k[1] <= depth})

    def dominates(self, other: "KElement", depth: int) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(self.terms.get(k, 0) >= other.terms.get(k, 0)
                   for k in keys if k[1] <= depth)

    def __eq__(self, other):
        return (isinstance(other, KElement) and self.terms == other.terms
                and self.truncation == other.truncation
                and self.bit_length == other.bit_length)

    def __repr__(self):
        items = sorted(self.terms.items(), key=lambda kv: (kv[0][1], kv[0][0]))
        head = " + ".join(f"{c}*({b.word()},{d})" for (b, d), c in items[:5])
        more = " ..." if len(items) > 5 else ""
        return f"KElement({head}{more}; <= {self.truncation})"


def char(q: ColoredDag, depth: int) -> KElement:
    """Sum of node colors of depth <= `depth`, each with coefficient one."""
    if q.truncation is not None and q.truncation < depth:
        raise TruncationError(
            f"DAG truncated at {q.truncation}, character to {depth} requested"
        )
    terms: dict[tuple[Bits, int], int] = {}
    for c in q.nodes.values():
        if c.depth <= depth:
            key = (c.bits, c.depth)
            terms[key] = terms.get(key, 0) + 1
    return KElement(terms, depth, q.bit_length())


def kmul(a: KElement, b: KElement) -> KElement:
    return a.mul(b)


# ---------------------------------------------------------------------------
# closed forms


def _plus_tower(m: int, depth: int) -> ColoredDag:
    """reverse([+|+-)) fragmented at the all-plus word of length m-1."""
    t0 = depth + 2 * m + 2
    dag = reverse(fragment_left(chain(t0), Bits.plus(1), t0 - 2))
    if m > 1:
        dag = fragment_left(dag, Bits.plus(m - 1), depth)
    return dag


def _star_lhs_dag(lam1: Bits, m: int, depth: int) -> ColoredDag:
    t0 = depth + 2 * m + 2
    base = fragment_left(chain(t0), lam1, t0 - 2)
    base = reverse(restrict_right(base, [Bits.plus(1)]))
    if m == 1:
        return base
    fam = fragment_left(base, Bits.plus(m - 1), depth + 2 * (m - 1))
    return restrict_right(fam, [Bits.minus(m - 1)])


def star_rhs(lam1: Bits, m: int, depth: int, drop_signs: bool = False) -> KElement:
    """Alternating binomial sum of bit/depth shifted tower characters.

    With drop_signs the unsigned companion is produced, which must dominate
    the fragment character termwise.
    """
    if len(lam1) != 1 or m < 1:
        raise ValueError("need a single base bit and m >= 1")
    base = char(_plus_tower(m, depth), depth)
    out = KElement.zero(depth, m)
    conj_weight = lam1.conj().weight
    for nu in all_bits(m):
        sign = 1 if drop_signs else (-1) ** nu.weight
        word = Bits((lam1[0] * nu[0],)).concat(Bits(nu[1:]).conj())
        n = 0
        while True:
            d = 2 * n + m + nu.weight - conj_weight
            if d > depth:
                break
            piece = base.shifted(bits=word, depth=d).scale(sign * comb(n + m - 1, n))
            out = out.add(piece.restricted(depth))
            n += 1
    return out


def verify_star_identity(lam1: Bits, m: int, depth: int) -> bool:
    """Enumerated fragment character equals the alternating closed form."""
    lhs = char(_star_lhs_dag(lam1, m, depth), depth)
    return lhs.equal_to_depth(star_rhs(lam1, m, depth), depth)


class TreeTerm(NamedTuple):
    """One multiplicity-weighted term of the per-node shifted product;
    entries are aligned to the sorted node order."""

    n: tuple[int, ...]
    shifts: tuple[tuple[Bits, int], ...]
    multiplicity: int


def tree_terms(m_vec: Mapping[str, int], nu: Mapping[str, Bits],
               n_ranges: Mapping[str, int], prune=None) -> Iterator[TreeTerm]:
    """Stream the (n, shift, multiplicity) data of the nested product for a
    fixed sign word per node; n_ranges bounds each node's summation index.

    `prune`, when given, sees the partial n assignment (a list aligned to
    the sorted node order) and may cut the whole subtree by returning True.
    """
    order = sorted(m_vec)
    ranges = [n_ranges[v] + 1 for v in order]
    words = [nu[v].conj() for v in order]
    base_depths = [m_vec[v] + nu[v].weight for v in order]
    binom_shifts = [m_vec[v] - 1 for v in order]
    size = len(order)

    def rec(i, current):
        if i == size:
            mult = 1
            for j, n_j in enumerate(current):
                mult *= comb(n_j + binom_shifts[j], n_j)
            shifts = tuple((words[j], 2 * current[j] + base_depths[j])
                           for j in range(size))
            yield TreeTerm(tuple(current), shifts, mult)
            return
        for k in range(ranges[i]):
            current.append(k)
            if prune is None or not prune(current):
                yield from rec(i + 1, current)
            current.pop()

    yield from rec(0, [])


def tree_rhs(m_vec: Mapping[str, int], depth: int) -> KElement:
    """Joint alternating sum over per-node sign words and summation indices."""
    if not m_vec:
        raise ValueError("need at least one node")
    order = sorted(m_vec)
    bases = {mv: char(_plus_tower(mv, depth), depth)
             for mv in set(m_vec.values())}
    total_bits = sum(m_vec.values())
    out = KElement.zero(depth, total_bits)
    for nu_tuple in _product_bits([m_vec[v] for v in order]):
        nu = dict(zip(order, nu_tuple))
        floor_depth = sum(m_vec[v] + nu[v].weight for v in order)
        if floor_depth > depth:
            continue
        sign = (-1) ** sum(w.weight for w in nu_tuple)
        budget = (depth - floor_depth) // 2
        n_ranges = {v: budget for v in order}
        for term in tree_terms(m_vec, nu, n_ranges):
            if 2 * sum(term.n) + floor_depth > depth:
                continue
            piece = KElement.unit(depth)
            for j, v in enumerate(order):
                word, d = term.shifts[j]
                piece = piece.mul(bases[m_vec[v]].shifted(bits=word, depth=d))
            out = out.add(piece.scale(sign * term.multiplicity))
    return out


def verify_tree_identity(m_vec: Mapping[str, int], depth: int) -> bool:
    order = sorted(m_vec)
    lhs = KElement.unit(depth)
    for v in order:
        lhs = lhs.mul(char(_star_lhs_dag(Bits.minus(1), m_vec[v], depth), depth))
    return lhs.equal_to_depth(tree_rhs(m_vec, depth), depth)


# ---------------------------------------------------------------------------
# weight-graded decomposition and defragmentation


def verify_felder(lam1: Bits, h_min: int, h_max: int, depth: int) -> bool:
    """Per-weight character decomposition of the two-sided family into the
    all-plus sub-family and the conjugate sub-family at weight shifted by one."""
    from .dagcat import bilateral

    full = bilateral(lam1, h_min, h_max, depth)
    sub = bilateral(lam1.conj(), h_min + 1, h_max + 1, depth)
    for h in full.components:
        lhs = char(full.component(h), depth)
        rhs = char(full.plus_component(h), depth).add(
            char(sub.plus_component(h + 1), depth))
        if not lhs.equal_to_depth(rhs, depth):
            return False
    return True


def _full_family_char(m: int, depth: int) -> KElement:
    fam = fragment_family_left(chain(depth + 2 * m + 2), all_bits(m),
                               all_bits(m), depth)
    return char(fam, depth)


def _cube_times_family(cube_coords: Sequence[int], rest_coords: Sequence[int],
                       depth: int, inner: Optional[ColoredDag] = None) -> ColoredDag:
    k = len(cube_coords)
    cube = hypercube(all_bits(k), all_bits(k)) if k else single_node()
    if inner is None:
        r = len(rest_coords)
        if r:
            inner = fragment_family_left(chain(depth + 2 * r + 2), all_bits(r),
                                         all_bits(r), depth)
        else:
            inner = chain(depth)
    return product(cube, inner)


def defrag_char(m: int, coords: Iterable[int], depth: int) -> KElement:
    """Character of the glued object replacing the fragments in the chosen
    1-based coordinates by a genuine hypercube factor, reported in the
    original coordinate order."""
    coords = sorted(set(coords))
    if any(c < 1 or c > m for c in coords):
        raise ValueError(f"coordinates must lie in 1..{m}")
    rest = [c for c in range(1, m + 1) if c not in coords]
    dag = _cube_times_family(coords, rest, depth)
    built_order = list(coords) + rest
    positions = [built_order[j] - 1 for j in range(m)]
    return char(dag, depth).permute_bits(positions)


def verify_defrag(m: int, coords: Iterable[int], depth: int) -> bool:
    """Gluing any coordinate subset leaves the character unchanged, and
    gluing in two disjoint stages agrees with gluing jointly."""
    coords = sorted(set(coords))
    full = _full_family_char(m, depth)
    if not full.equal_to_depth(defrag_char(m, coords, depth), depth):
        return False
    for split in range(1, len(coords)):
        first, second = coords[:split], coords[split:]
        rest = [c for c in range(1, m + 1) if c not in coords]
        inner = _cube_times_family(second, rest, depth)
        staged = _cube_times_family(first, [], depth, inner=inner)
        built_order = list(first) + list(second) + rest
        positions = [built_order[j] - 1 for j in range(m)]
        staged_char = char(staged, depth).permute_bits(positions)
        if not full.equal_to_depth(staged_char, depth):
            return False
    return True


def _product_bits(lengths: Sequence[int]) -> Iterator[tuple[Bits, ...]]:
    if not lengths:
        yield ()
        return
    for head in all_bits(lengths[0]):
        for tail in _product_bits(lengths[1:]):
            yield (head,) + tail
