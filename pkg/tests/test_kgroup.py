import random

import pytest

from plumbzhat.dagcat import (
    Bits,
    all_bits,
    chain,
    fragment_left,
    hypercube,
    product,
    restrict_right,
    reverse,
)
from plumbzhat.kgroup import (
    KElement,
    char,
    defrag_char,
    kmul,
    star_rhs,
    tree_rhs,
    tree_terms,
    verify_defrag,
    verify_felder,
    verify_star_identity,
    verify_tree_identity,
)
from plumbzhat.qseries import TruncationError

from test_dagcat import random_colored_dag

B = Bits.from_word


class TestChar:
    def test_chain(self):
        k = char(chain(5), 5)
        assert k.terms == {(B(""), 0): 1, (B(""), 2): 1, (B(""), 4): 1}

    def test_hypercube(self):
        k = char(hypercube(all_bits(1), all_bits(1)), 4)
        assert k.terms == {(B("+"), 0): 1, (B("-"), 1): 2, (B("+"), 2): 1}

    def test_reversal_invariant(self):
        q = fragment_left(chain(12), B("-"), 8)
        assert char(reverse(q), 8) == char(q, 8)

    def test_insufficient_truncation(self):
        with pytest.raises(TruncationError):
            char(chain(5), 9)


class TestKElement:
    def test_unit(self):
        a = char(chain(6), 6)
        assert kmul(a, KElement.unit(6)) == a

    def test_char_multiplicative_over_product(self):
        rng = random.Random(31)
        for _ in range(25):
            a = random_colored_dag(rng, 1, rng.randrange(1, 5))
            b = random_colored_dag(rng, 2, rng.randrange(1, 5))
            bound = min(a.truncation, b.truncation)
            lhs = kmul(char(a, a.truncation), char(b, b.truncation))
            rhs = char(product(a, b), bound)
            assert lhs.equal_to_depth(rhs, bound)

    def test_char_additive_over_disjoint_union(self):
        from plumbzhat.dagcat import ColoredDag

        rng = random.Random(32)
        a = random_colored_dag(rng, 1, 4)
        b = random_colored_dag(rng, 1, 3)
        union = ColoredDag(
            {("a", n): c for n, c in a.nodes.items()}
            | {("b", n): c for n, c in b.nodes.items()},
            {("a", n): c for n, c in a.comps.items()}
            | {("b", n): c for n, c in b.comps.items()},
            set(), max(a.truncation, b.truncation),
        )
        bound = min(a.truncation, b.truncation)
        assert char(union, bound).equal_to_depth(
            char(a, a.truncation).add(char(b, b.truncation)), bound)

    def test_shift_commutes_with_mul(self):
        a = char(fragment_left(chain(12), B("+"), 8), 8)
        b = char(chain(8), 8)
        lhs = kmul(a.shifted(depth=2), b)
        rhs = kmul(a, b).shifted(depth=2)
        assert lhs.restricted(8).terms == rhs.restricted(8).terms


class TestStarIdentity:
    def test_rhs_m1_minus_is_odd_tower(self):
        # alternating cancellation leaves one minus-marked node per odd depth
        out = star_rhs(B("-"), 1, 9)
        assert out.terms == {(B("-"), d): 1 for d in (1, 3, 5, 7, 9)}

    def test_rhs_m1_plus_is_even_tower(self):
        out = star_rhs(B("+"), 1, 9)
        assert out.terms == {(B("+"), d): 1 for d in (0, 2, 4, 6, 8)}

    def test_no_terms_beyond_bound(self):
        out = star_rhs(B("-"), 2, 7)
        assert all(d <= 7 for (_, d) in out.terms)

    @pytest.mark.parametrize("word", ["+", "-"])
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_identity(self, word, m):
        assert verify_star_identity(B(word), m, 12)

    def test_unsigned_sum_dominates_fragment(self):
        from plumbzhat.kgroup import _star_lhs_dag

        for word in ("+", "-"):
            for m in (1, 2):
                unsigned = star_rhs(B(word), m, 10, drop_signs=True)
                lhs = char(_star_lhs_dag(B(word), m, 10), 10)
                assert unsigned.dominates(lhs, 10)


class TestTreeIdentity:
    def test_single_node_matches_star(self):
        assert tree_rhs({"v": 2}, 10).terms == star_rhs(B("-"), 2, 10).terms

    def test_two_nodes_factorize(self):
        joint = tree_rhs({"a": 1, "b": 1}, 10)
        single = tree_rhs({"a": 1}, 10)
        other = tree_rhs({"b": 1}, 10)
        assert joint.equal_to_depth(kmul(single, other), 10)

    @pytest.mark.parametrize("shape", [(1,), (2,), (1, 1), (2, 1)])
    def test_identity(self, shape):
        m_vec = {f"v{i}": m for i, m in enumerate(shape)}
        assert verify_tree_identity(m_vec, 10)

    def test_term_stream_counts(self):
        m_vec = {"a": 2, "b": 1}
        nu = {"a": B("+-"), "b": B("-")}
        terms = list(tree_terms(m_vec, nu, {"a": 2, "b": 1}))
        assert len(terms) == 6
        # binomials: comb(n+1, n) for the m=2 node, 1 for the other
        assert sorted(t.multiplicity for t in terms) == [1, 1, 2, 2, 3, 3]
        for t in terms:
            (word_a, d_a), (word_b, d_b) = t.shifts
            assert word_a == B("-+") and word_b == B("+")
            assert d_a == 2 * t.n[0] + 2 + 1
            assert d_b == 2 * t.n[1] + 1 + 1

    def test_term_stream_prune(self):
        m_vec = {"a": 1, "b": 1}
        nu = {"a": B("+"), "b": B("+")}
        full = list(tree_terms(m_vec, nu, {"a": 3, "b": 3}))
        pruned = list(tree_terms(m_vec, nu, {"a": 3, "b": 3},
                                 prune=lambda ns: sum(ns) > 2))
        assert len(full) == 16
        assert {t.n for t in pruned} == {t.n for t in full if sum(t.n) <= 2}


class TestFelder:
    @pytest.mark.parametrize("word", ["+", "-"])
    def test_window(self, word):
        lam = B(word)
        lo = -6 + (lam.weight % 2)
        hi = 6 - (lam.weight % 2)
        assert verify_felder(lam, lo, hi, 12)

    def test_base_weight_case_by_hand(self):
        # char[l|pm) = char[l|+) + char[lbar|+)_[2|l|]
        lam = B("-")
        frag = fragment_left(chain(16), lam, 12)
        lhs = char(frag, 12)
        plus_part = char(restrict_right(frag, [B("+")]), 12)
        other = fragment_left(chain(16), lam.conj(), 10)
        rhs = plus_part.add(char(other, 10).shifted(depth=2))
        assert lhs.equal_to_depth(rhs, 12)


class TestDefrag:
    def test_empty_selection(self):
        assert verify_defrag(2, [], 8)

    def test_single_coordinate(self):
        assert verify_defrag(1, [1], 8)

    def test_full_and_fubini(self):
        assert verify_defrag(3, [1, 3], 8)
        assert verify_defrag(3, [1, 2, 3], 8)

    def test_defrag_char_matches_family(self):
        from plumbzhat.kgroup import _full_family_char

        full = _full_family_char(2, 8)
        assert full.equal_to_depth(defrag_char(2, [2], 8), 8)

    def test_bad_coordinates(self):
        with pytest.raises(ValueError):
            defrag_char(2, [3], 8)
