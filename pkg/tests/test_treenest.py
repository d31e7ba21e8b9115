import itertools
import random
from fractions import Fraction

import pytest

from plumbzhat.plumbing import PlumbedGraph, RootedTree, Tree
from plumbzhat.treenest import (
    InitialCondition,
    ParameterStructure,
    ParameterStructureError,
    all_initial_conditions,
    all_parameter_structures,
    connected_components,
    default_parameter_structure,
    evaluation_order,
    nested_terms,
    nu_bits,
    sign_prefactor,
    zhat_nested,
)
from plumbzhat.zhat import zhat_bosonic
from plumbzhat.dagcat import Bits

from conftest import random_node_version, star

B = Bits.from_word


def htree(root="u"):
    tree = Tree.from_pairs(
        "uvabcd", [("u", "v"), ("a", "u"), ("b", "u"), ("c", "v"), ("d", "v")]
    )
    weights = {"u": -3, "v": -3, "a": -2, "b": -2, "c": -2, "d": -2}
    return PlumbedGraph(tree, weights, RootedTree(tree, root))


def twin_arm():
    """Root with two symmetric node arms of depth two; its 3-parameter chain
    glues into one multi-member component."""
    edges = [("R", "rl"), ("R", "x"), ("R", "y"),
             ("x", "xl"), ("x", "x2"), ("x2", "x2a"), ("x2", "x2b"),
             ("y", "yl"), ("y", "y2"), ("y2", "y2a"), ("y2", "y2b")]
    vs = {v for e in edges for v in e}
    weights = {v: -3 if v in {"R", "x", "y", "x2", "y2"} else -2 for v in vs}
    tree = Tree.from_pairs(vs, edges)
    return PlumbedGraph(tree, weights, RootedTree(tree, "R"))


class TestDefaultStructure:
    def test_three_leg_star(self):
        ps = default_parameter_structure(star(-1, [-2, -3, -7]).rooting)
        assert ps.delta["c"] == ("l0", "l1", "l2")
        assert ps.one_params["c"] == ()
        assert ps.m_vector() == {"c": 1}

    def test_four_leg_star(self):
        ps = default_parameter_structure(star(-2, [-3, -3, -3, -3]).rooting)
        assert ps.delta["c"] == ("l0", "l1", "l2")
        assert ps.one_params["c"] == ("l3",)
        assert ps.m_vector() == {"c": 2}

    def test_htree_forced_choice(self):
        ps = default_parameter_structure(htree().rooting)
        assert ps.delta["v"] == ("u", "c", "d")
        assert ps.delta["u"] == ("a", "b", "v")
        assert ps.one_params == {"u": (), "v": ()}

    def test_rejects_degree_two(self):
        tree = Tree.from_pairs("abc", [("a", "b"), ("b", "c")])
        with pytest.raises(ParameterStructureError, match="degree-2"):
            default_parameter_structure(RootedTree(tree, "b"))

    def test_rejects_non_centered(self):
        pg = htree()
        leafy = RootedTree(pg.tree, "a")
        with pytest.raises(ParameterStructureError, match="center"):
            default_parameter_structure(leafy)

    def test_validation_rejects_parent_as_one_parameter(self):
        ps = default_parameter_structure(htree().rooting)
        bad_delta = dict(ps.delta)
        bad_delta["v"] = ("c", "d", "u")
        with pytest.raises(ParameterStructureError):
            ParameterStructure(ps.rooted, bad_delta, {"u": (), "v": ()})

    def test_enumeration_counts(self):
        # root choice: C(4,3)=4 for the four-leg star
        pg = star(-2, [-3, -3, -3, -3])
        assert len(list(all_parameter_structures(pg.rooting))) == 4
        assert len(list(all_parameter_structures(htree().rooting))) == 1


class TestComponents:
    def test_star_single_component(self):
        ps = default_parameter_structure(star(-1, [-2, -3, -7]).rooting)
        (comp,) = connected_components(ps)
        assert comp.kind == "contains_root_delta"
        assert comp.top is None
        assert comp.bottoms == {"l0", "l1", "l2"}

    def test_htree_two_components(self):
        ps = default_parameter_structure(htree().rooting)
        comps = {tuple(sorted(c.members)): c for c in connected_components(ps)}
        assert comps[("u",)].kind == "contains_root_delta"
        assert comps[("v",)].kind == "top_is_root"
        assert comps[("v",)].top == "u"
        assert comps[("v",)].bottoms == {"c", "d"}

    def test_all_three_kinds_on_chain_spider(self, corpus):
        ps = default_parameter_structure(corpus["chainspider"].rooting)
        kinds = {tuple(sorted(c.members)): c.kind
                 for c in connected_components(ps)}
        assert kinds[("g",)] == "contains_root_delta"
        assert kinds[("u",)] == "top_is_root"
        assert kinds[("z",)] == "top_is_root"
        assert kinds[("v",)] == "top_is_one_parameter"

    def test_multi_member_component(self):
        ps = default_parameter_structure(twin_arm().rooting)
        comps = connected_components(ps)
        sizes = sorted(len(c.members) for c in comps)
        assert sizes == [1, 1, 3]
        big = next(c for c in comps if len(c.members) == 3)
        assert big.members == {"R", "x2", "y2"}
        assert big.kind == "contains_root_delta"


class TestEvaluationOrder:
    def test_star_single_step(self):
        ps = default_parameter_structure(star(-1, [-2, -3, -7]).rooting)
        sched = evaluation_order(ps)
        assert len(sched.steps) == 1
        assert sched.steps[0].finalized == ("l0", "l1", "l2")

    def test_descendants_before_ancestors(self):
        ps = default_parameter_structure(htree().rooting)
        sched = evaluation_order(ps)
        order = [s.node for s in sched.steps]
        assert order.index("v") < order.index("u")

    def test_step_count_is_total_recursion_number(self, corpus):
        for pg in corpus.values():
            ps = default_parameter_structure(pg.rooting)
            sched = evaluation_order(ps)
            assert len(sched.steps) == sum(ps.m_vector().values())

    def test_every_vertex_finalized_exactly_once(self, corpus):
        for pg in corpus.values():
            ps = default_parameter_structure(pg.rooting)
            sched = evaluation_order(ps)
            final = [v for s in sched.steps for v in s.finalized]
            assert sorted(final + [sched.pre_evaluated]) == sorted(pg.tree.vertices)

    def test_lazy_deferral_on_chain_spider(self, corpus):
        ps = default_parameter_structure(corpus["chainspider"].rooting)
        sched = evaluation_order(ps)
        delta_v = next(s for s in sched.steps if s.kind == "delta" and s.node == "v")
        assert delta_v.finalized == ()
        last = sched.steps[-1]
        assert last.kind == "one" and last.parameter == ("z",)
        assert set(last.finalized) == {"z", "va", "vb"}


class TestNuBits:
    def test_three_leg_star(self):
        ps = default_parameter_structure(star(-1, [-2, -3, -7]).rooting)
        ic = InitialCondition({"c": 1}, {"l0": 1, "l1": 1, "l2": -1})
        assert nu_bits(ps, ic, "c") == B("-")

    def test_four_leg_star(self):
        ps = default_parameter_structure(star(-2, [-3] * 4).rooting)
        ic = InitialCondition({"c": 1}, {"l0": 1, "l1": -1, "l2": -1, "l3": 1})
        assert nu_bits(ps, ic, "c") == B("++")

    def test_htree_node_parameter(self):
        ps = default_parameter_structure(htree().rooting)
        ic = InitialCondition({"u": 1, "v": -1},
                              {"a": 1, "b": 1, "c": 1, "d": 1})
        assert nu_bits(ps, ic, "u") == B("-")

    def test_prefactor_identity_random(self):
        rng = random.Random(101)
        checked = 0
        for _ in range(30):
            rt = random_node_version(rng, rng.randrange(3, 8))
            weights = {v: -3 - rt.tree.degree(v) for v in rt.tree.vertices}
            pg = PlumbedGraph(rt.tree, weights, rt)
            structures = list(all_parameter_structures(rt))
            ps = rng.choice(structures)
            for ic in itertools.islice(all_initial_conditions(ps), 8):
                lhs = 1
                for v in ps.delta:
                    lhs *= (-1) ** nu_bits(ps, ic, v).weight
                assert lhs == sign_prefactor(pg, ic)
                checked += 1
        assert checked >= 100


class TestNested:
    def test_matches_direct_small(self):
        for pg in (star(-1, [-2, -3, -7]), star(-2, [-3] * 4), htree()):
            ps = default_parameter_structure(pg.rooting)
            assert zhat_nested(pg, ps, 8) == zhat_bosonic(pg, 8)

    def test_rejects_degree_two_graphs(self):
        tree = Tree.from_pairs("abc", [("a", "b"), ("b", "c")])
        pg = PlumbedGraph(tree, {v: -2 for v in "abc"}, RootedTree(tree, "b"))
        ps_tree = Tree.from_pairs("abc", [("a", "b"), ("b", "c")])
        with pytest.raises(ParameterStructureError, match="zhat_bosonic"):
            ps = default_parameter_structure(pg.rooting)

    def test_rejects_positive_definite(self):
        pg0 = star(-1, [-2, -3, -7])
        pg = PlumbedGraph(pg0.tree, {v: -w for v, w in pg0.weights.items()},
                          pg0.rooting)
        ps = default_parameter_structure(pg.rooting)
        from plumbzhat.plumbing import NotNegativeDefiniteError

        with pytest.raises(NotNegativeDefiniteError):
            zhat_nested(pg, ps, 5)

    def test_parameter_choice_invariance(self):
        pg = star(-2, [-3] * 4)
        results = {
            tuple(sorted(ps.delta.items())): zhat_nested(pg, ps, 8)
            for ps in all_parameter_structures(pg.rooting)
        }
        values = list(results.values())
        assert all(v == values[0] for v in values[1:])

    def test_rooting_choice_invariance(self):
        a = htree("u")
        b = htree("v")
        sa = zhat_nested(a, default_parameter_structure(a.rooting), 10)
        sb = zhat_nested(b, default_parameter_structure(b.rooting), 10)
        assert sa == sb

    def test_term_stream_sign_and_multiplicity(self):
        pg = star(-2, [-3] * 4)
        ps = default_parameter_structure(pg.rooting)
        total = {}
        for term in nested_terms(pg, ps, 6):
            assert term.multiplicity >= 1
            assert term.exponent <= 6
            assert term.exponent == Fraction(term.exponent)
            total[term.exponent] = total.get(term.exponent, 0) + \
                term.sign * term.multiplicity
        series = zhat_bosonic(pg, 6)
        assert {e: c for e, c in total.items() if c} == series.terms
