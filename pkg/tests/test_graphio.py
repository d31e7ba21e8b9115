import json
import random
import re
from fractions import Fraction

import pytest

from plumbzhat.dagcat import Bits, all_bits, chain, fragment_left, hypercube
from plumbzhat.graphio import (
    PlumbingParseError,
    deserialize_series,
    emit_dot,
    parse_plumbing,
    print_plumbing,
    serialize_series,
)
from plumbzhat.plumbing import PlumbedGraph, Tree
from plumbzhat.qseries import QSeries

from conftest import corpus_paths, random_tree


class TestParse:
    def test_edge_graph(self):
        pg = parse_plumbing("v a -2\nv b -2\ne a b\n")
        assert pg.weights == {"a": -2, "b": -2}
        assert pg.tree.edges == {("a", "b")}
        assert pg.rooting is None

    def test_star_with_root(self):
        text = "v a -1\nv b -2\nv c -3\nv d -7\ne a b\ne a c\ne a d\nroot a\n"
        pg = parse_plumbing(text)
        assert pg.rooting.root == "a"
        assert pg.tree.degree("a") == 3

    def test_comments_and_blank_lines(self):
        pg = parse_plumbing("# hi\n\nv a -1\n  # indented comment\nv b -2\ne a b\n")
        assert len(pg.tree.vertices) == 2

    def test_unknown_vertex_in_edge(self):
        with pytest.raises(PlumbingParseError, match="unknown vertex 'a'"):
            parse_plumbing("e a b\n")

    def test_error_carries_line_number(self):
        with pytest.raises(PlumbingParseError, match="line 3"):
            parse_plumbing("v a -1\nv b -2\ne a q\n")

    def test_duplicate_vertex(self):
        with pytest.raises(PlumbingParseError, match="duplicate vertex"):
            parse_plumbing("v a -1\nv a -2\n")

    def test_duplicate_root(self):
        with pytest.raises(PlumbingParseError, match="duplicate root"):
            parse_plumbing("v a -1\nv b -1\ne a b\nroot a\nroot b\n")

    def test_bad_weight(self):
        with pytest.raises(PlumbingParseError, match="bad weight"):
            parse_plumbing("v a x\n")

    def test_cyclic(self):
        with pytest.raises(PlumbingParseError):
            parse_plumbing("v a -1\nv b -1\nv c -1\ne a b\ne b c\ne a c\n")

    def test_disconnected(self):
        with pytest.raises(PlumbingParseError):
            parse_plumbing("v a -1\nv b -1\nv c -1\nv d -1\ne a b\ne c d\n")

    def test_self_loop(self):
        with pytest.raises(PlumbingParseError, match="self-loop"):
            parse_plumbing("v a -1\ne a a\n")


class TestRoundTrip:
    def test_corpus_round_trip(self):
        for p in corpus_paths():
            pg = parse_plumbing(p.read_text())
            again = parse_plumbing(print_plumbing(pg))
            assert again == pg

    def test_random_round_trip(self):
        rng = random.Random(17)
        seen = 0
        for size in range(2, 18):
            tree = random_tree(rng, size)
            weights = {v: rng.randrange(-9, -1) for v in tree.vertices}
            rooting = None
            pg = PlumbedGraph(tree, weights, rooting)
            assert parse_plumbing(print_plumbing(pg)) == pg
            seen += 1
        assert seen + len(corpus_paths()) >= 20


DOT_HEADER = re.compile(r"^digraph \w* ?\{$")
DOT_NODE = re.compile(r'^  ("(?:[^"\\]|\\.)*"|\w+)( \[label="(?:[^"\\]|\\.)*"\])?;$')
DOT_EDGE = re.compile(
    r'^  ("(?:[^"\\]|\\.)*"|\w+) -> ("(?:[^"\\]|\\.)*"|\w+)( \[.*\])?;$'
)


def check_dot(text):
    """Minimal DOT grammar acceptance; returns (node count, edge count)."""
    lines = text.strip().splitlines()
    assert DOT_HEADER.match(lines[0]), lines[0]
    assert lines[-1] == "}"
    nodes = edges = 0
    for line in lines[1:-1]:
        if DOT_EDGE.match(line):
            edges += 1
        elif DOT_NODE.match(line):
            nodes += 1
        else:
            raise AssertionError(f"unparseable DOT line: {line!r}")
    return nodes, edges


class TestDot:
    def test_single_vertex_tree(self):
        text = emit_dot(Tree(frozenset("a"), frozenset()))
        nodes, edges = check_dot(text)
        assert nodes == 1 and edges == 0

    def test_hypercube(self):
        text = emit_dot(hypercube(all_bits(1), all_bits(1)))
        nodes, edges = check_dot(text)
        assert nodes == 4 and edges == 4
        assert '[label="+,0"]' in text

    def test_empty_dag(self):
        dag = hypercube(all_bits(1), all_bits(1)).restrict(lambda n: False)
        nodes, edges = check_dot(emit_dot(dag))
        assert nodes == 0 and edges == 0

    def test_deterministic(self):
        frag = fragment_left(chain(10), Bits.from_word("+"), 8)
        assert emit_dot(frag) == emit_dot(frag)

    def test_corpus_trees(self):
        for p in corpus_paths():
            pg = parse_plumbing(p.read_text())
            nodes, edges = check_dot(emit_dot(pg))
            assert nodes == len(pg.tree.vertices)
            assert edges == len(pg.tree.edges)


class TestSeriesJson:
    def test_zero_series(self):
        assert serialize_series(QSeries.zero(10)) == "[]"

    def test_one_minus_q(self):
        s = QSeries({Fraction(0): 1, Fraction(1): -1}, 10)
        data = json.loads(serialize_series(s))
        assert data == [
            {"exponent": "0/1", "coefficient": 1},
            {"exponent": "1/1", "coefficient": -1},
        ]

    def test_fractional_exponent_rendering(self):
        s = QSeries({Fraction(3, 2): 5}, 10)
        assert '"3/2"' in serialize_series(s)

    def test_sorted_ascending(self):
        s = QSeries({Fraction(5): 1, Fraction(1, 3): 1, Fraction(2): 1}, 10)
        exps = [item["exponent"] for item in json.loads(serialize_series(s))]
        assert exps == ["1/3", "2/1", "5/1"]

    def test_round_trip_random(self):
        rng = random.Random(23)
        for _ in range(40):
            terms = {}
            for _ in range(rng.randrange(0, 10)):
                e = Fraction(rng.randrange(-30, 120), rng.randrange(1, 60))
                if e <= 12:
                    terms[e] = rng.randrange(-10 ** 6, 10 ** 6) or 3
            s = QSeries(terms, 12)
            assert deserialize_series(serialize_series(s), 12) == s
