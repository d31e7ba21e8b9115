import random
from pathlib import Path

import pytest

from plumbzhat import PlumbedGraph, RootedTree, Tree, grow_leaves, parse_plumbing

CORPUS_DIR = Path(__file__).parent / "corpus"
GOLDEN_DIR = Path(__file__).parent / "golden"


def corpus_paths():
    return sorted(CORPUS_DIR.glob("*.plumb"))


def load_corpus():
    return {p.stem: parse_plumbing(p.read_text()) for p in corpus_paths()}


@pytest.fixture(scope="session")
def corpus():
    return load_corpus()


def star(center_weight, leg_weights, root=True) -> PlumbedGraph:
    weights = {"c": center_weight}
    edges = []
    for i, w in enumerate(leg_weights):
        weights[f"l{i}"] = w
        edges.append(("c", f"l{i}"))
    tree = Tree.from_pairs(weights, edges)
    rooting = RootedTree(tree, "c") if root else None
    return PlumbedGraph(tree, weights, rooting)


def random_tree(rng: random.Random, size: int) -> Tree:
    vertices = [f"t{i}" for i in range(size)]
    edges = [(vertices[i], vertices[rng.randrange(i)]) for i in range(1, size)]
    return Tree.from_pairs(vertices, edges)


def random_node_version(rng: random.Random, size: int) -> RootedTree:
    """A centered node-version rooted tree grown from a random base tree."""
    base = random_tree(rng, size)
    grown = grow_leaves(RootedTree(base, "t0"))
    center = sorted(grown.tree.centers())[0]
    return RootedTree(grown.tree, center)
