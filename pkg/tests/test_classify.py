import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from prunex.classify import (
    MaskIndex, annotate_stats, build_hld_index, classify_hld, classify_naive,
)
from prunex.gen import gen_random, random_tree
from prunex.model import Dataset, DecisionTree, Label

from conftest import small_instance


def path_tree(n_cuts: int) -> DecisionTree:
    spec = "red"
    for i in reversed(range(n_cuts)):
        spec = (0, F(i), "blue", spec)
    return DecisionTree.from_nested(spec)


def test_single_leaf():
    tree = DecisionTree.leaf(Label.BLUE)
    index = build_hld_index(tree, 2)
    assert index.paths == ()
    assert classify_naive(tree, (F(3), F(4)))[0] is Label.BLUE
    assert classify_hld(index, tree, (F(3), F(4)))[0] is Label.BLUE


def test_threshold_is_inclusive():
    tree = DecisionTree.from_nested((0, F(3, 2), "blue", "red"))
    assert classify_naive(tree, (F(3, 2),))[0] is Label.BLUE
    assert classify_naive(tree, (F(8, 5),))[0] is Label.RED


def test_hand_trace_right_left():
    tree = DecisionTree.from_nested((0, F(1), "blue", (1, F(2), "red", "blue")))
    label, leaf = classify_naive(tree, (F(5), F(2)))
    assert label is Label.RED
    assert leaf == 3


def test_path_tree_is_one_heavy_path():
    tree = path_tree(10)
    index = build_hld_index(tree, 1)
    spine = index.paths[index.path_of[tree.root]]
    cuts = list(tree.preorder())
    cuts = [v for v in cuts if not tree.is_leaf(v)]
    assert set(cuts) <= set(spine)
    # the bottom cut has two single-node children, so neither edge is heavy
    assert all(index.heavy_child[v] in spine for v in cuts[:-1])


def test_balanced_tree_light_edges():
    tree = DecisionTree.from_nested((0, F(2), (0, F(1), "blue", "red"), (0, F(3), "red", "blue")))
    index = build_hld_index(tree, 1)
    assert max(index.light_edges_on_paths(tree)) <= 2


def test_single_cut_matches_naive():
    tree = DecisionTree.from_nested((0, F(0), "blue", "red"))
    index = build_hld_index(tree, 1)
    for x in (-1, 0, 1):
        assert classify_hld(index, tree, (F(x),)) == classify_naive(tree, (F(x),))


def test_probe_rounds_on_long_path():
    tree = path_tree(64)
    index = build_hld_index(tree, 1)
    probes: list[int] = []
    label, leaf = classify_hld(index, tree, (F(100),), probes)
    assert label is Label.RED and leaf == classify_naive(tree, (F(100),))[1]
    # one binary search on the spine, then the light step into the terminal leaf
    assert probes[0] <= math.ceil(math.log2(65)) + 1
    assert probes[1:] == [0]


@pytest.mark.parametrize("seed", range(25))
def test_hld_agrees_with_naive(seed):
    rng = random.Random(seed)
    data, _ = gen_random(seed, n=30, d=3, value_range=8)
    tree = random_tree(rng, data, rng.randint(0, 40), relabel=False)
    index = build_hld_index(tree, data.d)
    n_nodes = len(tree.nodes)
    assert max(index.light_edges_on_paths(tree)) <= math.floor(math.log2(n_nodes))
    for _ in range(40):
        values = tuple(F(rng.randrange(-1, 9), rng.choice((1, 2))) for _ in range(3))
        assert classify_hld(index, tree, values) == classify_naive(tree, values)


def test_stats_one_cut():
    data = Dataset.from_rows([([0], "blue"), ([1], "blue"), ([1], "red")])
    tree = DecisionTree.from_nested((0, F(1, 2), "blue", "blue"))
    stats = annotate_stats(tree, data)
    assert stats.t[tree.root] == 1 and stats.s[tree.root] == 1
    assert stats.majority(tree.root) is Label.BLUE


@pytest.mark.parametrize("seed", range(30))
def test_stats_counts_add_up(seed):
    data, tree = small_instance(seed, reasonable=seed % 2 == 0)
    stats = annotate_stats(tree, data)
    for v in tree.cuts():
        a, b = tree.children(v)
        assert stats.n_blue[v] == stats.n_blue[a] + stats.n_blue[b]
        assert stats.n_red[v] == stats.n_red[a] + stats.n_red[b]
        assert stats.s[v] == 1 + stats.s[a] + stats.s[b]
        assert stats.subtree_errors[v] == stats.subtree_errors[a] + stats.subtree_errors[b]
    for v in tree.leaves():
        assert stats.t[v] == min(stats.n_blue[v], stats.n_red[v])
    assert stats.subtree_errors[tree.root] == tree.errors(data)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.booleans()), min_size=1, max_size=15),
       st.integers(0, 4), st.integers(0, 4))
def test_mask_index_counts(rows, f, x):
    data = Dataset.from_rows([((a, b), "blue" if c else "red") for a, b, c in rows])
    idx = MaskIndex(data)
    feat = f % 2
    thr = F(x) + F(1, 2)
    le = idx.le(feat, thr)
    assert le | idx.gt(feat, thr) == idx.all and le & idx.gt(feat, thr) == 0
    expected = [e.id for e in data if e.values[feat] <= thr]
    assert [i for i in range(data.n) if le >> i & 1] == expected
    assert idx.errors(idx.all, Label.BLUE) == sum(e.label is Label.RED for e in data)
