import random
from fractions import Fraction as F

import pytest

from prunex.model import Dataset, DecisionTree, Label
from prunex.oracle import (
    OracleCapExceeded, apply_random_op, enumerate_pruned_trees, nested_errors, oracle_pareto,
)
from prunex.raising import apply_raising
from prunex.replace import apply_replacement

from conftest import small_instance

DATA1 = Dataset.from_rows([([0], "blue"), ([1], "red")])


def test_single_leaf_reach():
    tree = DecisionTree.leaf(Label.RED)
    for op in ("raising", "replacement"):
        reach = enumerate_pruned_trees(tree, DATA1, op)
        assert list(reach.members) == ["red"]
        assert reach.members["red"] == (0, 1)


def test_one_cut_raising_reach():
    tree = DecisionTree.from_nested((0, F(1, 2), "blue", "red"))
    reach = enumerate_pruned_trees(tree, DATA1, "raising")
    assert set(reach.members) == {(0, F(1, 2), "blue", "red"), "blue", "red"}
    assert oracle_pareto(tree, DATA1, "raising") == {0: 0, 1: 1}


def test_two_cut_path_replacement_reach():
    data = Dataset.from_rows([([0], "blue"), ([1], "red"), ([2], "blue"), ([3], "blue")])
    tree = DecisionTree.from_nested((0, F(3, 2), (0, F(1, 2), "blue", "red"), "blue"))
    reach = enumerate_pruned_trees(tree, data, "replacement")
    assert len(reach) == 3
    assert "blue" in reach
    assert (0, F(3, 2), "blue", "blue") in reach


def test_cap():
    tree = DecisionTree.from_nested((0, F(1, 2), "blue", "red"))
    with pytest.raises(OracleCapExceeded):
        enumerate_pruned_trees(tree, DATA1, "raising", cap=0)


def test_balanced_raising_front():
    # raising the root drops two cuts at once; pruning one more reaches a leaf
    tree = DecisionTree.from_nested((0, F(1), (0, F(0), "blue", "red"), (0, F(2), "red", "blue")))
    data = Dataset.from_rows([([x], "blue") for x in range(4)])
    front = oracle_pareto(tree, data, "raising")
    assert all(front[k] is not None for k in range(4))
    at_least = oracle_pareto(tree, data, "raising", "at_least")
    assert at_least[0] == min(v for v in front.values())


def bfs_closure(tree: DecisionTree, data: Dataset, operation: str) -> set:
    seen = {tree.canonical(): tree}
    frontier = [tree]
    while frontier:
        nxt = []
        for t in frontier:
            for w in t.cuts():
                if operation == "raising":
                    outs = [apply_raising(t, w, side)[0] for side in ("left", "right")]
                else:
                    outs = [apply_replacement(t, data, w)]
                for o in outs:
                    c = o.canonical()
                    if c not in seen:
                        seen[c] = o
                        nxt.append(o)
        frontier = nxt
    return set(seen)


@pytest.mark.parametrize("operation", ["raising", "replacement"])
@pytest.mark.parametrize("seed", range(40))
def test_reach_set_equals_operation_closure(operation, seed):
    data, tree = small_instance(seed, reasonable=seed % 3 != 0)
    reach = enumerate_pruned_trees(tree, data, operation)
    assert set(reach.members) == bfs_closure(tree, data, operation)
    for c, (k, err) in reach.members.items():
        assert k == tree.size - DecisionTree.from_nested(c).size
        assert err == nested_errors(c, data)


@pytest.mark.parametrize("operation", ["raising", "replacement"])
@pytest.mark.parametrize("seed", range(20))
def test_random_walks_stay_inside(operation, seed):
    rng = random.Random(seed)
    data, tree = small_instance(seed)
    reach = enumerate_pruned_trees(tree, data, operation)
    c = tree.canonical()
    while c is not None:
        assert c in reach
        c = apply_random_op(c, operation, rng, data)


@pytest.mark.parametrize("seed", range(20))
def test_at_least_is_suffix_min(seed):
    data, tree = small_instance(seed)
    exact = oracle_pareto(tree, data, "raising")
    at_least = oracle_pareto(tree, data, "raising", "at_least")
    for k in exact:
        vals = [exact[j] for j in exact if j >= k and exact[j] is not None]
        assert at_least[k] == (min(vals) if vals else None)
