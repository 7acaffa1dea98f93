from fractions import Fraction as F

import pytest

from prunex.classify import annotate_stats
from prunex.model import Dataset, DecisionTree, InvalidOperation, Label, is_reasonable
from prunex.oracle import oracle_pareto
from prunex.replace import (
    apply_replacement, max_pruned_table, pareto_replacement, solve_replacement,
)

from conftest import small_instance

DATA = Dataset.from_rows([([0], "blue"), ([1], "blue"), ([1], "red")])
ONE_CUT = DecisionTree.from_nested((0, F(1, 2), "blue", "red"))


def test_replace_root_majority():
    out = apply_replacement(ONE_CUT, DATA, ONE_CUT.root)
    assert out.to_nested() == "blue"
    assert out.errors(DATA) == 1


def test_replace_tie_is_blue():
    data = Dataset.from_rows([([0], "red"), ([1], "blue")])
    tree = DecisionTree.from_nested((0, F(1, 2), "red", "blue"))
    assert apply_replacement(tree, data, tree.root).to_nested() == "blue"


def test_replace_deepest_cut_of_path():
    tree = DecisionTree.from_nested((0, F(1, 2), "blue", (0, F(3, 2), "red", "blue")))
    deepest = max(tree.cuts())
    assert apply_replacement(tree, DATA, deepest).size == tree.size - 1


def test_replace_leaf_rejected():
    with pytest.raises(InvalidOperation):
        apply_replacement(ONE_CUT, DATA, next(iter(ONE_CUT.leaves())))


def test_solve_one_cut():
    res = solve_replacement(ONE_CUT, DATA, 1, 1)
    assert res.feasible and res.min_errors == 1
    assert res.witness.to_nested() == "blue"
    assert res.pruned_nodes == [ONE_CUT.root]


@pytest.mark.parametrize("seed", range(20))
def test_k_zero_is_identity(seed):
    data, tree = small_instance(seed)
    res = solve_replacement(tree, data, 0, 100)
    assert res.min_errors == tree.errors(data)
    assert res.witness == tree


def test_out_of_range_k():
    assert not solve_replacement(ONE_CUT, DATA, 2, 5).feasible
    assert not solve_replacement(ONE_CUT, DATA, -1, 5).feasible


def test_single_leaf_front():
    tree = DecisionTree.leaf(Label.RED)
    assert pareto_replacement(tree, DATA) == {0: 2}


@pytest.mark.parametrize("seed", range(60))
def test_front_matches_oracle(seed):
    data, tree = small_instance(seed, reasonable=seed % 4 != 0)
    assert pareto_replacement(tree, data) == oracle_pareto(tree, data, "replacement")


@pytest.mark.parametrize("seed", range(40))
def test_witness_is_valid(seed):
    data, tree = small_instance(seed)
    front = pareto_replacement(tree, data)
    for k, best in front.items():
        res = solve_replacement(tree, data, k, best)
        assert res.feasible and res.min_errors == best
        assert res.witness.size == tree.size - k
        assert res.witness.errors(data) == best
        if k:
            assert not solve_replacement(tree, data, k, best - 1).feasible or best == 0


@pytest.mark.parametrize("seed", range(40))
def test_dual_table_matches_front(seed):
    data, tree = small_instance(seed)
    assert is_reasonable(tree, data)
    front = pareto_replacement(tree, data)
    stats = annotate_stats(tree, data)
    t_max = max(front.values())
    dual = max_pruned_table(tree, stats, t_max)[tree.root]
    for t in range(t_max + 1):
        ks = [k for k, e in front.items() if e <= t]
        if ks:
            assert dual[t] == max(ks)
        else:
            assert dual[t] < 0


@pytest.mark.parametrize("seed", range(40))
def test_front_monotone_on_reasonable(seed):
    data, tree = small_instance(seed)
    front = pareto_replacement(tree, data)
    assert all(front[k] <= front[k + 1] for k in range(tree.size))


@pytest.mark.parametrize("seed", range(30))
def test_dual_and_primal_agree(seed):
    data, tree = small_instance(seed)
    front = pareto_replacement(tree, data)
    for k in front:
        for t in range(0, 4):
            res = solve_replacement(tree, data, k, t)
            assert res.feasible == (front[k] <= t)
