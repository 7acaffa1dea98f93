import random

import pytest

from prunex.gen import (
    Graph, gen_hitting_set, gen_independent_set, gen_nonmonotone, gen_random, has_hitting_set,
    random_graph, random_hitting_set,
)
from prunex.model import Label, is_reasonable, validate_reasonable
from prunex.raising import pareto_raising, solve_raising_boxdp


def test_nonmonotone_shape():
    data, tree, expected = gen_nonmonotone(2)
    assert data.n == 4 and tree.size == 3
    assert expected == {0: "0", 1: ">=1", 2: "0"}
    data3, _, _ = gen_nonmonotone(3)
    assert data3.label_counts() == (4, 2)


@pytest.mark.parametrize("k", range(2, 7))
def test_nonmonotone_front(k):
    data, tree, _ = gen_nonmonotone(k)
    validate_reasonable(tree, data)
    front = pareto_raising(tree, data)
    assert front[0] == 0 and front[k] == 0
    assert all(front[j] is not None and front[j] >= 1 for j in range(1, k))


def test_nonmonotone_rejects_small_k():
    with pytest.raises(ValueError):
        gen_nonmonotone(1)


def test_graph_parse():
    g = Graph.parse("# triangle\n3\n0 1\n1 2\n2 0\n")
    assert g.edges == ((0, 1), (0, 2), (1, 2))
    with pytest.raises(ValueError):
        Graph.parse("2\n0 0\n")
    with pytest.raises(ValueError):
        Graph.parse("2\n0 5\n")


def solve(data, tree, spec):
    return solve_raising_boxdp(tree, data, spec).feasible


def test_triangle_kappa_two():
    data, tree, spec, truth = gen_independent_set(Graph(3, ((0, 1), (1, 2), (0, 2))), 2)
    assert truth is False
    assert not solve(data, tree, spec)


def test_path_kappa_two():
    data, tree, spec, truth = gen_independent_set(Graph(3, ((0, 1), (1, 2))), 2)
    assert truth is True
    assert solve(data, tree, spec)


@pytest.mark.parametrize("seed", range(5))
def test_kappa_zero_always_feasible(seed):
    g = random_graph(random.Random(seed), 5)
    data, tree, spec, truth = gen_independent_set(g, 0)
    assert truth and spec.k == 0 and solve(data, tree, spec)


def test_kappa_out_of_range():
    with pytest.raises(ValueError):
        gen_independent_set(Graph(2, ()), 3)
    with pytest.raises(ValueError):
        gen_hitting_set(2, [[0]], 3)
    with pytest.raises(ValueError):
        gen_hitting_set(2, [[]], 1)
    with pytest.raises(ValueError):
        gen_hitting_set(2, [[4]], 1)


def test_hitting_set_examples():
    assert not has_hitting_set(3, [[1], [2]], 1)
    assert has_hitting_set(4, [[1, 2], [2, 3]], 1)
    data, tree, spec, truth = gen_hitting_set(3, [[1], [2]], 1)
    assert not truth and not solve(data, tree, spec)
    data, tree, spec, truth = gen_hitting_set(4, [[1, 2], [2, 3]], 1)
    assert truth and solve(data, tree, spec)


@pytest.mark.parametrize("seed", range(20))
def test_reductions_match_brute_force(seed):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(1, 6))
    kappa = rng.randint(0, g.n)
    data, tree, spec, truth = gen_independent_set(g, kappa)
    assert is_reasonable(tree, data)
    assert solve(data, tree, spec) == truth
    u = rng.randint(1, 5)
    sets = random_hitting_set(rng, u, rng.randint(1, 5))
    kappa = rng.randint(0, u)
    data, tree, spec, truth = gen_hitting_set(u, sets, kappa)
    assert is_reasonable(tree, data)
    assert solve(data, tree, spec) == truth


def test_random_is_deterministic():
    a = gen_random(7, n=20, d=3)
    b = gen_random(7, n=20, d=3)
    assert a[0] == b[0] and a[1] == b[1]
    assert gen_random(8, n=20, d=3)[0] != a[0]


@pytest.mark.parametrize("seed", range(30))
def test_random_is_reasonable_and_small(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 40)
    data, tree = gen_random(seed, n=n, d=rng.randint(1, 4), class_balance=rng.random())
    validate_reasonable(tree, data)
    assert tree.size <= n - 1
    assert all(e.label in (Label.BLUE, Label.RED) for e in data)
