"""Optimal pruning by subtree replacement.

The table ``opt[v][j]`` holds the fewest training errors inside the subtree of
``v`` after pruning exactly ``j`` of its cuts; ``opt[v][s_v]`` is the cost of
replacing the whole subtree by its majority leaf, every smaller budget is split
between the two children.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._dp import INF, as_optional, max_plus, min_plus
from .classify import NodeStats, annotate_stats
from .model import Dataset, DecisionTree, InvalidOperation, Leaf, is_reasonable


def apply_replacement(tree: DecisionTree, data: Dataset, w: int,
                      stats: NodeStats | None = None) -> DecisionTree:
    """Replace the subtree at cut ``w`` by a leaf carrying the majority label of E[T, w]."""
    if tree.is_leaf(w):
        raise InvalidOperation(f"node {w} is a leaf; replacement needs a cut")
    stats = stats or annotate_stats(tree, data)
    leaf = Leaf(stats.majority(w))
    return tree.with_subtree_replaced(w, tree.fresh_id(), leaf)


def replace_many(tree: DecisionTree, data: Dataset, nodes) -> DecisionTree:
    """Replace several disjoint subtrees; stats are taken from the original tree."""
    stats = annotate_stats(tree, data)
    out = tree
    for w in nodes:
        out = out.with_subtree_replaced(w, out.fresh_id(), Leaf(stats.majority(w)))
    return out


def _tables(tree: DecisionTree, stats: NodeStats, cap: int | None) -> dict[int, np.ndarray]:
    opt: dict[int, np.ndarray] = {}
    for v in tree.postorder():
        node = tree.nodes[v]
        sv = stats.s[v]
        length = sv + 1 if cap is None else min(cap, sv) + 1
        if isinstance(node, Leaf):
            opt[v] = np.array([stats.subtree_errors[v]], dtype=np.int64)
            continue
        row = min_plus(opt[node.left], opt[node.right], length)
        if sv < length:
            row[sv] = stats.t[v]
        opt[v] = row
    return opt


def replacement_table(tree: DecisionTree, data: Dataset, k: int | None = None) -> dict[int, np.ndarray]:
    """Full ``opt`` table, each row truncated to budgets ``<= k`` when given."""
    return _tables(tree, annotate_stats(tree, data), k)


def _backtrack(tree: DecisionTree, stats: NodeStats, opt, k: int) -> list[int]:
    replaced = []
    stack = [(tree.root, k)]
    while stack:
        v, j = stack.pop()
        node = tree.nodes[v]
        if isinstance(node, Leaf):
            continue
        if j == stats.s[v]:
            replaced.append(v)
            continue
        a, b = opt[node.left], opt[node.right]
        target = opt[v][j]
        for i in range(min(j, len(a) - 1) + 1):
            if j - i < len(b) and a[i] + b[j - i] == target:
                stack.append((node.right, j - i))
                stack.append((node.left, i))
                break
        else:  # pragma: no cover - table and backtrack disagree
            raise AssertionError(f"no split reproduces opt at node {v}")
    return sorted(replaced)


def max_pruned_table(tree: DecisionTree, stats: NodeStats, t: int) -> dict[int, np.ndarray]:
    """Dual table: ``best[v][e]`` = most cuts prunable in T_v with at most ``e`` errors."""
    best: dict[int, np.ndarray] = {}
    neg = -INF
    for v in tree.postorder():
        node = tree.nodes[v]
        row = np.full(t + 1, neg, dtype=np.int64)
        if isinstance(node, Leaf):
            row[stats.subtree_errors[v]:] = 0
        else:
            row = max_plus(best[node.left], best[node.right], t + 1)
            row = np.maximum.accumulate(row)
            if stats.t[v] <= t:
                row[stats.t[v]:] = np.maximum(row[stats.t[v]:], stats.s[v])
        best[v] = row
    return best


@dataclass
class ReplaceResult:
    feasible: bool
    k: int
    t: int
    min_errors: int | None
    witness: DecisionTree | None
    pruned_nodes: list[int] = field(default_factory=list)
    route: str = "primal"


def solve_replacement(tree: DecisionTree, data: Dataset, k: int, t: int) -> ReplaceResult:
    """Prune exactly ``k`` cuts by replacement with at most ``t`` errors, if possible.

    ``min_errors`` is the optimum at exactly ``k`` pruned cuts. When ``t < k`` on a
    reasonable tree, feasibility is decided through the error-indexed dual table.
    """
    stats = annotate_stats(tree, data)
    s = tree.size
    if k > s or k < 0:
        return ReplaceResult(False, k, t, None, None)
    opt = _tables(tree, stats, k)
    best = int(opt[tree.root][k])
    pruned = _backtrack(tree, stats, opt, k)
    witness = replace_many(tree, data, pruned)
    route = "primal"
    feasible = best <= t
    if t < k and is_reasonable(tree, data):
        route = "dual"
        dual = max_pruned_table(tree, stats, t)
        feasible = int(dual[tree.root][t]) >= k
    return ReplaceResult(feasible, k, t, as_optional(best), witness, pruned, route)


def pareto_replacement(tree: DecisionTree, data: Dataset) -> dict[int, int]:
    """Fewest errors for every exact number of replaced cuts ``0..s``."""
    stats = annotate_stats(tree, data)
    row = _tables(tree, stats, None)[tree.root]
    return {k: int(x) for k, x in enumerate(row)}
