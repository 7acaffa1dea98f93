"""Greedy pruning baselines and their comparison against the exact fronts."""
from __future__ import annotations

from dataclasses import dataclass

from .classify import annotate_stats
from .model import Dataset, DecisionTree, Leaf, majority_label
from .raising import apply_raising, pareto_raising
from .replace import pareto_replacement


@dataclass
class HeuristicResult:
    tree: DecisionTree
    k_used: int
    t_result: int


def heuristic_replacement(tree: DecisionTree, data: Dataset) -> HeuristicResult:
    """Bottom-up: replace a subtree by its majority leaf whenever that does not
    add training errors."""
    stats = annotate_stats(tree, data)
    current = dict(stats.subtree_errors)
    out = tree
    for v in tree.postorder():
        node = tree.nodes[v]
        if isinstance(node, Leaf):
            continue
        current[v] = current[node.left] + current[node.right]
        if stats.t[v] <= current[v]:
            out = out.with_subtree_replaced(v, out.fresh_id(), Leaf(stats.majority(v)))
            current[v] = stats.t[v]
    return HeuristicResult(out, tree.size - out.size, out.errors(data))


def heuristic_raising(tree: DecisionTree, data: Dataset) -> HeuristicResult:
    """Bottom-up: at each cut try raising its larger child and collapsing it to a
    leaf with the majority label of the examples now reaching it; keep the
    option with fewest errors as long as errors do not grow.

    The collapse only uses a leaf already present below the cut, so every
    output is reachable by raising alone.
    """
    out = tree
    errors = out.errors(data)
    for v in tree.postorder():
        if v not in out.nodes or out.is_leaf(v):
            continue
        node = out.nodes[v]
        sizes = out.subtree_node_counts()
        side = "left" if sizes[node.left] >= sizes[node.right] else "right"
        options = [apply_raising(out, v, side)[0]]

        reach = [e for e in data if v in _path(out, e.values)]
        b = sum(1 for e in reach if e.label.value == "blue")
        label = majority_label(b, len(reach) - b)
        leaf = next((u for u in out.preorder(v) if out.is_leaf(u) and out.nodes[u].label is label), None)
        if leaf is not None:
            options.append(out.with_subtree_replaced(v, None, None, keep=leaf))

        scored = [(cand.errors(data), cand.size, i, cand) for i, cand in enumerate(options)]
        err, _, _, best = min(scored, key=lambda x: x[:3])
        if err <= errors:
            out, errors = best, err
    return HeuristicResult(out, tree.size - out.size, errors)


def _path(tree: DecisionTree, values) -> set[int]:
    seen = {tree.root}
    v = tree.root
    while not tree.is_leaf(v):
        n = tree.nodes[v]
        v = n.left if values[n.feature] <= n.threshold else n.right
        seen.add(v)
    return seen


@dataclass
class Comparison:
    dataset: str
    s: int
    k_heur: int
    t_heur: int
    k_star: int
    t_star: int

    def row(self) -> list:
        return [self.dataset, self.s, self.k_heur, self.t_heur, self.k_star, self.t_star]


COMPARISON_HEADER = ["dataset", "s", "k_heur", "t_heur", "k_star", "t_star"]


def compare_with_optimal(name: str, tree: DecisionTree, data: Dataset, operation: str,
                         front: dict[int, int | None] | None = None) -> Comparison:
    """``t_star``: optimal errors at the heuristic's pruned count; ``k_star``: most
    cuts the exact solver can prune without exceeding the heuristic's errors."""
    if operation == "replacement":
        h = heuristic_replacement(tree, data)
        front = front or pareto_replacement(tree, data)
    else:
        h = heuristic_raising(tree, data)
        front = front or pareto_raising(tree, data, "exact")
    t_star = front[h.k_used]
    k_star = max(k for k, t in front.items() if t is not None and t <= h.t_result)
    return Comparison(name, tree.size, h.k_used, h.t_result, k_star, t_star)
