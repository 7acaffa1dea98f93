"""Brute-force ground truth: every tree reachable by one kind of pruning operation."""
from __future__ import annotations

from dataclasses import dataclass

from .classify import annotate_stats
from .model import Dataset, DecisionTree, Label, Leaf

DEFAULT_CAP = 10


class OracleCapExceeded(ValueError):
    pass


def nested_size(t) -> int:
    return 0 if isinstance(t, str) else 1 + nested_size(t[2]) + nested_size(t[3])


def nested_predict(t, values) -> str:
    while not isinstance(t, str):
        t = t[2] if values[t[0]] <= t[1] else t[3]
    return t


def nested_errors(t, data: Dataset) -> int:
    return sum(1 for e in data if nested_predict(t, e.values) != e.label.value)


@dataclass
class ReachSet:
    """Canonical forms of reachable trees mapped to ``(pruned cuts, errors)``."""

    operation: str
    s: int
    members: dict

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, canonical) -> bool:
        return canonical in self.members

    def trees(self) -> list[DecisionTree]:
        return [DecisionTree.from_nested(c) for c in self.members]


def enumerate_pruned_trees(tree: DecisionTree, data: Dataset, operation: str,
                           cap: int = DEFAULT_CAP) -> ReachSet:
    if operation not in ("replacement", "raising"):
        raise ValueError(f"unknown operation {operation!r}")
    if tree.size > cap:
        raise OracleCapExceeded(f"tree has {tree.size} cuts, oracle cap is {cap}")
    stats = annotate_stats(tree, data) if operation == "replacement" else None
    reach: dict[int, set] = {}
    for v in tree.postorder():
        node = tree.nodes[v]
        if isinstance(node, Leaf):
            reach[v] = {node.label.value}
            continue
        out = {(node.feature, node.threshold, a, b) for a in reach[node.left] for b in reach[node.right]}
        if operation == "raising":
            out |= reach[node.left] | reach[node.right]
        else:
            out.add(stats.majority(v).value)
        reach[v] = out
    s = tree.size
    members = {c: (s - nested_size(c), nested_errors(c, data)) for c in reach[tree.root]}
    return ReachSet(operation, s, members)


def oracle_pareto(tree: DecisionTree, data: Dataset, operation: str, variant: str = "exact",
                  cap: int = DEFAULT_CAP, reach: ReachSet | None = None) -> dict[int, int | None]:
    """Fewest errors per pruned-cut count over the reachable set."""
    reach = reach or enumerate_pruned_trees(tree, data, operation, cap)
    front: dict[int, int | None] = {k: None for k in range(tree.size + 1)}
    for k, err in reach.members.values():
        if front[k] is None or err < front[k]:
            front[k] = err
    if variant == "at_least":
        best = None
        for k in range(tree.size, -1, -1):
            if front[k] is not None and (best is None or front[k] < best):
                best = front[k]
            front[k] = best
    return front


def apply_random_op(canonical, operation: str, rng, data: Dataset | None = None):
    """Apply one random operation to a nested tree; ``None`` for a leaf.

    Replacement needs ``data`` to label the new leaf by E[T, w] of the given tree.
    """
    paths = []

    def walk(t, path):
        if not isinstance(t, str):
            paths.append(path)
            walk(t[2], path + (2,))
            walk(t[3], path + (3,))

    walk(canonical, ())
    if not paths:
        return None
    path = rng.choice(paths)

    def rebuild(t, p, examples):
        if not p:
            if operation == "raising":
                return t[rng.choice((2, 3))]
            blue = sum(1 for e in examples if e.label is Label.BLUE)
            return "blue" if blue >= len(examples) - blue else "red"
        side = p[0]
        keep = [e for e in examples if (e.values[t[0]] <= t[1]) == (side == 2)]
        child = rebuild(t[side], p[1:], keep)
        return (t[0], t[1], child, t[3]) if side == 2 else (t[0], t[1], t[2], child)

    return rebuild(canonical, path, list(data.examples) if data is not None else [])
