"""Routing examples through a tree: naive walk, heavy-light accelerated walk,
and per-node statistics used by the pruning dynamic programs."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .model import NEG_INF, POS_INF, Cut, Dataset, DecisionTree, Example, Label, Leaf


def classify_naive(tree: DecisionTree, example: Example | Sequence[Fraction]) -> tuple[Label, int]:
    values = example.values if isinstance(example, Example) else example
    leaf = tree.route(values)
    return tree.nodes[leaf].label, leaf


@dataclass(frozen=True)
class HldIndex:
    """Heavy-path decomposition plus per-node bound tables.

    ``paths`` lists every heavy path top-down; ``path_of[v]`` and ``pos_of[v]``
    locate node ``v``. ``lower[v][i]``/``upper[v][i]`` are the tightest bounds
    on feature ``i`` implied by the cuts strictly above ``v``.
    """

    paths: tuple[tuple[int, ...], ...]
    path_of: dict[int, int]
    pos_of: dict[int, int]
    heavy_child: dict[int, int]
    lower: dict[int, tuple]
    upper: dict[int, tuple]
    d: int

    def admits(self, v: int, values: Sequence[Fraction]) -> bool:
        lo, hi = self.lower[v], self.upper[v]
        return all(lo[i] < values[i] <= hi[i] for i in range(self.d))

    def light_edges_on_paths(self, tree: DecisionTree) -> list[int]:
        """Light-edge count along each root-to-leaf path."""
        out = []
        stack = [(tree.root, 0)]
        while stack:
            v, light = stack.pop()
            kids = tree.children(v)
            if not kids:
                out.append(light)
            for c in kids:
                stack.append((c, light + (self.heavy_child.get(v) != c)))
        return out


def build_hld_index(tree: DecisionTree, d: int | None = None) -> HldIndex:
    if d is None:
        d = max(tree.features_used(), default=-1) + 1
    size = tree.subtree_node_counts()
    heavy: dict[int, int] = {}
    for v in tree.cuts():
        for c in tree.children(v):
            # heavy iff the parent's subtree has fewer than twice the child's nodes
            if size[v] < 2 * size[c]:
                heavy[v] = c

    paths: list[tuple[int, ...]] = []
    path_of: dict[int, int] = {}
    pos_of: dict[int, int] = {}
    heads = [tree.root]
    while heads:
        head = heads.pop()
        path = []
        v: int | None = head
        while v is not None:
            path_of[v] = len(paths)
            pos_of[v] = len(path)
            path.append(v)
            for c in tree.children(v):
                if heavy.get(v) != c:
                    heads.append(c)
            v = heavy.get(v)
        paths.append(tuple(path))

    lower: dict[int, tuple] = {tree.root: (NEG_INF,) * d}
    upper: dict[int, tuple] = {tree.root: (POS_INF,) * d}
    for v in tree.preorder():
        node = tree.nodes[v]
        if isinstance(node, Cut):
            f, x = node.feature, node.threshold
            up = list(upper[v])
            up[f] = min(up[f], x)
            lo = list(lower[v])
            lo[f] = max(lo[f], x)
            lower[node.left], upper[node.left] = lower[v], tuple(up)
            lower[node.right], upper[node.right] = tuple(lo), upper[v]

    if len(tree.nodes) == 1:
        return HldIndex((), {}, {}, {}, {}, {}, d)
    return HldIndex(tuple(paths), path_of, pos_of, heavy, lower, upper, d)


def classify_hld(index: HldIndex, tree: DecisionTree, example: Example | Sequence[Fraction],
                 probes: list[int] | None = None) -> tuple[Label, int]:
    """Same answer as :func:`classify_naive`, found by binary search on heavy paths.

    If ``probes`` is given, the number of interval checks made on each visited
    heavy path is appended to it.
    """
    values = example.values if isinstance(example, Example) else example
    if not index.paths:
        return tree.nodes[tree.root].label, tree.root
    v = tree.root
    while True:
        path = index.paths[index.path_of[v]]
        start = index.pos_of[v]
        # path[start] is known to be reached; find the deepest admitted node
        lo, hi = start, len(path) - 1
        count = 0
        while lo < hi:
            mid = (lo + hi + 1) // 2
            count += 1
            if index.admits(path[mid], values):
                lo = mid
            else:
                hi = mid - 1
        if probes is not None:
            probes.append(count)
        v = path[lo]
        node = tree.nodes[v]
        if isinstance(node, Leaf):
            return node.label, v
        # leave the heavy path through the light edge
        v = node.left if values[node.feature] <= node.threshold else node.right


@dataclass(frozen=True)
class NodeStats:
    """Per-node example counts, cut counts and replacement errors."""

    n_blue: dict[int, int]
    n_red: dict[int, int]
    s: dict[int, int]
    t: dict[int, int]
    subtree_errors: dict[int, int]

    def majority(self, v: int) -> Label:
        from .model import majority_label
        return majority_label(self.n_blue[v], self.n_red[v])


def annotate_stats(tree: DecisionTree, data: Dataset) -> NodeStats:
    blue = {v: 0 for v in tree.nodes}
    red = {v: 0 for v in tree.nodes}
    for e in data:
        leaf = tree.route(e.values)
        (blue if e.label is Label.BLUE else red)[leaf] += 1
    errs: dict[int, int] = {}
    for v in tree.postorder():
        node = tree.nodes[v]
        if isinstance(node, Cut):
            for c in (node.left, node.right):
                blue[v] += blue[c]
                red[v] += red[c]
            errs[v] = errs[node.left] + errs[node.right]
        else:
            errs[v] = red[v] if node.label is Label.BLUE else blue[v]
    t = {v: min(blue[v], red[v]) for v in tree.nodes}
    return NodeStats(blue, red, tree.inner_counts(), t, errs)


class MaskIndex:
    """Examples of a dataset as bit positions, with cached half-space masks."""

    def __init__(self, data: Dataset):
        self.data = data
        self.all = (1 << data.n) - 1
        self.blue = sum(1 << j for j, e in enumerate(data.examples) if e.label is Label.BLUE)
        self.red = self.all & ~self.blue
        self._le = lru_cache(maxsize=None)(self._compute_le)

    def _compute_le(self, feature: int, threshold) -> int:
        if threshold == POS_INF:
            return self.all
        if threshold == NEG_INF:
            return 0
        return sum(1 << j for j, e in enumerate(self.data.examples) if e.values[feature] <= threshold)

    def le(self, feature: int, threshold) -> int:
        return self._le(feature, threshold)

    def gt(self, feature: int, threshold) -> int:
        return self.all & ~self._le(feature, threshold)

    def box(self, bounds) -> int:
        m = self.all
        for i, (lo, hi) in enumerate(bounds):
            if hi != POS_INF:
                m &= self.le(i, hi)
            if lo != NEG_INF:
                m &= self.gt(i, lo)
        return m

    def errors(self, mask: int, label: Label) -> int:
        return (mask & (self.red if label is Label.BLUE else self.blue)).bit_count()
