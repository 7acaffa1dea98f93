"""Optimal pruning by subtree raising.

The main solver is a dynamic program over states ``(node, box)``: the box holds,
per feature, the strongest surviving cuts above the node, which fixes the set of
examples that reach it. Each state stores a vector indexed by the number of cuts
pruned inside the subtree. Boxes only ever contain thresholds of cuts on the
path to the node (or the infinite sentinels), so the memo stays sparse.
"""
from __future__ import annotations

import itertools
import random
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from ._dp import INF, as_optional, min_plus, shifted, suffix_min
from .classify import MaskIndex
from .model import (
    NEG_INF,
    POS_INF,
    Cut,
    Dataset,
    DecisionTree,
    Example,
    InvalidOperation,
    Leaf,
    SolveSpec,
)

VARIANTS = ("exact", "at_least")
_EMPTY = np.empty(0, dtype=np.int64)


def apply_raising(tree: DecisionTree, w: int, kept_child: str) -> tuple[DecisionTree, int]:
    """Replace the subtree at cut ``w`` by its ``"left"`` or ``"right"`` child subtree.

    Returns the new tree and the number of cuts removed (``w`` plus every cut of
    the discarded child).
    """
    node = tree.nodes[w]
    if not isinstance(node, Cut):
        raise InvalidOperation(f"node {w} is a leaf; raising needs a cut")
    if kept_child not in ("left", "right"):
        raise ValueError("kept_child must be 'left' or 'right'")
    keep, drop = (node.left, node.right) if kept_child == "left" else (node.right, node.left)
    pruned = 1 + tree.inner_counts()[drop]
    return tree.with_subtree_replaced(w, None, None, keep=keep), pruned


def _path_thresholds(tree: DecisionTree) -> dict[int, dict[int, set]]:
    """For every node, the thresholds per feature of the cuts strictly above it."""
    out: dict[int, dict[int, set]] = {tree.root: {}}
    for v in tree.preorder():
        node = tree.nodes[v]
        if isinstance(node, Cut):
            below = {f: set(x) for f, x in out[v].items()}
            below.setdefault(node.feature, set()).add(node.threshold)
            out[node.left] = below
            out[node.right] = below
    return out


class _RaiseDPBase:
    """Recurrence and witness reconstruction shared by the raising solvers."""

    def __init__(self, tree: DecisionTree, data: Dataset, variant: str = "exact"):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        tree.check_features(data.d)
        self.tree = tree
        self.data = data
        self.variant = variant
        self.masks = MaskIndex(data)
        self.s = tree.inner_counts()
        self.full = tuple((NEG_INF, POS_INF) for _ in range(data.d))

    # subclasses provide the vector for a state
    def vector(self, v: int, bounds: tuple) -> np.ndarray:
        raise NotImplementedError

    def _combine(self, v: int, bounds: tuple, get: Callable[[int, tuple], np.ndarray],
                 length: int) -> np.ndarray:
        node = self.tree.nodes[v]
        if isinstance(node, Leaf):
            mask = self.masks.box(bounds)
            return np.array([self.masks.errors(mask, node.label)], dtype=np.int64)
        u, w = node.left, node.right
        su, sw = self.s[u], self.s[w]
        lb, rb = _split(bounds, node)
        out = min_plus(get(u, lb), get(w, rb), length)
        if self.variant == "exact":
            np.minimum(out, shifted(get(u, bounds), sw + 1, length), out=out)
            np.minimum(out, shifted(get(w, bounds), su + 1, length), out=out)
        else:
            for child, other in ((u, sw), (w, su)):
                q = get(child, bounds)
                # budgets below the discarded part clamp to zero
                raised = np.full(length, INF, dtype=np.int64)
                idx = np.arange(length)
                src = np.maximum(idx - other - 1, 0)
                ok = src < len(q)
                raised[ok] = q[src[ok]]
                np.minimum(out, raised, out=out)
        return out

    def _child_budget(self, j: int, discarded: int) -> int:
        b = j - discarded - 1
        return max(b, 0) if self.variant == "at_least" else b

    def backtrack(self, k: int, bounds: tuple | None = None) -> list[tuple[int, str]]:
        """Raising decisions ``(node, kept side)`` realizing the root value at budget ``k``."""
        ops: list[tuple[int, str]] = []
        stack = [(self.tree.root, self.full if bounds is None else bounds, k)]
        while stack:
            v, b, j = stack.pop()
            node = self.tree.nodes[v]
            if isinstance(node, Leaf):
                continue
            target = self.vector(v, b)[j]
            u, w = node.left, node.right
            lb, rb = _split(b, node)
            qu, qw = self.vector(u, lb), self.vector(w, rb)
            found = False
            for i in range(min(j, len(qu) - 1) + 1):
                if j - i < len(qw) and qu[i] + qw[j - i] == target:
                    stack.append((w, rb, j - i))
                    stack.append((u, lb, i))
                    found = True
                    break
            if found:
                continue
            for child, side, discarded in ((u, "left", self.s[w]), (w, "right", self.s[u])):
                cb = self._child_budget(j, discarded)
                if cb < 0:
                    continue
                q = self.vector(child, b)
                if cb < len(q) and q[cb] == target:
                    ops.append((v, side))
                    stack.append((child, b, cb))
                    found = True
                    break
            if not found:  # pragma: no cover - table and backtrack disagree
                raise AssertionError(f"no option reproduces the table at node {v}")
        return ops

    def witness(self, k: int) -> DecisionTree:
        out = self.tree
        for v, side in self.backtrack(k):
            out, _ = apply_raising(out, v, side)
        return out

    def root_vector(self) -> np.ndarray:
        return self.vector(self.tree.root, self.full)


def _split(bounds: tuple, node: Cut) -> tuple[tuple, tuple]:
    f, x = node.feature, node.threshold
    lo, hi = bounds[f]
    left = list(bounds)
    right = list(bounds)
    left[f] = (lo, min(hi, x))
    right[f] = (max(lo, x), hi)
    return tuple(left), tuple(right)


class RaiseTable(_RaiseDPBase):
    """Top-down memoized box DP.

    ``by_box`` maps ``(node, box)`` to its budget vector; ``by_mask`` shares work
    between boxes that select the same examples.
    """

    def __init__(self, tree: DecisionTree, data: Dataset, variant: str = "exact",
                 check_sparsity: bool = True):
        super().__init__(tree, data, variant)
        self.by_box: dict[tuple, np.ndarray] = {}
        self.by_mask: dict[tuple[int, int], np.ndarray] = {}
        self.check_sparsity = check_sparsity
        self._path_thr = _path_thresholds(tree) if check_sparsity else None

    def _assert_sparse(self, v: int, bounds: tuple) -> None:
        allowed = self._path_thr[v]
        for i, (lo, hi) in enumerate(bounds):
            for x in (lo, hi):
                if x not in (NEG_INF, POS_INF) and x not in allowed.get(i, ()):
                    raise AssertionError(f"box at node {v} uses threshold {x} of feature {i} "
                                         "that is not on its root path")

    def vector(self, v: int, bounds: tuple) -> np.ndarray:
        key = (v, bounds)
        hit = self.by_box.get(key)
        if hit is not None:
            return hit
        if self.check_sparsity:
            self._assert_sparse(v, bounds)
        mask = self.masks.box(bounds)
        mkey = (v, mask)
        vec = self.by_mask.get(mkey)
        if vec is None:
            vec = self._combine(v, bounds, self.vector, self.s[v] + 1)
            self.by_mask[mkey] = vec
        self.by_box[key] = vec
        return vec


class RelevantThresholdTable(_RaiseDPBase):
    """Bottom-up table for the exact variant restricted to relevant boxes.

    For a node ``v`` and budget ``k``, a box is relevant when the cuts above ``v``
    that would have to be pruned to make its bounds the strongest survivors,
    plus the budget left for ``T_v``, do not exceed ``k``. Only the ``k + 1``
    strongest cuts per feature and side can therefore appear in a bound.
    """

    def __init__(self, tree: DecisionTree, data: Dataset, k: int):
        super().__init__(tree, data, "exact")
        self.k = k
        self.table: dict[int, dict[tuple, np.ndarray]] = {}
        self._fill()

    def _candidates(self, v: int) -> dict[int, tuple[list, list]]:
        """Per feature on the path: ``[(bound, cost)]`` for the lower and upper side."""
        lefts: dict[int, list] = {}
        rights: dict[int, list] = {}
        u = v
        par = self.tree.parent
        while par[u] is not None:
            p = par[u]
            node = self.tree.nodes[p]
            if node.left == u:  # p bounds from above
                rights.setdefault(node.feature, []).append(node.threshold)
            else:
                lefts.setdefault(node.feature, []).append(node.threshold)
            lefts.setdefault(node.feature, [])
            rights.setdefault(node.feature, [])
            u = p
        out = {}
        for f in lefts:
            lo_thr = lefts[f]
            hi_thr = rights[f]
            lo_opts = [(x, sum(1 for y in lo_thr if y > x)) for x in sorted(set(lo_thr), reverse=True)]
            lo_opts.append((NEG_INF, len(lo_thr)))
            hi_opts = [(x, sum(1 for y in hi_thr if y < x)) for x in sorted(set(hi_thr))]
            hi_opts.append((POS_INF, len(hi_thr)))
            out[f] = ([o for o in lo_opts if o[1] <= self.k], [o for o in hi_opts if o[1] <= self.k])
        return out

    def _relevant_boxes(self, v: int):
        cands = self._candidates(v)
        feats = sorted(cands)
        per_feat = [list(itertools.product(cands[f][0], cands[f][1])) for f in feats]
        for combo in itertools.product(*per_feat):
            cost = sum(lo[1] + hi[1] for lo, hi in combo)
            if cost > self.k:
                continue
            bounds = list(self.full)
            for f, (lo, hi) in zip(feats, combo):
                bounds[f] = (lo[0], hi[0])
            yield tuple(bounds), cost

    def _fill(self) -> None:
        for v in self.tree.postorder():
            row: dict[tuple, np.ndarray] = {}
            for bounds, cost in self._relevant_boxes(v):
                length = min(self.s[v], self.k - cost) + 1
                row[bounds] = self._combine(v, bounds, self._lookup, length)
            self.table[v] = row

    def _lookup(self, v: int, bounds: tuple) -> np.ndarray:
        # an irrelevant box is only asked for budgets the caller cannot afford
        return self.table[v].get(bounds, _EMPTY)

    def vector(self, v: int, bounds: tuple) -> np.ndarray:
        return self._lookup(v, bounds)

    def n_states(self) -> int:
        return sum(len(r) for r in self.table.values())


@dataclass
class RaiseResult:
    feasible: bool
    k: int
    t: int
    variant: str
    min_errors: int | None
    witness: DecisionTree | None
    pruned_nodes: int | None = None
    ops: list[tuple[int, str]] = field(default_factory=list)


def _result(dp: _RaiseDPBase, k: int, t: int, row: np.ndarray) -> RaiseResult:
    if k >= len(row) or row[k] >= INF:
        return RaiseResult(False, k, t, dp.variant, None, None)
    best = int(row[k])
    ops = dp.backtrack(k)
    out = dp.tree
    for v, side in ops:
        out, _ = apply_raising(out, v, side)
    return RaiseResult(best <= t, k, t, dp.variant, best, out, dp.tree.size - out.size, ops)


def solve_raising_boxdp(tree: DecisionTree, data: Dataset, spec: SolveSpec,
                        table: RaiseTable | None = None) -> RaiseResult:
    if spec.operation != "raising":
        raise ValueError("solve_raising_boxdp handles the raising operation only")
    dp = table if table is not None else RaiseTable(tree, data, spec.variant)
    return _result(dp, spec.k, spec.t, dp.root_vector())


def solve_raising_exact_fptk(tree: DecisionTree, data: Dataset, k: int, t: int) -> RaiseResult:
    """Exact-variant solver exploring only thresholds among the ``k + 1`` strongest cuts."""
    if k > tree.size:
        return RaiseResult(False, k, t, "exact", None, None)
    dp = RelevantThresholdTable(tree, data, k)
    return _result(dp, k, t, dp.root_vector())


def pareto_raising(tree: DecisionTree, data: Dataset, variant: str = "exact",
                   table: RaiseTable | None = None) -> dict[int, int | None]:
    """Fewest errors for each number ``k = 0..s`` of pruned cuts."""
    dp = table if table is not None else RaiseTable(tree, data, variant)
    row = dp.root_vector()
    return {k: as_optional(x) for k, x in enumerate(row)}


def at_least_from_exact(front: dict[int, int | None]) -> dict[int, int | None]:
    keys = sorted(front)
    vals = np.array([INF if front[k] is None else front[k] for k in keys], dtype=np.int64)
    return {k: as_optional(x) for k, x in zip(keys, suffix_min(vals))}


# zero-error peeling

def _misclassifying_leaves(tree: DecisionTree, examples: Sequence[Example]) -> set[int]:
    bad = set()
    for e in examples:
        leaf = tree.route(e.values)
        if tree.nodes[leaf].label is not e.label:
            bad.add(leaf)
    return bad


def _peel(tree: DecisionTree, examples: Sequence[Example],
          rng: random.Random | None = None) -> DecisionTree | None:
    while True:
        bad = _misclassifying_leaves(tree, examples)
        if not bad:
            return tree
        if tree.is_leaf(tree.root):
            return None
        if rng is None:
            depth = _depths(tree)
            leaf = min(bad, key=lambda v: (-depth[v], v))
        else:
            leaf = rng.choice(sorted(bad))
        p = tree.parent[leaf]
        node = tree.nodes[p]
        tree, _ = apply_raising(tree, p, "right" if node.left == leaf else "left")


def _depths(tree: DecisionTree) -> dict[int, int]:
    depth = {tree.root: 0}
    for v in tree.preorder():
        for c in tree.children(v):
            depth[c] = depth[v] + 1
    return depth


def solve_zero_zero(tree: DecisionTree, data: Dataset | Sequence[Example],
                    rng: random.Random | None = None) -> DecisionTree | None:
    """A raised tree with no training errors, or ``None`` if none exists.

    Any leaf holding a misclassified example must disappear, so it is removed by
    raising its parent towards the sibling until no such leaf is left. The
    result does not depend on the order; ``rng`` picks leaves at random for tests.
    """
    examples = data.examples if isinstance(data, Dataset) else tuple(data)
    return _peel(tree, examples, rng)


def elementary_raisings(tree: DecisionTree) -> list[tuple[int, str]]:
    """Raising operations that remove exactly one cut (at a cut with a leaf child)."""
    ops = []
    for v in tree.cuts():
        node = tree.nodes[v]
        if tree.is_leaf(node.left):
            ops.append((v, "right"))
        if tree.is_leaf(node.right):
            ops.append((v, "left"))
    return ops


def trees_after_elementary(tree: DecisionTree, k: int) -> list[DecisionTree]:
    """Distinct trees reachable by exactly ``k`` elementary raising operations."""
    level = {tree.canonical(): tree}
    for _ in range(k):
        nxt: dict = {}
        for t in level.values():
            for v, side in elementary_raisings(t):
                r, _ = apply_raising(t, v, side)
                nxt.setdefault(r.canonical(), r)
        level = nxt
    return list(level.values())


@dataclass
class SubsetResult:
    feasible: bool
    witness: DecisionTree | None = None
    removed_examples: tuple[int, ...] = ()


def solve_raising_subsets(tree: DecisionTree, data: Dataset, k: int, t: int) -> SubsetResult:
    """At-least-``k`` raising with at most ``t`` errors by exhaustive enumeration.

    Tries every length-``k`` sequence of elementary raisings and every set of
    ``t`` examples to ignore, then asks :func:`solve_zero_zero` to finish.
    """
    if k > tree.size:
        return SubsetResult(False)
    size = min(t, data.n)
    for cand in trees_after_elementary(tree, k):
        for drop in itertools.combinations(range(data.n), size):
            dropped = set(drop)
            rest = [e for j, e in enumerate(data.examples) if j not in dropped]
            out = _peel(cand, rest)
            if out is not None:
                return SubsetResult(True, out, tuple(data.examples[j].id for j in drop))
    return SubsetResult(False)


def is_prunable_to(tree: DecisionTree, target: DecisionTree) -> bool:
    """Whether ``target`` can be obtained from ``tree`` by raising operations.

    Matching cuts (same feature and threshold) are kept and matched child by
    child; otherwise the current cut must be raised and the target is sought in
    either subtree.
    """
    t_nodes, p_nodes = tree.nodes, target.nodes

    @lru_cache(maxsize=None)
    def match(a: int, b: int) -> bool:
        x, y = t_nodes[a], p_nodes[b]
        if isinstance(x, Leaf):
            return isinstance(y, Leaf) and x.label is y.label
        if (isinstance(y, Cut) and x.feature == y.feature and x.threshold == y.threshold
                and match(x.left, y.left) and match(x.right, y.right)):
            return True
        return match(x.left, b) or match(x.right, b)

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 4 * (len(t_nodes) + len(p_nodes)) + 100))
    try:
        return match(tree.root, target.root)
    finally:
        sys.setrecursionlimit(limit)
