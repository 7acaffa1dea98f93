"""Core domain types: labels, examples, datasets, decision trees and boxes.

All feature values and thresholds are exact rationals (``fractions.Fraction``)
so that an example lying exactly on a threshold is always routed left.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence, Union

NEG_INF = -math.inf
POS_INF = math.inf

Number = Union[Fraction, int, str]


class StructureError(ValueError):
    """A tree is malformed or references features outside the dataset."""


class InvalidOperation(ValueError):
    """A pruning operation was applied to a node that does not admit it."""


class Label(enum.Enum):
    BLUE = "blue"
    RED = "red"

    @property
    def other(self) -> "Label":
        return Label.RED if self is Label.BLUE else Label.BLUE

    def __str__(self) -> str:
        return self.value


def majority_label(n_blue: int, n_red: int) -> Label:
    """Most frequent label; ties go to blue."""
    return Label.BLUE if n_blue >= n_red else Label.RED


def as_fraction(x: Number) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted; pass an exact rational")
    return Fraction(x)


@dataclass(frozen=True)
class Example:
    id: int
    values: tuple[Fraction, ...]
    label: Label


def compute_thresholds(values: Iterable[Number]) -> tuple[Fraction, ...]:
    """Minimum-size separating threshold set: midpoints of consecutive distinct values."""
    distinct = sorted({as_fraction(v) for v in values})
    return tuple((a + b) / 2 for a, b in zip(distinct, distinct[1:]))


@dataclass(frozen=True, eq=False)
class Dataset:
    examples: tuple[Example, ...]
    d: int
    thresholds: tuple[tuple[Fraction, ...], ...] = field(init=False)

    def __post_init__(self) -> None:
        for e in self.examples:
            if len(e.values) != self.d:
                raise ValueError(f"example {e.id} has {len(e.values)} values, expected {self.d}")
        thr = tuple(compute_thresholds(e.values[i] for e in self.examples) for i in range(self.d))
        object.__setattr__(self, "thresholds", thr)

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[Sequence[Number], Label | str]], d: int | None = None) -> "Dataset":
        """Build from ``(values, label)`` pairs; ids are assigned by position."""
        examples = []
        for i, (values, label) in enumerate(rows):
            lab = label if isinstance(label, Label) else Label(label)
            examples.append(Example(i, tuple(as_fraction(v) for v in values), lab))
        if d is None:
            d = len(examples[0].values) if examples else 0
        return cls(tuple(examples), d)

    @property
    def n(self) -> int:
        return len(self.examples)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[Example]:
        return iter(self.examples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.d == other.d and self.examples == other.examples

    def __hash__(self) -> int:
        return hash((self.d, self.examples))

    def label_counts(self) -> tuple[int, int]:
        blue = sum(1 for e in self.examples if e.label is Label.BLUE)
        return blue, self.n - blue


def dataset_metrics(data: Dataset) -> dict[str, int]:
    """``n``, ``d``, ``D`` (largest per-feature domain) and ``delta_max``."""
    domain = max((len({e.values[i] for e in data}) for i in range(data.d)), default=0)
    blues = {e.values for e in data if e.label is Label.BLUE}
    reds = {e.values for e in data if e.label is Label.RED}
    delta = 0
    for b in blues:
        for r in reds:
            delta = max(delta, sum(1 for x, y in zip(b, r) if x != y))
    return {"n": data.n, "d": data.d, "D": domain, "delta_max": delta}


@dataclass(frozen=True)
class Leaf:
    label: Label


@dataclass(frozen=True)
class Cut:
    feature: int
    threshold: Fraction
    left: int
    right: int


Node = Union[Leaf, Cut]


class DecisionTree:
    """Ordered binary tree stored as an arena of nodes keyed by integer id.

    The left child of a cut receives the examples with ``e[feature] <= threshold``.
    Instances are treated as immutable; every pruning operation builds a new tree
    that keeps the ids of all surviving nodes.
    """

    __slots__ = ("nodes", "root", "_parent", "_size")

    def __init__(self, nodes: Mapping[int, Node], root: int):
        self.nodes: dict[int, Node] = dict(nodes)
        self.root = root
        self._parent: dict[int, int | None] | None = None
        self._size: dict[int, int] | None = None
        self._check()

    def _check(self) -> None:
        if self.root not in self.nodes:
            raise StructureError(f"root {self.root} is not a node")
        seen: set[int] = set()
        stack = [self.root]
        while stack:
            v = stack.pop()
            if v in seen:
                raise StructureError(f"node {v} is reachable twice (cycle or shared child)")
            seen.add(v)
            node = self.nodes[v]
            if isinstance(node, Cut):
                for c in (node.left, node.right):
                    if c not in self.nodes:
                        raise StructureError(f"node {v} references undefined child {c}")
                    stack.append(c)
        if len(seen) != len(self.nodes):
            extra = sorted(set(self.nodes) - seen)
            raise StructureError(f"nodes {extra} are not reachable from the root")

    # construction helpers
    @classmethod
    def leaf(cls, label: Label | str) -> "DecisionTree":
        return cls({0: Leaf(Label(label) if isinstance(label, str) else label)}, 0)

    @classmethod
    def from_nested(cls, spec) -> "DecisionTree":
        """Build from nested tuples: ``"blue"``/``Label`` for leaves,
        ``(feature, threshold, left, right)`` for cuts. Ids are assigned in preorder."""
        nodes: dict[int, Node] = {}

        def build(s) -> int:
            i = len(nodes)
            if isinstance(s, (str, Label)):
                nodes[i] = Leaf(Label(s) if isinstance(s, str) else s)
                return i
            feat, thr, left, right = s
            nodes[i] = None  # reserve the id
            lid = build(left)
            rid = build(right)
            nodes[i] = Cut(feat, as_fraction(thr), lid, rid)
            return i

        root = build(spec)
        return cls(nodes, root)

    def to_nested(self, v: int | None = None):
        v = self.root if v is None else v
        node = self.nodes[v]
        if isinstance(node, Leaf):
            return node.label.value
        return (node.feature, node.threshold, self.to_nested(node.left), self.to_nested(node.right))

    # structure
    def is_leaf(self, v: int) -> bool:
        return isinstance(self.nodes[v], Leaf)

    def children(self, v: int) -> tuple[int, int] | tuple[()]:
        node = self.nodes[v]
        return (node.left, node.right) if isinstance(node, Cut) else ()

    @property
    def parent(self) -> dict[int, int | None]:
        if self._parent is None:
            par: dict[int, int | None] = {self.root: None}
            for v in self.preorder():
                for c in self.children(v):
                    par[c] = v
            self._parent = par
        return self._parent

    def preorder(self, v: int | None = None) -> list[int]:
        out = []
        stack = [self.root if v is None else v]
        while stack:
            u = stack.pop()
            out.append(u)
            node = self.nodes[u]
            if isinstance(node, Cut):
                stack.append(node.right)
                stack.append(node.left)
        return out

    def postorder(self, v: int | None = None) -> list[int]:
        return self.preorder(v)[::-1]

    def subtree_node_counts(self) -> dict[int, int]:
        """Number of nodes (cuts and leaves) in each subtree."""
        if self._size is None:
            size: dict[int, int] = {}
            for v in self.postorder():
                size[v] = 1 + sum(size[c] for c in self.children(v))
            self._size = size
        return self._size

    def inner_counts(self) -> dict[int, int]:
        """Number of cuts in each subtree (``s_v``)."""
        # a binary tree with m nodes has (m - 1) / 2 cuts
        return {v: (m - 1) // 2 for v, m in self.subtree_node_counts().items()}

    @property
    def size(self) -> int:
        return sum(1 for node in self.nodes.values() if isinstance(node, Cut))

    def cuts(self) -> list[int]:
        return [v for v in self.preorder() if not self.is_leaf(v)]

    def leaves(self) -> list[int]:
        return [v for v in self.preorder() if self.is_leaf(v)]

    def features_used(self) -> set[int]:
        return {n.feature for n in self.nodes.values() if isinstance(n, Cut)}

    def check_features(self, d: int) -> None:
        for v, node in self.nodes.items():
            if isinstance(node, Cut) and not 0 <= node.feature < d:
                raise StructureError(f"cut {v} uses feature {node.feature}, dataset has d={d}")

    def canonical(self, v: int | None = None):
        """Structural form ignoring node ids; equal trees have equal forms."""
        return self.to_nested(v)

    def structurally_equal(self, other: "DecisionTree") -> bool:
        return self.canonical() == other.canonical()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return self.root == other.root and self.nodes == other.nodes

    def __hash__(self) -> int:
        return hash((self.root, tuple(sorted(self.nodes.items()))))

    def __repr__(self) -> str:
        return f"DecisionTree(s={self.size}, root={self.root}, nodes={len(self.nodes)})"

    # routing
    def route(self, values: Sequence[Fraction]) -> int:
        v = self.root
        node = self.nodes[v]
        while isinstance(node, Cut):
            v = node.left if values[node.feature] <= node.threshold else node.right
            node = self.nodes[v]
        return v

    def predict(self, values: Sequence[Fraction]) -> Label:
        return self.nodes[self.route(values)].label

    def errors(self, data: Dataset) -> int:
        return sum(1 for e in data if self.predict(e.values) is not e.label)

    def with_subtree_replaced(self, v: int, new_id: int | None, new_node: Node | None,
                              keep: int | None = None) -> "DecisionTree":
        """Return a copy where the subtree at ``v`` is replaced either by an existing
        node ``keep`` (raising) or by a fresh node ``new_node`` with id ``new_id``."""
        par = self.parent[v]
        target = keep if keep is not None else new_id
        nodes = dict(self.nodes)
        if new_node is not None:
            nodes[new_id] = new_node
        if par is None:
            root = target
        else:
            p = nodes[par]
            if p.left == v:
                nodes[par] = Cut(p.feature, p.threshold, target, p.right)
            else:
                nodes[par] = Cut(p.feature, p.threshold, p.left, target)
            root = self.root
        # drop nodes no longer reachable
        reachable: set[int] = set()
        stack = [root]
        while stack:
            u = stack.pop()
            reachable.add(u)
            node = nodes[u]
            if isinstance(node, Cut):
                stack.extend((node.left, node.right))
        return DecisionTree({u: nodes[u] for u in reachable}, root)

    def fresh_id(self) -> int:
        return max(self.nodes) + 1


def tree_metrics(tree: DecisionTree) -> dict[str, int]:
    """``s``, ``depth``, ``d_T`` and ``D_T`` of a tree."""
    depth = d_t = big_d_t = 0
    # each stack entry carries the per-feature threshold sets on the path so far
    stack: list[tuple[int, int, dict[int, frozenset]]] = [(tree.root, 0, {})]
    while stack:
        v, h, seen = stack.pop()
        node = tree.nodes[v]
        if isinstance(node, Leaf):
            depth = max(depth, h)
            d_t = max(d_t, len(seen))
            big_d_t = max(big_d_t, max((len(x) for x in seen.values()), default=0))
            continue
        nxt = dict(seen)
        nxt[node.feature] = seen.get(node.feature, frozenset()) | {node.threshold}
        stack.append((node.left, h + 1, nxt))
        stack.append((node.right, h + 1, nxt))
    return {"s": tree.size, "depth": depth, "d_T": d_t, "D_T": big_d_t}


@dataclass(frozen=True)
class Violation:
    leaf: int
    kind: str  # "empty" or "label"
    n_blue: int
    n_red: int


def leaf_counts(tree: DecisionTree, data: Dataset) -> dict[int, list[int]]:
    counts = {v: [0, 0] for v in tree.leaves()}
    for e in data:
        counts[tree.route(e.values)][0 if e.label is Label.BLUE else 1] += 1
    return counts


def validate_reasonable(tree: DecisionTree, data: Dataset) -> list[Violation]:
    """Empty list iff every leaf is non-empty and carries a most frequent label.

    Raises :class:`StructureError` when a cut references a feature outside the dataset.
    """
    tree.check_features(data.d)
    report = []
    for v, (b, r) in leaf_counts(tree, data).items():
        if b + r == 0:
            report.append(Violation(v, "empty", b, r))
            continue
        label = tree.nodes[v].label
        own, other = (b, r) if label is Label.BLUE else (r, b)
        if own < other:
            report.append(Violation(v, "label", b, r))
    return report


def is_reasonable(tree: DecisionTree, data: Dataset) -> bool:
    return not validate_reasonable(tree, data)


@dataclass(frozen=True)
class Box:
    """Per-feature half-open intervals ``(lo, hi]``; ``±inf`` marks an open side."""

    bounds: tuple[tuple, ...]

    @classmethod
    def full(cls, d: int) -> "Box":
        return cls(((NEG_INF, POS_INF),) * d)

    def contains(self, values: Sequence[Fraction]) -> bool:
        return all(lo < x <= hi for x, (lo, hi) in zip(values, self.bounds))

    def restrict(self, feature: int, threshold: Fraction, left: bool) -> "Box":
        lo, hi = self.bounds[feature]
        new = (lo, min(hi, threshold)) if left else (max(lo, threshold), hi)
        b = list(self.bounds)
        b[feature] = new
        return Box(tuple(b))

    def members(self, data: Dataset) -> list[Example]:
        return [e for e in data if self.contains(e.values)]


@dataclass(frozen=True)
class SolveSpec:
    operation: str  # "replacement" or "raising"
    variant: str = "exact"  # "exact" or "at_least"
    k: int = 0
    t: int = 0

    def __post_init__(self) -> None:
        if self.operation not in ("replacement", "raising"):
            raise ValueError(f"unknown operation {self.operation!r}")
        if self.variant not in ("exact", "at_least"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.k < 0 or self.t < 0:
            raise ValueError("k and t must be non-negative")
