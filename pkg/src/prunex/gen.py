"""Instance generators: the non-monotone raising family, reductions from
independent set and hitting set (with brute-force ground truth), and random
instances."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .ingest import induce_greedy
from .model import Dataset, DecisionTree, Example, Label, Leaf, SolveSpec, majority_label

ZERO = Fraction(0)


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        norm = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) leaves the vertex range 0..{self.n - 1}")
            norm.add((min(u, v), max(u, v)))
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @classmethod
    def parse(cls, text: str) -> "Graph":
        """Edge-list text: vertex count on the first line, then ``u v`` per line."""
        lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ValueError("empty graph file")
        n = int(lines[0][0])
        return cls(n, tuple((int(a), int(b)) for a, b in lines[1:]))

    @classmethod
    def read(cls, path: str | Path) -> "Graph":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def has_independent_set(self, size: int) -> bool:
        if size > self.n:
            return False
        edges = set(self.edges)
        for cand in itertools.combinations(range(self.n), size):
            if not any((a, b) in edges for a, b in itertools.combinations(cand, 2)):
                return True
        return False


def _path_tree(n_features: int, final: Sequence) -> DecisionTree:
    """Cuts ``f <= 0`` for ``f = 0..n_features-1`` chained through their left
    children, each with a blue right leaf, ending in ``final`` (a nested spec)."""
    spec = final
    for f in reversed(range(n_features)):
        spec = (f, ZERO, spec, "blue")
    return DecisionTree.from_nested(spec)


def _vec(d: int, ones: Sequence[int]) -> tuple[Fraction, ...]:
    v = [ZERO] * d
    for i in ones:
        v[i] = Fraction(1)
    return tuple(v)


def gen_nonmonotone(k: int) -> tuple[Dataset, DecisionTree, dict[int, str]]:
    """Instance where raising reaches zero errors with exactly ``k`` pruned cuts
    but every smaller positive count costs at least one error.

    Features ``0..k-1``; the root cuts feature 0 and both of its subtrees are the
    same chain over features ``1..k-1`` ending in a red leaf.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    rows = []
    for first in (0, 1):
        for j in range(1, k):
            rows.append((_vec(k, [j] + ([0] if first else [])), Label.BLUE))
        rows.append((_vec(k, [0] if first else []), Label.RED))
    data = Dataset(tuple(Example(i, v, lab) for i, (v, lab) in enumerate(rows)), k)
    chain = "red"
    for f in reversed(range(1, k)):
        chain = (f, ZERO, chain, "blue")
    tree = DecisionTree.from_nested((0, ZERO, chain, chain))
    expected = {0: "0"}
    for j in range(1, k):
        expected[j] = ">=1"
    expected[k] = "0"
    return data, tree, expected


def gen_independent_set(g: Graph, kappa: int):
    """Raising instance that can prune exactly ``kappa`` cuts with no errors iff
    ``g`` has an independent set of size ``kappa``.

    One binary feature per vertex plus a guard feature; blue examples for edges
    and for each vertex, a blue guard example and one red all-zero example.
    """
    if not 0 <= kappa <= g.n:
        raise ValueError(f"kappa must lie in 0..{g.n}")
    d = g.n + 1
    guard = g.n
    rows = [(_vec(d, [u, v]), Label.BLUE) for u, v in g.edges]
    rows += [(_vec(d, [v, guard]), Label.BLUE) for v in range(g.n)]
    rows.append((_vec(d, [guard]), Label.BLUE))
    rows.append((_vec(d, []), Label.RED))
    data = Dataset(tuple(Example(i, v, lab) for i, (v, lab) in enumerate(rows)), d)
    tree = _path_tree(g.n, (guard, ZERO, "red", "blue"))
    spec = SolveSpec("raising", "exact", kappa, 0)
    return data, tree, spec, g.has_independent_set(kappa)


def has_hitting_set(universe_size: int, sets: Sequence[Sequence[int]], size: int) -> bool:
    if size > universe_size:
        return False
    fam = [set(s) for s in sets]
    for cand in itertools.combinations(range(universe_size), size):
        c = set(cand)
        if all(c & s for s in fam):
            return True
    return False


def gen_hitting_set(universe_size: int, sets: Sequence[Sequence[int]], kappa: int):
    """Raising instance keeping exactly ``kappa`` element cuts (plus the guard
    cut) with no errors iff a hitting set of size ``kappa`` exists."""
    if not sets or any(len(s) == 0 for s in sets):
        raise ValueError("sets must be a non-empty family of non-empty subsets")
    if not 0 <= kappa <= universe_size:
        raise ValueError(f"kappa must lie in 0..{universe_size}")
    if any(not 0 <= u < universe_size for s in sets for u in s):
        raise ValueError(f"set elements must lie in 0..{universe_size - 1}")
    d = universe_size + 1
    guard = universe_size
    rows = [(_vec(d, sorted(set(s))), Label.BLUE) for s in sets]
    rows += [(_vec(d, [u, guard]), Label.BLUE) for u in range(universe_size)]
    rows.append((_vec(d, [guard]), Label.BLUE))
    rows.append((_vec(d, []), Label.RED))
    data = Dataset(tuple(Example(i, v, lab) for i, (v, lab) in enumerate(rows)), d)
    tree = _path_tree(universe_size, (guard, ZERO, "red", "blue"))
    k = universe_size - kappa
    spec = SolveSpec("raising", "exact", k, 0)
    truth = has_hitting_set(universe_size, sets, kappa)
    return data, tree, spec, truth


def gen_random(seed: int, n: int = 10, d: int = 3, value_range: int = 4,
               class_balance: float = 0.5, min_leaf: int = 1,
               max_depth: int | None = None) -> tuple[Dataset, DecisionTree]:
    """Seeded random dataset with integer values in ``0..value_range-1`` and the
    greedy tree induced on it."""
    if n < 1 or d < 1 or value_range < 1:
        raise ValueError("n, d and value_range must be positive")
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        values = tuple(Fraction(rng.randrange(value_range)) for _ in range(d))
        label = Label.BLUE if rng.random() < class_balance else Label.RED
        rows.append(Example(i, values, label))
    data = Dataset(tuple(rows), d)
    return data, induce_greedy(data, min_leaf=min_leaf, max_depth=max_depth)


def random_tree(rng: random.Random, data: Dataset, s: int, relabel: bool = True) -> DecisionTree:
    """Random tree shape with ``s`` cuts drawn from the dataset's thresholds.

    Leaves are labeled by the majority of the examples reaching them when
    ``relabel`` is set, otherwise at random. Leaves may be empty, so the result
    need not be reasonable.
    """
    feats = [f for f in range(data.d) if data.thresholds[f]] or [0]

    def build(m: int):
        if m == 0:
            return rng.choice(("blue", "red"))
        f = rng.choice(feats)
        thr = data.thresholds[f]
        x = rng.choice(thr) if thr else Fraction(0)
        left = rng.randrange(m)
        return (f, x, build(left), build(m - 1 - left))

    tree = DecisionTree.from_nested(build(s))
    if not relabel:
        return tree
    counts = {v: [0, 0] for v in tree.leaves()}
    for e in data:
        counts[tree.route(e.values)][e.label is Label.RED] += 1
    nodes = dict(tree.nodes)
    for v, (b, r) in counts.items():
        if b + r:
            nodes[v] = Leaf(majority_label(b, r))
    return DecisionTree(nodes, tree.root)


def random_hitting_set(rng: random.Random, universe_size: int, n_sets: int) -> list[list[int]]:
    return [sorted(rng.sample(range(universe_size), rng.randint(1, universe_size)))
            for _ in range(n_sets)]


def random_graph(rng: random.Random, n: int, p: float = 0.4) -> Graph:
    edges = tuple((u, v) for u, v in itertools.combinations(range(n), 2) if rng.random() < p)
    return Graph(n, edges)
