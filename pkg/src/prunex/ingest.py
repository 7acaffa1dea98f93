"""Dataset and tree I/O, domain reduction, and a greedy tree inducer."""
from __future__ import annotations

import bisect
import csv
import json
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .model import (
    Cut,
    Dataset,
    DecisionTree,
    Example,
    Label,
    Leaf,
    StructureError,
    majority_label,
)


class ParseError(ValueError):
    """Malformed input file; the message names the offending row or node."""


@dataclass
class RawTable:
    columns: list[str]
    rows: list[list[str]]
    kinds: dict[str, str]  # column -> "numeric" | "categorical" | "class"


def _parse_number(cell: str) -> Fraction | None:
    try:
        return Fraction(cell.strip())
    except (ValueError, ZeroDivisionError):
        return None


def read_raw_table(path: str | Path, class_col: str | None = None,
                   categorical: Iterable[str] | None = None) -> RawTable:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        rows = []
        for i, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"row {i}: expected {len(header)} cells, got {len(row)}")
            rows.append([c.strip() for c in row])
    class_col = class_col or header[-1]
    if class_col not in header:
        raise ParseError(f"class column {class_col!r} not in header")
    declared = set(categorical) if categorical is not None else None
    kinds = {}
    ci = header.index(class_col)
    for j, name in enumerate(header):
        if j == ci:
            kinds[name] = "class"
        elif declared is not None:
            kinds[name] = "categorical" if name in declared else "numeric"
        else:
            numeric = all(_parse_number(r[j]) is not None for r in rows)
            kinds[name] = "numeric" if numeric else "categorical"
    for i, r in enumerate(rows, start=1):
        if not r[ci]:
            raise ParseError(f"row {i}: empty class cell")
    return RawTable(header, rows, kinds)


def binarize_labels(classes: Sequence[str]) -> dict[str, Label]:
    """Largest class becomes blue, everything else red; size ties go to the
    lexicographically smallest name."""
    counts = Counter(classes)
    top = min(counts, key=lambda c: (-counts[c], c))
    return {c: Label.BLUE if c == top else Label.RED for c in counts}


def load_dataset_csv(path: str | Path, binarize_categorical: bool = True,
                     binarize_class: bool = True, dedup_contradictions: bool = False,
                     class_col: str | None = None,
                     categorical: Iterable[str] | None = None) -> Dataset:
    """Read a CSV with a header row into a :class:`Dataset`.

    Categorical columns become one 0/1 indicator per category (sorted by name).
    Class cells already reading ``blue``/``red`` are kept as they are; without
    ``binarize_class`` any other class value is an error.
    With ``dedup_contradictions`` an example whose feature vector equals an
    earlier example of the other class is dropped.
    """
    table = read_raw_table(path, class_col, categorical)
    feature_cols = [j for j, c in enumerate(table.columns) if table.kinds[c] != "class"]
    ci = next(j for j, c in enumerate(table.columns) if table.kinds[c] == "class")

    encoders: list[tuple[int, list[str] | None]] = []
    for j in feature_cols:
        name = table.columns[j]
        if table.kinds[name] == "categorical":
            if not binarize_categorical:
                raise ParseError(f"column {name!r} is categorical; enable binarization")
            encoders.append((j, sorted({r[j] for r in table.rows})))
        else:
            encoders.append((j, None))

    classes = [r[ci] for r in table.rows]
    if binarize_class and not set(classes) <= {"blue", "red"}:
        mapping = binarize_labels(classes)
    else:
        mapping = {}
        for i, c in enumerate(classes, start=1):
            if c not in ("blue", "red"):
                raise ParseError(f"row {i}: class {c!r} is not 'blue' or 'red'")
            mapping[c] = Label(c)

    examples = []
    seen: dict[tuple, Label] = {}
    for i, r in enumerate(table.rows, start=1):
        values: list[Fraction] = []
        for j, cats in encoders:
            if cats is None:
                x = _parse_number(r[j])
                if x is None:
                    raise ParseError(f"row {i}: non-numeric cell {r[j]!r} in column {table.columns[j]!r}")
                values.append(x)
            else:
                values.extend(Fraction(int(r[j] == c)) for c in cats)
        label = mapping[r[ci]]
        key = tuple(values)
        if dedup_contradictions:
            prev = seen.get(key)
            if prev is not None and prev is not label:
                continue
            seen.setdefault(key, label)
        examples.append(Example(len(examples), key, label))
    d = sum(1 if cats is None else len(cats) for _, cats in encoders)
    return Dataset(tuple(examples), d)


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def write_dataset_csv(data: Dataset, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(data.d)] + ["class"])
        for e in data:
            w.writerow([_fmt(x) for x in e.values] + [e.label.value])


# tree documents

def tree_to_document(tree: DecisionTree, d: int) -> dict:
    nodes = {}
    for v in tree.preorder():
        node = tree.nodes[v]
        if isinstance(node, Leaf):
            nodes[str(v)] = {"kind": "leaf", "class": node.label.value}
        else:
            t = node.threshold
            nodes[str(v)] = {"kind": "cut", "feature": node.feature,
                             "threshold": f"{t.numerator}/{t.denominator}",
                             "left": str(node.left), "right": str(node.right)}
    return {"d": d, "root": str(tree.root), "nodes": nodes}


def tree_from_document(doc: dict) -> tuple[DecisionTree, int]:
    try:
        raw_nodes = doc["nodes"]
        root = doc["root"]
        d = int(doc["d"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"tree document missing field: {exc}") from None
    keys = [str(k) for k in raw_nodes]
    if all(k.lstrip("-").isdigit() for k in keys):
        ids = {k: int(k) for k in keys}
    else:
        ids = {k: i for i, k in enumerate(keys)}
    if str(root) not in ids:
        raise ParseError(f"root {root} is not a defined node")
    nodes = {}
    for key, spec in raw_nodes.items():
        kind = spec.get("kind")
        if kind == "leaf":
            try:
                nodes[ids[str(key)]] = Leaf(Label(spec["class"]))
            except (KeyError, ValueError):
                raise ParseError(f"node {key}: bad or missing class") from None
        elif kind == "cut":
            for side in ("left", "right"):
                if side not in spec:
                    raise ParseError(f"node {key}: missing {side} child")
                if str(spec[side]) not in ids:
                    raise ParseError(f"node {key}: {side} child {spec[side]} is undefined")
            try:
                thr = Fraction(str(spec["threshold"]))
                feat = int(spec["feature"])
            except (KeyError, ValueError, ZeroDivisionError):
                raise ParseError(f"node {key}: bad feature or threshold") from None
            nodes[ids[str(key)]] = Cut(feat, thr, ids[str(spec["left"])], ids[str(spec["right"])])
        else:
            raise ParseError(f"node {key}: unknown kind {kind!r}")
    try:
        tree = DecisionTree(nodes, ids[str(root)])
    except StructureError as exc:
        names = {i: k for k, i in ids.items()}
        raise ParseError(f"{exc} (document ids: {names})") from None
    return tree, d


def write_tree(tree: DecisionTree, path: str | Path, d: int) -> None:
    Path(path).write_text(json.dumps(tree_to_document(tree, d), indent=1) + "\n", encoding="utf-8")


def read_tree(path: str | Path) -> tuple[DecisionTree, int]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return tree_from_document(doc)


# domain reduction

def reduce_to_tree_domains(data: Dataset, tree: DecisionTree) -> tuple[Dataset, DecisionTree]:
    """Keep only features the tree cuts on, and collapse each kept feature onto one
    representative value per gap between consecutive tree thresholds.

    Returns the reduced dataset and the tree with features renumbered to match.
    """
    tree.check_features(data.d)
    kept = sorted(tree.features_used())
    index = {f: i for i, f in enumerate(kept)}
    cut_thr = {f: sorted({n.threshold for n in tree.nodes.values()
                          if isinstance(n, Cut) and n.feature == f}) for f in kept}

    def rep(f: int, x: Fraction) -> Fraction:
        ts = cut_thr[f]
        j = bisect.bisect_left(ts, x)  # x in (ts[j-1], ts[j]]
        if j == 0:
            return ts[0] - 1
        if j == len(ts):
            return ts[-1] + 1
        return (ts[j - 1] + ts[j]) / 2

    examples = tuple(Example(e.id, tuple(rep(f, e.values[f]) for f in kept), e.label) for e in data)
    nodes = {v: (Cut(index[n.feature], n.threshold, n.left, n.right) if isinstance(n, Cut) else n)
             for v, n in tree.nodes.items()}
    return Dataset(examples, len(kept)), DecisionTree(nodes, tree.root)


# greedy inducer

def _entropy(b: int, r: int) -> float:
    n = b + r
    out = 0.0
    for c in (b, r):
        if c:
            p = c / n
            out -= p * math.log2(p)
    return out


def induce_greedy(data: Dataset, min_leaf: int = 1, max_depth: int | None = None,
                  allow_zero_gain: bool = True) -> DecisionTree:
    """Top-down information-gain tree over the dataset's thresholds.

    A node becomes a leaf when it is pure, when ``max_depth`` is reached, or
    when no threshold leaves ``min_leaf`` examples on both sides. Zero-gain
    splits are taken unless ``allow_zero_gain`` is false (XOR-like data has
    no positive-gain first split).
    """
    if data.n == 0:
        raise ValueError("cannot induce a tree from an empty dataset")
    nodes: dict[int, object] = {}

    def best_split(idx: list[int]):
        b = sum(1 for j in idx if data.examples[j].label is Label.BLUE)
        r = len(idx) - b
        base = _entropy(b, r)
        best = None
        for f in range(data.d):
            order = sorted(idx, key=lambda j: data.examples[j].values[f])
            thr = data.thresholds[f]
            lb = lr = 0
            for pos in range(len(order) - 1):
                e = data.examples[order[pos]]
                if e.label is Label.BLUE:
                    lb += 1
                else:
                    lr += 1
                x, y = e.values[f], data.examples[order[pos + 1]].values[f]
                if x == y:
                    continue
                nl = pos + 1
                nr = len(order) - nl
                if nl < min_leaf or nr < min_leaf:
                    continue
                cond = (nl * _entropy(lb, lr) + nr * _entropy(b - lb, r - lr)) / len(order)
                gain = base - cond
                t = thr[bisect.bisect_right(thr, x)]
                key = (-round(gain, 12), f, t)
                if best is None or key < best[0]:
                    best = (key, f, t, gain)
        return best

    def grow(idx: list[int], depth: int) -> int:
        vid = len(nodes)
        nodes[vid] = None
        b = sum(1 for j in idx if data.examples[j].label is Label.BLUE)
        r = len(idx) - b
        split = None
        if b and r and (max_depth is None or depth < max_depth):
            split = best_split(idx)
            if split is not None and split[3] <= 1e-12 and not allow_zero_gain:
                split = None
        if split is None:
            nodes[vid] = Leaf(majority_label(b, r))
            return vid
        _, f, t, _ = split
        left = [j for j in idx if data.examples[j].values[f] <= t]
        right = [j for j in idx if data.examples[j].values[f] > t]
        lid = grow(left, depth + 1)
        rid = grow(right, depth + 1)
        nodes[vid] = Cut(f, t, lid, rid)
        return vid

    root = grow(list(range(data.n)), 0)
    return DecisionTree(nodes, root)
