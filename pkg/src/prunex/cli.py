"""Command-line entry point: ``prunex <command> ...``.

Exit status is 0 on success, 1 when a solve is infeasible, 2 on bad input and
3 when ``--time-budget`` runs out.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import gen as generators
from .classify import build_hld_index, classify_hld, classify_naive
from .heuristics import COMPARISON_HEADER, compare_with_optimal
from .ingest import ParseError, induce_greedy, load_dataset_csv, read_tree, write_dataset_csv, write_tree
from .model import SolveSpec, StructureError, validate_reasonable
from .oracle import OracleCapExceeded, oracle_pareto
from .raising import RaiseTable, is_prunable_to, pareto_raising, solve_raising_boxdp
from .replace import pareto_replacement, solve_replacement

OPS = {"rep": "replacement", "raise": "raising"}


class InputError(Exception):
    pass


class TimeBudgetExceeded(Exception):
    pass


class _TimedTable(RaiseTable):
    """Box DP that gives up once a wall-clock deadline passes."""

    def __init__(self, *args, deadline: float | None = None, **kwargs):
        super().__init__(*args, **kwargs)
        self.deadline = deadline

    def vector(self, v, bounds):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise TimeBudgetExceeded
        return super().vector(v, bounds)


def _load(args):
    try:
        data = load_dataset_csv(args.data, class_col=args.class_col,
                                dedup_contradictions=getattr(args, "dedup", False))
    except FileNotFoundError:
        raise InputError(f"no such file: {args.data}") from None
    if getattr(args, "tree", None) is None:
        return data, None
    try:
        tree, d = read_tree(args.tree)
    except FileNotFoundError:
        raise InputError(f"no such file: {args.tree}") from None
    if d != data.d:
        raise InputError(f"tree expects d={d} features, dataset has {data.d}")
    tree.check_features(data.d)
    return data, tree


def _write_rows(path, header, rows) -> None:
    fh = open(path, "w", newline="", encoding="utf-8") if path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if path:
            fh.close()


def _fmt(x) -> str:
    return "inf" if x is None else str(x)


def _deadline(args) -> float | None:
    return time.monotonic() + args.time_budget if args.time_budget else None


def cmd_induce(args) -> int:
    data, _ = _load(args)
    tree = induce_greedy(data, min_leaf=args.min_leaf, max_depth=args.max_depth)
    write_tree(tree, args.output, data.d)
    return 0


def cmd_validate(args) -> int:
    data, tree = _load(args)
    report = validate_reasonable(tree, data)
    out = {"reasonable": not report,
           "violations": [{"leaf": v.leaf, "kind": v.kind, "n_blue": v.n_blue, "n_red": v.n_red}
                          for v in report]}
    print(json.dumps(out, indent=1))
    return 0


def cmd_classify(args) -> int:
    data, tree = _load(args)
    index = build_hld_index(tree, data.d) if args.hld else None
    rows = []
    for e in data:
        label, leaf = classify_hld(index, tree, e) if index else classify_naive(tree, e)
        rows.append([e.id, label.value, leaf, e.label.value])
    _write_rows(args.output, ["id", "predicted", "leaf", "label"], rows)
    return 0


def cmd_prune(args) -> int:
    data, tree = _load(args)
    op = OPS[args.op]
    start = time.perf_counter()
    if op == "replacement":
        res = solve_replacement(tree, data, args.k, args.t)
        feasible, witness, best = res.feasible, res.witness, res.min_errors
    else:
        table = _TimedTable(tree, data, args.variant, deadline=_deadline(args))
        res = solve_raising_boxdp(tree, data, SolveSpec("raising", args.variant, args.k, args.t), table)
        feasible, witness, best = res.feasible, res.witness, res.min_errors
        if witness is not None and not is_prunable_to(tree, witness):
            raise AssertionError("witness is not reachable by raising")
    wall = (time.perf_counter() - start) * 1000
    if witness is not None and witness.errors(data) != best:
        raise AssertionError("witness does not reproduce the reported errors")
    pruned = sorted(set(tree.cuts()) - set(witness.cuts())) if witness is not None else []
    summary = {"feasible": feasible, "k": args.k, "t": args.t, "min_errors": best,
               "pruned_nodes": pruned, "wall_ms": round(wall, 3)}
    if args.output and witness is not None:
        write_tree(witness, args.output, data.d)
    text = json.dumps(summary, indent=1)
    if args.summary:
        Path(args.summary).write_text(text + "\n", encoding="utf-8")
    print(text)
    return 0 if feasible else 1


def cmd_pareto(args) -> int:
    data, tree = _load(args)
    if OPS[args.op] == "replacement":
        front = pareto_replacement(tree, data)
        _write_rows(args.output, ["k", "min_errors"], [[k, _fmt(t)] for k, t in front.items()])
        return 0
    table = _TimedTable(tree, data, args.variant, deadline=_deadline(args))
    front = pareto_raising(tree, data, args.variant, table=table)
    _write_rows(args.output, ["k", "min_errors", "variant"],
                [[k, _fmt(t), args.variant] for k, t in front.items()])
    return 0


def cmd_oracle(args) -> int:
    data, tree = _load(args)
    op = OPS[args.op]
    front = oracle_pareto(tree, data, op, args.variant, cap=args.cap)
    _write_rows(args.output, ["k", "min_errors", "variant"],
                [[k, _fmt(t), args.variant] for k, t in front.items()])
    return 0


def _compare_one(job):
    name, tree_path, data_path, op, class_col = job
    data = load_dataset_csv(data_path, class_col=class_col)
    tree, _ = read_tree(tree_path)
    return compare_with_optimal(name, tree, data, op).row()


def cmd_compare(args) -> int:
    jobs = []
    for i, (tree_path, data_path) in enumerate(args.pair):
        name = args.name[i] if args.name and i < len(args.name) else Path(data_path).stem
        for p in (tree_path, data_path):
            if not Path(p).exists():
                raise InputError(f"no such file: {p}")
        jobs.append((name, tree_path, data_path, OPS[args.op], args.class_col))
    workers = max(1, int(os.environ.get("PRUNEX_THREADS", "1")))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_compare_one, jobs))
    else:
        rows = [_compare_one(j) for j in jobs]
    _write_rows(args.output, COMPARISON_HEADER, rows)
    return 0


def cmd_gen(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    meta: dict = {"kind": args.kind}
    if args.kind == "nonmono":
        data, tree, expected = generators.gen_nonmonotone(args.k)
        meta["expected_exact_front"] = expected
    elif args.kind == "indset":
        if not args.graph:
            raise InputError("gen indset needs --graph")
        try:
            g = generators.Graph.read(args.graph)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read graph: {exc}") from None
        data, tree, spec, truth = generators.gen_independent_set(g, args.kappa)
        meta.update(k=spec.k, t=spec.t, variant=spec.variant, truth=truth)
    elif args.kind == "hitset":
        if not args.sets:
            raise InputError("gen hitset needs --sets")
        try:
            lines = [ln.split() for ln in Path(args.sets).read_text().splitlines() if ln.strip()]
            universe = int(lines[0][0])
            sets = [[int(x) for x in ln] for ln in lines[1:]]
        except (OSError, ValueError, IndexError) as exc:
            raise InputError(f"cannot read sets: {exc}") from None
        data, tree, spec, truth = generators.gen_hitting_set(universe, sets, args.kappa)
        meta.update(k=spec.k, t=spec.t, variant=spec.variant, truth=truth)
    else:
        data, tree = generators.gen_random(args.seed, n=args.n, d=args.d, value_range=args.value_range,
                                           class_balance=args.class_balance, min_leaf=args.min_leaf,
                                           max_depth=args.max_depth)
        meta["seed"] = args.seed
    write_dataset_csv(data, out / "data.csv")
    write_tree(tree, out / "tree.json", data.d)
    (out / "instance.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prunex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def io(sp, tree=True):
        sp.add_argument("--data", required=True)
        if tree:
            sp.add_argument("--tree", required=True)
        sp.add_argument("--class-col", default=None)
        sp.add_argument("--dedup", action="store_true", help="drop contradicting duplicates")

    sp = sub.add_parser("induce", help="grow a greedy tree from a CSV")
    io(sp, tree=False)
    sp.add_argument("--min-leaf", type=int, default=1)
    sp.add_argument("--max-depth", type=int, default=None)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_induce)

    sp = sub.add_parser("validate", help="report unreasonable leaves")
    io(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("classify", help="predict every example")
    io(sp)
    sp.add_argument("--hld", action="store_true", help="use the heavy-light index")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_classify)

    for name, func in (("prune", cmd_prune), ("pareto", cmd_pareto)):
        sp = sub.add_parser(name)
        sp.add_argument("op", choices=sorted(OPS))
        io(sp)
        sp.add_argument("--variant", choices=("exact", "at_least"), default=None)
        sp.add_argument("--time-budget", type=float, default=None, help="seconds")
        sp.add_argument("-o", "--output")
        if name == "prune":
            sp.add_argument("--k", type=int, required=True)
            sp.add_argument("--t", type=int, required=True)
            sp.add_argument("--summary")
        sp.set_defaults(func=func)

    sp = sub.add_parser("oracle", help="brute-force fronts for small trees")
    sp.add_argument("op", choices=sorted(OPS))
    io(sp)
    sp.add_argument("--variant", choices=("exact", "at_least"), default="exact")
    sp.add_argument("--cap", type=int, default=10)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("compare", help="heuristic versus exact pruning")
    sp.add_argument("op", choices=sorted(OPS))
    sp.add_argument("--pair", nargs=2, action="append", required=True, metavar=("TREE", "DATA"))
    sp.add_argument("--name", action="append")
    sp.add_argument("--class-col", default=None)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("gen", help="write a generated instance to a directory")
    sp.add_argument("kind", choices=("nonmono", "indset", "hitset", "random"))
    sp.add_argument("-k", type=int, default=2)
    sp.add_argument("--graph")
    sp.add_argument("--sets", help="first line universe size, then one set per line")
    sp.add_argument("--kappa", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=10)
    sp.add_argument("--d", type=int, default=3)
    sp.add_argument("--value-range", type=int, default=4)
    sp.add_argument("--class-balance", type=float, default=0.5)
    sp.add_argument("--min-leaf", type=int, default=1)
    sp.add_argument("--max-depth", type=int, default=None)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_gen)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.command in ("prune", "pareto"):
        if args.op == "rep" and args.variant is not None:
            print("prunex: --variant applies to raising only", file=sys.stderr)
            return 2
        args.variant = args.variant or "exact"
    try:
        return args.func(args)
    except (InputError, ParseError, StructureError, OracleCapExceeded, ValueError) as exc:
        print(f"prunex: {exc}", file=sys.stderr)
        return 2
    except TimeBudgetExceeded:
        print("prunex: time budget exhausted", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
