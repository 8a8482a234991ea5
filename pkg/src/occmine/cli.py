"""Command-line front end.

    occmine mine   DATA --minsup N [--per-tree] [--class-merge] [--max-size K] ...
    occmine verify DATA --minsup N [--max-size K] [--guard CAP]
    occmine gen    OUT [--n-labels ...] [--seed S]
    occmine bench  DATA... --minsup N [N ...] [--guard CAP]

Pattern lines are ``tokens<TAB>support`` (plus ``<TAB>per-tree support``
with ``--per-tree``), in depth-first discovery order unless
``--sort-support`` is given.  Run reports go to stderr as JSON or to the
file named by ``--report``.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

from . import __version__
from ._backend import BACKEND, available_backends
from .encoding import Dataset, decode_pattern, format_pattern, load_label_names, parse_dataset, parse_pattern, \
    write_dataset
from .errors import CountOverflow, ExplosionGuard, InfeasibleShape, OccMineError, ParseError
from .miner import MinerConfig, MinerStats, mine, support_map
from .occindex import CountMode, occlist_of
from .oracle import DEFAULT_GUARD, ScopeListStats, oracle_mine, scopelist_mine, scopelist_of
from .synthgen import GenParams, generate, write_metadata

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_OVERFLOW = 4
EXIT_MISMATCH = 5


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    params: dict
    pattern_count: int
    wall_time_millis: float
    peak_occ_entries: int
    candidates_generated: int
    candidates_frequent: int


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _load(path: str, strict_tid: bool = True) -> Dataset:
    if path == "-":
        return parse_dataset(sys.stdin, strict_tid)
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_dataset(fh, strict_tid)
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}") from exc


def _open_out(path: Optional[str]):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _config(args) -> MinerConfig:
    return MinerConfig(
        minsup=args.minsup,
        class_merge=getattr(args, "class_merge", False),
        max_pattern_size=args.max_size,
        count_mode=CountMode(args.count),
    )


def _add_mining_flags(p: argparse.ArgumentParser, multi_minsup: bool = False) -> None:
    if multi_minsup:
        p.add_argument("--minsup", type=_positive, nargs="+", required=True, metavar="N",
                       help="support thresholds, run in decreasing order")
    else:
        p.add_argument("--minsup", type=_positive, required=True, metavar="N",
                       help="support threshold (positive)")
    p.add_argument("--max-size", type=_positive, default=None, metavar="K",
                   help="do not grow patterns beyond K vertices")
    p.add_argument("--count", choices=[m.value for m in CountMode], default=CountMode.PER_OCCURRENCE.value,
                   help="support measure compared against minsup (default: per_occurrence)")
    p.add_argument("--relaxed-tid", action="store_true",
                   help="accept dataset lines whose two leading tids differ")
    p.add_argument("--backend", choices=sorted(available_backends()), default=None,
                   help=f"join kernels (default: {BACKEND})")


# ---------------------------------------------------------------------------
# commands


def cmd_mine(args) -> int:
    d = _load(args.input, not args.relaxed_tid)
    cfg = _config(args)
    names = None
    if args.label_names:
        with open(args.label_names, encoding="utf-8") as fh:
            names = load_label_names(fh)
    stats = MinerStats()
    t0 = time.perf_counter()
    results = list(mine(d, cfg, stats, backend=args.backend, workers=args.parallel))
    elapsed = (time.perf_counter() - t0) * 1000
    if args.sort_support:
        key = (lambda r: -r.per_tree_support) if cfg.count_mode is CountMode.PER_TREE else (lambda r: -r.support)
        results.sort(key=key)  # stable, so ties keep discovery order
    out, close = _open_out(args.output)
    try:
        for r in results:
            line = f"{format_pattern(r.pattern, d.labels, names)}\t{r.support}"
            if args.per_tree:
                line += f"\t{r.per_tree_support}"
            out.write(line + "\n")
    finally:
        if close:
            out.close()
    report = RunReport(
        params={
            "input": args.input,
            "minsup": cfg.minsup,
            "count": cfg.count_mode.value,
            "class_merge": cfg.class_merge,
            "max_size": cfg.max_pattern_size,
            "parallel": args.parallel,
            "backend": args.backend or BACKEND,
        },
        pattern_count=len(results),
        wall_time_millis=round(elapsed, 3),
        peak_occ_entries=stats.peak_occ_entries,
        candidates_generated=stats.candidates_generated,
        candidates_frequent=stats.candidates_frequent,
    )
    _emit_report(report, args.report)
    return EXIT_OK


def _emit_report(report: RunReport, path: Optional[str]) -> None:
    text = json.dumps(asdict(report), sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    elif path is None:
        print(text, file=sys.stderr)


def _run_engine(fn):
    try:
        return fn(), None
    except ExplosionGuard as exc:
        return None, str(exc)


def cmd_verify(args) -> int:
    d = _load(args.input, not args.relaxed_tid)
    cfg = _config(args)
    engines = {
        "mine": lambda: support_map(mine(d, cfg, backend=args.backend), cfg.count_mode),
        "oracle": lambda: oracle_mine(d, cfg, cap=args.guard),
        "scopelist": lambda: scopelist_mine(d, cfg, cap=args.guard),
    }
    results = {}
    for name, fn in engines.items():
        res, skipped = _run_engine(fn)
        if skipped:
            print(f"{name}: SKIPPED ({skipped})")
        else:
            print(f"{name}: {len(res)} patterns")
            results[name] = res
    if "mine" not in results:
        return EXIT_ERROR
    ref = results["mine"]
    status = EXIT_OK
    for name, res in results.items():
        if name == "mine" or res == ref:
            continue
        status = EXIT_MISMATCH
        print(f"MISMATCH mine vs {name}")
        for key in sorted(set(ref) | set(res), key=lambda k: (len(k), k)):
            a, b = ref.get(key), res.get(key)
            if a != b:
                p = format_pattern(decode_pattern(key), d.labels)
                print(f"  {p}\tmine={a}\t{name}={b}")
    print("OK" if status == EXIT_OK else "FAIL")
    return status


def cmd_gen(args) -> int:
    try:
        params = GenParams(
            n_labels=args.n_labels,
            master_size=args.master_size,
            max_fanout=args.max_fanout,
            max_depth=args.max_depth,
            n_trees=args.n_trees,
            seed=args.seed,
            keep_prob=args.keep_prob,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    d = generate(params)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        write_dataset(d, fh)
    meta = args.output + ".meta.json"
    with open(meta, "w", encoding="utf-8") as fh:
        write_metadata(params, fh)
    print(f"wrote {len(d.trees)} trees to {args.output} ({meta})", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    out, close = _open_out(args.output)
    try:
        for path in args.inputs:
            d = _load(path, not args.relaxed_tid)
            for minsup in sorted(args.minsup, reverse=True):
                args_cfg = argparse.Namespace(minsup=minsup, max_size=args.max_size, count=args.count)
                cfg = _config(args_cfg)
                for rec in _bench_one(d, cfg, args):
                    rec = {"dataset": path, "minsup": minsup, **rec}
                    out.write(json.dumps(rec, sort_keys=True) + "\n")
                    out.flush()
            if args.pattern:
                p = parse_pattern(args.pattern, d.labels)
                oc = occlist_of(d, p, args.backend)
                rec = {"dataset": path, "pattern": args.pattern, "engine": "occlist",
                       "entries": len(oc), "support": oc.support}
                out.write(json.dumps(rec, sort_keys=True) + "\n")
                try:
                    sc = scopelist_of(d, p, args.guard)
                    rec = {"dataset": path, "pattern": args.pattern, "engine": "scopelist",
                           "entries": len(sc), "support": sc.support}
                except ExplosionGuard:
                    rec = {"dataset": path, "pattern": args.pattern, "engine": "scopelist",
                           "status": "skipped", "guard": args.guard}
                out.write(json.dumps(rec, sort_keys=True) + "\n")
    finally:
        if close:
            out.close()
    return EXIT_OK


def _bench_one(d: Dataset, cfg: MinerConfig, args):
    stats = MinerStats()
    t0 = time.perf_counter()
    n = sum(1 for _ in mine(d, cfg, stats, backend=args.backend, workers=args.parallel))
    yield {
        "engine": "occlist",
        "status": "ok",
        "wall_time_millis": round((time.perf_counter() - t0) * 1000, 3),
        "pattern_count": n,
        "candidates_generated": stats.candidates_generated,
        "peak_entries": stats.peak_occ_entries,
    }
    if args.skip_scopelist:
        return
    ss = ScopeListStats()
    t0 = time.perf_counter()
    try:
        n = len(scopelist_mine(d, cfg, cap=args.guard, stats=ss))
    except ExplosionGuard:
        yield {"engine": "scopelist", "status": "skipped", "guard": args.guard}
        return
    yield {
        "engine": "scopelist",
        "status": "ok",
        "wall_time_millis": round((time.perf_counter() - t0) * 1000, 3),
        "pattern_count": n,
        "candidates_generated": ss.candidates_generated,
        "peak_entries": ss.peak_elements,
        "total_entries": ss.total_elements,
    }


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="occmine", description="Frequent embedded subtree mining with occurrence lists.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("mine", help="mine frequent patterns")
    p.add_argument("input", help="dataset file, or - for stdin")
    _add_mining_flags(p)
    p.add_argument("--per-tree", action="store_true", help="append the per-tree support column")
    p.add_argument("--class-merge", action="store_true",
                   help="only join patterns whose sibling in the prefix class is frequent")
    p.add_argument("--parallel", type=_positive, default=1, metavar="W",
                   help="mine top-level branches in W processes")
    p.add_argument("--sort-support", action="store_true", help="order lines by decreasing support")
    p.add_argument("--label-names", metavar="TSV", help="token<TAB>name file for display")
    p.add_argument("-o", "--output", default=None, help="pattern file (default: stdout)")
    p.add_argument("--report", default=None, help="write the JSON run report here instead of stderr")
    p.set_defaults(func=cmd_mine)

    p = sub.add_parser("verify", help="cross-check the miner against the reference engines")
    p.add_argument("input", help="dataset file, or - for stdin")
    _add_mining_flags(p)
    p.add_argument("--guard", type=_positive, default=DEFAULT_GUARD, metavar="CAP",
                   help="element cap for the reference engines")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("output", help="dataset path; metadata goes to OUTPUT.meta.json")
    defaults = GenParams()
    p.add_argument("--n-labels", type=_positive, default=defaults.n_labels, help="label alphabet size (default: %(default)s)")
    p.add_argument("--master-size", type=_positive, default=defaults.master_size, help="vertices in the master tree (default: %(default)s)")
    p.add_argument("--max-fanout", type=_positive, default=defaults.max_fanout, help="maximum children per vertex (default: %(default)s)")
    p.add_argument("--max-depth", type=_positive, default=defaults.max_depth, help="maximum master tree depth (default: %(default)s)")
    p.add_argument("--n-trees", type=_positive, default=defaults.n_trees, help="trees to sample (default: %(default)s)")
    p.add_argument("--keep-prob", type=float, default=defaults.keep_prob,
                   help="chance of keeping each child of a kept vertex (default: %(default)s)")
    p.add_argument("--seed", type=_u64, default=defaults.seed, help="unsigned 64-bit seed (default: %(default)s)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time the miner against the scope-list baseline")
    p.add_argument("inputs", nargs="+", help="dataset files")
    _add_mining_flags(p, multi_minsup=True)
    p.add_argument("--guard", type=_positive, default=DEFAULT_GUARD, metavar="CAP",
                   help="element cap for the scope-list engine (default: %(default)s)")
    p.add_argument("--parallel", type=_positive, default=1, metavar="W", help="processes for the occ-list miner")
    p.add_argument("--pattern", default=None, help="also report list sizes for this pattern")
    p.add_argument("--skip-scopelist", action="store_true", help="time only the occ-list miner")
    p.add_argument("-o", "--output", default=None, help="JSON lines file (default: stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleShape as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CountOverflow as exc:
        where = ""
        if exc.pattern is not None:
            where = f" while counting pattern '{format_pattern(exc.pattern)}'"
        print(f"overflow: {exc}{where}", file=sys.stderr)
        return EXIT_OVERFLOW
    except (OccMineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
