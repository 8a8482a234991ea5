"""Compare the compiled and pure-Python join kernels.

Runs the same workloads against every importable backend and prints one
JSON line per (workload, backend) with the best-of-``--repeat`` wall time:

    python benchmarks/bench_kernels.py --repeat 3

Workloads: building the occ-list of a large star pattern (inner joins with
big groups), a long path pattern (leaf joins), and a full mining run on a
generated dataset.
"""
import argparse
import json
import sys
import time

from occmine._backend import available_backends
from occmine.encoding import Dataset, LabelDictionary
from occmine.miner import MinerConfig, MinerStats, mine
from occmine.occindex import occlist_of
from occmine.synthgen import GenParams, generate
from occmine.treecore import Pattern, build_tree


def star_workload(n=3000, k=5):
    d = Dataset((build_tree(0, [0] * n, [None] + [0] * (n - 1)),), LabelDictionary(("1",)))
    p = Pattern.from_parents([0] * k, [None] + [0] * (k - 1))
    return lambda backend: len(occlist_of(d, p, backend=backend))


def path_workload(n=60, k=4):
    d = Dataset((build_tree(0, [0] * n, [None] + list(range(n - 1))),), LabelDictionary(("1",)))
    p = Pattern.from_parents([0] * k, [None] + list(range(k - 1)))
    return lambda backend: len(occlist_of(d, p, backend=backend))


def mining_workload(n_trees, minsup, seed):
    d = generate(GenParams(n_labels=50, master_size=300, max_depth=8, max_fanout=6, n_trees=n_trees, seed=seed))

    def run(backend):
        stats = MinerStats()
        return sum(1 for _ in mine(d, MinerConfig(minsup), stats, backend=backend))

    return run


def best_time(fn, backend, repeat):
    best, result = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n-trees", type=int, default=1000)
    ap.add_argument("--minsup", type=int, default=100)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    workloads = {
        "star_occlist": star_workload(),
        "path_occlist": path_workload(),
        "mine_generated": mining_workload(args.n_trees, args.minsup, args.seed),
    }
    backends = sorted(available_backends())
    if "cython" not in backends:
        print("compiled kernels not built; only the python backend is timed", file=sys.stderr)
    for name, fn in workloads.items():
        times = {}
        for backend in backends:
            secs, result = best_time(fn, backend, args.repeat)
            times[backend] = secs
            print(json.dumps({"workload": name, "backend": backend, "seconds": round(secs, 4), "result": result}))
        if len(times) == 2:
            print(json.dumps({"workload": name, "speedup": round(times["python"] / times["cython"], 2)}))


if __name__ == "__main__":
    main()
