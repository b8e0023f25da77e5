"""Compare the compiled graph kernels against the pure-Python fallback.

Generates seeded random CSR graphs and times masked reachability and
masked SCC on both backends.

    python3 benchmarks/bench_graphcore.py --nodes 20000 --repeat 5
"""

import argparse
import random
import time
from array import array

from permeq import graphcore
from permeq import _puregraph

try:
    from permeq import _fastgraph
except ImportError:
    _fastgraph = None


def random_csr(rng, n, degree):
    rows = [[rng.randrange(n) for _ in range(rng.randint(1, degree))]
            for _ in range(n)]
    return graphcore.build_csr(rows)


def bench(fn, args, repeat):
    best = None
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        elapsed = time.perf_counter() - start
        best = elapsed if best is None else min(best, elapsed)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nodes", type=int, default=20000)
    parser.add_argument("--degree", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=2026)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    indptr, indices = random_csr(rng, args.nodes, args.degree)
    allowed = bytearray(1 if rng.random() < 0.9 else 0
                        for _ in range(args.nodes))
    seeds = array("q", rng.sample(range(args.nodes), max(1, args.nodes // 100)))

    print(f"active backend: {graphcore.BACKEND_NAME}")
    print(f"nodes={args.nodes} edges={len(indices)} repeat={args.repeat}")

    kernels = [
        ("reach_masked", lambda b: (b.reach_masked, (indptr, indices, seeds, allowed))),
        ("scc_masked", lambda b: (b.scc_masked, (indptr, indices, allowed))),
    ]
    for name, make in kernels:
        fn, call_args = make(_puregraph)
        pure = bench(fn, call_args, args.repeat)
        line = f"{name:>14}  pure {pure * 1000:8.2f} ms"
        if _fastgraph is not None:
            fn, call_args = make(_fastgraph)
            fast = bench(fn, call_args, args.repeat)
            line += f"  compiled {fast * 1000:8.2f} ms  speedup {pure / fast:6.1f}x"

            pure_fn, pure_args = make(_puregraph)
            if name == "reach_masked":
                assert bytes(fn(*call_args)) == bytes(pure_fn(*pure_args))
            else:
                assert list(fn(*call_args)) == list(pure_fn(*pure_args))
        else:
            line += "  (compiled backend not built)"
        print(line)


if __name__ == "__main__":
    main()
