"""Compare the compiled and pure-Python SSA kernels.

    python3 benchmarks/bench_ssa.py [--paths N] [--repeat R]

Runs the same workloads on both backends, checks that they return
identical results, and prints wall time per backend and the speedup.
"""
import argparse
import time

import ctmcreduce as cr
from ctmcreduce import ssa
from ctmcreduce.model import generator_at
from ctmcreduce.reduce import Distribution


def _workloads(n_paths):
    three = cr.load_bundled("three_state")
    counter = cr.load_bundled("counterexample")
    mwc = cr.load_bundled("mwc")

    def endpoint(m, lam, t):
        g = generator_at(m, lam)
        pi = Distribution.uniform(g.labels)
        return lambda backend: ssa.endpoint_counts(g, pi, t, n_paths, 1, backend=backend).tolist()

    def passage(m, lam):
        pi = Distribution.uniform(m.states)
        return lambda backend: ssa.sample_first_passage(m, lam, pi, n_paths=n_paths, seed=1, backend=backend).taus.tolist()

    return [
        ("endpoint three_state lambda=10 t=2", endpoint(three, 10.0, 2.0)),
        ("endpoint mwc lambda=100 t=1", endpoint(mwc, 100.0, 1.0)),
        ("first passage counterexample lambda=100", passage(counter, 100.0)),
    ]


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=5000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    try:
        ssa.get_kernels("cython")
    except ImportError:
        print("compiled kernels are not built; only the Python backend is available")
        return 1
    print(f"{'workload':44s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, run in _workloads(args.paths):
        tp, outp = _time(lambda: run("python"), args.repeat)
        tc, outc = _time(lambda: run("cython"), args.repeat)
        if outp != outc:
            raise SystemExit(f"backends disagree on {name}")
        print(f"{name:44s} {tp:10.4f} {tc:10.4f} {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
