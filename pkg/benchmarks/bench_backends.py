"""Compare the compiled and pure-Python walk kernels.

    python benchmarks/bench_backends.py [--replicates 20] [--repeat 3]

Both kernels consume the same random stream, so the script also checks that
they return identical cover steps and loads before reporting timings.
"""
import argparse
import time

import numpy as np

from choicewalk.experiment import GraphSpec
from choicewalk.walk import Policy, _KERNELS, cover_step_samples

GRAPHS = {
    "T(30,30)": GraphSpec("torus", rows=30, cols=30),
    "G(900,2r)": GraphSpec("rgg", n=900, radius_mult=2.0),
}
POLICIES = ["srw", "rwc:2", "erwc:2:9", "erwc:4:3"]


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        began = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - began)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--replicates", type=int, default=20)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if "compiled" not in _KERNELS:
        raise SystemExit("compiled kernel is not available; build it with "
                         "pip install --no-build-isolation -e .")

    print(f"{'graph':<11} {'policy':<9} {'python s':>9} {'compiled s':>11} {'speedup':>8}  same")
    for gname, spec in GRAPHS.items():
        graph = spec.build(np.random.default_rng(args.seed))
        for token in POLICIES:
            policy = Policy.parse(token)
            timings, outputs = {}, {}
            for backend in ("python", "compiled"):
                timings[backend], outputs[backend] = best_time(
                    lambda: cover_step_samples(graph, policy, 0, args.seed, args.replicates,
                                               backend=backend),
                    args.repeat,
                )
            same = all(np.array_equal(a, b) for a, b in zip(outputs["python"], outputs["compiled"]))
            speedup = timings["python"] / timings["compiled"]
            print(f"{gname:<11} {token:<9} {timings['python']:>9.3f} {timings['compiled']:>11.4f} "
                  f"{speedup:>7.0f}x  {'yes' if same else 'NO'}")


if __name__ == "__main__":
    main()
