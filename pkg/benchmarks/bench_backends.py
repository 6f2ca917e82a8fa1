"""Compare the numba kernels with the pure-numpy fallback.

Each backend runs in its own subprocess because the backend is chosen at
import time from SUPERLINEAR_DISABLE_NUMBA. Usage::

    python3 benchmarks/bench_backends.py [--replicates 20000] [--repeats 3]
"""
import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from superlinear import BACKEND, ExperimentSummary, v_joint_numeric
from superlinear.simulation import SimulationConfig, simulate_article_statistics

replicates, repeats = int(sys.argv[1]), int(sys.argv[2])
cfg = SimulationConfig(replicates=replicates, seed=1)
exps = [ExperimentSummary(f"e{i}", (0.0, 1.0, 2.0 + 0.1 * i), (1.0, 1.3, 0.8), 20) for i in range(4)]

def best(fn):
    fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

print(json.dumps({
    "backend": BACKEND,
    "article statistics (finite)": best(lambda: simulate_article_statistics(cfg, "finite")),
    "article statistics (asymptotic)": best(lambda: simulate_article_statistics(cfg, "asymptotic")),
    "numeric joint search": best(lambda: v_joint_numeric(exps)),
}))
"""


def run(disable, replicates, repeats):
    env = dict(os.environ, PYTHONWARNINGS="ignore")
    env.pop("SUPERLINEAR_DISABLE_NUMBA", None)
    if disable:
        env["SUPERLINEAR_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKLOAD, str(replicates), str(repeats)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--replicates", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args(argv)
    fast = run(False, args.replicates, args.repeats)
    slow = run(True, args.replicates, args.repeats)
    print(f"{'workload':<34}{fast['backend']:>10}{slow['backend']:>10}{'speedup':>10}")
    for key in fast:
        if key != "backend":
            print(f"{key:<34}{fast[key]:>9.3f}s{slow[key]:>9.3f}s{slow[key] / fast[key]:>9.1f}x")


if __name__ == "__main__":
    main()
