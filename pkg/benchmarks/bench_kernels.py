"""Compiled kernels versus the plain-numpy fallback.

Runs the same workloads twice, each in a fresh interpreter: once as
configured and once with HPL_DISABLE_NUMBA=1. Compilation happens in a
warm-up call that is not timed.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from hombell import USE_NUMBA, Circuit, evaluate
from hombell.circuit import CompiledCircuit, gates_from_spec
from hombell.env import EnvConfig, random_search
from hombell.optimize import maximize_chsh

repeat = int(sys.argv[1])
four = Circuit.build(4, gates_from_spec((("S2", .00096, 1, 2), ("S2", .44993, 3, 4),
                                         ("B", 1.63856, 2, 4), ("B", 1.50272, 1, 3))))
six = Circuit.build(6, gates_from_spec((("S2", .4886, 1, 2), ("S2", .0103, 3, 4),
    ("S2", 1.14363, 5, 6), ("B", 1.93776, 2, 6), ("R", .40101, 3), ("B", 1.56028, 5, 6),
    ("B", 2.65334, 4, 5), ("B", 2.1377, 3, 6), ("B", 1.79887, 1, 3))), "single_photon")

def timed(fn, n):
    fn()
    t0 = time.perf_counter()
    for _ in range(n):
        fn()
    return (time.perf_counter() - t0) / n

c4, c6 = CompiledCircuit(four), CompiledCircuit(six)
cfg = EnvConfig(strategy=3, n_modes=4, n_circuit=5)
out = {
    "numba": USE_NUMBA,
    "evaluate N=4 click": timed(lambda: c4(four.params), 50 * repeat),
    "evaluate N=6 single-photon": timed(lambda: c6(six.params), 5 * repeat),
    "maximize_chsh N=4": timed(lambda: maximize_chsh(four), repeat),
    "random search, 20 episodes": timed(lambda: random_search(3, cfg, 20, seed=1), repeat),
}
print(json.dumps(out))
"""


def run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if disable:
        env["HPL_DISABLE_NUMBA"] = "1"
    else:
        env.pop("HPL_DISABLE_NUMBA", None)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    t0 = time.perf_counter()
    fast = run(False, args.repeat)
    slow = run(True, args.repeat)
    if not fast.pop("numba"):
        print("warning: numba unavailable, both columns use the fallback")
    slow.pop("numba")
    print(f"{'workload':<30}{'numba [ms]':>12}{'numpy [ms]':>12}{'ratio':>9}")
    for name, t in fast.items():
        print(f"{name:<30}{1e3 * t:>12.2f}{1e3 * slow[name]:>12.2f}{slow[name] / t:>9.1f}")
    print(f"total wall time {time.perf_counter() - t0:.0f} s")


if __name__ == "__main__":
    main()
