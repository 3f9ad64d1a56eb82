"""Time the compiled kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the switch is read at
import time.  Usage::

    python3 benchmarks/bench_kernels.py [--n 200000] [--accesses 20000]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
import ralz
from ralz.harness import gen_random

n, accesses = int(sys.argv[1]), int(sys.argv[2])
x = gen_random(n, 0, "bit")
ells = np.random.default_rng(1).integers(1, n + 1, accesses)

def best(fn, reps=3):
    times = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

# warm-up also triggers compilation on the numba path
small = gen_random(2000, 1, "bit")
for scheme in ("det", "rand"):
    s = ralz.compress(small, scheme)
    ralz.decompress(s)
    ralz.access_many(s, [1, 2, 3])

out = {"backend": ralz.BACKEND}
for scheme in ("det", "rand"):
    s = ralz.compress(x, scheme)
    out[f"{scheme}_compress"] = best(lambda: ralz.compress(x, scheme))
    out[f"{scheme}_decompress"] = best(lambda: ralz.decompress(s))
    out[f"{scheme}_access"] = best(lambda: ralz.access_many(s, ells), reps=1)
print(json.dumps(out))
"""


def run(pure: bool, n: int, accesses: int) -> dict:
    env = dict(os.environ, RALZ_PURE_NUMPY="1" if pure else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(n), str(accesses)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000, help="input length in bits")
    ap.add_argument("--accesses", type=int, default=20_000)
    args = ap.parse_args(argv)
    fast = run(False, args.n, args.accesses)
    slow = run(True, args.n, args.accesses)
    print(f"n={args.n} bits, {args.accesses} random accesses")
    print(f"{'operation':<18}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}")
    for key in (k for k in fast if k != "backend"):
        print(f"{key:<18}{fast[key]:>11.4f}s{slow[key]:>11.4f}s{slow[key] / fast[key]:>9.1f}x")


if __name__ == "__main__":
    main()
