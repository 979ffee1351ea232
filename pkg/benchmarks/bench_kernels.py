"""Time the hot kernels under numba and under the plain numpy fallback.

Each backend runs in its own subprocess because the backend is fixed at import
time by CAYLEYFLOWS_BACKEND. Numba timings exclude compilation: every workload
is run once on a tiny input first.

    python3 benchmarks/bench_kernels.py [--saw-n 12] [--relator-len 14] [--steiner 300]
"""

import argparse
import json
import os
import random
import subprocess
import sys
import time


def workloads(args):
    from cayleyflows import _kernels
    from cayleyflows.geodesic import length_exact_metabelian
    from cayleyflows.growth import saw_counts_kernel
    from cayleyflows.tower import GroupSpec, from_word

    spec = GroupSpec(2, 2)
    rng = random.Random(1)
    letters = [1, -1, 2, -2]

    def spread_word():
        # product of conjugated commutators: a support with several far-apart components
        w = []
        for _ in range(3):
            q = [rng.choice(letters) for _ in range(rng.randint(3, 6))]
            c = rng.choice([[1, 2, -1, -2], [2, 1, -2, -1], [1, 1, 2, -1, -1, -2]])
            w += q + c + [-x for x in reversed(q)]
        return w

    elements = [from_word(spread_word(), spec) for _ in range(args.steiner)]

    def saw():
        return saw_counts_kernel(args.saw_n)[-1]

    def relators():
        return int(_kernels.relator_dfs(2, args.relator_len, 2, 0, 10_000)[0])

    def steiner():
        return sum(length_exact_metabelian(x).length for x in elements)

    # warm-up so that numba compiles (or loads its cache) outside the timed region
    saw_counts_kernel(3)
    _kernels.relator_dfs(2, 4, 2, 0, 10)
    length_exact_metabelian(from_word("aBBAAbbAbaaB", spec))

    out = {"backend": "numba" if _kernels.USE_NUMBA else "numpy"}
    for name, fn in (("saw", saw), ("relator_dfs", relators), ("steiner", steiner)):
        t = time.perf_counter()
        value = fn()
        out[name] = {"seconds": time.perf_counter() - t, "result": value}
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--saw-n", type=int, default=12)
    p.add_argument("--relator-len", type=int, default=14)
    p.add_argument("--steiner", type=int, default=300, help="number of random multi-component elements")
    p.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = p.parse_args()
    if args.child:
        print(json.dumps(workloads(args)))
        return
    rows = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, CAYLEYFLOWS_BACKEND=backend)
        cmd = [sys.executable, __file__, "--child", "--saw-n", str(args.saw_n),
               "--relator-len", str(args.relator_len), "--steiner", str(args.steiner)]
        rows[backend] = json.loads(subprocess.run(cmd, env=env, check=True, capture_output=True, text=True).stdout)
    print(f"{'kernel':<12} {'numba s':>10} {'numpy s':>10} {'speedup':>9}  same result")
    for name in ("saw", "relator_dfs", "steiner"):
        a, b = rows["numba"][name], rows["numpy"][name]
        speed = b["seconds"] / a["seconds"] if a["seconds"] else float("inf")
        print(f"{name:<12} {a['seconds']:>10.4f} {b['seconds']:>10.4f} {speed:>8.1f}x  {a['result'] == b['result']}")
    if any(rows["numba"][k]["result"] != rows["numpy"][k]["result"] for k in ("saw", "relator_dfs", "steiner")):
        sys.exit("backends disagree")


if __name__ == "__main__":
    main()
