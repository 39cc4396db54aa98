"""Compare the compiled replay kernel with the pure-Python one.

    python3 benchmarks/bench_replay.py --m 12 --n 6 --replicas 20000
"""

import argparse
import sys

from stochgreedy.bench import bench_replay
from stochgreedy.kernels import BACKEND


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=12)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--replicas", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)
    rows = bench_replay(args.m, args.n, args.replicas, args.seed, args.repeats)
    print(f"active backend: {BACKEND}")
    print(f"{'backend':8s} {'seconds':>10s} {'replicas/s':>14s} {'speedup':>8s} identical")
    for r in rows:
        print(f"{r['backend']:8s} {r['seconds']:10.4f} {r['replicas_per_s']:14.0f} "
              f"{r['speedup']:8.1f} {r['matches_python']}")
    if len(rows) == 1:
        print("compiled kernel unavailable; only the Python path was timed")
    return 0 if all(r["matches_python"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
