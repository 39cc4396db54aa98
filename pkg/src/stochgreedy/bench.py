"""Timing of the compiled replay kernel against the pure-Python one."""

from __future__ import annotations

import time

import numpy as np

from . import kernels
from .expectation import coin_array
from .generators import GeneratorSpec, generate
from .policy import AlgoParams, policy_arrays
from .expectation import propagate


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_replay(m: int = 12, n: int = 6, replicas: int = 20000, seed: int = 0,
                 repeats: int = 3):
    """Return a list of dict rows, one per available backend."""
    inst = generate(GeneratorSpec("random", seed, m, n, "uniform"))
    pol = propagate(inst, AlgoParams()).policy
    arrays = policy_arrays(pol)
    coins = coin_array(seed, m, replicas)
    rows = []
    ref = None
    backends = [("python", kernels.replay_python)]
    if kernels.replay_compiled is not None:
        backends.append(("cython", kernels.replay_compiled))
    for name, fn in backends:
        dt, out = _time(lambda: fn(inst.weights, *arrays, coins), repeats)
        if ref is None:
            ref = out
        same = all(np.array_equal(a, b) for a, b in zip(ref, out))
        rows.append({"backend": name, "m": m, "n": n, "replicas": replicas,
                     "seconds": dt, "replicas_per_s": replicas / dt, "matches_python": same})
    base = rows[0]["seconds"]
    for r in rows:
        r["speedup"] = base / r["seconds"]
    return rows
