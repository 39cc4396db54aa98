"""Batch runs over (instance, config) pairs and CSV emission."""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .matchers import InvariantViolation, RunConfig, expected_value

COLUMNS = ["instance", "variant", "engine", "eps", "delta", "p", "seed", "replicas",
           "value", "stderr", "opt", "ratio"]


@dataclass
class SuiteResult:
    rows: list
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _one(job):
    name, inst, cfg = job
    t0 = time.perf_counter()
    fail = None
    try:
        rep = expected_value(inst, cfg)
    except InvariantViolation as exc:
        return None, f"{name}/{cfg.variant}: {exc}", 0.0
    dt = time.perf_counter() - t0
    tol = 1e-9 * max(1.0, rep.opt)
    if cfg.variant == "Greedy" and rep.value < rep.opt / 2.0 - tol:
        fail = f"{name}/Greedy: ratio {rep.ratio} below 1/2"
    if rep.stderr is None:
        if rep.value > rep.opt + tol:
            fail = f"{name}/{cfg.variant}: value {rep.value} exceeds OPT {rep.opt}"
        if abs(sum(rep.marginal_gains) - rep.value) > tol:
            fail = f"{name}/{cfg.variant}: marginal gains do not sum to the value"
    variant = cfg.variant
    engine = "exact" if variant == "Greedy" else rep.engine
    row = {
        "instance": name, "variant": variant, "engine": engine,
        "eps": "" if variant == "Greedy" else repr(cfg.eps),
        "delta": "" if variant == "Greedy" else repr(cfg.delta),
        "p": "" if cfg.p is None else repr(cfg.p),
        "seed": cfg.seed if engine == "mc" else "",
        "replicas": cfg.replicas if engine == "mc" else "",
        "value": repr(float(rep.value)),
        "stderr": "" if rep.stderr is None else repr(float(rep.stderr)),
        "opt": repr(float(rep.opt)),
        "ratio": repr(float(rep.ratio)),
        "runtime": f"{dt:.6f}",
    }
    return row, fail, dt


def _sort_key(row):
    return (row["instance"], row["variant"], row["engine"], row["eps"], row["delta"],
            row["p"], str(row["seed"]))


def run_suite(configs, instances, out_path=None, include_runtime: bool = False,
              workers: int = 1) -> SuiteResult:
    """Evaluate every config on every named instance.

    `instances` is a list of (name, Instance). Runtimes are measured always
    but only written when `include_runtime` is set, since they would break
    byte-identical reruns.
    """
    jobs = [(name, inst, cfg) for name, inst in instances for cfg in configs]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            outs = list(ex.map(_one, jobs))
    else:
        outs = [_one(j) for j in jobs]
    rows, failures = [], []
    for row, fail, _ in outs:
        if row is not None:
            rows.append(row)
        if fail:
            failures.append(fail)
    rows.sort(key=_sort_key)
    if out_path is not None:
        cols = COLUMNS + (["runtime"] if include_runtime else [])
        with open(out_path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.DictWriter(fh, fieldnames=cols, extrasaction="ignore",
                                lineterminator="\n")
            wr.writeheader()
            wr.writerows(rows)
    return SuiteResult(rows, failures)


def emit_plot_data(rows, out_path) -> int:
    """Write (instance, algorithm, ratio) sorted by instance then algorithm."""
    data = sorted(((r["instance"], r["variant"] if r.get("engine") in (None, "exact", "")
                    else f"{r['variant']}:{r['engine']}", float(r["ratio"])) for r in rows),
                  key=lambda x: (x[0], x[1]))
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["instance", "algorithm", "ratio"])
        for inst, alg, ratio in data:
            wr.writerow([inst, alg, f"{ratio:.12g}"])
    return len(data)


def read_report(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
