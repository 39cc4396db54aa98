"""Instance families: the worked examples, small adversarial shapes, and random draws."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .instance import Instance

FAMILIES = ("figure1", "figure2", "figure3", "cascade", "worstcase_pair", "triangular",
            "random", "greedy_tight")
LAWS = ("uniform", "sparse", "exponential")


@dataclass(frozen=True)
class GeneratorSpec:
    family: str
    seed: int = 0
    m: Optional[int] = None         # random: impressions
    n: Optional[int] = None         # random: advertisers; triangular: size
    law: str = "uniform"
    k: int = 3                      # cascade length
    L: float = 10.0                 # worstcase_pair second weight


def _figure1():
    # columns (a, a'); arrivals i1, i2, i3, i
    return Instance([[2, 0], [0, 3], [5, 0], [7, 0]], adv_labels=("a", "a'"),
                    imp_labels=("i1", "i2", "i3", "i"))


def _figure2():
    # prior maxima 3, 9, 8 on (a, a', a''), then i with weights 9, 12, 7
    return Instance([[3, 0, 0], [0, 9, 0], [0, 0, 8], [9, 12, 7]],
                    adv_labels=("a", "a'", "a''"), imp_labels=("j1", "j2", "j3", "i"))


def _figure3():
    return Instance([[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0]],
                    adv_labels=("a1", "a1'", "a2", "a2'"), imp_labels=("i1", "i2", "i"))


def _cascade(k):
    # advertiser 0 is the shared hub; impression j also reaches fresh advertiser j+1
    if k < 1:
        raise ValueError("cascade length must be positive")
    w = np.zeros((k, k + 1))
    w[:, 0] = 1.0
    w[np.arange(k), np.arange(1, k + 1)] = 1.0
    return Instance(w)


def _triangular(n):
    if n is None or n < 1:
        raise ValueError("triangular size must be positive")
    return Instance(np.triu(np.ones((n, n))))


def _random(m, n, law, seed):
    if m is None or n is None or m < 0 or n < 1:
        raise ValueError("random family needs m >= 0 and n >= 1")
    if law not in LAWS:
        raise ValueError(f"unknown weight law {law!r}")
    rng = np.random.default_rng(seed)
    if law == "uniform":
        w = rng.uniform(0.0, 1.0, (m, n))
    elif law == "sparse":
        w = rng.uniform(0.0, 1.0, (m, n)) * (rng.random((m, n)) < 0.5)
    else:
        w = rng.exponential(1.0, (m, n))
    return Instance(w)


def generate(spec: GeneratorSpec) -> Instance:
    f = spec.family
    if f == "figure1":
        return _figure1()
    if f == "figure2":
        return _figure2()
    if f == "figure3":
        return _figure3()
    if f == "cascade":
        return _cascade(spec.k)
    if f == "worstcase_pair":
        if spec.L < 0:
            raise ValueError("L must be nonnegative")
        return Instance([[1.0], [float(spec.L)]])
    if f == "triangular":
        return _triangular(spec.n)
    if f == "greedy_tight":
        return Instance([[1, 1], [1, 0]])
    if f == "random":
        return _random(spec.m, spec.n, spec.law, spec.seed)
    raise ValueError(f"unknown family {f!r}")


def adversarial_suite():
    """Named small instances from the worked examples and classic tight cases."""
    specs = [
        ("figure1", GeneratorSpec("figure1")),
        ("figure2", GeneratorSpec("figure2")),
        ("figure3", GeneratorSpec("figure3")),
        ("cascade3", GeneratorSpec("cascade", k=3)),
        ("cascade5", GeneratorSpec("cascade", k=5)),
        ("worstcase_L10", GeneratorSpec("worstcase_pair", L=10.0)),
        ("worstcase_L0", GeneratorSpec("worstcase_pair", L=0.0)),
        ("triangular3", GeneratorSpec("triangular", n=3)),
        ("triangular4", GeneratorSpec("triangular", n=4)),
        ("triangular5", GeneratorSpec("triangular", n=5)),
        ("greedy_tight", GeneratorSpec("greedy_tight")),
    ]
    return [(name, generate(s)) for name, s in specs]


def random_suite(count: int = 200, seed: int = 20240601, max_m: int = 6, max_n: int = 4):
    """`count` random instances with 1..max_m impressions and 1..max_n advertisers."""
    rng = np.random.default_rng(seed)
    out = []
    for j in range(count):
        m = int(rng.integers(1, max_m + 1))
        n = int(rng.integers(1, max_n + 1))
        law = LAWS[j % len(LAWS)]
        s = int(rng.integers(0, 2**63 - 1))
        out.append((f"random{j:03d}", generate(GeneratorSpec("random", s, m, n, law))))
    return out
