"""Runnable algorithms: deterministic greedy and the stochastic greedy variants."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .expectation import coin_array, enumerate_exact, mc_estimate, propagate
from .instance import AssignmentTrace, Instance, allocation_value, make_trace, offline_optimum
from .kernels import replay
from .policy import AlgoParams, PolicyTable, Variant, policy_arrays


class Bucket(enum.IntEnum):
    LOW = 1     # u <= 1/3
    MID = 2     # 1/3 < u <= 2/3
    HIGH = 3    # u > 2/3


@dataclass(frozen=True)
class CoinOutcome:
    """Forced coins for one impression. `aux` and `fallback` are 0 for a1, 1 for a2."""

    bucket: Bucket = Bucket.HIGH
    aux: int = 0
    fallback: int = 0


_U_OF = {Bucket.LOW: 1.0 / 6.0, Bucket.MID: 0.5, Bucket.HIGH: 5.0 / 6.0}


class InvariantViolation(AssertionError):
    pass


@dataclass(frozen=True)
class RunConfig:
    variant: str = "SG"            # Greedy, SG or OSG
    eps: float = 0.082
    delta: float = 0.445
    p: Optional[float] = None
    engine: str = "dist"           # enum, dist or mc
    seed: int = 0
    replicas: int = 10000

    def __post_init__(self):
        if self.variant not in ("Greedy", "SG", "OSG"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.engine not in ("enum", "dist", "mc"):
            raise ValueError(f"unknown engine {self.engine!r}")
        if not (0.0 <= self.eps <= 1.0 and 0.0 <= self.delta <= 1.0):
            raise ValueError("eps and delta must lie in [0, 1]")
        if (self.p is not None) != (self.variant == "OSG"):
            raise ValueError("p must be given exactly when variant is OSG")
        if self.p is not None and not (0.0 <= self.p <= 1.0):
            raise ValueError("p must lie in [0, 1]")
        if self.replicas <= 0:
            raise ValueError("replicas must be positive")

    def algo_params(self) -> AlgoParams:
        if self.variant == "Greedy":
            raise ValueError("greedy has no stochastic parameters")
        return AlgoParams(self.eps, self.delta, Variant(self.variant), self.p)


@dataclass
class RunReport:
    variant: str
    engine: str
    value: float
    opt: float
    marginal_gains: tuple
    stderr: Optional[float] = None
    extra: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.value / self.opt if self.opt > 0 else 1.0


def run_greedy(instance: Instance):
    """Give each arrival to the advertiser with the largest realized gain."""
    m, n = instance.weights.shape
    maxw = np.zeros(n)
    assigned = []
    gains = []
    for k in range(m):
        g = np.maximum(instance.weights[k] - maxw, 0.0)
        a = int(np.argmax(g))       # first maximizer, i.e. lowest id
        assigned.append(a)
        gains.append(float(g[a]))
        maxw[a] = max(maxw[a], instance.weights[k, a])
    trace = make_trace(instance, assigned)
    value = allocation_value(instance, trace)
    opt = offline_optimum(instance).value
    if value < opt / 2.0 - 1e-9 * max(1.0, opt):
        raise InvariantViolation(f"greedy value {value} below OPT/2 = {opt / 2}")
    return trace, RunReport("Greedy", "exact", value, opt, tuple(gains))


def build_policy(instance: Instance, params: AlgoParams) -> PolicyTable:
    """Decision table from the propagation engine."""
    return propagate(instance, params).policy


def _forced_coins(outcomes: Sequence[CoinOutcome], m: int) -> np.ndarray:
    if len(outcomes) != m:
        raise ValueError("need one coin outcome per impression")
    coins = np.empty((1, m, 2))
    for k, c in enumerate(outcomes):
        coins[0, k, 0] = _U_OF[Bucket(c.bucket)]
        # aux and fallback draws share one slot; only one is read per step
        bit = c.aux if Bucket(c.bucket) is Bucket.HIGH else c.fallback
        coins[0, k, 1] = 0.0 if bit == 0 else np.nextafter(1.0, 0.0)
    return coins


def sample_run(instance: Instance, config: RunConfig, policy: Optional[PolicyTable] = None,
               coins: Optional[Sequence[CoinOutcome]] = None, replica: int = 0,
               kernel=None) -> AssignmentTrace:
    """One realized execution under a frozen policy.

    Coins come from the seeded substreams (replica `replica`) unless an explicit
    CoinOutcome per impression is supplied. For fallback steps the coin slot
    holds the fallback draw, so pass it through `fallback`.
    """
    params = config.algo_params()
    if policy is None:
        policy = build_policy(instance, params)
    policy.check_instance(instance)
    if policy.params != params:
        raise ValueError("policy was built with different parameters")
    m = instance.num_impressions
    if coins is not None:
        arr = _forced_coins(coins, m)
    else:
        arr = coin_array(config.seed, m, replica + 1)[replica:replica + 1]
    kernel = kernel or replay
    assign = kernel(instance.weights, *policy_arrays(policy), arr)[0][0]
    return make_trace(instance, [int(a) for a in assign])


def expected_value(instance: Instance, config: RunConfig) -> RunReport:
    """StochAlloc by the configured engine, or the greedy value."""
    opt = offline_optimum(instance).value
    if config.variant == "Greedy":
        _, rep = run_greedy(instance)
        return rep
    params = config.algo_params()
    if config.engine == "enum":
        res = enumerate_exact(instance, params)
        return RunReport(config.variant, "enum", res.stoch_alloc, opt,
                         tuple(res.marginal_gains.tolist()), extra={"result": res})
    res = propagate(instance, params)
    if config.engine == "dist":
        return RunReport(config.variant, "dist", res.stoch_alloc, opt,
                         tuple(res.marginal_gains.tolist()), extra={"result": res})
    mc = mc_estimate(instance, params, res.policy, config.replicas, config.seed)
    return RunReport(config.variant, "mc", mc.value, opt, tuple(mc.marginal_gains.tolist()),
                     stderr=mc.value_stderr, extra={"result": mc})
