"""Expected gains and MaxW laws under the stochastic greedy policies.

Three engines share one forward driver:

* ``enumerate_exact`` tracks the exact joint law of (MaxW, Mark) over all
  coin outcomes. It is the oracle for small instances.
* ``propagate`` keeps one marginal per advertiser, split into the three
  Mark-conditional laws at the advertiser's last indexing step and an
  independent tail of later fallback assignments.
* ``mc_estimate`` replays a frozen policy over seeded coins.

Decisions at time t only read expectations over times < t, so the driver
alternates "compute expected gains" and "decide" one arrival at a time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .distributions import DiscreteDistribution, max_convolve, mixture
from .instance import Instance
from .kernels import replay
from .policy import AlgoParams, Branch, PolicyState, PolicyTable, StepDecision, policy_arrays

DEFAULT_CAP = 8
THIRD = 1.0 / 3.0


class EnumerationCapError(ValueError):
    pass


@dataclass(frozen=True)
class AnchorBelief:
    advertiser: int
    anchor_time: int
    role: Optional[int]        # 1 if it was a1 at the anchor step, 2 if a2
    cond: tuple                # laws at the anchor given Mark = 1, 2, 3
    tail: DiscreteDistribution

    def conditional(self, k: int) -> DiscreteDistribution:
        return max_convolve(self.cond[k - 1], self.tail)

    def unconditional(self) -> DiscreteDistribution:
        return max_convolve(mixture([(THIRD, c) for c in self.cond]), self.tail)


@dataclass
class ExpectationResult:
    engine: str
    policy: PolicyTable
    e_gains: np.ndarray            # (m, n)
    dists: tuple                   # dists[t][a] is the law of MaxW^t_a, t = 0..m
    marginal_gains: np.ndarray     # (m,)
    stoch_alloc: float
    assign_probs: Optional[np.ndarray] = None   # (m, n), exact engines
    beliefs: Optional[tuple] = None             # propagation only, per t
    max_states: int = 0

    def mean_maxw(self) -> np.ndarray:
        """(m+1, n) array of E[MaxW^t_a]."""
        return np.array([[d.mean() for d in row] for row in self.dists])


def _expected_gains(row, dists):
    return [d.expected_gain(float(row[a])) for a, d in enumerate(dists)]


class _EnumEngine:
    def __init__(self, instance: Instance):
        self.w = instance.weights
        self.n = instance.num_advertisers
        self.states = {((0.0,) * self.n, (3,) * self.n): 1.0}
        self.max_states = 1

    def e_gains(self, k):
        row = self.w[k]
        out = [0.0] * self.n
        for (mw, _), pr in self.states.items():
            for a in range(self.n):
                if row[a] > mw[a]:
                    out[a] += pr * (row[a] - mw[a])
        return out

    def marginals(self):
        acc = [dict() for _ in range(self.n)]
        for (mw, _), pr in self.states.items():
            for a in range(self.n):
                acc[a][mw[a]] = acc[a].get(mw[a], 0.0) + pr
        return tuple(DiscreteDistribution(d.items()) for d in acc)

    def advance(self, k, d: StepDecision):
        row = self.w[k]
        nxt: dict = {}
        probs = [0.0] * self.n

        def put(mw, mk, a, pr):
            if pr == 0.0:
                return
            if row[a] > mw[a]:
                mw = mw[:a] + (float(row[a]),) + mw[a + 1:]
            key = (mw, mk)
            nxt[key] = nxt.get(key, 0.0) + pr
            probs[a] += pr

        a1, a2 = d.a1, d.a2
        for (mw, mk), pr in self.states.items():
            if d.branch is Branch.FALLBACK_SINGLE:
                put(mw, mk, a1, pr)
            elif d.branch is Branch.FALLBACK_PAIR:
                put(mw, mk, a1, pr * d.split[0])
                put(mw, mk, a2, pr * d.split[1])
            else:
                low = list(mk)
                low[a1], low[a2] = 1, 2
                put(mw, tuple(low), a1, pr * THIRD)
                mid = list(mk)
                mid[a2], mid[a1] = 1, 2
                put(mw, tuple(mid), a2, pr * THIRD)
                high = list(mk)
                high[a1] = high[a2] = 3
                high = tuple(high)
                al, ao = d.a_ell, d.a_other
                adaptive = d.adapt_gain[al] > 0.0
                if adaptive and mk[al] == 1:
                    put(mw, high, ao, pr * THIRD)
                elif adaptive and mk[al] == 2:
                    put(mw, high, al, pr * THIRD)
                else:
                    put(mw, high, a1, pr * THIRD / 2.0)
                    put(mw, high, a2, pr * THIRD / 2.0)
        self.states = nxt
        self.max_states = max(self.max_states, len(nxt))
        return probs


class _PropEngine:
    def __init__(self, instance: Instance):
        self.w = instance.weights
        self.n = instance.num_advertisers
        zero = DiscreteDistribution.point(0.0)
        self.beliefs = [AnchorBelief(a, 0, None, (zero, zero, zero), zero)
                        for a in range(self.n)]

    def marginals(self):
        return tuple(b.unconditional() for b in self.beliefs)

    def e_gains(self, k):
        return _expected_gains(self.w[k], self.marginals())

    def _given_mark(self, x: int, al: int, k: int) -> DiscreteDistribution:
        """Law of MaxW_x just before this step, given Mark_{al} = k."""
        anchor = self.beliefs[al]
        bx = self.beliefs[x]
        if bx.anchor_time != anchor.anchor_time or anchor.anchor_time == 0:
            return bx.unconditional()
        # Mark_{al} = 1 iff the bucket at the anchor step picked al's role.
        r = anchor.role
        bucket = {1: r, 2: 3 - r, 3: 3}[k]
        return bx.conditional({1: 1, 2: 2, 3: 3}[bucket] if bx.role == 1
                              else {1: 2, 2: 1, 3: 3}[bucket])

    def advance(self, k, d: StepDecision):
        row = self.w[k]
        b = self.beliefs
        if d.branch is Branch.FALLBACK_SINGLE:
            a = d.a1
            b[a] = AnchorBelief(a, b[a].anchor_time, b[a].role, b[a].cond,
                                b[a].tail.max_with(float(row[a])))
            return
        if d.branch is Branch.FALLBACK_PAIR:
            for a, q in ((d.a1, d.split[0]), (d.a2, d.split[1])):
                tail = b[a].tail
                if q > 0.0:
                    tail = mixture([(q, tail.max_with(float(row[a]))), (1.0 - q, tail)])
                b[a] = AnchorBelief(a, b[a].anchor_time, b[a].role, b[a].cond, tail)
            return
        a1, a2 = d.a1, d.a2
        al, ao = d.a_ell, d.a_other
        prev = {a: b[a].unconditional() for a in (a1, a2)}
        adaptive = d.adapt_gain[al] > 0.0
        new = {}
        for a, role in ((a1, 1), (a2, 2)):
            wa = float(row[a])
            got = prev[a].max_with(wa)
            # own Mark 1 means this advertiser received the impression
            c1, c2 = got, prev[a]
            if not adaptive:
                c3 = mixture([(0.5, got), (0.5, prev[a])])
            else:
                # Mark_{al} = 1 -> ao gets it; = 2 -> al gets it; = 3 -> fair coin.
                g1 = self._given_mark(a, al, 1)
                g2 = self._given_mark(a, al, 2)
                g3 = self._given_mark(a, al, 3)
                parts = [
                    (THIRD, g1.max_with(wa) if a == ao else g1),
                    (THIRD, g2.max_with(wa) if a == al else g2),
                    (THIRD / 2.0, g3.max_with(wa)),
                    (THIRD / 2.0, g3),
                ]
                c3 = mixture(parts)
            new[a] = AnchorBelief(a, d.t, role, (c1, c2, c3), DiscreteDistribution.point(0.0))
        for a in (a1, a2):
            b[a] = new[a]


def _drive(engine, instance: Instance, params: AlgoParams,
           policy: Optional[PolicyTable], name: str, track_beliefs=False):
    m, n = instance.weights.shape
    if policy is not None:
        policy.check_instance(instance)
        if policy.params != params:
            raise ValueError("policy was built with different parameters")
    state = PolicyState(instance, params)
    e_tab = np.zeros((m, n))
    dists = [engine.marginals()]
    beliefs = [tuple(engine.beliefs)] if track_beliefs else None
    probs = np.zeros((m, n))
    decisions = []
    for k in range(m):
        e = engine.e_gains(k)
        e_tab[k] = e
        d = state.decide(e) if policy is None else policy[k]
        decisions.append(d)
        pr = engine.advance(k, d)
        if pr is not None:
            probs[k] = pr
        dists.append(engine.marginals())
        if track_beliefs:
            beliefs.append(tuple(engine.beliefs))
    if policy is None:
        policy = PolicyTable(params, instance.weights.shape, tuple(decisions))
    means = np.array([sum(dd.mean() for dd in row) for row in dists])
    mg = np.diff(means)
    return ExpectationResult(
        engine=name, policy=policy, e_gains=e_tab, dists=tuple(dists),
        marginal_gains=mg, stoch_alloc=float(means[-1]),
        assign_probs=probs if name == "enum" else None,
        beliefs=tuple(beliefs) if track_beliefs else None,
        max_states=getattr(engine, "max_states", 0))


def enumerate_exact(instance: Instance, params: AlgoParams,
                    policy: Optional[PolicyTable] = None, cap: int = DEFAULT_CAP):
    """Exact expectations over every coin outcome.

    With ``policy=None`` the decisions are computed in lockstep from the
    enumerated expectations; otherwise the given table is replayed.
    """
    if instance.num_impressions > cap:
        raise EnumerationCapError(
            f"{instance.num_impressions} impressions exceed the enumeration cap {cap}")
    return _drive(_EnumEngine(instance), instance, params, policy, "enum")


def propagate(instance: Instance, params: AlgoParams,
              policy: Optional[PolicyTable] = None):
    """Polynomial-time expectations from per-advertiser anchor beliefs."""
    return _drive(_PropEngine(instance), instance, params, policy, "dist",
                  track_beliefs=True)


@dataclass
class McResult:
    policy: PolicyTable
    replicas: int
    seed: int
    e_gains: np.ndarray
    e_stderr: np.ndarray
    marginal_gains: np.ndarray
    mg_stderr: np.ndarray
    value: float
    value_stderr: float
    assignments: np.ndarray        # (R, m)


def coin_array(seed: int, m: int, replicas: int) -> np.ndarray:
    """Coins of shape (replicas, m, 2) from per-impression Philox substreams."""
    coins = np.empty((replicas, m, 2))
    key0 = int(seed) % (1 << 64)
    for k in range(m):
        gen = np.random.Generator(np.random.Philox(key=np.array([key0, k], dtype=np.uint64)))
        coins[:, k, :] = gen.random((replicas, 2))
    return coins


def _stderr(s, sq, R):
    if R < 2:
        return np.zeros_like(s)
    mean = s / R
    var = np.maximum(sq - R * mean * mean, 0.0) / (R - 1)
    return np.sqrt(var / R)


def mc_estimate(instance: Instance, params: AlgoParams, policy: PolicyTable,
                replicas: int, seed: int = 0, coins: Optional[np.ndarray] = None,
                kernel=None) -> McResult:
    """Sample means of every Gain_{i,a} under a frozen policy."""
    if replicas <= 0:
        raise ValueError("replicas must be positive")
    policy.check_instance(instance)
    m, n = instance.weights.shape
    if coins is None:
        coins = coin_array(seed, m, replicas)
    kernel = kernel or replay
    assign, gsum, gsq, mgs, mgq, values = kernel(instance.weights, *policy_arrays(policy),
                                                 coins)
    R = replicas
    vstd = float(np.std(values, ddof=1) / np.sqrt(R)) if R > 1 else 0.0
    return McResult(policy, R, seed, gsum / R, _stderr(gsum, gsq, R), mgs / R,
                    _stderr(mgs, mgq, R), float(values.mean()), vstd, assign)


def write_expectation_csv(result, dest) -> None:
    """Columns: t, impression, advertiser, E_gain, engine, stderr.

    `dest` is a path or an open text stream.
    """
    if isinstance(result, McResult):
        e, se, name = result.e_gains, result.e_stderr, "mc"
    else:
        e, se, name = result.e_gains, None, result.engine
    if hasattr(dest, "write"):
        _write_expectations(dest, e, se, name)
    else:
        with open(dest, "w", newline="", encoding="utf-8") as fh:
            _write_expectations(fh, e, se, name)


def _write_expectations(fh, e, se, name):
    wr = csv.writer(fh, lineterminator="\n")
    wr.writerow(["t", "impression", "advertiser", "E_gain", "engine", "stderr"])
    m, n = e.shape
    for k in range(m):
        for a in range(n):
            wr.writerow([k + 1, k, a, repr(float(e[k, a])), name,
                         "" if se is None else repr(float(se[k, a]))])
