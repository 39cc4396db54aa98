"""Coin-independent per-arrival decisions of the stochastic greedy algorithms.

Everything here depends only on expected gains, never on realized coins, so
a run of the policy produces the same decision table for every seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .instance import Instance, pos_part

GREEN = "green"
BLUE = "blue"


class Branch(enum.Enum):
    ADAPTIVE = "adaptive"
    FALLBACK_SINGLE = "fallback_single"
    FALLBACK_PAIR = "fallback_pair"


class Variant(enum.Enum):
    SG = "SG"
    OSG = "OSG"


@dataclass(frozen=True)
class AlgoParams:
    eps: float = 0.082
    delta: float = 0.445
    variant: Variant = Variant.SG
    p: Optional[float] = None

    def __post_init__(self):
        v = Variant(self.variant)
        object.__setattr__(self, "variant", v)
        for name in ("eps", "delta"):
            x = getattr(self, name)
            if not (0.0 <= x <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {x}")
        if v is Variant.OSG:
            if self.p is None or not (0.0 <= self.p <= 1.0):
                raise ValueError("OSG needs p in [0, 1]")
        elif self.p is not None:
            raise ValueError("p is only meaningful for OSG")


@dataclass(frozen=True)
class AdvertiserMeta:
    color: str = GREEN
    index: int = 0          # arrival time of the indexing impression, 0 if none
    partner: Optional[int] = None
    s_accum: float = 0.0


@dataclass(frozen=True)
class StepDecision:
    t: int                          # arrival time, 1-based
    m_i: float
    e_gains: tuple
    adapt_gain: tuple
    B: tuple
    B_prime: tuple
    C: tuple
    branch: Branch
    a1: int
    a2: Optional[int]
    ell: Optional[int]              # 1 or 2 on adaptive steps
    split: tuple                    # (P(a1), P(a2)) for fallback steps
    meta_before: tuple              # AdvertiserMeta per advertiser, start of step
    meta_after: tuple

    @property
    def a_ell(self) -> Optional[int]:
        if self.ell is None:
            return None
        return self.a1 if self.ell == 1 else self.a2

    @property
    def a_other(self) -> Optional[int]:
        if self.ell is None:
            return None
        return self.a2 if self.ell == 1 else self.a1

    def structure(self) -> tuple:
        """Discrete part of the decision, used to compare policies across engines."""
        return (self.t, self.branch, self.a1, self.a2, self.ell, self.B,
                self.B_prime, self.C)


def adapt_gain(meta: AdvertiserMeta, w_cur: float, w_index: float,
               e_gain_index: float, m_i: float, delta: float) -> float:
    if meta.color != BLUE or w_cur < w_index - delta * m_i:
        return 0.0
    inner = e_gain_index / 3.0 - pos_part(w_index - w_cur) / 3.0 - meta.s_accum
    return pos_part(inner) / 12.0


def _argmax(keys, pool) -> int:
    """Lowest id among the maximizers of keys over pool."""
    best = None
    for a in sorted(pool):
        if best is None or keys[a] > keys[best]:
            best = a
    if best is None:
        raise ValueError("argmax over an empty set")
    return best


def candidate_sets(w_row, w_index, e_gains, adapt_gains, m_i, eps, delta):
    """Return sorted tuples (B, B', C)."""
    n = len(e_gains)
    thr = (1.0 - eps) * m_i
    B, Bp, C = [], [], []
    for a in range(n):
        gate = w_row[a] >= w_index[a] - delta * m_i
        if gate and e_gains[a] + 2.0 * adapt_gains[a] / 3.0 >= thr:
            B.append(a)
        if e_gains[a] >= thr:
            (Bp if gate else C).append(a)
    return tuple(B), tuple(Bp), tuple(C)


class PolicyState:
    """Forward state of the bookkeeping variables (Color, index, Partner, S)."""

    def __init__(self, instance: Instance, params: AlgoParams):
        if instance.num_advertisers < 1:
            raise ValueError("empty advertiser set")
        self.w = instance.weights
        self.params = params
        self.n = instance.num_advertisers
        self.metas = [AdvertiserMeta() for _ in range(self.n)]
        self.e_hist: list = []      # expected gain rows, one per past arrival
        self.t = 0

    def _w_index(self, a: int) -> float:
        idx = self.metas[a].index
        return 0.0 if idx == 0 else float(self.w[idx - 1, a])

    def _e_index(self, a: int) -> float:
        idx = self.metas[a].index
        return 0.0 if idx == 0 else self.e_hist[idx - 1][a]

    def decide(self, e_gains: Sequence[float]) -> StepDecision:
        p = self.params
        t = self.t + 1
        if t > self.w.shape[0]:
            raise IndexError("all impressions already processed")
        e = tuple(float(x) for x in e_gains)
        if len(e) != self.n:
            raise ValueError("expected gains must cover every advertiser")
        row = self.w[t - 1]
        w_idx = [self._w_index(a) for a in range(self.n)]
        m_i = max(e)
        ag = tuple(adapt_gain(self.metas[a], float(row[a]), w_idx[a], self._e_index(a),
                              m_i, p.delta) for a in range(self.n))
        B, Bp, C = candidate_sets(row, w_idx, e, ag, m_i, p.eps, p.delta)
        before = tuple(self.metas)
        metas = list(self.metas)
        ell = None
        if len(B) >= 2:
            key = [e[a] + 2.0 * ag[a] / 3.0 for a in range(self.n)]
            a1 = _argmax(key, B)
            a2 = _argmax(key, [a for a in B if a != a1])
            pair = (a1, a2)
            for a in pair:
                metas[a] = replace(metas[a], color=BLUE, s_accum=0.0, index=t)
                q = metas[a].partner
                if q is not None and q not in pair:
                    metas[q] = replace(metas[q], color=GREEN)
            metas[a1] = replace(metas[a1], partner=a2)
            metas[a2] = replace(metas[a2], partner=a1)
            ell = 2 if ag[a2] > ag[a1] else 1
            branch = Branch.ADAPTIVE
            split = (0.5, 0.5)
        elif p.variant is Variant.SG:
            if len(set(Bp) | set(C)) == 1:
                a1 = _argmax(e, range(self.n))
                a2 = None
                metas[a1] = replace(metas[a1], s_accum=metas[a1].s_accum + m_i)
                branch = Branch.FALLBACK_SINGLE
                split = (1.0, 0.0)
            else:
                a1 = Bp[0] if Bp else _argmax(e, C)
                a2 = _argmax(e, [a for a in C if a != a1])
                for a in (a1, a2):
                    metas[a] = replace(metas[a], s_accum=metas[a].s_accum + m_i / 2.0)
                branch = Branch.FALLBACK_PAIR
                split = (0.5, 0.5)
        else:
            a1 = _argmax(e, range(self.n))
            if Bp and a1 not in Bp:
                a2 = Bp[0]
                metas[a1] = replace(metas[a1], s_accum=metas[a1].s_accum + p.p * e[a1])
                metas[a2] = replace(metas[a2],
                                    s_accum=metas[a2].s_accum + (1.0 - p.p) * e[a2])
                branch = Branch.FALLBACK_PAIR
                split = (p.p, 1.0 - p.p)
            else:
                a2 = None
                metas[a1] = replace(metas[a1], s_accum=metas[a1].s_accum + e[a1])
                branch = Branch.FALLBACK_SINGLE
                split = (1.0, 0.0)
        self.metas = metas
        self.e_hist.append(e)
        self.t = t
        return StepDecision(t, m_i, e, ag, B, Bp, C, branch, a1, a2, ell, split,
                            before, tuple(metas))


def step_decision(state: PolicyState, e_gains) -> StepDecision:
    """Advance `state` by one arrival and return the decision taken."""
    return state.decide(e_gains)


@dataclass(frozen=True)
class PolicyTable:
    params: AlgoParams
    shape: tuple
    decisions: tuple

    def __len__(self):
        return len(self.decisions)

    def __getitem__(self, k):
        return self.decisions[k]

    def check_instance(self, instance: Instance) -> None:
        if instance.weights.shape != self.shape or len(self.decisions) != self.shape[0]:
            raise ValueError("policy does not match instance")

    def structure(self) -> tuple:
        return tuple(d.structure() for d in self.decisions)


def format_decision(d: StepDecision) -> str:
    def fmt(xs):
        return "[" + ",".join(str(x) for x in xs) + "]"
    ag = ",".join(f"{x:.12g}" for x in d.adapt_gain)
    return (f"t={d.t} M={d.m_i:.12g} B={fmt(d.B)} a1={d.a1} "
            f"a2={'-' if d.a2 is None else d.a2} ell={'-' if d.ell is None else d.ell} "
            f"branch={d.branch.value} AG=[{ag}]")


def format_trace(policy: PolicyTable) -> str:
    return "".join(format_decision(d) + "\n" for d in policy.decisions)


def policy_arrays(policy: PolicyTable):
    """Flatten a policy into the integer/float arrays consumed by the replay kernel."""
    m = len(policy)
    a1 = np.empty(m, dtype=np.int64)
    a2 = np.full(m, -1, dtype=np.int64)
    kind = np.empty(m, dtype=np.int64)
    q1 = np.ones(m, dtype=np.float64)
    ell = np.zeros(m, dtype=np.int64)
    agpos = np.zeros(m, dtype=np.int64)
    codes = {Branch.FALLBACK_SINGLE: 0, Branch.FALLBACK_PAIR: 1, Branch.ADAPTIVE: 2}
    for k, d in enumerate(policy.decisions):
        a1[k] = d.a1
        if d.a2 is not None:
            a2[k] = d.a2
        kind[k] = codes[d.branch]
        q1[k] = d.split[0]
        if d.ell is not None:
            ell[k] = d.ell
            agpos[k] = 1 if d.adapt_gain[d.a_ell] > 0.0 else 0
    return a1, a2, kind, q1, ell, agpos
