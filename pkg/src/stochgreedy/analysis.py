"""Excess decomposition and the two excess-distribution mechanisms.

All quantities are exact expectations from the enumeration engine on the
square-padded instance, so a*_i exists for every impression.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .expectation import DEFAULT_CAP, EnumerationCapError, ExpectationResult, enumerate_exact
from .instance import Instance, OfflineMatching, offline_optimum, pad_with_dummies
from .policy import AlgoParams, Branch, PolicyTable, Variant

TOL = 1e-9


@dataclass
class Decomposition:
    instance: Instance          # padded
    params: AlgoParams
    result: ExpectationResult
    opt: OfflineMatching
    a_star: tuple
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    dY: np.ndarray              # dY[t, i'] for t = 1..m (row 0 unused)
    dZ: np.ndarray

    @property
    def policy(self) -> PolicyTable:
        return self.result.policy

    @property
    def stoch_alloc(self) -> float:
        return self.result.stoch_alloc

    def total(self) -> float:
        return float(np.sum(self.X + self.Y + self.Z))

    def identity_residual(self) -> float:
        """2 StochAlloc - OPT - sum(X + Y + Z); zero up to rounding."""
        return 2.0 * self.stoch_alloc - self.opt.value - self.total()


def decompose(instance: Instance, params: AlgoParams, policy: Optional[PolicyTable] = None,
              cap: int = DEFAULT_CAP) -> Decomposition:
    inst = pad_with_dummies(instance)
    m = inst.num_impressions
    if m > cap:
        raise EnumerationCapError(f"padded instance has {m} impressions, cap is {cap}")
    res = enumerate_exact(inst, params, policy=policy, cap=cap)
    opt = offline_optimum(inst)
    if any(a is None for a in opt.match):
        raise ValueError("offline optimum is not perfect on the padded instance")
    a_star = opt.match
    w = inst.weights
    X = np.zeros(m)
    Y = np.zeros(m)
    Z = np.zeros(m)
    dY = np.zeros((m + 1, m))
    dZ = np.zeros((m + 1, m))
    for k in range(m):
        a = a_star[k]
        t_i = k + 1
        X[k] = res.marginal_gains[k] - res.e_gains[k, a]
        Y[k] = res.dists[m][a].mean() - res.dists[t_i - 1][a].mean()
        Z[k] = res.dists[t_i - 1][a].expected_excess(float(w[k, a]))
        for t in range(1, m + 1):
            if t >= t_i:
                dY[t, k] = res.dists[t][a].mean() - res.dists[t - 1][a].mean()
            else:
                wk = float(w[k, a])
                dZ[t, k] = (res.dists[t][a].expected_excess(wk)
                            - res.dists[t - 1][a].expected_excess(wk))
    return Decomposition(inst, params, res, opt, a_star, X, Y, Z, dY, dZ)


@dataclass(frozen=True)
class LedgerEntry:
    t: int
    line: str            # "Y", "Z", "adapt", "fallback", "own"
    target: int          # impression row
    amount: float
    source: Optional[int] = None     # impression whose Y/Z unit is being shared


@dataclass
class ExcessLedger:
    mechanism: str
    zeta: float
    beta: float
    sigma: float
    p: Optional[float]
    excess: np.ndarray
    entries: list = field(default_factory=list)
    dropped: list = field(default_factory=list)     # (t, amount)
    unclaimed: list = field(default_factory=list)   # (kind, t, i', amount) never routed
    audit_errors: list = field(default_factory=list)

    def total(self) -> float:
        return float(self.excess.sum())


def _add(ledger, t, line, target, amount, source=None):
    amount = float(amount)
    ledger.excess[target] += amount
    ledger.entries.append(LedgerEntry(t, line, int(target), amount, source))


def run_mechanism(decomp: Decomposition, mech: str, zeta: float, beta: float,
                  sigma: float, p: Optional[float] = None) -> ExcessLedger:
    """Populate Excess_i per the base ("M2") or optimized ("M4") mechanism."""
    if mech not in ("M2", "M4"):
        raise ValueError("mech must be M2 or M4")
    for name, v in (("zeta", zeta), ("beta", beta), ("sigma", sigma)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must lie in [0, 1]")
    if mech == "M4":
        if p is None:
            p = decomp.params.p
        if p is None or not (0.0 <= p <= 1.0):
            raise ValueError("M4 needs p in [0, 1]")
    inst = decomp.instance
    w = inst.weights
    m = inst.num_impressions
    a_star = decomp.a_star
    owner = {a: k for k, a in enumerate(a_star)}   # advertiser -> i' with a*_{i'} = a
    led = ExcessLedger(mech, zeta, beta, sigma, p, np.zeros(m))
    usedY = np.zeros((m + 1, m), dtype=bool)
    usedZ = np.zeros((m + 1, m), dtype=bool)

    for k, d in enumerate(decomp.policy.decisions):
        t = k + 1
        before = d.meta_before

        def idx_row(a):
            """Impression row of index(a) at the start of this step, or None."""
            ix = before[a].index
            return None if ix == 0 else ix - 1

        cands = [d.a1] if d.a2 is None else [d.a1, d.a2]
        for a in cands:
            ip = owner.get(a)
            if ip is None:
                raise ValueError("advertiser without an optimal partner; pad the instance")
            if ip + 1 <= t:
                amount = decomp.dY[t, ip]
                usedY[t, ip] = True
                group = {k, ip}
                if idx_row(a) is not None:
                    group.add(idx_row(a))
                for g in sorted(group):
                    _add(led, t, "Y", g, amount / len(group), ip)
            elif w[k, a] > w[ip, a]:
                amount = decomp.dZ[t, ip]
                usedZ[t, ip] = True
                _add(led, t, "Z", k, (1.0 - zeta) * amount, ip)
                _add(led, t, "Z", ip, zeta * amount, ip)

        if d.branch is Branch.ADAPTIVE:
            spent = 0.0
            for a in sorted({d.a1, d.a2, a_star[k]}):
                amt = 2.0 * d.adapt_gain[a] / 3.0
                tgt = idx_row(a)
                if amt == 0.0:
                    continue
                if tgt is None:
                    led.audit_errors.append(f"t={t}: positive AdaptGain on unindexed {a}")
                    continue
                _add(led, t, "adapt", tgt, amt)
                spent += amt
            _add(led, t, "own", k, decomp.X[k] - spent)
        else:
            m_i = d.m_i
            if mech == "M2":
                s1 = s2 = sigma * m_i / 2.0
            else:
                s1, s2 = p * sigma * m_i, (1.0 - p) * sigma * m_i
            shares = [(idx_row(d.a1), s1),
                      (None if d.a2 is None else idx_row(d.a2), s2),
                      (idx_row(a_star[k]), beta * m_i)]
            first = shares[0][0]
            spent = 0.0
            redirect = 0.0
            for tgt, amt in shares:
                if tgt is None:
                    redirect += amt
                else:
                    _add(led, t, "fallback", tgt, amt)
                    spent += amt
            if redirect:
                if first is None:
                    led.dropped.append((t, redirect))
                else:
                    _add(led, t, "fallback", first, redirect)
                    spent += redirect
            _add(led, t, "own", k, decomp.X[k] - spent)

    for t in range(1, m + 1):
        for ip in range(m):
            if not usedY[t, ip] and abs(decomp.dY[t, ip]) > TOL:
                led.unclaimed.append(("Y", t, ip, float(decomp.dY[t, ip])))
            if not usedZ[t, ip] and abs(decomp.dZ[t, ip]) > TOL:
                led.unclaimed.append(("Z", t, ip, float(decomp.dZ[t, ip])))
    return led


@dataclass(frozen=True)
class BoundRow:
    impression: int
    X: float
    Y: float
    Z: float
    excess: float
    bound: float
    margin: float
    passed: bool


@dataclass
class BoundReport:
    mechanism: str
    lam: float
    rows: list
    sum_residual: float
    identity_residual: float
    instance: Instance
    ledger: ExcessLedger

    @property
    def violations(self):
        return [r for r in self.rows if not r.passed]

    @property
    def identities_ok(self) -> bool:
        return (abs(self.sum_residual) <= TOL and abs(self.identity_residual) <= TOL
                and not self.ledger.unclaimed and not self.ledger.audit_errors)

    @property
    def ok(self) -> bool:
        return self.identities_ok and not self.violations

    def describe_violations(self) -> str:
        out = []
        for r in self.violations:
            out.append(f"impression {r.impression}: Excess={r.excess:.12g} "
                       f"bound={r.bound:.12g} margin={r.margin:.3g}")
        if out:
            out.append(f"instance weights: {self.instance.weights.tolist()!r}")
        return "\n".join(out)


def verify_bounds(ledger: ExcessLedger, decomp: Decomposition, lam: float,
                  tol: float = 1e-12) -> BoundReport:
    """Check Excess_i >= lam * M_i (M2) or lam * E[Gain_{i,a*_i}] (M4).

    `tol` absorbs rounding in the final comparison only.
    """
    rows = []
    res = decomp.result
    for k, d in enumerate(decomp.policy.decisions):
        if ledger.mechanism == "M2":
            scale = d.m_i
        else:
            scale = float(res.e_gains[k, decomp.a_star[k]])
        bound = lam * scale
        ex = float(ledger.excess[k])
        margin = ex - bound
        rows.append(BoundRow(k, float(decomp.X[k]), float(decomp.Y[k]), float(decomp.Z[k]),
                             ex, bound, margin, margin >= -tol))
    return BoundReport(ledger.mechanism, lam, rows, ledger.total() - decomp.total(),
                       decomp.identity_residual(), decomp.instance, ledger)


def write_bounds_csv(report: BoundReport, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["impression", "X", "Y", "Z", "Excess", "bound", "margin", "pass"])
        for r in report.rows:
            wr.writerow([r.impression, repr(r.X), repr(r.Y), repr(r.Z), repr(r.excess),
                         repr(r.bound), repr(r.margin), int(r.passed)])


# Structural checks on a decision table with exact expectations.

def adaptivity_slack(res: ExpectationResult) -> list:
    """(t, MarginalGain_i - [(E1+E2)/2 + AG1 + AG2]) for every adaptive step."""
    out = []
    for k, d in enumerate(res.policy.decisions):
        if d.branch is Branch.ADAPTIVE:
            bound = ((d.e_gains[d.a1] + d.e_gains[d.a2]) / 2.0
                     + d.adapt_gain[d.a1] + d.adapt_gain[d.a2])
            out.append((d.t, float(res.marginal_gains[k]) - bound))
    return out


def candidate_probabilities(res: ExpectationResult) -> list:
    """(t, P(i -> a1), P(i -> a2)) for every adaptive step, exact."""
    if res.assign_probs is None:
        raise ValueError("needs the enumeration engine")
    return [(d.t, float(res.assign_probs[k, d.a1]), float(res.assign_probs[k, d.a2]))
            for k, d in enumerate(res.policy.decisions) if d.branch is Branch.ADAPTIVE]


def structural_violations(policy: PolicyTable, tol: float = 1e-12) -> list:
    """AdaptGain <= E[Gain]/12 everywhere and E[Gain] >= 18(1-eps)/19 M_i on B."""
    eps = policy.params.eps
    bad = []
    for d in policy.decisions:
        for a, (ag, e) in enumerate(zip(d.adapt_gain, d.e_gains)):
            if ag > e / 12.0 + tol:
                bad.append((d.t, a, "adapt_gain", ag, e / 12.0))
        for a in d.B:
            lo = 18.0 * (1.0 - eps) / 19.0 * d.m_i
            if d.e_gains[a] < lo - tol:
                bad.append((d.t, a, "B_gain", d.e_gains[a], lo))
    return bad
