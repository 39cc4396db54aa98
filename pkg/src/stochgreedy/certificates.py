"""Closed-form lambda certificates, the ratio map, and numerical search over them."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import minimize

CEILING = 0.00762899

BASE_NAMES = (
    "(eps-2b-2s)/2",
    "(1-3eps-4b-4s)/4",
    "(2zd-3eps-6b-6s)/6",
    "(2-21eps)/19",
    "(6zd-1-18eps)/18",
    "K",
    "K*18s",
    "2(1-eps)/19",
    "(1-z)d/(1+d)*6(1-eps)/19",
    "18(1-eps)/19*s",
    "2b/(1+d)*18(1-eps)/19",
)

OPT_NAMES = (
    "p*eps-b-s",
    "(1-p)/2-b-s",
    "7zd/18-(1-p)eps-b-s",
    "(2-21eps)/19",
    "7zd/18-1/18-eps",
    "K",
    "K*18s",
    "2(1-eps)/19",
    "(1-z)d/(1+d)*7(1-eps)/19",
    "18(1-eps)/19*s",
    "2b/(1+d)*18(1-eps)/19",
)


@dataclass(frozen=True)
class LambdaParams:
    eps: float
    delta: float
    zeta: float
    beta: float
    sigma: float
    p: Optional[float] = None

    def as_tuple(self):
        base = (self.eps, self.delta, self.zeta, self.beta, self.sigma)
        return base if self.p is None else base + (self.p,)


@dataclass(frozen=True)
class TermBreakdown:
    names: tuple
    values: tuple

    @property
    def min(self) -> float:
        return min(self.values)

    @property
    def binding(self) -> int:
        return int(np.argmin(self.values))

    def table(self) -> str:
        b = self.binding
        return "\n".join(f"{'*' if j == b else ' '} LB{j + 1:<2d} {nm:<28s} {v: .10f}"
                         for j, (nm, v) in enumerate(zip(self.names, self.values)))


def _kappa(eps, delta):
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (324.0 * (1 - eps) ** 2 - 361.0 * delta) / (18468.0 * (1 - eps))
    # eps = 1 makes the denominator vanish; the term is then unbounded below
    return np.where(np.isnan(k), -np.inf, k)


def _finite(terms):
    """Products like K * 18 sigma turn -inf * 0 into nan; count those as -inf."""
    return np.where(np.isnan(terms), -np.inf, terms)


def base_terms_array(eps, delta, zeta, beta, sigma):
    """Vectorized base terms; returns an array of shape (11,) + broadcast shape."""
    eps, delta, zeta, beta, sigma = np.broadcast_arrays(*map(np.asarray, (eps, delta, zeta,
                                                                       beta, sigma)))
    k = _kappa(eps, delta)
    with np.errstate(invalid="ignore"):
        return _finite(np.stack([
            (eps - 2 * beta - 2 * sigma) / 2,
            (1 - 3 * eps - 4 * beta - 4 * sigma) / 4,
            (2 * zeta * delta - 3 * eps - 6 * beta - 6 * sigma) / 6,
            (2 - 21 * eps) / 19 + 0 * eps,
            (6 * zeta * delta - 1 - 18 * eps) / 18,
            k,
            k * 18 * sigma,
            2 * (1 - eps) / 19,
            (1 - zeta) * delta / (1 + delta) * 6 * (1 - eps) / 19,
            18 * (1 - eps) / 19 * sigma,
            2 * beta / (1 + delta) * 18 * (1 - eps) / 19,
        ]))


def opt_terms_array(eps, delta, zeta, beta, sigma, p):
    eps, delta, zeta, beta, sigma, p = np.broadcast_arrays(
        *map(np.asarray, (eps, delta, zeta, beta, sigma, p)))
    k = _kappa(eps, delta)
    with np.errstate(invalid="ignore"):
        return _finite(np.stack([
            p * eps - beta - sigma,
            (1 - p) / 2 - beta - sigma,
            7 * zeta * delta / 18 - (1 - p) * eps - beta - sigma,
            (2 - 21 * eps) / 19 + 0 * eps,
            7 * zeta * delta / 18 - 1 / 18 - eps,
            k,
            k * 18 * sigma,
            2 * (1 - eps) / 19,
            (1 - zeta) * delta / (1 + delta) * 7 * (1 - eps) / 19,
            18 * (1 - eps) / 19 * sigma,
            2 * beta / (1 + delta) * 18 * (1 - eps) / 19,
        ]))


def lambda_terms(params: LambdaParams) -> TermBreakdown:
    v = base_terms_array(params.eps, params.delta, params.zeta, params.beta, params.sigma)
    return TermBreakdown(BASE_NAMES, tuple(float(x) for x in v))


def lambda_opt_terms(params: LambdaParams) -> TermBreakdown:
    if params.p is None:
        raise ValueError("optimized terms need p")
    if params.p < params.beta + params.sigma:
        raise ValueError(f"constraint p >= beta + sigma violated "
                         f"({params.p} < {params.beta + params.sigma})")
    v = opt_terms_array(params.eps, params.delta, params.zeta, params.beta, params.sigma,
                        params.p)
    return TermBreakdown(OPT_NAMES, tuple(float(x) for x in v))


def competitive_ratio(lam: float) -> float:
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    return (0.5 + lam / 2.0) / (1.0 + lam / 2.0)


def write_terms_csv(tb: TermBreakdown, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["term", "value", "binding"])
        for j, (nm, v) in enumerate(zip(tb.names, tb.values)):
            wr.writerow([nm, repr(v), int(j == tb.binding)])


# Search. Coordinates: (eps, delta, zeta, beta, sigma[, p]) in the unit box.

def project(x: np.ndarray, optimized: bool) -> np.ndarray:
    """Clip to the box and, for the optimized kind, enforce p >= beta + sigma."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    if not optimized:
        return x
    for _ in range(50):
        gap = x[3] + x[4] - x[5]
        if gap <= 0:
            return x
        # Euclidean step onto the half-space p - beta - sigma >= 0, then re-clip.
        s = gap / 3.0
        x = np.clip(x + s * np.array([0, 0, 0, -1, -1, 1]), 0.0, 1.0)
    if x[3] + x[4] > x[5]:
        tot = x[3] + x[4]
        x[3] *= x[5] / tot
        x[4] *= x[5] / tot
    return x


def _terms(x, optimized):
    return opt_terms_array(*x) if optimized else base_terms_array(*x)


def objective(x, optimized: bool, tau: float = 0.0) -> float:
    """Min term at the projected point, or its soft-min at temperature tau."""
    v = _terms(project(x, optimized), optimized)
    lo = float(v.min())
    if tau <= 0.0 or not np.isfinite(lo):
        return lo
    return lo - tau * float(np.log(np.exp(-(v - lo) / tau).sum()))


def _nelder_mead(x0, optimized, iters, scale, tau=0.0):
    f = lambda z: -objective(z, optimized, tau)
    d = len(x0)
    simplex = [x0] + [project(x0 + scale * np.eye(d)[j], optimized) for j in range(d)]
    r = minimize(f, x0, method="Nelder-Mead",
                 options={"maxiter": iters, "xatol": 1e-12, "fatol": 1e-10,
                          "initial_simplex": np.array(simplex)})
    return project(r.x, optimized)


TAUS = (1e-3, 1e-4, 1e-5, 1e-6, 0.0)


def local_search(x0, optimized: bool, iters: int = 200) -> np.ndarray:
    """Simplex search on a soft-min whose temperature falls to zero.

    The min of eleven affine-ish terms has ridges where plain Nelder-Mead
    stalls; the log-sum-exp smoothing keeps the simplex moving along them.
    `iters` is the iteration budget per temperature level.
    """
    x = project(x0, optimized)
    best = objective(x, optimized)
    scale = 0.1
    for tau in TAUS:
        y = _nelder_mead(x, optimized, iters, scale, tau)
        fy = objective(y, optimized)
        if fy >= best:
            x, best = y, fy
        scale = max(scale / 3.0, 1e-4)
    return x


def maximize(kind: str = "base", restarts: int = 32, iters: int = 400, seed: int = 0):
    """Multi-start simplex search for the max over the box of the min term."""
    optimized = {"base": False, "optimized": True}[kind]
    d = 6 if optimized else 5
    rng = np.random.default_rng(seed)
    best_x, best_v = None, -np.inf
    for _ in range(restarts):
        x0 = project(rng.random(d) * np.array([0.3, 1, 1, 0.1, 0.1, 1][:d]), optimized)
        x = local_search(x0, optimized, iters)
        v = objective(x, optimized)
        if v > best_v:          # strict: earliest restart wins ties
            best_x, best_v = x, v
    lp = LambdaParams(*best_x)
    tb = lambda_opt_terms(lp) if optimized else lambda_terms(lp)
    return lp, tb


@dataclass
class ScanResult:
    value: float
    argmax: LambdaParams
    breakdown: TermBreakdown
    grid_best: float

    @property
    def certified(self) -> bool:
        return self.value < CEILING + 1e-6


def impossibility_scan(grid_resolution: int = 8, refine_iters: int = 200, restarts: int = 32,
                       box=None) -> ScanResult:
    """Grid over the optimized parameter box, then refine the best cells.

    `box` is a sequence of six (lo, hi) pairs; equal ends collapse an axis.
    """
    if box is None:
        box = [(0.0, 1.0)] * 6
    axes = [np.linspace(lo, hi, grid_resolution) if hi > lo else np.array([lo])
            for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    pts = pts[pts[:, 5] >= pts[:, 3] + pts[:, 4]]
    if len(pts) == 0:
        raise ValueError("no grid point satisfies p >= beta + sigma")
    vals = opt_terms_array(*pts.T).min(axis=0)
    order = np.argsort(-vals, kind="stable")
    grid_best = float(vals[order[0]])
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    best_x, best_v = pts[order[0]], grid_best
    for j in order[:restarts]:
        x = local_search(pts[j], True, refine_iters)
        x = np.clip(x, lo, hi)
        x = project(x, True)
        v = objective(x, True)
        if v > best_v:
            best_x, best_v = x, v
    lp = LambdaParams(*best_x)
    return ScanResult(best_v, lp, lambda_opt_terms(lp), grid_best)
