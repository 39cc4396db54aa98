import time
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize

from stochgreedy.certificates import (CEILING, LambdaParams, competitive_ratio,
                                      impossibility_scan, lambda_opt_terms, lambda_terms,
                                      maximize, objective, project)

BASE_PT = LambdaParams(0.082, 0.445, 0.955, 0.00337198, 0.03362)
OPT_PT = LambdaParams(0.0805, 0.4009, 0.9216, 0.0062, 0.0555, 0.8613)

# Sup of the min term found by an SLSQP epigraph solve (see slsqp_sup below),
# frozen here so the search tests do not depend on that solver's runtime.
BASE_SUP = 0.00401910
OPT_SUP = 0.00761375


def exact_terms(e, d, z, b, s, p=None, num=F):
    """Transcription of the eleven terms, written out independently.

    `num` is Fraction for exact checks or float for the SLSQP oracle.
    """
    e, d, z, b, s = map(num, (e, d, z, b, s))
    kappa = (324 * (1 - e) ** 2 - 361 * d) / (18468 * (1 - e))
    shared = [(2 - 21 * e) / 19, None, kappa, kappa * 18 * s, 2 * (1 - e) / 19, None,
              18 * (1 - e) / 19 * s, 2 * b / (1 + d) * 18 * (1 - e) / 19]
    if p is None:
        head = [(e - 2 * b - 2 * s) / 2, (1 - 3 * e - 4 * b - 4 * s) / 4,
                (2 * z * d - 3 * e - 6 * b - 6 * s) / 6]
        fifth = (6 * z * d - 1 - 18 * e) / 18
        ninth = (1 - z) * d / (1 + d) * 6 * (1 - e) / 19
    else:
        p = num(p)
        head = [p * e - b - s, (1 - p) / 2 - b - s, 7 * z * d / 18 - (1 - p) * e - b - s]
        fifth = 7 * z * d / 18 - num(1) / 18 - e
        ninth = (1 - z) * d / (1 + d) * 7 * (1 - e) / 19
    shared[1], shared[5] = fifth, ninth
    return head + shared


def slsqp_sup(optimized, starts=20, seed=3):
    """max t subject to every term >= t over the box (and p >= beta + sigma)."""
    d = 6 if optimized else 5

    def terms(x):
        return np.array(exact_terms(*x[:d], num=float))

    cons = [{"type": "ineq", "fun": lambda x: terms(x) - x[d]}]
    if optimized:
        cons.append({"type": "ineq", "fun": lambda x: x[5] - x[3] - x[4]})
    rng = np.random.default_rng(seed)
    best = -np.inf
    for _ in range(starts):
        x0 = np.append(rng.random(d) * ([0.2, 1, 1, 0.02, 0.1, 1][:d]), 0.0)
        if optimized:
            x0[5] = max(x0[5], x0[3] + x0[4])
        r = minimize(lambda x: -x[d], x0, method="SLSQP", constraints=cons,
                     bounds=[(0, 0.99)] + [(0, 1)] * (d - 1) + [(-1, 1)],
                     options={"ftol": 1e-14, "maxiter": 500})
        if r.success:
            best = max(best, float(min(terms(r.x))))
    return best


def test_base_point_value_and_binding():
    tb = lambda_terms(BASE_PT)
    assert tb.min == pytest.approx(0.00400802, abs=1e-8)
    assert tb.binding == 0
    assert all(v >= 0.00400802 - 1e-8 for v in tb.values)


def test_all_zero_is_negative():
    tb = lambda_terms(LambdaParams(0, 0, 0, 0, 0))
    assert tb.min == pytest.approx(-1 / 18)
    assert tb.binding == 4


def test_optimized_point():
    tb = lambda_opt_terms(OPT_PT)
    assert tb.min >= 0.0076
    assert competitive_ratio(tb.min) >= 0.50189


def test_optimized_constraint_boundary():
    b, s = 0.01, 0.05
    lambda_opt_terms(LambdaParams(0.08, 0.4, 0.9, b, s, b + s))
    with pytest.raises(ValueError):
        lambda_opt_terms(LambdaParams(0.08, 0.4, 0.9, 0.01, 0.05, 0.059))
    with pytest.raises(ValueError):
        lambda_opt_terms(LambdaParams(0.08, 0.4, 0.9, 0.01, 0.05))


unit = st.floats(0, 1)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 0.99), unit, unit, unit, unit)
def test_base_terms_match_rational_copy(e, d, z, b, s):
    got = lambda_terms(LambdaParams(e, d, z, b, s)).values
    for g, w in zip(got, exact_terms(e, d, z, b, s)):
        assert g == pytest.approx(float(w), rel=1e-12, abs=1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 0.99), unit, unit, st.floats(0, 0.5), st.floats(0, 0.5), unit)
def test_optimized_terms_match_rational_copy(e, d, z, b, s, extra):
    p = min(1.0, b + s + extra * (1 - b - s))
    got = lambda_opt_terms(LambdaParams(e, d, z, b, s, p)).values
    for g, w in zip(got, exact_terms(e, d, z, b, s, p)):
        assert g == pytest.approx(float(w), rel=1e-12, abs=1e-14)


def test_ratio_map():
    assert competitive_ratio(0.0) == 0.5
    assert competitive_ratio(0.00400802) >= 0.501
    assert competitive_ratio(0.0076) >= 0.50189
    xs = np.linspace(0, 1, 200)
    ys = [competitive_ratio(x) for x in xs]
    assert all(b > a for a, b in zip(ys, ys[1:]))
    with pytest.raises(ValueError):
        competitive_ratio(-0.1)


def test_eps_one_is_finite_minus_inf():
    assert lambda_terms(LambdaParams(1.0, 0.5, 0.5, 0.1, 0.1)).min == -np.inf


def test_projection_respects_constraint():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x = project(rng.uniform(-0.5, 1.5, 6), True)
        assert np.all((0 <= x) & (x <= 1))
        assert x[5] >= x[3] + x[4] - 1e-12


def test_softmin_is_below_min():
    x = np.array([0.08, 0.4, 0.9, 0.006, 0.05, 0.86])
    assert objective(x, True, 1e-3) <= objective(x, True)


def test_slsqp_oracle_agrees_with_frozen_values():
    assert slsqp_sup(False) == pytest.approx(BASE_SUP, abs=2e-8)
    assert slsqp_sup(True) == pytest.approx(OPT_SUP, abs=2e-8)


def test_maximize_base():
    lp, tb = maximize("base", restarts=8, seed=0)
    assert tb.min >= 0.004008
    assert tb.min <= BASE_SUP + 1e-8


def test_maximize_optimized():
    lp, tb = maximize("optimized", restarts=8, seed=0)
    assert 0.0076 <= tb.min <= CEILING + 1e-9
    assert tb.min <= OPT_SUP + 1e-8
    assert lp.p >= lp.beta + lp.sigma


def test_maximize_is_deterministic():
    a = maximize("base", restarts=2, iters=50, seed=4)
    b = maximize("base", restarts=2, iters=50, seed=4)
    assert a[0] == b[0]


def test_scan_collapsed_box():
    box = [(v, v) for v in OPT_PT.as_tuple()]
    res = impossibility_scan(grid_resolution=4, refine_iters=20, restarts=1, box=box)
    assert res.value == pytest.approx(lambda_opt_terms(OPT_PT).min, abs=1e-15)
    assert res.value == pytest.approx(0.00760, abs=1e-5)


def test_scan_coarse_grid_under_ceiling():
    res = impossibility_scan(grid_resolution=2, refine_iters=20, restarts=2)
    assert res.value <= CEILING and res.certified


def test_scan_rejects_empty_grid():
    box = [(0, 1)] * 3 + [(0.6, 0.6), (0.6, 0.6), (0.1, 0.1)]
    with pytest.raises(ValueError):
        impossibility_scan(grid_resolution=4, box=box)


def test_single_evaluation_is_fast():
    t0 = time.perf_counter()
    for _ in range(100):
        lambda_terms(BASE_PT)
        lambda_opt_terms(OPT_PT)
    assert (time.perf_counter() - t0) / 100 < 1e-3
