import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fduav.source_power import (SourceCoeffs, optimize_source_power, per_slot_power,
                                source_coeffs, source_objective)
from fduav.trajectory import straight_line

from oracles import source_grid_best

LN2 = math.log(2.0)


def random_instance(rng, n=3):
    a = 10.0 ** rng.uniform(1.0, 4.0, n)
    b = a * rng.uniform(0.01, 0.9, n)
    pbar = rng.uniform(0.02, 0.3)
    pmax = pbar * rng.uniform(1.2, 5.0)
    return a, b, pbar, pmax


def test_no_gain_means_no_power():
    assert per_slot_power(1.0, 2.0, 0.3, 1.0) == 0.0
    assert per_slot_power(2.0, 2.0, 0.3, 1.0) == 0.0


def test_unconstrained_limit_is_peak():
    assert per_slot_power(2.0, 1.0, 1e-12, 0.4) == 0.4
    assert per_slot_power(2.0, 1.0, 0.0, 0.4) == 0.4


def test_large_multiplier_gives_zero():
    # eta -> -1/2 for a=2, b=1 as mu grows
    assert per_slot_power(2.0, 1.0, 1e12, 5.0) == 0.0


@given(st.floats(1.0, 1e4), st.floats(0.01, 0.99), st.floats(1e-6, 1e3), st.floats(1e-6, 1e3))
def test_nonincreasing_in_mu(a, frac, mu1, mu2):
    b = a * frac
    lo, hi = sorted((mu1, mu2))
    assert per_slot_power(a, b, hi, 10.0) <= per_slot_power(a, b, lo, 10.0) + 1e-15


def test_all_useless_slots():
    sol = optimize_source_power(SourceCoeffs(np.ones(4), np.full(4, 2.0)), 0.1, 0.4)
    np.testing.assert_array_equal(sol.p, 0.0)
    assert sol.mu == 0.0


def test_single_slot_average_equals_peak():
    sol = optimize_source_power(SourceCoeffs(np.array([50.0]), np.array([5.0])), 0.2, 0.2)
    assert sol.p[0] == 0.2


def test_slack_budget_gives_zero_multiplier():
    sol = optimize_source_power(SourceCoeffs(np.array([50.0, 1.0]), np.array([5.0, 2.0])),
                                0.3, 0.4)
    assert sol.mu == 0.0
    np.testing.assert_array_equal(sol.p, [0.4, 0.0])


def test_brute_force_oracle(rng):
    worst = 0.0
    for _ in range(50):
        a, b, pbar, pmax = random_instance(rng)
        sol = optimize_source_power(SourceCoeffs(a, b), pbar, pmax)
        ours = source_objective(sol.p, a, b)
        coarse = source_grid_best(a, b, pbar, pmax, refine=False)
        grid = source_grid_best(a, b, pbar, pmax)
        assert ours >= coarse * (1 - 1e-12)
        worst = max(worst, abs(ours - grid) / abs(grid))
    assert worst <= 1e-5


@pytest.mark.parametrize("seed", range(20))
def test_kkt_and_feasibility(seed):
    rng = np.random.default_rng(seed)
    a, b, pbar, pmax = random_instance(rng, n=12)
    b[::4] = a[::4] * 1.5  # some useless slots
    sol = optimize_source_power(SourceCoeffs(a, b), pbar, pmax)
    p, mu = sol.p, sol.mu
    n = p.size
    assert np.all(p >= 0) and np.all(p <= pmax)
    assert p.sum() <= n * pbar * (1 + 1e-8)
    np.testing.assert_array_equal(p[::4], 0.0)
    if mu > 0:
        assert p.sum() >= n * pbar * (1 - 1e-6)
    # summed-constraint multiplier: slot derivative equals mu
    inner = (p > 1e-9 * pmax) & (p < pmax * (1 - 1e-9))
    deriv = (a / (1 + a * p) - b / (1 + b * p)) / LN2
    np.testing.assert_allclose(deriv[inner], mu, rtol=1e-6)
    # saturated slots want more, idle useful slots want none
    assert np.all(deriv[p >= pmax * (1 - 1e-9)] >= mu * (1 - 1e-6))


@pytest.mark.parametrize("seed", range(10))
def test_never_worse_than_trivial_points(seed):
    rng = np.random.default_rng(100 + seed)
    a, b, pbar, pmax = random_instance(rng, n=8)
    sol = optimize_source_power(SourceCoeffs(a, b), pbar, pmax)
    f = source_objective(sol.p, a, b)
    assert f >= source_objective(np.zeros(8), a, b)
    assert f >= source_objective(np.full(8, pbar), a, b) - 1e-12


def test_coefficients_from_geometry(ref):
    q = straight_line(ref)
    pu = np.full(ref.n_slots, ref.pbar_u)
    c = source_coeffs(q, pu, ref)
    qn = q[1:]
    a = 1e8 / ((1e4 + np.sum(qn ** 2, axis=1)) * (ref.pbar_u * 1e3 + 1))
    m = 1e4 + np.sum((qn - ref.w_e) ** 2, axis=1)
    b = 1e8 * 200.0 ** -3 / (1e8 * ref.pbar_u / m + 1)
    np.testing.assert_allclose(c.a, a, rtol=1e-10)
    np.testing.assert_allclose(c.b, b, rtol=1e-10)
    assert np.all(c.a > 0) and np.all(c.b > 0)
