import numpy as np
import pytest

from fduav.bcd import initial_point, run_bcd, solve_pt
from fduav.jamming import jam_coeffs, optimize_jamming_power, true_objective
from fduav.metrics import reporting_ee
from fduav.source_power import optimize_source_power, source_coeffs, source_objective
from fduav.trajectory import optimize_trajectory, straight_line

from oracles import spreadsheet_ee


@pytest.fixture(scope="module")
def pt_long(long_ref):
    return solve_pt(long_ref)


def test_initial_point(long_ref):
    q, ps, pu = initial_point(long_ref)
    np.testing.assert_allclose(q, straight_line(long_ref))
    assert np.all(ps == long_ref.pbar_s) and np.all(pu == long_ref.pbar_u)


def test_history_nondecreasing(pt_long):
    h = [pt_long.ee_initial] + pt_long.history
    assert all(b >= a for a, b in zip(h, h[1:]))
    assert pt_long.ee_bits_per_joule > pt_long.ee_initial


def test_stopping_rule(long_ref, pt_long):
    assert pt_long.status in ("converged", "fallback-used")
    h = pt_long.history
    prev = [pt_long.ee_initial] + h[:-1]
    gains = [(b - a) / a for a, b in zip(prev, h)]
    assert gains[-1] < long_ref.tol
    assert all(g >= long_ref.tol for g in gains[:-1])
    assert pt_long.outer_iters == len(h)


def test_final_ee_is_reported_ee(long_ref, pt_long):
    r = pt_long
    assert r.ee_bits_per_joule == reporting_ee(r.trajectory, r.p_s, r.p_u, long_ref)
    assert r.ee_bits_per_joule == pytest.approx(
        spreadsheet_ee(long_ref, r.trajectory, r.p_s, r.p_u), rel=1e-9)


def test_solution_is_feasible(long_ref, pt_long):
    s, r = long_ref, pt_long
    n = s.n_slots
    np.testing.assert_array_equal(r.trajectory[0], s.start)
    np.testing.assert_array_equal(r.trajectory[-1], s.end)
    steps = np.linalg.norm(np.diff(r.trajectory, axis=0), axis=1)
    assert steps.max() <= s.omega * (1 + 1e-9)
    assert r.p_s.min() >= 0 and r.p_s.max() <= s.pmax_s * (1 + 1e-12)
    assert r.p_u.min() >= 0 and r.p_u.max() <= s.pmax_u * (1 + 1e-12)
    assert r.p_s.sum() <= n * s.pbar_s * (1 + 1e-9)
    assert r.p_u.sum() <= n * s.pbar_u * (1 + 1e-9)


def test_blocks_are_nearly_optimal_at_the_end(long_ref, pt_long):
    s, r = long_ref, pt_long
    sc = source_coeffs(r.trajectory, r.p_u, s)
    best = optimize_source_power(sc, s.pbar_s, s.pmax_s).p
    assert source_objective(best, sc.a, sc.b) <= source_objective(r.p_s, sc.a, sc.b) * (1 + 1e-3)
    jc = jam_coeffs(r.trajectory, r.p_s, s)
    jam = optimize_jamming_power(jc, r.p_u, s.pbar_u, s.pmax_u).p
    assert true_objective(jam, jc) <= true_objective(r.p_u, jc) + 1e-3 * abs(true_objective(r.p_u, jc))
    traj = optimize_trajectory(s, r.p_s, r.p_u, r.trajectory)
    assert traj.ee <= r.ee_bits_per_joule * (1 + 1e-3)


def test_deterministic(long_ref, pt_long):
    again = solve_pt(long_ref)
    assert again.ee_bits_per_joule == pt_long.ee_bits_per_joule
    np.testing.assert_array_equal(again.trajectory, pt_long.trajectory)
    np.testing.assert_array_equal(again.p_s, pt_long.p_s)
    np.testing.assert_array_equal(again.p_u, pt_long.p_u)


def test_huge_tolerance_gives_one_round(long_ref):
    r = solve_pt(long_ref, tol=1e9)
    assert r.outer_iters == 1 and r.status == "converged"


def test_round_cap(long_ref):
    r = solve_pt(long_ref, max_outer=1, tol=1e-12)
    assert r.outer_iters == 1 and r.status == "iteration-cap"


def test_block_log_order(long_ref):
    r = solve_pt(long_ref, max_outer=2)
    assert [b for _, b, _, _ in r.block_log[:3]] == ["source", "jamming", "trajectory"]
    ees = [e for *_, e in r.block_log]
    assert all(b >= a for a, b in zip(ees, ees[1:]))


def test_forced_straight_mission(ref):
    r = solve_pt(ref)
    assert np.abs(r.trajectory - straight_line(ref)).max() <= 1e-6


@pytest.mark.parametrize("which, value", [("s", -1e-3), ("s", 1.0), ("u", 1.0)])
def test_bad_initial_powers(long_ref, which, value):
    q, ps, pu = initial_point(long_ref)
    if which == "s":
        ps = ps.copy(); ps[0] = value
    else:
        pu = pu.copy(); pu[:] = value
    with pytest.raises(ValueError):
        run_bcd(long_ref, ("source",), q, ps, pu)


def test_unknown_block(long_ref):
    q, ps, pu = initial_point(long_ref)
    with pytest.raises(ValueError):
        run_bcd(long_ref, ("altitude",), q, ps, pu)


def test_wrong_power_length(long_ref):
    q, ps, pu = initial_point(long_ref)
    with pytest.raises(ValueError):
        run_bcd(long_ref, ("source",), q, ps[:-1], pu)


def test_custom_start_is_respected(long_ref):
    q, ps, pu = initial_point(long_ref)
    r = run_bcd(long_ref, ("source",), q, ps, np.zeros_like(pu), max_outer=3)
    assert np.all(r.p_u == 0)
    np.testing.assert_array_equal(r.trajectory, q)
