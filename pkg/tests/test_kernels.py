import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fduav import kernels
from fduav import _kernels_py
from fduav.bcd import initial_point
from fduav.trajectory import expansion_at, inner_concave_solve, optimize_trajectory, traj_consts

from oracles import min_slack

needs_ext = pytest.mark.skipif("cython" not in kernels.available_backends(),
                               reason="compiled kernels not built")


def test_python_backend_always_available():
    assert "python" in kernels.available_backends()
    assert _kernels_py.BACKEND == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.use_backend("fortran")


def test_use_backend_returns_previous():
    prev = kernels.use_backend("python")
    try:
        assert kernels.backend() == "python"
    finally:
        kernels.use_backend(prev)


@given(st.floats(-20, 20), st.floats(-20, 20), st.floats(0.05, 1.0),
       st.floats(-20, 20), st.floats(-20, 20))
def test_speed_slack_is_the_smallest_feasible_root(dx, dy, s_k, px, py):
    c = 1.0 / (4.03 * 0.5) ** 2
    delta, psi = np.array([[dx, dy]]), np.array([[px, py]])
    ref = min_slack(delta, np.array([s_k]), psi, c)
    for name in kernels.available_backends():
        prev = kernels.use_backend(name)
        try:
            s = kernels.speed_slack(delta, np.array([s_k]), psi, c)
        finally:
            kernels.use_backend(prev)
        np.testing.assert_allclose(s, ref, rtol=1e-9)


def _problem(long_ref, seed):
    rng = np.random.default_rng(seed)
    q, ps, pu = initial_point(long_ref)
    q = q.copy()
    q[1:-1] += rng.uniform(-5, 5, (long_ref.n_slots - 1, 2))
    return q, ps, pu


@needs_ext
@pytest.mark.parametrize("seed", range(3))
def test_inner_solve_agrees_across_backends(long_ref, seed):
    q, ps, pu = _problem(long_ref, seed)
    k = traj_consts(long_ref, ps, pu)
    exp = expansion_at(q, k)
    out = {}
    for name in ("python", "cython"):
        prev = kernels.use_backend(name)
        try:
            out[name] = inner_concave_solve(2e-3, exp, k).q
        finally:
            kernels.use_backend(prev)
    np.testing.assert_allclose(out["python"], out["cython"], atol=1e-6)


@needs_ext
def test_trajectory_block_agrees_across_backends(long_ref):
    q, ps, pu = initial_point(long_ref)
    out = {}
    for name in ("python", "cython"):
        prev = kernels.use_backend(name)
        try:
            out[name] = optimize_trajectory(long_ref, ps, pu, q)
        finally:
            kernels.use_backend(prev)
    assert out["python"].ee == pytest.approx(out["cython"].ee, rel=1e-9)
    np.testing.assert_allclose(out["python"].q, out["cython"].q, atol=1e-6)


def test_results_are_bit_identical_on_repeat(long_ref, backend):
    q, ps, pu = initial_point(long_ref)
    a = optimize_trajectory(long_ref, ps, pu, q)
    b = optimize_trajectory(long_ref, ps, pu, q)
    assert a.ee == b.ee
    np.testing.assert_array_equal(a.q, b.q)


def test_fallback_when_extension_missing():
    code = (
        "import sys\n"
        "class Block:\n"
        "    def find_spec(self, name, path=None, target=None):\n"
        "        if name == 'fduav._kernels':\n"
        "            raise ImportError('blocked')\n"
        "sys.meta_path.insert(0, Block())\n"
        "from fduav import kernels\n"
        "print(kernels.backend(), kernels.available_backends())\n"
        "try:\n"
        "    kernels.use_backend('cython')\n"
        "except RuntimeError:\n"
        "    print('refused')\n"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert out.stdout.split("\n")[:2] == ["python ['python']", "refused"]
