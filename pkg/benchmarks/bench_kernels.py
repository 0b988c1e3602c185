"""Compare the compiled and numpy trajectory kernels.

Times one trajectory block (SCA + Dinkelbach + barrier Newton) and a batch
of speed-slack roots on each available backend, and reports how far the
backends' results differ.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--slots 80]
"""

import argparse
import time

import numpy as np

from fduav import kernels
from fduav.bcd import initial_point
from fduav.scenario import default_scenario
from fduav.trajectory import optimize_trajectory


def _best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--slots", type=int, default=80)
    args = ap.parse_args(argv)

    s = default_scenario().with_period(2.0 * args.slots, slot_len=2.0)
    q, p_s, p_u = initial_point(s)
    rng = np.random.default_rng(7)
    delta = rng.uniform(-60, 60, (100_000, 2))
    psi = rng.uniform(-60, 60, (100_000, 2))
    s_k = rng.uniform(0.05, 1.0, 100_000)
    c = 1.0 / (s.energy.v0_rotor * s.slot_len) ** 2

    results = {}
    for name in kernels.available_backends():
        prev = kernels.use_backend(name)
        try:
            t_traj, sol = _best_of(lambda: optimize_trajectory(s, p_s, p_u, q), args.repeat)
            t_slack, slack = _best_of(lambda: kernels.speed_slack(delta, s_k, psi, c), args.repeat)
        finally:
            kernels.use_backend(prev)
        results[name] = (t_traj, t_slack, sol, slack)
        print(f"{name:7s} trajectory block N={s.n_slots}: {t_traj * 1e3:8.1f} ms   "
              f"speed slack x1e5: {t_slack * 1e3:8.1f} ms   EE {sol.ee:.9g}")

    if len(results) == 2:
        tp, sp, solp, slp = results["python"]
        tc, sc, solc, slc = results["cython"]
        print(f"speedup: trajectory {tp / tc:.1f}x, speed slack {sp / sc:.1f}x")
        print(f"agreement: |dq|max {np.abs(solp.q - solc.q).max():.2e} m, "
              f"EE rel {abs(solp.ee - solc.ee) / solp.ee:.2e}, "
              f"slack rel {np.max(np.abs(slp - slc) / slp):.2e}")
    else:
        print("compiled kernels not built; only the numpy backend was timed")


if __name__ == "__main__":
    main()
