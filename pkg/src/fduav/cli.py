"""Command-line front end.

Single run::

    fduav --config scenarios/s4.cfg --scheme pt --out-dir out

Sweep over flight period and loop-interference level::

    fduav --config scenarios/s4.cfg --scheme pt,njt,npt,pbet \\
          --sweep-t 40,80,120,160 --sweep-lil -80,-70 --jobs 4

Exit status: 0 on success, 1 on a usage or configuration error, 2 when a
solve stopped at the iteration cap (its outputs are still written).
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence

from . import kernels
from .baselines import SchemeId, solve_scheme
from .report import (ReportError, SweepRow, trace_rows, write_summary, write_sweep,
                     write_trace, write_trends)
from .scenario import Scenario, ScenarioError, read_scenario, watts_to_dbm

log = logging.getLogger("fduav")

EXIT_OK, EXIT_CONFIG, EXIT_CAP = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _float_list(text: str) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _scheme_list(text: str) -> List[SchemeId]:
    try:
        out = [SchemeId.parse(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    if not out:
        raise argparse.ArgumentTypeError("empty scheme list")
    return list(dict.fromkeys(out))


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fduav",
                description="Energy-efficient secure UAV relaying: joint power and trajectory design.")
    p.add_argument("--config", required=True, type=Path, help="scenario file")
    p.add_argument("--scheme", type=_scheme_list, default=[SchemeId.PT],
                   help="comma-separated subset of pt,njt,npt,pbet (default pt)")
    p.add_argument("--out-dir", type=Path, default=Path("."), help="output directory")
    p.add_argument("--max-outer", type=int, default=100, help="outer BCD round limit")
    p.add_argument("--tol", type=float, default=None,
                   help="relative EE gain stopping threshold (default from config)")
    p.add_argument("--sweep-t", type=_float_list, default=None, metavar="LIST",
                   help="flight periods in s; the slot length is kept")
    p.add_argument("--sweep-lil", type=_float_list, default=None, metavar="LIST",
                   help="loop-interference levels in dBm")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep cells")
    p.add_argument("--backend", choices=("auto", "cython", "python"), default="auto",
                   help="trajectory kernel implementation")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _tag(x: float) -> str:
    return ("%g" % x).replace("-", "m").replace(".", "p")


def _run_cell(s: Scenario, scheme: SchemeId, max_outer: int, tol: Optional[float],
              out_dir: Path, stem: str, backend: str) -> SweepRow:
    if backend != "auto":
        kernels.use_backend(backend)
    res = solve_scheme(s, scheme, max_outer=max_outer, tol=tol)
    write_trace(trace_rows(res), out_dir / f"{stem}_trace.csv")
    write_summary(res, s, out_dir / f"{stem}_summary.json")
    log.info("%s: EE %.6g bits/J, %s after %d rounds", stem, res.ee_bits_per_joule,
             res.status, res.outer_iters)
    return SweepRow(scheme.value, s.period, watts_to_dbm(s.sigma_rsi2),
                    res.ee_bits_per_joule, res.status, res.outer_iters)


_NUM_LIST = re.compile(r"^-[0-9.]")
_LIST_OPTS = ("--sweep-t", "--sweep-lil", "--tol")


def _attach_negative_values(argv: Sequence[str]) -> List[str]:
    """``--sweep-lil -80,-70`` -> ``--sweep-lil=-80,-70`` so argparse keeps the value."""
    out: List[str] = []
    it = iter(argv)
    for tok in it:
        if tok in _LIST_OPTS:
            nxt = next(it, None)
            if nxt is not None and _NUM_LIST.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_attach_negative_values(argv))
    except UsageError as exc:
        print(f"fduav: usage error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.max_outer < 1 or args.jobs < 1:
        print("fduav: usage error: --max-outer and --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    if args.tol is not None and not args.tol > 0:
        print("fduav: usage error: --tol must be positive", file=sys.stderr)
        return EXIT_CONFIG
    if args.backend == "cython" and "cython" not in kernels.available_backends():
        print("fduav: compiled kernels are not built", file=sys.stderr)
        return EXIT_CONFIG

    try:
        base = read_scenario(args.config)
    except ScenarioError as exc:
        print(f"fduav: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    sweep = args.sweep_t is not None or args.sweep_lil is not None
    cells = []
    try:
        for t in (args.sweep_t or [base.period]):
            for lil in (args.sweep_lil or [None]):
                s = base.with_period(t) if t != base.period else base
                if lil is not None:
                    s = s.with_lil_dbm(lil)
                for scheme in args.scheme:
                    if sweep:
                        stem = f"{scheme.value}_T{_tag(t)}"
                        stem += f"_lil{_tag(lil)}" if lil is not None else ""
                    else:
                        stem = f"{args.config.stem}_{scheme.value}"
                    cells.append((s, scheme, stem))
    except ScenarioError as exc:
        print(f"fduav: infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    common = (args.max_outer, args.tol, args.out_dir)
    try:
        if args.jobs > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                futs = [pool.submit(_run_cell, s, sc, *common, stem, args.backend)
                        for s, sc, stem in cells]
                rows = [f.result() for f in futs]
        else:
            prev = kernels.backend()
            try:
                rows = [_run_cell(s, sc, *common, stem, args.backend)
                        for s, sc, stem in cells]
            finally:
                kernels.use_backend(prev)
        if sweep:
            write_sweep(rows, args.out_dir / "sweep.csv")
            write_trends(rows, args.out_dir / "sweep_trends.csv")
    except ReportError as exc:
        print(f"fduav: output error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ScenarioError as exc:
        print(f"fduav: infeasible scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    for r in rows:
        print(f"{r.scheme:5s} T={r.t_s:g}s LIL={r.lil_dbm:g}dBm  "
              f"EE={r.ee:.6g} bits/J  {r.status} ({r.outer_iters} rounds)")
    return EXIT_CAP if any(r.status == "iteration-cap" for r in rows) else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
