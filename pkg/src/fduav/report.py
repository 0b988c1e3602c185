"""Trace, summary and sweep writers.

Everything is formatted deterministically: floats at 9 significant digits
in CSV, shortest round-trip ``repr`` in JSON, keys in a fixed order.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from .bcd import SolveResult
from .energy import energy_efficiency
from .scenario import Scenario, watts_to_dbm

__all__ = [
    "TRACE_HEADER",
    "SWEEP_HEADER",
    "TraceRow",
    "SweepRow",
    "trace_rows",
    "write_trace",
    "summary_dict",
    "write_summary",
    "write_sweep",
    "trend_rows",
    "write_trends",
    "ReportError",
]

TRACE_HEADER = ("n", "x_m", "y_m", "v_mps", "p_s_dbm", "p_u_dbm",
                "r_u_bpshz", "r_e_bpshz", "r_sec_bpshz", "e_p_j")
SWEEP_HEADER = ("scheme", "t_s", "lil_dbm", "ee_bits_per_joule", "status", "outer_iters")


class ReportError(OSError):
    """An output file could not be written."""


@dataclass(frozen=True)
class TraceRow:
    """One waypoint. Row 0 carries only the start position."""

    n: int
    x: float
    y: float
    v: Optional[float] = None
    p_s_dbm: Optional[float] = None
    p_u_dbm: Optional[float] = None
    r_u: Optional[float] = None
    r_e: Optional[float] = None
    r_sec: Optional[float] = None
    e_p: Optional[float] = None

    def cells(self) -> List[str]:
        vals = (self.x, self.y, self.v, self.p_s_dbm, self.p_u_dbm,
                self.r_u, self.r_e, self.r_sec, self.e_p)
        return [str(self.n)] + ["" if v is None else fmt(v) for v in vals]


@dataclass(frozen=True)
class SweepRow:
    scheme: str
    t_s: float
    lil_dbm: float
    ee: float
    status: str
    outer_iters: int

    def cells(self) -> List[str]:
        return [self.scheme, fmt(self.t_s), fmt(self.lil_dbm), fmt(self.ee),
                self.status, str(self.outer_iters)]


def fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        return "0"
    return "%.9g" % x


def trace_rows(res: SolveResult) -> List[TraceRow]:
    """Waypoint 0 followed by one row per slot; ``r_sec`` is clamped at zero."""
    q, m = res.trajectory, res.metrics
    rows = [TraceRow(0, float(q[0, 0]), float(q[0, 1]))]
    r_sec = m.r_sec_clamped
    for i in range(len(m)):
        rows.append(TraceRow(
            i + 1, float(q[i + 1, 0]), float(q[i + 1, 1]), float(m.v[i]),
            watts_to_dbm(res.p_s[i]), watts_to_dbm(res.p_u[i]),
            float(m.r_u[i]), float(m.r_e[i]), float(r_sec[i]), float(m.e_p[i])))
    return rows


def _open(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _write_csv(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    path = Path(path)
    with _open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_trace(rows: Sequence[TraceRow], path) -> Path:
    return _write_csv(path, TRACE_HEADER, (r.cells() for r in rows))


def _clean(x):
    """JSON-safe float: non-finite values become strings."""
    x = float(x)
    return x if math.isfinite(x) else str(x)


def summary_dict(res: SolveResult, s: Scenario) -> dict:
    m = res.metrics
    total_energy = float(m.e_p.sum())
    r_sec = m.r_sec_clamped
    bits = s.bandwidth * s.slot_len * float(r_sec.sum())
    return {
        "scheme": res.scheme,
        "status": res.status,
        "outer_iters": res.outer_iters,
        "ee_bits_per_joule": res.ee_bits_per_joule,
        "ee_bps_per_joule": energy_efficiency(m.r_sec, m.e_p, s, with_slot_len=False),
        "ee_initial_bits_per_joule": res.ee_initial,
        "totals": {
            "secure_bits": bits,
            "propulsion_energy_j": total_energy,
            "sum_r_sec_bpshz": float(r_sec.sum()),
            "source_energy_j": float(res.p_s.sum()) * s.slot_len,
            "jamming_energy_j": float(res.p_u.sum()) * s.slot_len,
            "mean_speed_mps": float(m.v.mean()),
        },
        "history": [float(h) for h in res.history],
        "n_slots": s.n_slots,
        "scenario": {k: (_clean(v) if isinstance(v, float) else v)
                     for k, v in s.as_dict().items()},
    }


def write_summary(res: SolveResult, s: Scenario, path) -> Path:
    path = Path(path)
    text = json.dumps(summary_dict(res, s), indent=2, sort_keys=False) + "\n"
    with _open(path) as fh:
        fh.write(text)
    return path


def write_sweep(rows: Sequence[SweepRow], path) -> Path:
    return _write_csv(path, SWEEP_HEADER, (r.cells() for r in rows))


def trend_rows(rows: Sequence[SweepRow]) -> List[List[str]]:
    """Per (scheme, LIL) series: is EE nondecreasing in T? Relative slack 1e-9."""
    series: dict = {}
    for r in rows:
        series.setdefault((r.scheme, r.lil_dbm), []).append((r.t_s, r.ee))
    out = []
    for (scheme, lil), pts in series.items():
        pts.sort()
        ok = all(b >= a - 1e-9 * abs(a) for (_, a), (_, b) in zip(pts, pts[1:]))
        out.append([scheme, fmt(lil), ";".join(fmt(t) for t, _ in pts),
                    "yes" if ok else "no"])
    return out


def write_trends(rows: Sequence[SweepRow], path) -> Path:
    return _write_csv(path, ("scheme", "lil_dbm", "t_values", "ee_nondecreasing_in_t"),
                      trend_rows(rows))
