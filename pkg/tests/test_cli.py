import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from fduav import kernels
from fduav.cli import _attach_negative_values, run
from fduav.report import SWEEP_HEADER, TRACE_HEADER

CFG = Path(__file__).resolve().parents[1] / "scenarios" / "s4.cfg"


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture(scope="module")
def single(tmp_path_factory):
    out = tmp_path_factory.mktemp("single")
    code = run(["--config", str(CFG), "--scheme", "pt,pbet", "--out-dir", str(out)])
    return code, out


def test_single_run_exit_code(single):
    assert single[0] == 0


def test_trace_shape(single):
    rows = _read(single[1] / "s4_pt_trace.csv")
    assert tuple(rows[0]) == TRACE_HEADER
    assert len(rows) == 82
    assert rows[1][0] == "0" and all(c == "" for c in rows[1][3:])
    assert [r[0] for r in rows[2:]] == [str(i) for i in range(1, 81)]


@pytest.mark.parametrize("scheme", ["pt", "pbet"])
def test_trace_matches_summary(single, scheme):
    rows = _read(single[1] / f"s4_{scheme}_trace.csv")[2:]
    summ = json.loads((single[1] / f"s4_{scheme}_summary.json").read_text())
    sc = summ["scenario"]
    r_sec = np.array([float(r[8]) for r in rows])
    e_p = np.array([float(r[9]) for r in rows])
    assert np.all(r_sec >= 0)
    ee = sc["bandwidth"] * sc["slot_len"] * r_sec.sum() / e_p.sum()
    assert ee == pytest.approx(summ["ee_bits_per_joule"], rel=1e-6)
    assert summ["ee_bps_per_joule"] == pytest.approx(
        summ["ee_bits_per_joule"] / sc["slot_len"], rel=1e-12)
    assert e_p.sum() == pytest.approx(summ["totals"]["propulsion_energy_j"], rel=1e-6)
    assert summ["n_slots"] == 80 and summ["scheme"] == scheme
    # speed column agrees with waypoint spacing
    xy = np.array([[float(r[1]), float(r[2])] for r in _read(single[1] / f"s4_{scheme}_trace.csv")[1:]])
    v = np.linalg.norm(np.diff(xy, axis=0), axis=1) / sc["slot_len"]
    np.testing.assert_allclose(v, [float(r[3]) for r in rows], rtol=1e-6, atol=1e-6)


def test_summary_keys(single):
    summ = json.loads((single[1] / "s4_pt_summary.json").read_text())
    assert list(summ) == ["scheme", "status", "outer_iters", "ee_bits_per_joule",
                          "ee_bps_per_joule", "ee_initial_bits_per_joule", "totals",
                          "history", "n_slots", "scenario"]
    assert summ["status"] in ("converged", "fallback-used")


def test_iteration_cap_exit_code(tmp_path):
    code = run(["--config", str(CFG), "--max-outer", "1", "--tol", "1e-12",
                "--out-dir", str(tmp_path)])
    assert code == 2
    assert (tmp_path / "s4_pt_trace.csv").exists()
    assert json.loads((tmp_path / "s4_pt_summary.json").read_text())["status"] == "iteration-cap"


def test_unknown_flag(capsys):
    assert run(["--config", str(CFG), "--frobnicate"]) == 1
    assert "usage error" in capsys.readouterr().err


def test_bad_scheme(capsys):
    assert run(["--config", str(CFG), "--scheme", "greedy"]) == 1
    assert "unknown scheme" in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert run(["--config", str(tmp_path / "nope.cfg")]) == 1
    assert "config error" in capsys.readouterr().err


def test_infeasible_config(tmp_path, capsys):
    cfg = tmp_path / "short.cfg"
    cfg.write_text(CFG.read_text().replace("t = 40 s", "t = 10 s"))
    assert run(["--config", str(cfg), "--out-dir", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "mission infeasible" in err
    assert not list(tmp_path.glob("*.csv"))


def test_infeasible_sweep_cell(tmp_path, capsys):
    assert run(["--config", str(CFG), "--sweep-t", "20", "--out-dir", str(tmp_path)]) == 1
    assert "infeasible scenario" in capsys.readouterr().err


@pytest.mark.parametrize("args", [["--max-outer", "0"], ["--jobs", "0"], ["--tol", "-1"]])
def test_nonpositive_numbers(args, capsys):
    assert run(["--config", str(CFG)] + args) == 1
    assert "usage error" in capsys.readouterr().err


def test_unwritable_out_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert run(["--config", str(CFG), "--out-dir", str(blocker / "sub")]) == 1
    assert "output error" in capsys.readouterr().err


def test_negative_list_values_are_attached():
    assert _attach_negative_values(["--sweep-lil", "-80,-70", "--sweep-t", "40"]) == [
        "--sweep-lil=-80,-70", "--sweep-t", "40"]


@pytest.fixture(scope="module")
def sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    code = run(["--config", str(CFG), "--scheme", "pt,njt,npt,pbet",
                "--sweep-t", "40,80,120,160", "--sweep-lil", "-80,-70", "--out-dir", str(out)])
    return code, out


def test_sweep_table(sweep):
    code, out = sweep
    assert code == 0
    rows = _read(out / "sweep.csv")
    assert tuple(rows[0]) == SWEEP_HEADER
    assert len(rows) == 33
    cells = {(r[0], float(r[1]), float(r[2])) for r in rows[1:]}
    assert len(cells) == 32
    assert (out / "pt_T160_lilm70_trace.csv").exists()
    trends = _read(out / "sweep_trends.csv")
    assert len(trends) == 9
    pt = [r for r in trends[1:] if r[0] == "pt"]
    assert all(r[3] == "yes" for r in pt)


def test_sweep_rerun_is_byte_identical(sweep, tmp_path):
    out = sweep[1]
    run(["--config", str(CFG), "--scheme", "pt,njt,npt,pbet",
         "--sweep-t", "40,80,120,160", "--sweep-lil", "-80,-70", "--out-dir", str(tmp_path)])
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(p.name for p in tmp_path.iterdir())
    for name in names:
        assert (out / name).read_bytes() == (tmp_path / name).read_bytes(), name


def test_parallel_jobs_match_serial(sweep, tmp_path):
    code = run(["--config", str(CFG), "--scheme", "pt,njt", "--sweep-t", "40,80",
                "--sweep-lil", "-80", "--jobs", "2", "--out-dir", str(tmp_path)])
    assert code == 0
    for p in tmp_path.glob("*_trace.csv"):
        assert p.read_bytes() == (sweep[1] / p.name).read_bytes()


@pytest.mark.skipif("cython" not in kernels.available_backends(), reason="no compiled kernels")
def test_backends_agree_in_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d, name in ((a, "python"), (b, "cython")):
        assert run(["--config", str(CFG), "--scheme", "npt", "--sweep-t", "80",
                    "--backend", name, "--out-dir", str(d)]) == 0
    ea = float(_read(a / "sweep.csv")[1][3])
    eb = float(_read(b / "sweep.csv")[1][3])
    assert ea == pytest.approx(eb, rel=1e-8)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fduav", "--config", str(CFG),
                           "--scheme", "npt", "--out-dir", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "npt" in proc.stdout and "EE=" in proc.stdout


def test_hover_rows_in_best_effort_trace(sweep):
    rows = _read(sweep[1] / "pbet_T160_lilm80_trace.csv")[2:]
    hover = [r for r in rows if float(r[3]) == 0.0]
    # 1.6 km at 20 m per slot each way leaves 320 - 2*41 hover slots
    assert len(hover) == 320 - 2 * 41
    for r in hover:
        assert float(r[9]) == pytest.approx(0.5 * (79.86 + 88.63), rel=1e-8)
