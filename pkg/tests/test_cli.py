import csv
import json
import math

import numpy as np
import pytest

from mkdvstep.asymptotics import phase_shift_report
from mkdvstep.cli import main
from mkdvstep.pde import read_checkpoint, read_snapshot_csv
from mkdvstep.scattering import DiscreteEigen, SpectralData


def _rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _header(path):
    out = {}
    for ln in path.read_text().splitlines():
        if not ln.startswith("#"):
            break
        k, _, v = ln[1:].strip().partition("=")
        out[k] = v
    return out


SIM = ["simulate", "--preset", "smooth_step", "--width", "1.0", "--cminus", "0.8", "--cplus", "0.4",
       "--dx", "0.2", "--tend", "0.5"]


def test_bad_ordering_exit_code(tmp_path, capsys):
    rc = main(["simulate", "--cminus", "0.4", "--cplus", "0.8", "--out", str(tmp_path)])
    assert rc == 2
    assert "c_minus > c_plus" in capsys.readouterr().err


def test_missing_parameter_names_field(tmp_path, capsys):
    assert main(["simulate", "--cminus", "0.8", "--out", str(tmp_path)]) == 2
    assert "cplus" in capsys.readouterr().err


def test_empty_times_writes_initial_only(tmp_path):
    assert main(SIM + ["--times", "", "--out", str(tmp_path)]) == 0
    snaps = sorted(p.name for p in tmp_path.glob("snapshot_*.csv"))
    assert snaps == ["snapshot_t0.csv"]
    f = read_snapshot_csv(open(tmp_path / "snapshot_t0.csv"))
    assert f.t == 0.0


def test_simulate_outputs_and_headers(tmp_path):
    assert main(SIM + ["--times", "0.25,0.5", "--checkpoint", "--out", str(tmp_path)]) == 0
    snap = tmp_path / "snapshot_t0.5.csv"
    head = _header(snap)
    cfg = json.loads(head["config"])
    assert head["t"] == "0.5" and head["command"] == "simulate" and "mkdvstep" in head
    assert cfg["cminus"] == 0.8 and cfg["times"] == [0.25, 0.5]
    diag = _rows(tmp_path / "diagnostics.csv")
    assert [float(r["t"]) for r in diag] == [0.0, 0.25, 0.5]
    assert set(diag[0]) == {"t", "H0", "H1", "max_abs_q"}
    ck = read_checkpoint(open(tmp_path / "checkpoint.mkdv", "rb"))
    assert np.array_equal(ck.q, read_snapshot_csv(open(snap)).q)


def test_simulate_is_byte_reproducible(tmp_path):
    names = ("snapshot_t0.5.csv", "diagnostics.csv")
    assert main(SIM + ["--out", str(tmp_path)]) == 0
    first = [(tmp_path / n).read_bytes() for n in names]
    assert main(SIM + ["--out", str(tmp_path)]) == 0
    assert [(tmp_path / n).read_bytes() for n in names] == first


def test_config_file_and_flag_precedence(tmp_path):
    conf = tmp_path / "run.json"
    conf.write_text(json.dumps({"preset": "smooth_step", "width": 1.0, "cminus": 0.8, "cplus": 0.4,
                                "dx": 0.2, "tend": 0.5, "times": [0.1]}))
    assert main(["simulate", "--config", str(conf), "--times", "0.2", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "snapshot_t0.2.csv").exists()
    assert not (tmp_path / "snapshot_t0.1.csv").exists()
    conf.write_text(json.dumps({"cminus": 0.8, "colour": "red"}))
    assert main(["simulate", "--config", str(conf), "--out", str(tmp_path)]) == 2


def test_blow_up_exit_code(tmp_path):
    rc = main(SIM + ["--scheme", "rk4", "--dt", "0.05", "--out", str(tmp_path)])
    assert rc == 3


def test_asymptote_cone_window_is_dsw_only(tmp_path):
    t = 20.0
    args = ["asymptote", "--cminus", "0.8", "--cplus", "0.4", "--t", str(t),
            "--xmin", str(-1.8 * t), "--xmax", str(2.8 * t), "--nx", "60", "--out", str(tmp_path)]
    assert main(args) == 0
    rows = _rows(tmp_path / "asymptote.csv")
    assert len(rows) == 60 and {r["region"] for r in rows} == {"dsw"}
    assert list(rows[0]) == ["x", "t", "region", "q_leading", "q_subleading", "q_total"]


def test_asymptote_subleading_column(tmp_path):
    t = 20.0
    base = ["asymptote", "--cminus", "0.8", "--cplus", "0.4", "--t", str(t),
            "--xmin", str(-7.5 * t), "--xmax", str(-7.0 * t), "--nx", "4"]
    assert main(base + ["--out", str(tmp_path / "a")]) == 0
    assert main(base + ["--subleading", "--out", str(tmp_path / "b")]) == 0
    plain = _rows(tmp_path / "a" / "asymptote.csv")
    sub = _rows(tmp_path / "b" / "asymptote.csv")
    assert all(math.isnan(float(r["q_subleading"])) for r in plain)
    for r in sub:
        assert r["region"] == "utmost_left"
        s = float(r["q_subleading"])
        assert math.isfinite(s) and s != 0.0
        assert float(r["q_total"]) == pytest.approx(float(r["q_leading"]) + s, abs=1e-15)


def test_asymptote_phase_report(tmp_path):
    data = SpectralData(0.8, 0.4, eigens=(DiscreteEigen(1.2j, -1.0), DiscreteEigen(0.9j, 2.0)))
    path = tmp_path / "data.json"
    path.write_text(data.to_json())
    args = ["asymptote", "--data", str(path), "--t", "5", "--nx", "5", "--phase-report", "--out", str(tmp_path)]
    assert main(args) == 0
    rep = json.loads((tmp_path / "phase_report.json").read_text())["eigenvalues"]
    ref = phase_shift_report(data)
    assert [r["x_shift"] for r in rep] == pytest.approx([r.x_shift for r in ref], abs=1e-14)
    assert [r["speed"] for r in rep] == pytest.approx([r.speed for r in ref], abs=1e-14)


def test_asymptote_threads_match(tmp_path, monkeypatch):
    args = ["asymptote", "--cminus", "0.8", "--cplus", "0.4", "--t", "10", "--nx", "12",
            "--xmin", "-15", "--xmax", "25"]
    monkeypatch.setenv("MKDV_THREADS", "1")
    assert main(args + ["--out", str(tmp_path / "one")]) == 0
    monkeypatch.setenv("MKDV_THREADS", "2")
    assert main(args + ["--out", str(tmp_path / "two")]) == 0
    # the headers differ only in the echoed output directory
    one, two = (_rows(tmp_path / d / "asymptote.csv") for d in ("one", "two"))
    assert one == two


def test_compare_self_check_and_threshold(tmp_path):
    sim = ["simulate", "--preset", "exact_step", "--cminus", "0.8", "--cplus", "0.4", "--dx", "0.1",
           "--tend", "2", "--out", str(tmp_path)]
    assert main(sim) == 0
    snap = str(tmp_path / "snapshot_t2.csv")
    assert main(["compare", "--snapshot", snap, "--self-check", "--sup-max", "0", "--out", str(tmp_path)]) == 0
    res = json.loads((tmp_path / "compare.json").read_text())
    assert res["sup"] == 0.0 and res["l2"] == 0.0 and res["passed"]
    assert set(res["regions"]) == {"dsw"}
    assert main(["compare", "--snapshot", snap, "--sup-max", "1e-9", "--out", str(tmp_path)]) == 4
    assert main(["compare", "--snapshot", snap, "--window=-1e4,0", "--out", str(tmp_path)]) == 2


def test_whitham_table(tmp_path):
    assert main(["whitham", "--cminus", "0.8", "--cplus", "0.4", "--nz", "41", "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "whitham.csv")
    assert len(rows) == 41
    b2 = [float(r["beta2"]) for r in rows]
    assert all(b >= a - 1e-12 for a, b in zip(b2, b2[1:]))
    assert b2[0] == pytest.approx(0.4) and b2[-1] == pytest.approx(0.8)


def test_scattering_round_trip(tmp_path):
    assert main(["scattering", "--cminus", "0.8", "--cplus", "0.4", "--nk", "11", "--out", str(tmp_path)]) == 0
    data = SpectralData.from_json((tmp_path / "scattering.json").read_text())
    assert (data.c_minus, data.c_plus) == (0.8, 0.4)
    rows = _rows(tmp_path / "reflection.csv")
    for r in rows:
        a, rr = float(r["abs_a"]), complex(float(r["re_r"]), float(r["im_r"]))
        assert a * a * (1 + abs(rr) ** 2) == pytest.approx(1.0, abs=1e-10)


def test_profiles_kinds(tmp_path):
    assert main(["profiles", "--kind", "per_theta", "--beta", "0.8,0.6", "--nx", "11", "--out", str(tmp_path)]) == 0
    assert len(_rows(tmp_path / "profile_per_theta.csv")) == 11
    assert main(["profiles", "--kind", "per_theta", "--beta", "0.4,0.6,0.8", "--out", str(tmp_path)]) == 2
    assert main(["profiles", "--kind", "breather", "--c", "1", "--kappa", "1+1.5i", "--nu", "0.7-0.4i",
                 "--nx", "5", "--out", str(tmp_path)]) == 0


def test_simulate_order_flag(tmp_path):
    assert main(SIM + ["--order", "6", "--out", str(tmp_path / "six")]) == 0
    assert main(SIM + ["--out", str(tmp_path / "four")]) == 0
    six = read_snapshot_csv(open(tmp_path / "six" / "snapshot_t0.5.csv")).q
    four = read_snapshot_csv(open(tmp_path / "four" / "snapshot_t0.5.csv")).q
    assert 0 < np.max(np.abs(six - four)) < 1e-2
    assert main(SIM + ["--order", "5", "--out", str(tmp_path)]) == 2
