import io
import math

import numpy as np
import pytest

from mkdvstep.errors import BlowUpError, ConfigError, DomainError
from mkdvstep.pde import (
    Field,
    GridSpec,
    InitPreset,
    Sponge,
    conserved,
    default_dt,
    init_field,
    read_checkpoint,
    read_snapshot_csv,
    run,
    sponge_intrusion,
    step,
    write_checkpoint,
    write_snapshot_csv,
)
from mkdvstep.profiles import q_soliton

SOLITON = InitPreset("soliton", 0.4, 0.4, kappa=0.8, nu=-1.0)
BREATHER = InitPreset("breather", 1.0, 1.0, kappa=1 + 1.5j, nu=0.7 - 0.4j)


def _peak(f: Field, level: float) -> float:
    """Sub-grid location of max |q - level| by a parabola through three nodes."""
    a = np.abs(f.q - level)
    j = int(np.argmax(a))
    y0, y1, y2 = a[j - 1], a[j], a[j + 1]
    return f.x[j] + f.dx * 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2)


@pytest.mark.parametrize("scheme", ["imex", "rk4"])
def test_constant_is_fixed_point(scheme):
    f = Field(-5.0, 0.1, np.full(101, 0.6), 0.0, 0.6, 0.6)
    g = step(f, default_dt(f, scheme), scheme)
    assert np.max(np.abs(g.q - 0.6)) < 1e-14


def test_soliton_speed_and_invariants():
    f = init_field(SOLITON, GridSpec(-40.0, 60.0, 0.05), t_end=5.0)
    out = run(f, 5.0, times=np.linspace(0, 5, 11))
    ts = np.array([g.t for g in out])
    xs = np.array([_peak(g, 0.4) for g in out])
    v = np.polyfit(ts, xs, 1)[0]
    assert v == pytest.approx(2 * 0.4**2 + 4 * 0.8**2, rel=1e-2)
    h1 = [conserved(g)[1] for g in out]
    assert max(abs(h - h1[0]) for h in h1) / abs(h1[0]) < 1e-4
    assert max(sponge_intrusion(g) for g in out) < 1e-6


def test_linear_dispersion():
    c, k0, eps = 0.5, 1.0, 1e-6
    x = np.arange(-200.0, 200.0, 0.05)
    pert = eps * np.exp(-(x / 30.0) ** 2) * np.cos(k0 * x)
    f = Field(float(x[0]), 0.05, c + pert, 0.0, c, c)
    T = 2.0
    g = run(f, T)[-1]
    F0 = np.fft.rfft(f.q - c)
    F1 = np.fft.rfft(g.q - c)
    k = 2 * np.pi * np.fft.rfftfreq(x.size, 0.05)
    band = np.abs(k - k0) < 0.05
    # q ~ exp(i(kx - omega t)) so the FFT phase drops by omega T
    omega = -np.angle(F1[band] / F0[band]) / T
    expected = -k[band] ** 3 + 6 * c * c * k[band]
    assert np.max(np.abs(omega / expected - 1)) < 0.02


def test_step_initial_H0_and_split_independence():
    p = InitPreset("exact_step", 0.8, 0.4)
    f = init_field(p, GridSpec(-30.0, 30.0, 0.05))
    assert conserved(f)[0] == pytest.approx(0.0, abs=1e-12)
    g = run(f, 1.0)[-1]
    a, b = conserved(g, split=-5.0), conserved(g, split=7.0)
    assert a == pytest.approx(b, abs=1e-8)


def test_t_end_zero_returns_initial():
    f = init_field(SOLITON, GridSpec(-20.0, 20.0, 0.1))
    (g,) = run(f, 0.0)
    assert g.t == 0.0 and np.array_equal(g.q, f.q)


def test_run_lands_on_requested_times():
    f = init_field(SOLITON, GridSpec(-20.0, 20.0, 0.1))
    out = run(f, 0.3, times=[0.0, 0.1234, 0.3])
    assert [g.t for g in out] == [0.0, 0.1234, 0.3]


def test_run_is_deterministic():
    f = init_field(BREATHER, GridSpec(-20.0, 20.0, 0.1))
    a = run(f, 0.2)[-1].q
    b = run(f, 0.2)[-1].q
    assert np.array_equal(a, b)


def _solve(preset, dx, t_end, dt, lo=-30.0, hi=30.0):
    f = init_field(preset, GridSpec(lo, hi, dx))
    return run(f, t_end, dt=dt)[-1]


def _on(g, x):
    idx = np.rint((x - g.x0) / g.dx).astype(int)
    assert np.allclose(g.x[idx], x)
    return g.q[idx]


def test_refinement_reduces_error_eightfold():
    dt = 2e-3
    xs = np.arange(-5.0, 10.0 + 1e-9, 0.2)
    runs = {dx: _on(_solve(SOLITON, dx, 1.0, dt), xs) for dx in (0.2, 0.1, 0.025)}
    e1 = np.max(np.abs(runs[0.2] - runs[0.025]))
    e2 = np.max(np.abs(runs[0.1] - runs[0.025]))
    assert e1 / e2 >= 8.0


def test_breather_self_convergence_order():
    # one dt for all grids, stable on the finest, so the spatial error dominates
    dt = default_dt(init_field(BREATHER, GridSpec(-20.0, 20.0, 0.025)))
    xs = np.arange(-10.0, 10.0 + 1e-9, 0.1)
    q = [_on(_solve(BREATHER, dx, 0.2, dt, -20.0, 20.0), xs) for dx in (0.1, 0.05, 0.025)]
    order = math.log2(np.max(np.abs(q[0] - q[1])) / np.max(np.abs(q[1] - q[2])))
    assert order >= 3.5


def test_smooth_step_sharpens_to_exact_step():
    x = np.linspace(-5, 5, 201)
    off = np.abs(x) > 0.5
    for w in (0.1, 0.05):
        f = init_field(InitPreset("smooth_step", 0.8, 0.4, width=w), GridSpec(-5.0, 5.0, 0.05))
        exact = np.where(x < 0, 0.8, 0.4)
        assert np.max(np.abs(f.q - exact)[off]) < 0.4 * math.exp(-2 * 0.5 / w) * 1.01


def test_soliton_left_preset_matches_profile():
    p = InitPreset("soliton_left", 0.8, 0.4, kappa=1.2, x_c=0.0, x_shift=-8.0, width=0.5)
    f = init_field(p, GridSpec(-40.0, 40.0, 0.05))
    left = f.x < -10
    ref = q_soliton(f.x[left], 0.0, 0.8, 1.2, -8.0, sign_nu=-1)
    assert np.max(np.abs(f.q[left] - ref)) < 1e-12
    assert f.q[-1] == pytest.approx(0.4, abs=1e-12)


def test_domain_check_reports_width():
    p = InitPreset("exact_step", 0.8, 0.4)
    with pytest.raises(ConfigError, match="total width"):
        init_field(p, GridSpec(-10.0, 10.0, 0.1), t_end=15.0)


def test_preset_validation():
    with pytest.raises(ConfigError):
        InitPreset("exact_step", 0.4, 0.8)
    with pytest.raises(ConfigError):
        InitPreset("breather", 1.0, 1.0, kappa=1 + 1j)
    with pytest.raises(ConfigError):
        InitPreset("wobble", 1.0, 1.0)


def test_blow_up_is_reported():
    f = init_field(SOLITON, GridSpec(-20.0, 20.0, 0.1))
    with pytest.raises(BlowUpError) as err:
        run(f, 1.0, dt=0.05, scheme="rk4")
    assert 0.0 <= err.value.last_stable_t < 1.0


def test_sponge_profile_shape():
    s = Sponge(0.1, 5.0)
    prof = s.profile(200)
    assert prof[0] == pytest.approx(5.0) and prof[-1] == pytest.approx(5.0)
    assert np.all(prof[s.width(200):200 - s.width(200)] == 0.0)


def test_snapshot_csv_round_trip():
    f = Field(-10.0, 0.1, np.sin(np.arange(201) * 0.3), 1.25, 0.7, 0.2)
    buf = io.StringIO()
    write_snapshot_csv(f, buf, {"preset": "test"})
    text = buf.getvalue()
    assert text.startswith("# t=1.25\n")
    g = read_snapshot_csv(io.StringIO(text))
    assert np.array_equal(g.q, f.q) and g.t == f.t and g.dx == pytest.approx(f.dx, rel=1e-12)
    assert (g.c_minus, g.c_plus) == (0.7, 0.2)


def test_checkpoint_round_trip_and_format():
    f = Field(-3.5, 0.02, np.cos(np.arange(50) * 0.1), 2.5, 1.0, np.cos(4.9))
    buf = io.BytesIO()
    write_checkpoint(f, buf)
    raw = buf.getvalue()
    assert raw[:5] == b"MKDV1" and len(raw) == 32 + 8 * 50
    g = read_checkpoint(io.BytesIO(raw))
    assert np.array_equal(g.q, f.q) and (g.x0, g.dx, g.t) == (f.x0, f.dx, f.t)
    with pytest.raises(DomainError):
        read_checkpoint(io.BytesIO(raw[:-8]))
    with pytest.raises(DomainError):
        read_checkpoint(io.BytesIO(b"XXXXX" + raw[5:]))


def test_sixth_order_cuts_breather_error():
    from mkdvstep.profiles import BreatherParams, q_breather

    bp = BreatherParams(1.0, 1 + 1.5j, 0.7 - 0.4j)
    err = {}
    for order in (4, 6):
        f = init_field(BREATHER, GridSpec(-15.0, 10.0, 0.05))
        g = run(f, 0.5, dt=default_dt(f, "rk4", order=order), scheme="rk4", order=order)[-1]
        err[order] = np.max(np.abs(g.q - q_breather(g.x, g.t, bp)))
    assert err[6] < err[4] / 4


def test_bad_order_rejected():
    f = init_field(SOLITON, GridSpec(-20.0, 20.0, 0.1))
    with pytest.raises(ConfigError):
        step(f, 1e-3, order=5)
