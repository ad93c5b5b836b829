"""Command-line front end: ``mkdv <subcommand> [--config FILE] [flags]``.

Every flag has a config-file twin (the flag name with dashes turned into
underscores); explicit flags win over the file.  Each output file starts
with ``#`` lines echoing the package version and the resolved parameters.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 acceptance threshold missed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AccuracyError, BlowUpError, ConfigError, DomainError, MkdvError, SingularityError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_THRESHOLD = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# argument plumbing


def _complex(text) -> complex:
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from exc


def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text).strip()
    return [float(v) for v in text.split(",") if v.strip()] if text else []


_SPECS: dict[str, list[tuple[str, dict]]] = {}


def _opt(cmd: str, name: str, **kw):
    _SPECS.setdefault(cmd, []).append((name, kw))


for _c in ("simulate", "asymptote", "compare", "whitham", "scattering", "profiles"):
    _opt(_c, "config", help="JSON file with parameters; explicit flags win")
    _opt(_c, "out", help="output directory (default: current directory)")

for _c in ("simulate", "asymptote", "compare", "whitham", "scattering"):
    _opt(_c, "cminus", type=float, help="left background c_-")
    _opt(_c, "cplus", type=float, help="right background c_+")

_opt("simulate", "preset", default="exact_step", help="exact_step, smooth_step, soliton_left, soliton_right, soliton, breather")
_opt("simulate", "width", type=float, help="smoothing width (smooth_step and glued presets)")
_opt("simulate", "xc", type=float, default=0.0, help="centre of the step or breather")
_opt("simulate", "kappa", type=_complex, help="spectral parameter, e.g. 1+1.5j")
_opt("simulate", "nu", type=_complex, help="norming constant")
_opt("simulate", "xshift", type=float, default=0.0, help="soliton phase x0")
_opt("simulate", "xleft", type=float, help="left end of the grid (default: from the cone)")
_opt("simulate", "xright", type=float, help="right end of the grid")
_opt("simulate", "dx", type=float, default=0.05, help="grid spacing")
_opt("simulate", "tend", type=float, default=15.0, help="final time")
_opt("simulate", "times", type=_floats, help="comma-separated snapshot times (default: tend; empty: initial only)")
_opt("simulate", "scheme", default="imex", help="imex or rk4")
_opt("simulate", "dt", type=float, help="time step (default: scheme-dependent)")
_opt("simulate", "order", type=int, default=4, help="finite-difference order in x, 4 or 6")
_opt("simulate", "sponge_fraction", type=float, default=0.1, help="sponge width as a domain fraction")
_opt("simulate", "sponge_strength", type=float, default=5.0, help="peak sponge relaxation rate")
_opt("simulate", "checkpoint", action="store_true", help="also write an MKDV1 binary checkpoint of the last state")

for _c in ("asymptote", "compare"):
    _opt(_c, "data", help="spectral data JSON (default: pure step with cminus, cplus)")
_opt("asymptote", "t", type=float, default=15.0, help="time")
_opt("asymptote", "xmin", type=float, help="left end of the x window")
_opt("asymptote", "xmax", type=float, help="right end of the x window")
_opt("asymptote", "nx", type=int, default=401, help="number of x samples")
_opt("asymptote", "subleading", action="store_true", help="add the left-region radiation column")
_opt("asymptote", "phase_report", action="store_true", help="also print per-eigenvalue phase shifts as JSON")

_opt("compare", "snapshot", help="snapshot CSV written by simulate")
_opt("compare", "window", type=_floats, help="x window xmin,xmax (default: oscillation zone)")
_opt("compare", "edge_margin", type=float, default=0.3, help="x/t margin trimmed off each edge of the default window")
_opt("compare", "sup_max", type=float, help="pass threshold for the sup error")
_opt("compare", "l2_max", type=float, help="pass threshold for the L2 error")
_opt("compare", "self_check", action="store_true", help="compare the asymptotic solution with itself")

_opt("whitham", "nz", type=int, default=201, help="number of z = x/t samples")
_opt("whitham", "zmin", type=float, help="lowest z (default: left of the cone)")
_opt("whitham", "zmax", type=float, help="highest z")

_opt("scattering", "preset", default="exact_step", help="exact_step or solitonstep")
_opt("scattering", "kappa0", type=float, help="solitonstep amplitude parameter")
_opt("scattering", "nu", type=float, help="solitonstep norming constant")
_opt("scattering", "kmax", type=float, default=5.0, help="extent of the real-k table")
_opt("scattering", "nk", type=int, default=201, help="rows of the real-k table")

_opt("profiles", "kind", default="soliton", help="soliton, breather, per, per_theta or hel")
_opt("profiles", "c", type=float, default=0.0, help="background of a soliton or breather")
_opt("profiles", "kappa", type=_complex, help="spectral parameter")
_opt("profiles", "nu", type=_complex, help="norming constant (breather) or its sign (soliton)")
_opt("profiles", "x0", type=float, default=0.0, help="phase")
_opt("profiles", "beta", type=_floats, help="beta1,beta2,beta3 (per), c_plus,d,c_minus (hel) or c_tilde,d_tilde (per_theta)")
_opt("profiles", "delta", type=float, default=0.0, help="theta-function phase Delta (per_theta, hel)")
_opt("profiles", "t", type=float, default=0.0, help="time")
_opt("profiles", "xmin", type=float, default=-10.0, help="left end")
_opt("profiles", "xmax", type=float, default=10.0, help="right end")
_opt("profiles", "nx", type=int, default=401, help="samples")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mkdv", description="Focusing MKdV with step-like data.")
    p.add_argument("--version", action="version", version=f"mkdvstep {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd, opts in _SPECS.items():
        sp = sub.add_parser(cmd)
        for name, kw in opts:
            kw = dict(kw)
            kw.setdefault("default", None)
            if kw.get("action") == "store_true":
                kw["default"] = None
            sp.add_argument("--" + name.replace("_", "-"), dest=name, **kw)
    return p


def _resolve(args: argparse.Namespace) -> dict:
    """Merge the config file under explicit flags and apply defaults."""
    cfg = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config file must hold a JSON object")
    known = {name: kw for name, kw in _SPECS[args.command]}
    unknown = sorted(set(cfg) - set(known))
    if unknown:
        raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
    out = {}
    for name, kw in known.items():
        val = getattr(args, name)
        if val is None and name in cfg:
            val = cfg[name]
            conv = kw.get("type")
            if conv is not None and val is not None:
                try:
                    val = conv(val)
                except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                    raise ConfigError(f"config field {name}: {exc}") from exc
        if val is None:
            val = False if kw.get("action") == "store_true" else kw.get("default")
        out[name] = val
    return out


def _jsonable(v):
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+.17g}j"
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    return v


def _header(cfg: dict, command: str) -> dict:
    return {"mkdvstep": __version__, "command": command,
            "config": json.dumps({k: _jsonable(v) for k, v in cfg.items()}, sort_keys=True)}


def _write_header(fh, head: dict):
    for k, v in head.items():
        fh.write(f"# {k}={v}\n")


def _outdir(cfg) -> Path:
    d = Path(cfg["out"] or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _need(cfg, *names):
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise ConfigError("missing required parameters: " + ", ".join(missing))


def _threads() -> int:
    raw = os.environ.get("MKDV_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"MKDV_THREADS must be an integer, got {raw!r}") from exc
    return max(1, min(n, os.cpu_count() or 1))


def _spectral(cfg):
    from .scattering import SpectralData, step_scattering

    if cfg.get("data"):
        try:
            return SpectralData.from_json(Path(cfg["data"]).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read spectral data: {exc}") from exc
    _need(cfg, "cminus", "cplus")
    return step_scattering(cfg["cminus"], cfg["cplus"])


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(cfg: dict) -> int:
    from . import pde

    _need(cfg, "cminus", "cplus")
    preset = pde.InitPreset(
        kind=cfg["preset"], c_minus=cfg["cminus"], c_plus=cfg["cplus"], width=cfg["width"],
        x_c=cfg["xc"], kappa=cfg["kappa"], nu=cfg["nu"], x_shift=cfg["xshift"],
    )
    sponge = pde.Sponge(cfg["sponge_fraction"], cfg["sponge_strength"])
    tend = cfg["tend"]
    if cfg["xleft"] is None or cfg["xright"] is None:
        lo, hi = pde.required_interval(preset, tend)
        pad = sponge.fraction / (1.0 - 2.0 * sponge.fraction) * (hi - lo) + cfg["dx"]
        xl = cfg["xleft"] if cfg["xleft"] is not None else lo - pad
        xr = cfg["xright"] if cfg["xright"] is not None else hi + pad
    else:
        xl, xr = cfg["xleft"], cfg["xright"]
    f = pde.init_field(preset, pde.GridSpec(xl, xr, cfg["dx"]), t_end=tend, sponge=sponge)
    times = [tend] if cfg["times"] is None else list(cfg["times"])
    if times and max(times) > tend:
        raise ConfigError("snapshot times exceed tend")
    out = _outdir(cfg)
    head = _header(cfg, "simulate")
    dt = cfg["dt"] if cfg["dt"] is not None else pde.default_dt(f, cfg["scheme"], order=cfg["order"])
    head["dt"] = repr(dt)
    diag = [(f.t,) + pde.conserved(f) + (float(np.max(np.abs(f.q))),)]

    def save(fl):
        path = out / f"snapshot_t{fl.t:.6g}.csv"
        with open(path, "w") as fh:
            pde.write_snapshot_csv(fl, fh, head)
        if fl.t > 0:
            diag.append((fl.t,) + pde.conserved(fl) + (float(np.max(np.abs(fl.q))),))

    if not times:
        save(f)
        last = f
    else:
        snaps = pde.run(f, max(times), times=times, dt=dt, scheme=cfg["scheme"], sponge=sponge,
                        order=cfg["order"], callback=save, store=False)
        del snaps
        last = None
    with open(out / "diagnostics.csv", "w") as fh:
        _write_header(fh, head)
        fh.write("t,H0,H1,max_abs_q\n")
        for row in diag:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    if cfg["checkpoint"]:
        if last is None:
            last = pde.read_snapshot_csv(open(out / f"snapshot_t{max(times):.6g}.csv"))
        with open(out / "checkpoint.mkdv", "wb") as fh:
            pde.write_checkpoint(last, fh)
    print(f"wrote {len(times) or 1} snapshot(s) and diagnostics.csv to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# asymptote


def _asym_rows(args):
    xs, t, doc, sub = args
    from .asymptotics import classify, q_asymptotic, q_subleading
    from .scattering import SpectralData

    data = SpectralData.from_json(doc)
    rows = []
    for x in xs:
        xi = x / (12.0 * t)
        tag = classify(xi, data)
        lead = q_asymptotic(x, t, data)
        corr = math.nan
        if sub and tag.kind in ("utmost_left", "middle_left"):
            try:
                corr = q_subleading(x, t, data)
            except DomainError:
                corr = math.nan
        total = lead + (0.0 if math.isnan(corr) else corr)
        rows.append((float(x), float(t), tag.kind, float(lead), float(corr), float(total)))
    return rows


def _evaluate(xs, t, data, sub):
    doc = data.to_json()
    n = _threads()
    if n == 1 or len(xs) < 2 * n:
        return _asym_rows((list(xs), t, doc, sub))
    chunks = [list(c) for c in np.array_split(np.asarray(xs), n)]
    with ProcessPoolExecutor(max_workers=n) as ex:
        parts = ex.map(_asym_rows, [(c, t, doc, sub) for c in chunks])
    return [r for part in parts for r in part]


def cmd_asymptote(cfg: dict) -> int:
    from .asymptotics import phase_shift_report

    data = _spectral(cfg)
    t = cfg["t"]
    if not t > 0:
        raise ConfigError("t must be positive")
    from .whitham import dsw_cone

    trail, lead = dsw_cone(data.c_plus, data.c_minus)
    xmin = cfg["xmin"] if cfg["xmin"] is not None else (trail - 2.0) * t
    xmax = cfg["xmax"] if cfg["xmax"] is not None else (lead + 2.0) * t
    xs = np.linspace(xmin, xmax, cfg["nx"])
    rows = _evaluate(xs, t, data, cfg["subleading"])
    out = _outdir(cfg)
    head = _header(cfg, "asymptote")
    with open(out / "asymptote.csv", "w") as fh:
        _write_header(fh, head)
        fh.write("x,t,region,q_leading,q_subleading,q_total\n")
        for x, tt, kind, a, b, c in rows:
            fh.write(f"{x!r},{tt!r},{kind},{a!r},{b!r},{c!r}\n")
    if cfg["phase_report"]:
        rep = []
        for r in phase_shift_report(data):
            rep.append({
                "index": r.index, "kappa": _jsonable(r.kappa), "kind": r.kind, "region": r.region,
                "background": r.background, "speed": r.speed, "x_shift": r.x_shift,
                "nu_hat": None if r.nu_hat is None else _jsonable(r.nu_hat),
            })
        text = json.dumps({"header": head, "eigenvalues": rep}, indent=2)
        (out / "phase_report.json").write_text(text)
        print(text)
    print(f"wrote {len(rows)} rows to {out / 'asymptote.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare


def compare_metrics(x, q_sim, q_asym, regions) -> dict:
    """sup and L2 errors overall and per region label."""
    err = np.asarray(q_sim) - np.asarray(q_asym)
    dx = float(x[1] - x[0]) if len(x) > 1 else 1.0
    res = {"sup": float(np.max(np.abs(err))), "l2": float(math.sqrt(dx * np.sum(err * err))),
           "n": int(err.size), "regions": {}}
    regions = np.asarray(regions)
    for lab in sorted(set(regions.tolist())):
        m = regions == lab
        e = err[m]
        res["regions"][lab] = {"sup": float(np.max(np.abs(e))), "l2": float(math.sqrt(dx * np.sum(e * e))),
                               "n": int(m.sum())}
    return res


def cmd_compare(cfg: dict) -> int:
    from .asymptotics import classify, q_asymptotic
    from .pde import read_snapshot_csv
    from .whitham import dsw_cone

    _need(cfg, "snapshot")
    try:
        with open(cfg["snapshot"]) as fh:
            snap = read_snapshot_csv(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read snapshot: {exc}") from exc
    if cfg.get("cminus") is None:
        cfg["cminus"], cfg["cplus"] = snap.c_minus, snap.c_plus
    data = _spectral(cfg)
    if abs(data.c_minus - snap.c_minus) > 1e-12 or abs(data.c_plus - snap.c_plus) > 1e-12:
        raise ConfigError("snapshot backgrounds do not match the asymptotic data")
    t = snap.t
    if not t > 0:
        raise ConfigError("snapshot time must be positive")
    if cfg["window"]:
        if len(cfg["window"]) != 2:
            raise ConfigError("window needs two numbers")
        lo, hi = cfg["window"]
    else:
        trail, lead = dsw_cone(data.c_plus, data.c_minus)
        lo, hi = (trail + cfg["edge_margin"]) * t, (lead - cfg["edge_margin"]) * t
    x = snap.x
    if lo < x[0] or hi > x[-1] or not lo < hi:
        raise ConfigError(f"window [{lo}, {hi}] is outside the snapshot [{x[0]}, {x[-1]}]")
    m = (x >= lo) & (x <= hi)
    xw = x[m]
    qa = np.asarray(q_asymptotic(xw, t, data))
    qs = qa.copy() if cfg["self_check"] else snap.q[m]
    regions = [classify(v / (12.0 * t), data).kind for v in xw]
    metrics = compare_metrics(xw, qs, qa, regions)
    passed = True
    if cfg["sup_max"] is not None:
        passed &= metrics["sup"] <= cfg["sup_max"]
    if cfg["l2_max"] is not None:
        passed &= metrics["l2"] <= cfg["l2_max"]
    metrics.update(t=t, window=[lo, hi], passed=bool(passed), header=_header(cfg, "compare"))
    text = json.dumps(metrics, indent=2)
    (_outdir(cfg) / "compare.json").write_text(text)
    print(text)
    return EXIT_OK if passed else EXIT_THRESHOLD


# ---------------------------------------------------------------------------
# whitham


def cmd_whitham(cfg: dict) -> int:
    from .scattering import step_scattering
    from .whitham import dsw_state, whitham_selfsimilar

    _need(cfg, "cminus", "cplus")
    cm, cp = cfg["cminus"], cfg["cplus"]
    if not cm > abs(cp):
        raise ConfigError(f"need c_- > |c_+|, got cminus={cm}, cplus={cp}")
    lead = 4 * cm * cm + 2 * cp * cp
    trail = -6 * cm * cm + 12 * cp * cp if cp >= 0 else -6 * cm * cm
    zmin = cfg["zmin"] if cfg["zmin"] is not None else trail - 0.1 * (lead - trail)
    zmax = cfg["zmax"] if cfg["zmax"] is not None else lead + 0.1 * (lead - trail)
    z = np.linspace(zmin, zmax, cfg["nz"])
    beta = whitham_selfsimilar(z, cp, cm)
    data = step_scattering(cm, cp) if cp > 0 else None
    out = _outdir(cfg)
    with open(out / "whitham.csv", "w") as fh:
        _write_header(fh, _header(cfg, "whitham"))
        fh.write("z,beta1,beta2,beta3,m,d,B,Delta,x0\n")
        for zz, (b1, b2, b3) in zip(z, beta):
            den = b3 * b3 - b1 * b1
            m = math.sqrt(max(b2 * b2 - b1 * b1, 0.0) / den) if den > 0 else math.nan
            B = Dl = x0 = d = math.nan
            if data is not None and trail < zz < lead:
                st = dsw_state(zz / 12.0, data)
                d, B, Dl, x0 = st.d, st.B, st.Delta, st.x0
            fh.write(",".join(repr(float(v)) for v in (zz, b1, b2, b3, m, d, B, Dl, x0)) + "\n")
    print(f"wrote {z.size} rows to {out / 'whitham.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# scattering


def cmd_scattering(cfg: dict) -> int:
    from .scattering import solitonstep_scattering, step_scattering

    _need(cfg, "cminus")
    if cfg["preset"] == "exact_step":
        _need(cfg, "cplus")
        data = step_scattering(cfg["cminus"], cfg["cplus"])
    elif cfg["preset"] == "solitonstep":
        _need(cfg, "kappa0", "nu")
        if cfg.get("cplus") not in (None, 0.0):
            raise ConfigError("solitonstep needs cplus = 0")
        data = solitonstep_scattering(cfg["cminus"], cfg["kappa0"], cfg["nu"])
    else:
        raise ConfigError(f"unknown scattering preset {cfg['preset']!r}")
    out = _outdir(cfg)
    (out / "scattering.json").write_text(data.to_json())
    k = np.linspace(-cfg["kmax"], cfg["kmax"], cfg["nk"])
    k = k[k != 0.0] if data.kind == "solitonstep" else k
    with open(out / "reflection.csv", "w") as fh:
        _write_header(fh, _header(cfg, "scattering"))
        fh.write("k,re_r,im_r,abs_a\n")
        r = np.asarray(data.r(k + 0j))
        a = np.asarray(data.a(k + 0j))
        for kk, rr, aa in zip(k, r, a):
            fh.write(f"{float(kk)!r},{float(rr.real)!r},{float(rr.imag)!r},{float(abs(aa))!r}\n")
    print(data.to_json())
    return EXIT_OK


# ---------------------------------------------------------------------------
# profiles


def cmd_profiles(cfg: dict) -> int:
    from . import profiles as P

    x = np.linspace(cfg["xmin"], cfg["xmax"], cfg["nx"])
    t = cfg["t"]
    kind = cfg["kind"]
    if kind == "soliton":
        _need(cfg, "kappa")
        sign = 1 if cfg["nu"] is not None and complex(cfg["nu"]).real > 0 else -1
        q = P.q_soliton(x, t, cfg["c"], abs(cfg["kappa"]), cfg["x0"], sign_nu=sign)
    elif kind == "breather":
        _need(cfg, "kappa", "nu")
        q = P.q_breather(x, t, P.BreatherParams(cfg["c"], cfg["kappa"], cfg["nu"]))
    elif kind in ("per", "hel"):
        _need(cfg, "beta")
        if len(cfg["beta"]) != 3:
            raise ConfigError("beta needs three values")
        b1, b2, b3 = cfg["beta"]
        if kind == "per":
            q = P.q_per(x, t, P.WaveParams(b1, b2, b3, cfg["x0"]))
        else:
            q = P.q_hel(x, t, b1, b2, b3, cfg["delta"])
    elif kind == "per_theta":
        _need(cfg, "beta")
        if len(cfg["beta"]) != 2:
            raise ConfigError("per_theta takes beta = c_tilde,d_tilde")
        q = P.q_per_theta(x, t, cfg["beta"][0], cfg["beta"][1], cfg["delta"])
    else:
        raise ConfigError(f"unknown profile kind {kind!r}")
    out = _outdir(cfg)
    with open(out / f"profile_{kind}.csv", "w") as fh:
        _write_header(fh, _header(cfg, "profiles"))
        fh.write("x,q\n")
        for a, b in zip(x, np.asarray(q)):
            fh.write(f"{float(a)!r},{float(b)!r}\n")
    print(f"wrote {x.size} rows to {out / f'profile_{kind}.csv'}")
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "asymptote": cmd_asymptote,
    "compare": cmd_compare,
    "whitham": cmd_whitham,
    "scattering": cmd_scattering,
    "profiles": cmd_profiles,
}


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve(args)
        return _COMMANDS[args.command](cfg)
    except (ConfigError, DomainError) as exc:
        print(f"mkdv {args.command}: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AccuracyError, BlowUpError, SingularityError, FloatingPointError) as exc:
        print(f"mkdv {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MkdvError as exc:
        print(f"mkdv {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
