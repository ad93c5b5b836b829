"""Leading-order long-time asymptotics and the left-region radiation term.

A ray is labelled by xi = x/(12 t).  Along each ray the solution is either
a constant, a soliton or breather riding on a constant, or the modulated
elliptic wave of the oscillation zone.  Every eigenvalue shifts the phase of
the slower ones through T-functions; those shifts are computed here and can
be inspected with :func:`phase_shift_report`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DomainError,
    TransitionZoneError,
    TrappedBreatherWarning,
    UnsupportedError,
)
from .profiles import BreatherParams, WaveParams, q_breather, q_per, q_soliton
from .scattering import DiscreteEigen, SpectralData, T_left, T_right, chi_limit, radiation_nu
from .specfun import log_gamma
from .whitham import dsw_cone, dsw_state, effective_speed

__all__ = [
    "RegionTag",
    "EigenReport",
    "region_thresholds",
    "default_delta",
    "classify",
    "q_asymptotic",
    "q_subleading",
    "radiation_phase",
    "phase_shift_report",
    "TRANSITION_FRACTION",
]

TRANSITION_FRACTION = 0.05


@dataclass(frozen=True)
class RegionTag:
    """Region of a ray plus the eigenvalue whose window it falls in, if any."""

    kind: str
    nearest: tuple[int, float] | None = None


def region_thresholds(c_plus: float, c_minus: float) -> tuple[float, float, float]:
    """(left split, trailing edge, leading edge) in xi units."""
    cm2, cp2 = c_minus**2, c_plus**2
    return -cm2 / 2.0, -cm2 / 2.0 + cp2, cm2 / 3.0 + cp2 / 6.0


def _kind(xi: float, c_plus: float, c_minus: float) -> str:
    split, trail, lead = region_thresholds(c_plus, c_minus)
    if xi >= lead:
        return "right_const"
    if xi >= trail:
        return "dsw"
    if xi > split:
        return "middle_left"
    return "utmost_left"


def _speeds(data: SpectralData) -> list[tuple[float, str]]:
    return [effective_speed(e, data.c_minus, data.c_plus) for e in data.eigens]


def default_delta(data: SpectralData) -> float:
    """Window half-width in xi: 1/8 of the smallest speed gap (in xi units).

    With fewer than two eigenvalues the oscillation-zone width sets the scale.
    """
    v = sorted(s for s, _ in _speeds(data))
    gaps = [b - a for a, b in zip(v, v[1:])]
    if gaps and min(gaps) > 0.0:
        return min(gaps) / 12.0 / 8.0
    trail, lead = dsw_cone(data.c_plus, data.c_minus)
    return (lead - trail) / 12.0 / 8.0


def classify(xi: float, data: SpectralData, delta: float | None = None) -> RegionTag:
    """Region of the ray ``xi`` and the eigenvalue within ``delta`` of it."""
    speeds = _speeds(data)
    v = sorted(s for s, _ in speeds)
    gap = min((b - a for a, b in zip(v, v[1:])), default=math.inf) / 12.0
    if delta is None:
        delta = default_delta(data)
    if not delta > 0.0 or 2.0 * delta >= gap:
        raise ConfigError(f"delta={delta} must be positive and below half the speed gap {gap:.6g}")
    kind = _kind(float(xi), data.c_plus, data.c_minus)
    best = None
    for j, (s, _) in enumerate(speeds):
        dist = abs(xi - s / 12.0)
        if dist < delta and (best is None or dist < best[1]):
            best = (j, dist)
    return RegionTag(kind, best)


# ---------------------------------------------------------------------------
# per-eigenvalue phase shifts


@dataclass(frozen=True)
class EigenReport:
    """Shifted parameters of one eigenvalue.

    ``x_shift`` is set for solitons, ``nu_hat`` for breathers; a trapped
    eigenvalue carries neither.
    """

    index: int
    kappa: complex
    kind: str
    region: str
    background: float | None
    speed: float
    x_shift: float | None = None
    nu_hat: complex | None = None


def _left_which(xi: float, c_minus: float) -> str:
    return "utmost" if xi < -c_minus**2 / 2.0 else "middle"


def _need_nu(e: DiscreteEigen, j: int) -> complex:
    if e.nu is None:
        raise DomainError(f"eigenvalue {j} has no norming constant")
    return e.nu


def _report_one(data: SpectralData, j: int, speed: float, where: str) -> EigenReport:
    e = data.eigens[j]
    cm, cp = data.c_minus, data.c_plus
    if where == "dsw":
        return EigenReport(j, e.kappa, e.kind, "dsw", None, speed)
    nu = _need_nu(e, j)
    if where == "right":
        T2 = complex(T_right(e.kappa, data.eigens, j, cp)) ** 2
        if e.is_soliton:
            kap = abs(e.kappa)
            if abs(T2.imag) > 1e-10 * abs(T2) or T2.real <= 0.0:
                raise DomainError(f"T^2 at soliton {j} is not positive: {T2}")
            shift = math.log(2.0 * (kap * kap - cp * cp) * T2.real / (abs(nu) * kap))
            return EigenReport(j, e.kappa, e.kind, "right_const", cp, speed, x_shift=shift)
        return EigenReport(j, e.kappa, e.kind, "right_const", cp, speed, nu_hat=nu / T2)
    xi = speed / 12.0
    which = _left_which(xi, cm)
    if abs(xi + cm * cm / 2.0) < TRANSITION_FRACTION * cm * cm:
        raise TransitionZoneError(f"eigenvalue {j} moves inside the left transition zone")
    select = [i < j for i in range(len(data.eigens))]
    T2 = complex(T_left(e.kappa, xi, data, which, select=select)) ** 2
    return EigenReport(j, e.kappa, e.kind, f"{which}_left", cm, speed, nu_hat=nu / T2)


def phase_shift_report(data: SpectralData) -> list[EigenReport]:
    """Phase shifts of every eigenvalue, in decreasing order of speed."""
    return [_report_one(data, j, s, where) for j, (s, where) in enumerate(_speeds(data))]


def _eigen_profile(x, t, rep: EigenReport, e: DiscreteEigen):
    if rep.x_shift is not None:
        sign = 1 if complex(e.nu).real > 0 else -1
        return q_soliton(x, t, rep.background, abs(e.kappa), rep.x_shift, sign_nu=sign)
    return q_breather(x, t, BreatherParams(rep.background, e.kappa, rep.nu_hat))


# ---------------------------------------------------------------------------
# leading order


def _dsw_value(x, t, xi, data):
    if xi <= region_thresholds(data.c_plus, data.c_minus)[1]:
        # d = c_+ collapses the wave onto c_-
        return data.c_minus
    st = dsw_state(xi, data)
    w = WaveParams(data.c_plus, st.d, data.c_minus, st.x0)
    return float(q_per(x, t, w))


def q_asymptotic(x, t: float, data: SpectralData, delta: float | None = None):
    """Leading-order asymptotic solution at points ``x`` and time ``t``."""
    if not t > 0.0:
        raise DomainError("t must be positive")
    xs = np.asarray(x, dtype=float)
    if delta is None:
        delta = default_delta(data)
    reports: dict[int, EigenReport] = {}
    out = np.empty(xs.shape)
    for idx, xv in np.ndenumerate(xs):
        xi = xv / (12.0 * t)
        tag = classify(xi, data, delta)
        j = None if tag.nearest is None else tag.nearest[0]
        if tag.kind == "dsw":
            if data.c_plus == 0.0:
                raise UnsupportedError("the oscillation zone with c_+ = 0 is not supported")
            if j is not None and data.eigens[j].kind == "breather":
                warnings.warn(TrappedBreatherWarning(
                    f"breather {j} is trapped at xi={xi:.6g}; its correction is omitted", j, xi))
            out[idx] = _dsw_value(xv, t, xi, data)
            continue
        base = data.c_plus if tag.kind == "right_const" else data.c_minus
        if j is None:
            out[idx] = base
            continue
        rep = reports.get(j)
        if rep is None:
            rep = reports[j] = _report_one(data, j, *_speeds(data)[j])
        if rep.background is None or rep.background != base:
            out[idx] = base
            continue
        out[idx] = _eigen_profile(xv, t, rep, data.eigens[j])
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# radiation in the left regions


def radiation_phase(xi: float, data: SpectralData) -> tuple[float, float]:
    """(nu, phi) of the left-region radiation on the ray ``xi``."""
    cm, cp = data.c_minus, data.c_plus
    split = -cm * cm / 2.0
    eps = TRANSITION_FRACTION * cm * cm
    if abs(xi - split) <= eps:
        raise TransitionZoneError(f"xi={xi} is within {eps:.3g} of the left split {split:.6g}")
    if xi < split:
        which, quarter = "utmost", math.pi / 4.0
        k = complex(math.sqrt(-xi - cm * cm / 2.0))
        r = complex(data.r(k))
    elif xi < split + cp * cp - eps:
        which, quarter = "middle", -math.pi / 4.0
        k = 1j * math.sqrt(xi + cm * cm / 2.0)
        r = complex(data.r(k, 1))
    else:
        raise DomainError(f"xi={xi} is not in a left region")
    nu = radiation_nu(data, xi, which)
    if nu == 0.0:
        return 0.0, 0.0
    chi = chi_limit(data, xi, which)
    phi = quarter - math.atan2(r.imag, r.real) - log_gamma(1j * nu).imag + 2.0 * math.atan2(chi.imag, chi.real)
    return nu, phi


def q_subleading(x, t: float, data: SpectralData, delta: float | None = None):
    """The decaying cosine correction to c_- in the left regions."""
    if not t > 0.0:
        raise DomainError("t must be positive")
    xs = np.asarray(x, dtype=float)
    cm2 = data.c_minus**2
    out = np.empty(xs.shape)
    for idx, xv in np.ndenumerate(xs):
        xi = xv / (12.0 * t)
        tag = classify(xi, data, delta)
        if tag.nearest is not None:
            raise DomainError(f"xi={xi} lies in the window of eigenvalue {tag.nearest[0]}")
        nu, phi = radiation_phase(xi, data)
        if nu == 0.0:
            out[idx] = 0.0
            continue
        p = -xi + cm2 / 2.0
        s = xi + cm2 / 2.0
        amp = math.sqrt(abs(nu) * math.sqrt(p) / (3.0 * t * abs(s)))
        arg = 16.0 * t * p**1.5 + nu * math.log(192.0 * t * s * s / math.sqrt(p)) + phi
        out[idx] = amp * math.cos(arg)
    return float(out) if out.ndim == 0 else out
