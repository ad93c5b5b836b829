"""Scattering data for step-like initial data and the scalar T-functions.

Two closed-form presets are available (the pure step and a constant joined
to a soliton on a zero background).  Generic spectra can be supplied as
eigenvalue lists plus a tabulated reflection coefficient on the real line.

The T-functions are exponentials of Cauchy integrals over vertical segments.
Every segment integral is evaluated in an angle variable that absorbs the
square-root weight exactly; the logarithmic endpoint behaviour of ln|a|^2 is
left to QUADPACK's extrapolating integrator.  Boundary values on a cut are
obtained from a subtracted principal value plus the Plemelj half residue.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AccuracyError, ConfigError, DomainError, SingularityError
from ._quad import quad_complex
from .specfun import R_branch, branch_sqrt

__all__ = [
    "DiscreteEigen",
    "SpectralData",
    "step_scattering",
    "solitonstep_scattering",
    "f_on_cut",
    "ttilde",
    "T_dsw",
    "left_selection",
    "select_by_phase",
    "dsw_pieces",
    "T_left",
    "T_right",
    "chi_limit",
    "radiation_nu",
]


# ---------------------------------------------------------------------------
# spectral data containers


@dataclass(frozen=True)
class DiscreteEigen:
    """A zero of a(k) in the closed first quadrant with its norming constant.

    ``nu`` may be ``None`` when no closed form for it is known; formulas that
    need it then raise.
    """

    kappa: complex
    nu: complex | None = None

    def __post_init__(self):
        k = complex(self.kappa)
        if not k.imag > 0.0 or k.real < 0.0:
            raise DomainError(f"eigenvalue must satisfy Im > 0, Re >= 0, got {k}")
        object.__setattr__(self, "kappa", k)
        if self.nu is not None:
            nu = complex(self.nu)
            if nu == 0:
                raise DomainError("norming constant must be nonzero")
            if k.real == 0.0 and nu.imag != 0.0:
                raise DomainError("a soliton needs a real norming constant")
            object.__setattr__(self, "nu", nu)

    @property
    def is_soliton(self) -> bool:
        return self.kappa.real == 0.0

    @property
    def kind(self) -> str:
        return "soliton" if self.is_soliton else "breather"

    def chi(self, c: float) -> complex:
        """sqrt(kappa^2 + c^2) in the branch with both parts positive."""
        w = complex(np.sqrt(self.kappa**2 + c * c))
        if w.real < 0 or (w.real == 0 and w.imag < 0):
            w = -w
        return complex(abs(w.real), abs(w.imag))

    def speed(self, c: float) -> float:
        """Speed on a constant background ``c``."""
        from .whitham import breather_speed_const

        return breather_speed_const(self.kappa, c)


def _gamma_c(k, c: float, side: int):
    """((k - ic)/(k + ic))^(1/4), principal off [ic, -ic], side-resolved on it."""
    k = np.asarray(k, dtype=complex)
    if c == 0.0:
        return np.ones_like(k)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = (k - 1j * c) / (k + 1j * c)
    on_cut = (k.real == 0.0) & (np.abs(k.imag) < c)
    # + side (Re k > 0) of the cut sees arg w = -pi
    mod = np.abs(w) ** 0.25
    cut_val = mod * np.exp(-1j * side * math.pi / 4.0)
    return np.where(on_cut, cut_val, w**0.25)


@dataclass(frozen=True)
class SpectralData:
    """Continuous and discrete scattering data for backgrounds (c_-, c_+).

    ``kind`` selects how a, b, r are evaluated: ``exact_step`` and
    ``solitonstep`` use closed forms; ``tabulated`` knows r only on a real
    grid.  ``eigens`` is stored in decreasing order of speed.
    """

    c_minus: float
    c_plus: float
    kind: str = "exact_step"
    params: dict = field(default_factory=dict)
    eigens: tuple[DiscreteEigen, ...] = ()
    reflection_grid: tuple | None = None
    reflection_poles: tuple[complex, ...] = ()

    def __post_init__(self):
        if not (self.c_minus > abs(self.c_plus) and self.c_plus >= 0.0):
            raise DomainError(
                f"need c_- > c_+ >= 0, got c_-={self.c_minus}, c_+={self.c_plus}"
            )
        if self.kind not in ("exact_step", "solitonstep", "tabulated"):
            raise ConfigError(f"unknown scattering kind {self.kind!r}")
        object.__setattr__(self, "eigens", tuple(sort_eigens(self.eigens, self.c_minus, self.c_plus)))

    # -- coefficient evaluation -------------------------------------------

    def gamma(self, k, side: int = 1):
        return _gamma_c(k, self.c_minus, side) / _gamma_c(k, self.c_plus, side)

    def a(self, k, side: int = 1):
        """Inverse transmission coefficient; ``side`` picks cut boundary values."""
        if self.kind == "exact_step":
            g = self.gamma(k, side)
            return _maybe_scalar(0.5 * (g + 1.0 / g), k)
        if self.kind == "solitonstep":
            return _maybe_scalar(self._solitonstep_ab(k, side)[0], k)
        return _maybe_scalar(self._tabulated_a(k), k)

    def b(self, k, side: int = 1):
        if self.kind == "exact_step":
            g = self.gamma(k, side)
            return _maybe_scalar(0.5 * (g - 1.0 / g), k)
        if self.kind == "solitonstep":
            return _maybe_scalar(self._solitonstep_ab(k, side)[1], k)
        a = self._tabulated_a(k)
        return _maybe_scalar(self._tabulated_r(k) * a, k)

    def r(self, k, side: int = 1):
        if self.kind == "exact_step":
            g2 = self.gamma(k, side) ** 2
            return _maybe_scalar((g2 - 1.0) / (g2 + 1.0), k)
        if self.kind == "solitonstep":
            a, b = self._solitonstep_ab(k, side)
            return _maybe_scalar(b / a, k)
        return _maybe_scalar(self._tabulated_r(k), k)

    def log_abs_a2(self, y, offset=None):
        """ln|a(iy)|^2 on the imaginary axis, taken from the Re k > 0 side.

        The point is y + offset.  Passing a branch point as ``y`` and a small
        ``offset`` keeps the distance to it exact, which matters because a is
        logarithmically singular at +-c_- and +-c_+.
        """
        y = np.asarray(y, dtype=float)
        if self.kind == "exact_step":
            off = np.zeros_like(y) if offset is None else np.asarray(offset, dtype=float)
            return _log_abs_a2_step(y, off, self.c_minus, self.c_plus)
        if offset is not None:
            y = y + np.asarray(offset, dtype=float)
        # quadrature nodes can round onto a singular point; step one ulp inward
        sing = (np.abs(y) == self.c_minus) | ((np.abs(y) == self.c_plus) & (self.c_plus > 0))
        y = np.where(sing, np.nextafter(y, 0.0), y)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.abs(self.a(1j * y, 1)) ** 2)

    def _solitonstep_ab(self, k, side):
        k = np.asarray(k, dtype=complex)
        kap = self.params["kappa0"]
        al, be = self.params["alpha"], self.params["beta"]
        g = _gamma_c(k, self.c_minus, side)
        gp, gm = g + 1.0 / g, g - 1.0 / g
        with np.errstate(divide="ignore", invalid="ignore"):
            a = 0.5 * (gp * (1.0 - 1j * al / (k + 1j * kap)) - gm * 1j * be / (k + 1j * kap))
            b = 0.5 * (gm * (1.0 + 1j * al / (k - 1j * kap)) - gp * 1j * be / (k - 1j * kap))
        return a, b

    def _real_only(self, k):
        k = np.asarray(k, dtype=complex)
        if np.any(k.imag != 0.0):
            raise DomainError("tabulated scattering data are known on the real line only")
        return k.real

    def _tabulated_r(self, k):
        x = self._real_only(k)
        if self.reflection_grid is None:
            return np.zeros_like(x, dtype=complex)
        kk, re, im = (np.asarray(v, dtype=float) for v in self.reflection_grid)
        return np.interp(x, kk, re, left=0.0, right=0.0) + 1j * np.interp(
            x, kk, im, left=0.0, right=0.0
        )

    def _tabulated_a(self, k):
        # only |a| is recoverable on the real line; the phase is left at zero
        r = self._tabulated_r(k)
        return (1.0 / np.sqrt(1.0 + np.abs(r) ** 2)).astype(complex)

    # -- utilities ----------------------------------------------------------

    def with_eigens(self, eigens: Iterable[DiscreteEigen]) -> "SpectralData":
        """Copy with a replaced discrete spectrum (continuous data unchanged)."""
        return replace(self, eigens=tuple(eigens))

    def to_json(self) -> str:
        doc = {
            "c_minus": self.c_minus,
            "c_plus": self.c_plus,
            "eigens": [
                {
                    "kappa_re": e.kappa.real,
                    "kappa_im": e.kappa.imag,
                    "nu_re": None if e.nu is None else e.nu.real,
                    "nu_im": None if e.nu is None else e.nu.imag,
                }
                for e in self.eigens
            ],
        }
        if self.reflection_grid is not None:
            kk, re, im = self.reflection_grid
            doc["reflection_grid"] = {"k": list(kk), "re": list(re), "im": list(im)}
        if self.kind != "tabulated":
            preset = {"kind": self.kind}
            if self.kind == "solitonstep":
                preset.update(kappa0=self.params["kappa0"], nu=self.params["nu"])
            doc["preset"] = preset
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SpectralData":
        try:
            doc = json.loads(text)
            cm, cp = float(doc["c_minus"]), float(doc["c_plus"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed spectral data document: {exc}") from exc
        eigens = []
        for i, e in enumerate(doc.get("eigens", [])):
            try:
                kap = complex(e["kappa_re"], e["kappa_im"])
                nu = None
                if e.get("nu_re") is not None:
                    nu = complex(e["nu_re"], e.get("nu_im") or 0.0)
            except (KeyError, TypeError) as exc:
                raise ConfigError(f"eigens[{i}]: missing field {exc}") from exc
            eigens.append(DiscreteEigen(kap, nu))
        preset = doc.get("preset")
        if preset is not None:
            kind = preset.get("kind")
            if kind == "exact_step":
                data = step_scattering(cm, cp)
            elif kind == "solitonstep":
                if cp != 0.0:
                    raise ConfigError("solitonstep preset requires c_plus = 0")
                data = solitonstep_scattering(cm, float(preset["kappa0"]), float(preset["nu"]))
            else:
                raise ConfigError(f"unknown preset kind {kind!r}")
            return data.with_eigens(eigens) if eigens else data
        grid = doc.get("reflection_grid")
        rg = None
        if grid is not None:
            rg = (tuple(grid["k"]), tuple(grid["re"]), tuple(grid["im"]))
        return cls(cm, cp, kind="tabulated", eigens=tuple(eigens), reflection_grid=rg)


def _log_abs_a2_step(y, off, cm, cp):
    """Closed form of ln|a(i(y+off))|^2 for the pure step (side Re k > 0).

    With a = (g + 1/g)/2, g = rho e^{i phi}: |a|^2 = (cosh(2 ln rho) + cos 2phi)/2.
    """
    with np.errstate(divide="ignore"):
        lr = 0.25 * (np.log(np.abs((y - cm) + off)) - np.log(np.abs((y + cm) + off)))
        if cp > 0.0:
            lr = lr - 0.25 * (np.log(np.abs((y - cp) + off)) - np.log(np.abs((y + cp) + off)))
    yy = np.abs(y + off)
    # phi = -pi/4 on the c_- cut outside the c_+ cut, else 0
    cos2phi = np.where((yy < cm) & ~(yy < cp), 0.0, 1.0)
    x = 2.0 * np.abs(lr)
    with np.errstate(over="ignore", invalid="ignore"):
        ex = np.exp(-x)
        val = x - math.log(4.0) + np.log1p(ex * ex + 2.0 * cos2phi * ex)
    return np.where(np.isinf(x), np.inf, val)


def _maybe_scalar(val, like):
    if np.ndim(like) == 0:
        return complex(np.asarray(val))
    return val


def sort_eigens(eigens: Iterable[DiscreteEigen], c_minus: float, c_plus: float):
    """Order eigenvalues by decreasing asymptotic speed."""
    from .whitham import effective_speed

    eig = list(eigens)
    speeds = [effective_speed(e, c_minus, c_plus)[0] for e in eig]
    order = sorted(range(len(eig)), key=lambda i: -speeds[i])
    return [eig[i] for i in order]


# ---------------------------------------------------------------------------
# presets


def step_scattering(c_minus: float, c_plus: float) -> SpectralData:
    """Closed-form data of the pure step; the discrete spectrum is empty."""
    if not (c_minus > c_plus >= 0.0):
        raise DomainError(f"need c_- > c_+ >= 0, got ({c_minus}, {c_plus})")
    return SpectralData(float(c_minus), float(c_plus), kind="exact_step")


def solitonstep_scattering(c: float, kappa0: float, nu: float) -> SpectralData:
    """Constant ``c`` on the left joined to a soliton on zero background.

    The zeros of a(k) are computed in closed form.  Their norming constants
    have no closed form here and are left as ``None``.  The reflection
    coefficient has a pole at i*kappa0, recorded in ``reflection_poles``.
    """
    if not (c > kappa0 > 0.0):
        raise DomainError(f"need c > kappa0 > 0, got c={c}, kappa0={kappa0}")
    if nu == 0.0:
        raise DomainError("nu must be nonzero")
    den = 4.0 * kappa0**2 + nu**2
    alpha = 2.0 * nu**2 * kappa0 / den
    beta = 4.0 * nu * kappa0**2 / den
    disc = c * c + 2.0 * c * beta - (alpha - kappa0) ** 2
    im = (alpha - kappa0) * (beta + c) / (c + 2.0 * beta)
    root = np.sqrt(complex(disc))
    k1 = (beta * root + 1j * im * (c + 2.0 * beta)) / (c + 2.0 * beta)
    k2 = -np.conj(k1) if disc >= 0 else (-beta * root + 1j * im * (c + 2.0 * beta)) / (c + 2.0 * beta)
    zeros = [z for z in (complex(k1), complex(k2)) if z.imag > 0]
    if disc >= 0:
        quarter = [complex(abs(z.real), z.imag) for z in zeros[:1]]
    else:
        quarter = [complex(0.0, z.imag) for z in zeros]
    eig = tuple(DiscreteEigen(z, None) for z in quarter)
    params = dict(kappa0=float(kappa0), nu=float(nu), alpha=alpha, beta=beta,
                  zeros=(complex(k1), complex(k2)))
    return SpectralData(float(c), 0.0, kind="solitonstep", params=params, eigens=eig,
                        reflection_poles=(1j * kappa0,))


# ---------------------------------------------------------------------------
# the analytic extension of f on the cut


def f_on_cut(data: SpectralData, k, side: int = 1):
    """f-hat(k) = -1 / (a(k) conj(b(conj k))) with side-resolved branches.

    On (ic_-, ic_+) the + side matches i/(a_- a_+) and the - side its negative.
    """
    k = np.asarray(k, dtype=complex)
    a = np.asarray(data.a(k, side))
    bb = np.conj(np.asarray(data.b(np.conj(k), side)))
    den = a * bb
    if np.any(den == 0.0) or not np.all(np.isfinite(den)):
        raise SingularityError("a or conj(b(conj k)) vanishes at the evaluation point")
    return _maybe_scalar(-1.0 / den, k)


# ---------------------------------------------------------------------------
# Blaschke products


def _select(eigens: Sequence[DiscreteEigen], select) -> list[DiscreteEigen]:
    if select is None:
        return list(eigens)
    if isinstance(select, (int, np.integer)):
        return list(eigens[: int(select)])
    sel = list(select)
    if sel and isinstance(sel[0], (bool, np.bool_)):
        return [e for e, s in zip(eigens, sel) if s]
    return [eigens[i] for i in sel]


def ttilde(k, eigens: Sequence[DiscreteEigen], select=None):
    """Finite Blaschke product over the selected eigenvalues.

    ``select``: None (all), an int j (the first j, i.e. the faster ones),
    a boolean mask, or an index list.
    """
    k = np.asarray(k, dtype=complex)
    out = np.ones_like(k)
    for e in _select(eigens, select):
        kap = e.kappa
        hits = np.isclose(k, kap, rtol=0, atol=1e-14)
        if not e.is_soliton:
            hits |= np.isclose(k, -np.conj(kap), rtol=0, atol=1e-14)
        if np.any(hits):
            raise SingularityError(f"T-tilde evaluated at its pole {kap}")
        fac = (k - np.conj(kap)) / (k - kap)
        if not e.is_soliton:
            fac = fac * (k + kap) / (k + np.conj(kap))
        out = out * fac
    return _maybe_scalar(out, k)


def _log_tt2_axis(eigens, select):
    """y -> ln T-tilde(iy)^2; the square is positive on the imaginary axis."""
    chosen = _select(eigens, select)
    if not chosen:
        return None

    def h(y):
        v = ttilde(1j * np.asarray(y, dtype=float), chosen)
        return np.log(np.abs(np.asarray(v)) ** 2)

    return h


# ---------------------------------------------------------------------------
# Cauchy-integral machinery
#
# A vertical piece runs along s = iy from y0 to y1.  Its weighted density
# phi(s) is represented in an angle variable theta with y = Y(theta) and
# ``density(theta) = phi(iY) * dY/dtheta`` smooth up to the endpoints.


class _CirclePiece:
    """Weight 1/(sqrt(s^2+c^2))_+ on a sub-segment of [ic, -ic]; y = c sin(theta)."""

    def __init__(self, y0, y1, h, c):
        self.y0, self.y1, self.h, self.c = float(y0), float(y1), h, float(c)

    def theta_of(self, y):
        return math.asin(max(-1.0, min(1.0, y / self.c)))

    def theta_range(self):
        return self.theta_of(self.y0), self.theta_of(self.y1)

    def Y(self, th):
        return self.c * np.sin(th)

    def dY(self, th):
        return self.c * np.cos(th)

    def split(self, th):
        """(branch point, offset) with the offset computed without cancellation."""
        th = np.asarray(th, dtype=float)
        up = th >= 0.0
        off = np.where(up, -2.0 * self.c * np.sin(0.25 * math.pi - 0.5 * th) ** 2,
                       2.0 * self.c * np.sin(0.25 * math.pi + 0.5 * th) ** 2)
        return np.where(up, self.c, -self.c), off

    def density(self, th):
        return self.h(*self.split(th))


class _RPiece:
    """Weight 1/R(s) on a segment whose endpoints are both roots of R(iy)^2.

    With y = mid + half sin(theta), |R(iy)| = half cos(theta) sqrt(Q(y)),
    Q being the product of distances to the four remaining roots.  ``phase``
    is the constant unit factor R / |R| on the segment (side + for cuts).
    """

    def __init__(self, y0, y1, h, roots, phase):
        self.y0, self.y1, self.h = float(y0), float(y1), h
        lo, hi = sorted((self.y0, self.y1))
        self.mid, self.half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        others = list(roots)
        for e in (lo, hi):
            others.pop(int(np.argmin([abs(r - e) for r in others])))
        self.others = np.asarray(others, dtype=float)
        self.phase = complex(phase)

    def theta_of(self, y):
        return math.asin(max(-1.0, min(1.0, (y - self.mid) / self.half)))

    def theta_range(self):
        return self.theta_of(self.y0), self.theta_of(self.y1)

    def Y(self, th):
        return self.mid + self.half * np.sin(th)

    def dY(self, th):
        return self.half * np.cos(th)

    def split(self, th):
        th = np.asarray(th, dtype=float)
        up = th >= 0.0
        off = np.where(up, -2.0 * self.half * np.sin(0.25 * math.pi - 0.5 * th) ** 2,
                       2.0 * self.half * np.sin(0.25 * math.pi + 0.5 * th) ** 2)
        return np.where(up, self.mid + self.half, self.mid - self.half), off

    def density(self, th):
        base, off = self.split(th)
        q = np.prod(np.abs(np.subtract.outer(base, self.others) + off[..., None]), axis=-1)
        return self.h(base, off) / (self.phase * np.sqrt(q))


class _RealPiece:
    """Real segment with density L(s) and weight 1/f(s), f = sign(s) sqrt(s^2+c^2)."""

    def __init__(self, s0, s1, L, c):
        self.s0, self.s1, self.L, self.c = float(s0), float(s1), L, float(c)

    def phi(self, s):
        s = np.asarray(s, dtype=float)
        return self.L(s) / (np.sign(s) * np.sqrt(s * s + self.c**2))


def _quad_complex(fun, a, b, points=None, what="Cauchy integral"):
    return quad_complex(fun, a, b, points, what)


def _in_open(v, a, b):
    return min(a, b) < v < max(a, b)


def _vertical_cauchy(piece, k: complex, side: int, breaks=()):
    """(1/2 pi i) int phi(s) ds/(s - k) along the piece (boundary value if on it)."""
    t0, t1 = piece.theta_range()
    tb = [piece.theta_of(y) for y in breaks if _in_open(y, piece.y0, piece.y1)]
    yk = k.imag
    if not (k.real == 0.0 and _in_open(yk, piece.y0, piece.y1)):
        # ds/(s - k) = i dy / (iy - k)
        f = lambda th: piece.density(th) * 1j / (1j * piece.Y(th) - k)  # noqa: E731
        return _quad_complex(f, t0, t1, tb) / (2j * math.pi)
    thk = piece.theta_of(yk)
    Hk = complex(piece.density(thk))
    dk = float(piece.dY(thk))

    def g(th):
        dy = piece.Y(th) - yk
        if dy == 0.0:
            return 0.0
        return (piece.density(th) - Hk * piece.dY(th) / dk) / dy

    pv = _quad_complex(g, t0, t1, tb + [thk])
    pv += Hk / dk * math.log(abs((piece.Y(t1) - yk) / (piece.Y(t0) - yk)))
    phi_k = Hk / dk
    downward = piece.y1 < piece.y0
    left = (side == 1) == downward
    return pv / (2j * math.pi) + 0.5 * phi_k * (1.0 if left else -1.0)


def _real_cauchy(piece: _RealPiece, k: complex, side: int):
    """Same for a real segment; side=+1 is the upper half plane."""
    a, b = piece.s0, piece.s1
    if not (k.imag == 0.0 and _in_open(k.real, a, b)):
        return _quad_complex(lambda s: piece.phi(s) / (s - k), a, b, [0.0]) / (2j * math.pi)
    x = k.real
    phk = complex(piece.phi(x))
    g = lambda s: (piece.phi(s) - phk) / (s - x) if s != x else 0.0  # noqa: E731
    pv = _quad_complex(g, a, b, [0.0, x]) + phk * math.log(abs((b - x) / (a - x)))
    left = (side == 1) == (b > a)
    return pv / (2j * math.pi) + 0.5 * phk * (1.0 if left else -1.0)


def _cauchy_sum(k: complex, pieces, side: int, breaks=()):
    total = 0j
    for p in pieces:
        if isinstance(p, _RealPiece):
            total += _real_cauchy(p, k, side)
        else:
            total += _vertical_cauchy(p, k, side, breaks)
    return total


def _map_points(k, fn):
    arr = np.asarray(k, dtype=complex)
    out = np.array([fn(complex(v)) for v in arr.reshape(-1)], dtype=complex).reshape(arr.shape)
    return complex(out) if out.ndim == 0 else out


def _tt_fn(eigens, select):
    chosen = _select(eigens, select)
    if not chosen:
        return lambda kk: 1.0 + 0j
    return lambda kk: complex(ttilde(kk, chosen))


def _ghat_const(k: complex, xi: float, c: float) -> complex:
    return (4 * k * k - 2 * c * c + 12 * xi) * complex(branch_sqrt(k, c, 1))


def select_by_phase(eigens: Sequence[DiscreteEigen], gfun) -> list[bool]:
    """Mask of eigenvalues with Im g(kappa) < 0."""
    return [gfun(e.kappa).imag < 0.0 for e in eigens]


# ---------------------------------------------------------------------------
# T-functions of the constant regions


def T_right(k, eigens: Sequence[DiscreteEigen], j: int | None, c_plus: float, side: int = 1):
    """T_j(k) of the right constant region.

    ``j`` is the number of faster eigenvalues included in T-tilde (None: all).
    With c_+ = 0 the band integral has zero length and T = T-tilde.
    """
    tt = _tt_fn(eigens, j)
    tt_h = _log_tt2_axis(eigens, j)
    if c_plus == 0.0 or tt_h is None:
        return _map_points(k, tt)
    pieces = [_CirclePiece(c_plus, -c_plus, lambda y, o=0.0: -tt_h(y + o), c_plus)]

    def one(kk):
        pref = complex(branch_sqrt(kk, c_plus, side))
        return tt(kk) * np.exp(pref * _cauchy_sum(kk, pieces, side))

    return _map_points(k, one)


def _check_left(data: SpectralData, xi: float, which: str):
    cm2, cp2 = data.c_minus**2, data.c_plus**2
    if which == "middle":
        if not (-cm2 / 2 < xi < -cm2 / 2 + cp2):
            raise DomainError(f"xi={xi} is outside the middle left region")
    elif which == "utmost":
        if not xi < -cm2 / 2:
            raise DomainError(f"xi={xi} is outside the utmost left region")
    else:
        raise DomainError(f"unknown left sub-region {which!r}")


def left_selection(data: SpectralData, xi: float) -> list[bool]:
    """Eigenvalues entering T-tilde on a left-region ray."""
    return select_by_phase(data.eigens, lambda kk: _ghat_const(kk, xi, data.c_minus))


def _left_pieces(data: SpectralData, xi: float, which: str, select):
    cm = data.c_minus
    la2 = data.log_abs_a2
    neg = lambda y, o=None: -la2(y, o)  # noqa: E731
    if which == "middle":
        d0 = math.sqrt(xi + cm * cm / 2.0)
        pieces = [_CirclePiece(cm, d0, neg, cm), _CirclePiece(-d0, -cm, la2, cm)]
    else:
        pieces = [_CirclePiece(cm, 0.0, neg, cm), _CirclePiece(0.0, -cm, la2, cm)]
    tt_h = _log_tt2_axis(data.eigens, select)
    if tt_h is not None:
        pieces.append(_CirclePiece(cm, -cm, lambda y, o=0.0: -tt_h(y + o), cm))
    if which == "utmost":
        k0 = math.sqrt(-xi - cm * cm / 2.0)

        def L(s):
            return np.log1p(np.abs(np.asarray(data.r(np.asarray(s, dtype=complex)))) ** 2)

        pieces.append(_RealPiece(-k0, k0, L, cm))
    return pieces


def T_left(k, xi: float, data: SpectralData, which: str = "utmost", select=None, side: int = 1):
    """T(k, xi) of the middle or utmost left constant region.

    ``select`` picks the eigenvalues in T-tilde; by default those with
    Im g(kappa, xi) < 0.  ``side`` resolves boundary values: for vertical
    cuts +1 is Re k > 0, on the real line +1 is the upper half plane.
    """
    _check_left(data, xi, which)
    if select is None:
        select = left_selection(data, xi)
    cm, cp = data.c_minus, data.c_plus
    pieces = _left_pieces(data, xi, which, select)
    tt = _tt_fn(data.eigens, select)

    def one(kk):
        pref = complex(branch_sqrt(kk, cm, side))
        if kk.imag == 0.0 and kk.real == 0.0:
            pref = complex(cm * side)
        return tt(kk) * np.exp(pref * _cauchy_sum(kk, pieces, side, (cp, -cp)))

    return _map_points(k, one)


def radiation_nu(data: SpectralData, xi: float, which: str) -> float:
    """The exponent nu(xi) of the left-region radiation."""
    _check_left(data, xi, which)
    cm = data.c_minus
    if which == "utmost":
        k0 = math.sqrt(-xi - cm * cm / 2.0)
        return math.log1p(abs(complex(data.r(k0))) ** 2) / (2 * math.pi)
    d0 = math.sqrt(xi + cm * cm / 2.0)
    return -float(data.log_abs_a2(d0)) / (2 * math.pi)


def chi_limit(data: SpectralData, xi: float, which: str = "utmost", select=None,
              at_minus: bool = False) -> complex:
    """Regular part of T at the stationary point of the left-region radiation.

    utmost: lim T(k)((k-k0)/(k+k0))^{i nu} for real k -> k0 with k > k0
    (``at_minus``: k -> -k0 with k < -k0).
    middle: lim T(k)((k-id0)/(-(k+id0)))^{i nu} as k -> id0 from Re k > 0.
    The logarithmic singularity is removed analytically before quadrature.
    """
    _check_left(data, xi, which)
    if select is None:
        select = left_selection(data, xi)
    cm, cp = data.c_minus, data.c_plus
    pieces = _left_pieces(data, xi, which, select)
    tt = _tt_fn(data.eigens, select)
    if which == "utmost":
        k0 = math.sqrt(-xi - cm * cm / 2.0)
        kk = -k0 if at_minus else k0
        total = 0j
        for p in pieces:
            if isinstance(p, _RealPiece):
                phk = complex(p.phi(kk))
                g = lambda s, p=p, phk=phk: (p.phi(s) - phk) / (s - kk) if s != kk else 0.0  # noqa: E731
                total += _quad_complex(g, p.s0, p.s1, [0.0]) / (2j * math.pi)
            else:
                total += _vertical_cauchy(p, complex(kk), 1, (cp, -cp))
        pref = complex(branch_sqrt(kk, cm, 1))
        return complex(tt(kk) * np.exp(pref * total))

    d0 = math.sqrt(xi + cm * cm / 2.0)
    kk = 1j * d0
    nu = radiation_nu(data, xi, which)
    pref = math.sqrt(cm * cm - d0 * d0)
    total = 0j
    first = pieces[0]
    for p in pieces[1:]:
        total += _vertical_cauchy(p, kk, 1, (cp, -cp))
    phi_k = float(first.h(d0)) / pref
    t0, t1 = first.theta_range()

    def g(th):
        y = first.Y(th)
        if y == d0:
            return 0.0
        return (float(first.density(th)) - phi_k * cm * math.cos(th)) / (y - d0)

    brk = [first.theta_of(cp)] if d0 < cp < cm else None
    reg = _quad_complex(g, t0, t1, brk)
    reg -= phi_k * complex(math.log(cm - d0), math.pi / 2)
    total += reg / (2j * math.pi)
    expo = pref * total - 1j * nu * complex(math.log(2 * d0), math.pi / 2)
    return complex(tt(kk) * np.exp(expo))


# ---------------------------------------------------------------------------
# DSW T-function


def _r_phase(y0, y1, cp, d, cm):
    ym = 0.5 * (y0 + y1)
    val = complex(R_branch(1j * ym, cp, d, cm, 1))
    u = val / abs(val)
    return complex(round(u.real), round(u.imag))


def dsw_pieces(data: SpectralData, d: float, Delta: float, select):
    """Oriented pieces of the DSW T exponent (without the R(k)/(2 pi i) factor)."""
    cm, cp = data.c_minus, data.c_plus
    roots = (cm, d, cp, -cp, -d, -cm)
    la2 = data.log_abs_a2
    tt_h = _log_tt2_axis(data.eigens, select)
    tt0 = (lambda y: 0.0) if tt_h is None else tt_h
    pieces = [
        _RPiece(cm, d, lambda y, o: -la2(y, o) - tt0(y + o), roots, _r_phase(d, cm, cp, d, cm)),
        _RPiece(-d, -cm, lambda y, o: la2(y, o) - tt0(y + o), roots, _r_phase(-cm, -d, cp, d, cm)),
    ]
    if tt_h is not None and cp > 0:
        pieces.append(_RPiece(cp, -cp, lambda y, o: -tt_h(y + o), roots, _r_phase(-cp, cp, cp, d, cm)))
    if Delta != 0.0:
        const = lambda y, o: 1j * Delta * np.ones_like(np.asarray(y, dtype=float))  # noqa: E731
        pieces.append(_RPiece(d, cp, const, roots, _r_phase(cp, d, cp, d, cm)))
        pieces.append(_RPiece(-cp, -d, const, roots, _r_phase(-d, -cp, cp, d, cm)))
    return pieces


def T_dsw(k, xi: float, data: SpectralData, side: int = 1, state=None):
    """T(k, xi) of the dispersive-shock region (requires c_+ > 0).

    ``state`` may carry a precomputed :class:`mkdvstep.whitham.DswState`.
    """
    from .whitham import dsw_state

    st = state if state is not None else dsw_state(xi, data)
    cm, cp, d = data.c_minus, data.c_plus, st.d
    pieces = dsw_pieces(data, d, st.Delta, st.select)
    tt = _tt_fn(data.eigens, st.select)

    def one(kk):
        pref = complex(R_branch(kk, cp, d, cm, side))
        return tt(kk) * np.exp(pref * _cauchy_sum(kk, pieces, side))

    return _map_points(k, one)
