"""Closed-form solutions: solitons and breathers on a constant background,
the elliptic travelling wave, and two theta-function routes to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import quad_complex, quad_real
from .errors import AccuracyError, DomainError
from .specfun import branch_sqrt, elliptic_K, jacobi_sn_cn_dn, theta3

__all__ = [
    "WaveParams",
    "BreatherParams",
    "q_soliton",
    "q_breather",
    "soliton_phase",
    "q_breather_c0",
    "q_per",
    "q_per_trig",
    "q_per_theta",
    "hel_constants",
    "q_hel",
    "q_per_soliton_limit",
]

BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class WaveParams:
    """Travelling wave parameters beta1 < beta2 < beta3 and phase x0."""

    beta1: float
    beta2: float
    beta3: float
    x0: float = 0.0

    def __post_init__(self):
        if not (self.beta1 < self.beta2 < self.beta3):
            raise DomainError(f"need beta1 < beta2 < beta3, got {self.beta1, self.beta2, self.beta3}")
        if not self.beta2 + self.beta3 > 0 or not self.beta1 + self.beta3 > 0:
            raise DomainError("need beta1 + beta3 > 0 so the wave stays bounded")

    @property
    def speed(self) -> float:
        return 2.0 * (self.beta1**2 + self.beta2**2 + self.beta3**2)

    @property
    def m(self) -> float:
        return math.sqrt((self.beta2**2 - self.beta1**2) / (self.beta3**2 - self.beta1**2))

    @property
    def wavenumber(self) -> float:
        return math.sqrt(self.beta3**2 - self.beta1**2)

    @property
    def period(self) -> float:
        """Spatial period 2K(m)/sqrt(beta3^2 - beta1^2)."""
        return 2.0 * elliptic_K(self.m) / self.wavenumber


@dataclass(frozen=True)
class BreatherParams:
    """Breather data: background c, spectral point kappa, norming constant nu."""

    c: float
    kappa: complex
    nu: complex

    def __post_init__(self):
        k = complex(self.kappa)
        if self.c < 0:
            raise DomainError("background must be non-negative")
        if not (k.real > 0 and k.imag > 0):
            raise DomainError(f"a breather needs Re kappa > 0 and Im kappa > 0, got {k}; use q_soliton for Re kappa = 0")
        if complex(self.nu) == 0:
            raise DomainError("nu must be nonzero")
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "nu", complex(self.nu))

    @property
    def chi(self) -> complex:
        w = complex(np.sqrt(self.kappa**2 + self.c**2))
        return complex(abs(w.real), abs(w.imag))

    @property
    def theta1(self) -> float:
        # full-quadrant version of arccos(-Im nu/|nu|): the argument of i nu
        return math.atan2(self.nu.real, -self.nu.imag)

    @property
    def theta2(self) -> float:
        x = self.chi
        return math.acos(x.real / abs(x))

    @property
    def speed(self) -> float:
        x = self.chi
        return 4.0 * x.imag**2 + 6.0 * self.c**2 - 12.0 * x.real**2

    @property
    def carrier_period(self) -> float:
        """Temporal period of the carrier on the line Z = 0."""
        x = self.chi
        return math.pi / (8.0 * abs(x) ** 2 * x.real)


# ---------------------------------------------------------------------------
# soliton


def q_soliton(x, t, c: float, kappa0: float, x0: float, sign_nu: int = -1):
    """Soliton (sign_nu = -1) or antisoliton (+1) on the background c.

    kappa0 = c with sign_nu = +1 is the rational antisoliton, whose centre
    sits at x = x0 at t = 0.
    """
    if sign_nu not in (1, -1):
        raise DomainError("sign_nu must be +1 or -1")
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if kappa0 == c and sign_nu == 1 and c > 0:
        arg = 2.0 * c * (x - x0) - 12.0 * c**3 * t
        return c - 4.0 * c / (1.0 + arg * arg)
    if not kappa0 > c >= 0.0:
        raise DomainError(f"need kappa0 > c >= 0, got kappa0={kappa0}, c={c}")
    root = math.sqrt(kappa0**2 - c * c)
    arg = 2.0 * root * (x - (2.0 * c * c + 4.0 * kappa0**2) * t) + x0
    with np.errstate(over="ignore"):
        den = kappa0 * np.cosh(arg) - sign_nu * c
    return c - 2.0 * sign_nu * (kappa0**2 - c * c) / den


def soliton_phase(c: float, kappa0: float, nu: float) -> float:
    """Phase ln(2(kappa0^2 - c^2)/(|nu| kappa0)) of a free soliton."""
    return math.log(2.0 * (kappa0**2 - c * c) / (abs(nu) * kappa0))


# ---------------------------------------------------------------------------
# breather


def q_breather(x, t, p: BreatherParams):
    """Breather on the background p.c, evaluated as c + 2 d/dx arctan(N/D).

    The derivative is expanded analytically and the hyperbolic part of N
    and D is rescaled by exp(-|Y|) so that nothing overflows far from the core.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    c = p.c
    chi = p.chi
    x1, x2 = chi.real, chi.imag
    mod2 = abs(chi) ** 2
    mod = math.sqrt(mod2)
    nu = abs(p.nu)
    th1, th2 = p.theta1, p.theta2
    Z = x + 4.0 * t * (3.0 * x1 * x1 - x2 * x2 - 1.5 * c * c)
    phi = 2.0 * (Z - 8.0 * t * mod2) * x1 + th1 - th2
    X = 2.0 * Z * x2
    gap = mod - c
    cphi, sphi = np.cos(phi), np.sin(phi)
    s2, c2 = np.sin(phi - th2), np.cos(phi - th2)
    if abs(gap) <= BOUNDARY_TOL:
        # |chi| = c: N = cos phi + C e^{-X}, D = (c/|nu|) e^{X} + sin(phi - th2)
        C = nu * x1 * x1 / (2.0 * mod2 * x2)
        w = np.exp(-np.abs(X))
        em = np.exp(-X - np.abs(X))
        ep = np.exp(X - np.abs(X))
        N = cphi * w + C * em
        Nx = -2.0 * x1 * sphi * w - 2.0 * x2 * C * em
        D = (c / nu) * ep + s2 * w
        Dx = 2.0 * x2 * (c / nu) * ep + 2.0 * x1 * c2 * w
    else:
        C = c * nu * x1 * x1 / (2.0 * mod2 * x2)
        S = math.sqrt(abs(mod2 - c * c)) * x1 / x2
        th3 = math.log(2.0 * x2 * mod2 / (nu * x1 * math.sqrt(abs(mod2 - c * c))))
        Y = X + th3
        aY = np.abs(Y)
        w = np.exp(-aY)
        em = np.exp(th3 - Y - aY)  # e^{-X} e^{-|Y|}
        e2 = np.exp(-2.0 * aY)
        ch = 0.5 * (1.0 + e2)
        sh = np.sign(Y) * 0.5 * (1.0 - e2)
        if gap > 0:
            hyp, dhyp = ch, sh
        else:
            hyp, dhyp = sh, ch
        N = mod * cphi * w + C * em
        Nx = -2.0 * x1 * mod * sphi * w - 2.0 * x2 * C * em
        D = S * hyp + c * s2 * w
        Dx = 2.0 * x2 * S * dhyp + 2.0 * x1 * c * c2 * w
    return c + 2.0 * (Nx * D - N * Dx) / (N * N + D * D)


def q_breather_c0(x, t, kappa: complex, nu: complex):
    """Zero-background breather in its classical sinh/cosh form."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    k1, k2 = complex(kappa).real, complex(kappa).imag
    nu = complex(nu)
    th1 = math.atan2(nu.real, -nu.imag)
    Th = 2.0 * k2 * (x + 4.0 * (3.0 * k1 * k1 - k2 * k2) * t) + math.log(2.0 * k2 * abs(kappa) / (k1 * abs(nu)))
    ph = 2.0 * k1 * (x + 4.0 * (k1 * k1 - 3.0 * k2 * k2) * t) + th1 - math.acos(k1 / abs(kappa))
    # divide through by cosh^2 to stay finite
    th_ = np.tanh(Th)
    sech = 1.0 / np.cosh(np.clip(Th, -700, 700))
    num = k2 * th_ * np.cos(ph) * sech + k1 * np.sin(ph) * sech
    den = (k2 * np.cos(ph) * sech) ** 2 + k1 * k1
    return -4.0 * k2 * k1 * num / den


# ---------------------------------------------------------------------------
# travelling wave


def q_per(x, t, w: WaveParams):
    """Elliptic travelling wave in cn form."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    b1, b2, b3 = w.beta1, w.beta2, w.beta3
    u = w.wavenumber * (x - w.speed * t) + w.x0
    _, cn, _ = jacobi_sn_cn_dn(u, w.m)
    return -b1 - b2 - b3 + 2.0 * (b2 + b3) * (b1 + b3) / (b2 + b3 - (b2 - b1) * cn * cn)


def q_per_trig(x, t, beta: float, beta3: float, x0: float = 0.0):
    """The m = 0 wave with beta1 = -beta2 written with cos^2."""
    if not 0.0 < beta < beta3:
        raise DomainError("need 0 < beta < beta3")
    x = np.asarray(x, dtype=float)
    speed = 4.0 * beta**2 + 2.0 * beta3**2
    arg = math.sqrt(beta3**2 - beta**2) * (x - speed * np.asarray(t, dtype=float)) + x0
    return -beta3 + 2.0 * (beta3**2 - beta**2) / (beta + beta3 - 2.0 * beta * np.cos(arg) ** 2)


def _elliptic_half_tau(m: float) -> tuple[float, complex]:
    K = elliptic_K(m)
    Kp = elliptic_K(math.sqrt((1.0 - m) * (1.0 + m)))
    return K, 0.5j * Kp / K


def _theta_ratio_part(omega, ct, dt, tau):
    th0 = complex(theta3(0.0, tau))
    thh = complex(theta3(0.5, tau))
    num = theta3(omega + 0.5, tau)
    den = theta3(omega, tau)
    if np.any(np.abs(den) == 0):
        raise AccuracyError("theta denominator vanished")
    return (ct - dt) * num * th0 / (den * thh)


def q_per_theta(x, t, c_tilde: float, d_tilde: float, Delta: float):
    """The beta1 = 0 wave built from Jacobi theta functions."""
    if not c_tilde > d_tilde > 0.0:
        raise DomainError("need c_tilde > d_tilde > 0")
    m = d_tilde / c_tilde
    K, tau = _elliptic_half_tau(m)
    U = -math.pi * c_tilde / K
    V = -2.0 * (c_tilde**2 + d_tilde**2) * U
    om = (np.asarray(x, dtype=float) * U + np.asarray(t, dtype=float) * V + Delta) / (2.0 * math.pi)
    q = _theta_ratio_part(om, c_tilde, d_tilde, tau)
    return _real_or_fail(q)


def _real_or_fail(q):
    q = np.asarray(q)
    if np.any(np.abs(q.imag) > 1e-8 * np.maximum(1.0, np.abs(q.real))):
        raise AccuracyError("theta-route value is not real", {"max_imag": float(np.max(np.abs(q.imag)))})
    out = q.real
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class HelConstants:
    """Constants of the three-band reduction to an elliptic problem."""

    c_tilde: float
    d_tilde: float
    K: float
    tau: complex
    U: float
    V: float
    Delta4: float
    abel_cplus: complex
    abel_cplus_direct: complex
    gamma_cplus: complex


def _abel_integrand(z, ct, dt, K):
    # omega = -ct/(4 i K) dz / sqrt((z^2+dt^2)(z^2+ct^2)), sqrt > 0 at z = 0
    s = complex(branch_sqrt(z, ct, 1) * branch_sqrt(z, dt, 1))
    return -ct / (4j * K) / s


def hel_constants(c_plus: float, d: float, c_minus: float) -> HelConstants:
    """Delta_4, the Abel image of c_+ and gamma(c_+) for the reduction."""
    if not (c_minus > d > c_plus > 0.0):
        raise DomainError(f"need c_- > d > c_+ > 0, got ({c_minus}, {d}, {c_plus})")
    ct = math.sqrt(c_minus**2 - c_plus**2)
    dt = math.sqrt(d * d - c_plus**2)
    m = dt / ct
    K, tau = _elliptic_half_tau(m)
    U = -math.pi * ct / K
    V = -2.0 * (c_minus**2 + c_plus**2 + d * d) * U
    # int_0^{c+} dz / sqrt(...) along the real axis, where the root is positive
    I = quad_real(lambda z: 1.0 / math.sqrt((z * z + dt * dt) * (z * z + ct * ct)), 0.0, c_plus,
                  what="Delta_4 integral")
    Delta4 = math.pi * ct * I / (2.0 * K)
    abel = -tau / 2.0 + 0.25 - Delta4 / (2j * math.pi)
    # independent route: u^2-substituted straight path from i ct to c_+
    top = 1j * ct
    span = c_plus - top

    def f(u):
        z = top + span * u * u
        return _abel_integrand(z, ct, dt, K) * 2.0 * span * u

    direct = quad_complex(f, 0.0, 1.0, what="Abel map")
    gam = complex(((c_plus - 1j * ct) / (c_plus + 1j * ct)) ** 0.25
                  / ((c_plus - 1j * dt) / (c_plus + 1j * dt)) ** 0.25)
    return HelConstants(ct, dt, K, tau, U, V, Delta4, abel, direct, gam)


def q_hel(x, t, c_plus: float, d: float, c_minus: float, Delta: float):
    """Travelling wave through the reduction of the three-band problem.

    A theta ratio with the shift Delta_4, plus the correction that removes
    the pole at k = 0, built from the elliptic solution evaluated at c_+.
    """
    hc = hel_constants(c_plus, d, c_minus)
    ct, dt, tau = hc.c_tilde, hc.d_tilde, hc.tau
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    om = (x * hc.U + t * hc.V + Delta) / (2.0 * math.pi) + 1j * hc.Delta4 / (2.0 * math.pi)
    q1 = _theta_ratio_part(om, ct, dt, tau)
    A = hc.abel_cplus
    g = hc.gamma_cplus
    m11 = (g + 1.0 / g) * theta3(A - om - 0.25, tau) / complex(theta3(A - 0.25, tau))
    m21 = (g - 1.0 / g) * theta3(A + 0.25 - om, tau) / complex(theta3(A + 0.25, tau))
    q2 = c_plus * (m11 - 1j * m21) / (m11 + 1j * m21)
    return _real_or_fail(q1 + q2)


def q_per_soliton_limit(eps: float, beta1: float, beta3: float, window=(-10.0, 10.0),
                        n: int = 2001) -> float:
    """Sup distance at t = 0 between the wave with beta2 = beta3(1 - eps) and the soliton.

    The wave is phased so that a crest sits at the origin, where the soliton
    on background beta1 with kappa0 = beta3 and zero phase peaks.
    """
    xs = np.linspace(window[0], window[1], n)
    if eps == 0.0:
        u = math.sqrt(beta3**2 - beta1**2) * xs
        _, cn, _ = jacobi_sn_cn_dn(u, 1.0)
        b2 = beta3
        qp = -beta1 - b2 - beta3 + 2.0 * (b2 + beta3) * (beta1 + beta3) / (b2 + beta3 - (b2 - beta1) * cn * cn)
    else:
        qp = q_per(xs, 0.0, WaveParams(beta1, beta3 * (1.0 - eps), beta3, 0.0))
    qs = q_soliton(xs, 0.0, beta1, beta3, 0.0, -1)
    return float(np.max(np.abs(qp - qs)))
