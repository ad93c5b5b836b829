"""Special functions used throughout the package.

Everything here uses the elliptic *modulus* convention: the integrand of
K(m) is 1/sqrt(1 - m^2 sin^2 s).  Functions accept numpy arrays where that
is natural and return arrays of matching shape.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

__all__ = [
    "elliptic_K",
    "elliptic_E",
    "elliptic_KE",
    "elliptic_KE_gap",
    "jacobi_sn_cn_dn",
    "theta3",
    "log_gamma",
    "branch_sqrt",
    "R_branch",
]

_AGM_TOL = 1e-16
_AGM_MAXIT = 60


def _agm_sequence(m: float) -> tuple[list[float], list[float], list[float]]:
    """Return the AGM lists (a_n, b_n, c_n) started from (1, m', m)."""
    a = [1.0]
    b = [math.sqrt((1.0 - m) * (1.0 + m))]
    c = [m]
    for _ in range(_AGM_MAXIT):
        if abs(c[-1]) <= _AGM_TOL * a[-1]:
            break
        an, bn = a[-1], b[-1]
        a.append(0.5 * (an + bn))
        b.append(math.sqrt(an * bn))
        c.append(0.5 * (an - bn))
    return a, b, c


def _check_modulus(m: float, allow_one: bool) -> float:
    m = float(m)
    if not math.isfinite(m) or m < 0.0 or m > 1.0 or (m == 1.0 and not allow_one):
        raise DomainError(f"modulus must lie in [0, 1{']' if allow_one else ')'}, got {m}")
    return m


def elliptic_KE(m: float) -> tuple[float, float]:
    """Both complete integrals (K, E) from a single AGM run; 0 <= m < 1."""
    K, E, _ = elliptic_KE_gap(m)
    return K, E


def elliptic_KE_gap(m: float) -> tuple[float, float, float]:
    """(K, E, K - E) with K - E free of cancellation as m -> 0."""
    m = _check_modulus(m, allow_one=False)
    a, _, c = _agm_sequence(m)
    K = math.pi / (2.0 * a[-1])
    s = 0.0
    for n, cn in enumerate(c):
        s += 2.0 ** (n - 1) * cn * cn
    return K, K * (1.0 - s), K * s


def elliptic_K(m: float) -> float:
    """Complete elliptic integral of the first kind, 0 <= m < 1."""
    return elliptic_KE(m)[0]


def elliptic_E(m: float) -> float:
    """Complete elliptic integral of the second kind, 0 <= m <= 1."""
    m = _check_modulus(m, allow_one=True)
    if m == 1.0:
        return 1.0
    return elliptic_KE(m)[1]


def jacobi_sn_cn_dn(u, m: float):
    """Jacobi (sn, cn, dn) of modulus m by the descending Landen/AGM scheme.

    ``u`` may be a scalar or array.  m = 1 uses the hyperbolic limits.
    """
    m = _check_modulus(m, allow_one=True)
    u = np.asarray(u, dtype=float)
    if m == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    if m == 1.0:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech.copy()
    a, _, c = _agm_sequence(m)
    n = len(a) - 1
    phi = (2.0**n) * a[n] * u
    phi_prev = phi
    for j in range(n, 0, -1):
        phi_prev = phi
        phi = 0.5 * (phi + np.arcsin(c[j] * np.sin(phi) / a[j]))
    sn = np.sin(phi)
    cn = np.cos(phi)
    if n == 0:
        dn = np.sqrt(1.0 - m * m * sn * sn)
    else:
        # the ratio form is 0/0 where cn vanishes
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = cn / np.cos(phi_prev - phi)
        dn = np.where(np.abs(cn) > 1e-4, ratio, np.sqrt(np.maximum(1.0 - m * m * sn * sn, 0.0)))
        dn = dn if dn.ndim else float(dn)
    return sn, cn, dn


def theta3(z, tau, tol: float = 1e-15):
    """Jacobi theta series sum_n exp(i pi tau n^2 + 2 i pi z n).

    The sum is centred at the dominant index for each z, and truncated once
    the Gaussian tail falls below ``tol`` relative to the largest term.
    """
    tau = complex(tau)
    if not tau.imag > 0.0:
        raise DomainError(f"theta3 requires Im tau > 0, got {tau}")
    z = np.asarray(z, dtype=complex)
    q = tau.imag
    # terms relative to the peak decay like exp(-pi q j^2) at offset j
    half = int(math.ceil(math.sqrt(-math.log(tol) / (math.pi * q)))) + 2
    centre = np.rint(-z.imag / q)
    offsets = np.arange(-half, half + 1, dtype=float)
    idx = centre[..., None] + offsets
    expo = 1j * math.pi * tau * idx * idx + 2j * math.pi * z[..., None] * idx
    return np.exp(expo).sum(axis=-1)


_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_log_gamma(z: np.ndarray) -> np.ndarray:
    w = z - 1.0
    acc = np.full_like(w, _LANCZOS_P[0])
    for i, p in enumerate(_LANCZOS_P[1:], start=1):
        acc = acc + p / (w + i)
    t = w + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (w + 0.5) * np.log(t) - t + np.log(acc)


def log_gamma(z):
    """Principal branch of log Gamma(z), analytic off (-inf, 0].

    Lanczos (g = 7, nine terms) for Re z >= 1/2; smaller real parts are
    shifted upward with the recurrence, which preserves the principal branch.
    """
    zarr = np.asarray(z, dtype=complex)
    near_int = np.abs(zarr - np.rint(zarr.real))
    if np.any((zarr.real <= 0.0) & (near_int == 0.0)):
        raise DomainError("log_gamma has poles at the non-positive integers")
    shift = np.where(zarr.real < 0.5, np.ceil(0.5 - zarr.real), 0.0)
    nmax = int(shift.max()) if shift.size else 0
    w = zarr + shift
    out = _lanczos_log_gamma(w)
    for k in range(nmax):
        active = shift > k
        if not np.any(active):
            break
        out = out - np.where(active, np.log(np.where(active, zarr + k, 1.0)), 0.0)
    if np.ndim(z) == 0:
        return complex(out)
    return out


def branch_sqrt(k, c: float, side: int = 1):
    """sqrt(k^2 + c^2) with the cut on the vertical segment [ic, -ic].

    Positive at k = +0 and asymptotic to k at infinity.  For arguments exactly
    on the cut, ``side = +1`` returns the boundary value from Re k > 0 and
    ``side = -1`` the value from Re k < 0.  ``c = 0`` gives f(k) = k.
    """
    if c < 0.0:
        raise DomainError("branch_sqrt needs c >= 0")
    if side not in (1, -1):
        raise DomainError("side must be +1 or -1")
    k = np.asarray(k, dtype=complex)
    x, y = k.real, k.imag
    w = np.sqrt(k * k + c * c)
    off_axis = np.where(x > 0.0, w, -w)
    ay = np.abs(y)
    gap = 1j * np.sign(y) * np.sqrt(np.maximum(ay * ay - c * c, 0.0))
    cut = side * np.sqrt(np.maximum(c * c - ay * ay, 0.0)) + 0j
    on_axis = np.where(ay > c, gap, cut)
    out = np.where(x == 0.0, on_axis, off_axis)
    if out.ndim == 0:
        return complex(out)
    return out


def R_branch(k, c_plus: float, d: float, c_minus: float, side: int = 1):
    """sqrt((k^2+c_-^2)(k^2+d^2)(k^2+c_+^2)), positive at k = +0.

    Cuts lie on [ic_-, id], [ic_+, -ic_+] and [-id, -ic_-]; the side flag
    selects boundary values exactly as in :func:`branch_sqrt`.
    """
    if not (c_minus > d > c_plus >= 0.0):
        raise DomainError(f"need c_- > d > c_+ >= 0, got ({c_minus}, {d}, {c_plus})")
    return (
        branch_sqrt(k, c_minus, side)
        * branch_sqrt(k, d, side)
        * branch_sqrt(k, c_plus, side)
    )
