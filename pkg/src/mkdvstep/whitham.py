"""Whitham modulation speeds, the DSW cone and the phase functions of the
dispersive-shock region.

The characteristic speeds are written in terms of s = m^2 and the gaps
K - E and E - (1 - s) K, both of which come out of the AGM without
cancellation.  That makes the degenerate limits s -> 0 and s -> 1 plain
evaluations instead of special cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AccuracyError, DomainError
from ._quad import quad_complex, quad_real
from .specfun import R_branch, branch_sqrt, elliptic_KE_gap

__all__ = [
    "WhithamTriple",
    "DswState",
    "whitham_speed",
    "whitham_speed_dbeta2",
    "dsw_cone",
    "region_of",
    "invert_d",
    "g_phase",
    "g_prime_dsw",
    "B_and_Delta",
    "dsw_state",
    "breather_speed_const",
    "breather_speed_elliptic",
    "effective_speed",
    "whitham_selfsimilar",
]

@dataclass(frozen=True)
class WhithamTriple:
    """Wave parameters beta1 <= beta2 <= beta3 (only squares enter the speeds)."""

    beta1: float
    beta2: float
    beta3: float

    def __post_init__(self):
        b1, b2, b3 = float(self.beta1), float(self.beta2), float(self.beta3)
        if not (b1 <= b2 <= b3):
            raise DomainError(f"need beta1 <= beta2 <= beta3, got ({b1}, {b2}, {b3})")
        if not (b1 * b1 <= b2 * b2 <= b3 * b3) or b3 * b3 == b1 * b1:
            raise DomainError(f"squares must satisfy beta1^2 <= beta2^2 < beta3^2, got ({b1}, {b2}, {b3})")

    @property
    def s(self) -> float:
        """The squared modulus m^2."""
        r1, r2, r3 = self.beta1**2, self.beta2**2, self.beta3**2
        return min(1.0, max(0.0, (r2 - r1) / (r3 - r1)))

    @property
    def m(self) -> float:
        return math.sqrt(self.s)


def _gap_ratios(s: float):
    """(s K/(K-E), s(1-s) K/(E-(1-s)K), (1-s) K/E) including both endpoints."""
    if s == 0.0:
        return 2.0, 2.0, 1.0
    if s == 1.0:
        return 1.0, 0.0, 0.0
    K, E, gap = elliptic_KE_gap(math.sqrt(s))
    lower = E - (1.0 - s) * K
    return s * K / gap, s * (1.0 - s) * K / lower, (1.0 - s) * K / E


def whitham_speed(j: int, t: WhithamTriple, limits: bool = True) -> float:
    """Characteristic speed W_j of the modulation system.

    With ``limits`` False a triple sitting on a coalescence that makes W_j a
    0/0 expression (s = 0 for j = 1, 2; s = 1 for j = 2, 3) is rejected.
    """
    if j not in (1, 2, 3):
        raise DomainError(f"speed index must be 1, 2 or 3, got {j}")
    r1, r2, r3 = t.beta1**2, t.beta2**2, t.beta3**2
    s = t.s
    if not limits and ((s == 0.0 and j in (1, 2)) or (s == 1.0 and j in (2, 3))):
        raise DomainError(f"W_{j} is a limit at m^2 = {s}; pass limits=True")
    sigma2 = 2.0 * (r1 + r2 + r3)
    d13 = r3 - r1
    g1, g2, g3 = _gap_ratios(s)
    if j == 1:
        return sigma2 - 4.0 * d13 * g1
    if j == 2:
        return sigma2 - 4.0 * d13 * g2
    return sigma2 + 4.0 * d13 * g3


def whitham_speed_dbeta2(t: WhithamTriple) -> float:
    """Analytic dW_2/dbeta_2 from the derivatives of K and E in s."""
    s = t.s
    b2 = t.beta2
    if s in (0.0, 1.0):
        raise DomainError("derivative is only implemented for 0 < m < 1")
    K, E, _ = elliptic_KE_gap(math.sqrt(s))
    low = E - (1.0 - s) * K
    dG = ((1.0 - 2.0 * s) * K + 0.5 * low) / low - s * (1.0 - s) * K * K / (2.0 * low * low)
    return 4.0 * b2 * (1.0 - 2.0 * dG)


def dsw_cone(c_plus: float, c_minus: float) -> tuple[float, float]:
    """Trailing and leading edge speeds (in x/t) of the oscillation zone."""
    if not (c_minus > c_plus >= 0.0):
        raise DomainError(f"need c_- > c_+ >= 0, got ({c_minus}, {c_plus})")
    return -6.0 * c_minus**2 + 12.0 * c_plus**2, 4.0 * c_minus**2 + 2.0 * c_plus**2


def region_of(xi: float, c_plus: float, c_minus: float) -> str:
    """Region of the ray xi = x/(12 t)."""
    trail, lead = dsw_cone(c_plus, c_minus)
    if 12.0 * xi >= lead:
        return "right_const"
    if 12.0 * xi >= trail:
        return "dsw"
    if xi > -0.5 * c_minus**2:
        return "middle_left"
    return "utmost_left"


def _solve_beta2(z: float, beta1: float, beta3: float) -> float:
    """Root of W_2(beta1, b, beta3) = z for |beta1| < b < beta3."""
    lo, hi = abs(beta1), beta3
    w_lo = whitham_speed(2, WhithamTriple(beta1, lo, beta3))
    w_hi = whitham_speed(2, WhithamTriple(beta1, hi, beta3))
    if not (w_lo < z < w_hi):
        raise DomainError(f"z={z} is outside the open range ({w_lo}, {w_hi})")

    def resid(b):
        return whitham_speed(2, WhithamTriple(beta1, b, beta3)) - z

    # bisection to a safe bracket, then Newton with the analytic slope
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if resid(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    b = 0.5 * (lo + hi)
    for _ in range(50):
        f = resid(b)
        if abs(f) < 1e-14 * max(1.0, abs(z)):
            break
        step = f / whitham_speed_dbeta2(WhithamTriple(beta1, b, beta3))
        nb = b - step
        if not (lo <= nb <= hi):
            nb = 0.5 * (lo + hi)
        if resid(nb) < 0.0:
            lo = max(lo, nb)
        else:
            hi = min(hi, nb)
        if abs(nb - b) < 1e-16 * max(1.0, abs(b)):
            b = nb
            break
        b = nb
    return b


def invert_d(xi: float, c_plus: float, c_minus: float) -> float:
    """The d in (c_+, c_-) with 12 xi = W_2(c_+, d, c_-)."""
    if c_plus <= 0.0:
        raise DomainError("d(xi) needs c_+ > 0; the c_+ = 0 oscillation zone is not supported")
    dsw_cone(c_plus, c_minus)
    return _solve_beta2(12.0 * xi, c_plus, c_minus)


# ---------------------------------------------------------------------------
# g-function


def _b_coeff(c_plus, d, c_minus):
    cp2, d2, cm2 = c_plus**2, d * d, c_minus**2
    s = (d2 - cp2) / (cm2 - cp2)
    K, E, _ = elliptic_KE_gap(math.sqrt(s))
    b0 = cm2 - (cm2 - cp2) * E / K
    b1 = (cm2 * cp2 + cm2 * d2 + cp2 * d2) / 3.0 - (cm2 + cp2 + d2) * b0 / 6.0
    return b0, b1


def g_prime_dsw(k, xi: float, c_plus: float, d: float, c_minus: float, side: int = 1):
    """Derivative 12 P(k)/R(k) of the oscillation-zone g-function."""
    b0, b1 = _b_coeff(c_plus, d, c_minus)
    k = np.asarray(k, dtype=complex)
    half_sum = 0.5 * (c_minus**2 + c_plus**2 + d * d)
    P = k**5 + k**3 * (xi + half_sum) + (b1 + xi * b0) * k
    R = R_branch(k, c_plus, d, c_minus, side)
    # at k = +-id both vanish and the quotient goes to zero like sqrt(k -+ id)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(R == 0, 0.0, 12.0 * P / np.where(R == 0, 1.0, R))
    return complex(out) if out.ndim == 0 else out


def _quad_c(fun, a, b, points=None):
    return quad_complex(fun, a, b, points, "g-function quadrature")


def _g_dsw(k: complex, xi: float, c_plus: float, d: float, c_minus: float, side: int) -> complex:
    """Integral of g' from ic_- to k, written as 4k^3+12 xi k plus a decaying part."""
    top = 1j * c_minus
    span = k - top

    b0, b1 = _b_coeff(c_plus, d, c_minus)
    sq = (c_plus**2, d * d, c_minus**2)
    h = 0.5 * sum(sq)
    lin = b1 + xi * b0

    def integrand(t):
        s = top + span * t * t
        if abs(s) > 2.0 * c_minus:
            # g'/12 = s^2 N(u) prod(1 + a u)^(-1/2), u = 1/s^2; subtract s^2 + xi without cancellation
            u = 1.0 / (s * s)
            N = 1.0 + (xi + h) * u + lin * u * u
            L = -0.5 * sum(np.log1p(a * u) for a in sq)
            rem = 12.0 * s * s * (N * np.expm1(L) + h * u + lin * u * u)
        else:
            gp = complex(g_prime_dsw(s, xi, c_plus, d, c_minus, side))
            rem = gp - 12.0 * s * s - 12.0 * xi
        return rem * 2.0 * span * t

    pts = None
    if k.real == 0.0:
        pts = []
        for y in (d, c_plus, -c_plus, -d):
            tt = (c_minus - y) / (c_minus - k.imag) if k.imag != c_minus else 2.0
            if 0.0 < tt < 1.0:
                pts.append(math.sqrt(tt))
        pts = pts or None
    tail = _quad_c(integrand, 0.0, 1.0, pts)
    return 4.0 * k**3 + 12.0 * xi * k + (4j * c_minus**3 - 12j * xi * c_minus) + tail


def _on_cut(k: complex, c: float) -> bool:
    return k.real == 0.0 and abs(k.imag) < c


def _ghat(k: complex, xi: float, c: float, side: int) -> complex:
    return (4.0 * k * k - 2.0 * c * c + 12.0 * xi) * complex(branch_sqrt(k, c, side))


def g_phase(k, xi: float, data, side: int | None = None):
    """The region-dependent phase g(k, xi); ``data`` supplies (c_-, c_+).

    ``side`` (+1 for Re k > 0) is required for points on the cut.
    """
    cm, cp = data.c_minus, data.c_plus
    region = region_of(xi, cp, cm)
    arr = np.asarray(k, dtype=complex)
    cut = cp if region == "right_const" else cm
    out = np.empty(arr.shape, dtype=complex)
    d = invert_d(xi, cp, cm) if region == "dsw" else None
    for idx, kk in np.ndenumerate(arr):
        kk = complex(kk)
        if side is None and _on_cut(kk, cut):
            raise DomainError(f"k={kk} lies on the cut; pass side=+1 or -1")
        sd = 1 if side is None else side
        if region == "right_const":
            out[idx] = _ghat(kk, xi, cp, sd)
        elif region == "dsw":
            out[idx] = _g_dsw(kk, xi, cp, d, cm, sd)
        else:
            out[idx] = _ghat(kk, xi, cm, sd)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# phases of the modulated wave


@dataclass(frozen=True)
class DswState:
    """Modulation data on one ray of the oscillation zone."""

    xi: float
    d: float
    m: float
    K: float
    E: float
    B: float
    Delta: float
    x0: float
    select: tuple[bool, ...] = ()


def _B(xi, c_plus, d, c_minus, K):
    ct = math.sqrt(c_minus**2 - c_plus**2)
    return -12.0 * math.pi * ct * (xi - (c_minus**2 + c_plus**2 + d * d) / 6.0) / K


def _r_unit(y, c_plus, d, c_minus):
    v = complex(R_branch(1j * y, c_plus, d, c_minus, 1))
    u = v / abs(v)
    return complex(round(u.real), round(u.imag))


def _delta(data, d, select, K):
    """Real phase constant of the modulated wave."""
    from .scattering import _log_tt2_axis

    cm, cp = data.c_minus, data.c_plus
    ct = math.sqrt(cm * cm - cp * cp)
    tt_h = _log_tt2_axis(data.eigens, select)
    mid, half = 0.5 * (cm + d), 0.5 * (cm - d)
    others = np.array([cp, -cp, -d, -cm])
    ph1 = _r_unit(mid, cp, d, cm)

    def f1(th):
        # offset from the nearer endpoint, free of cancellation at both ends
        if th >= 0.0:
            base, off = cm, -2.0 * half * math.sin(0.25 * math.pi - 0.5 * th) ** 2
        else:
            base, off = d, 2.0 * half * math.sin(0.25 * math.pi + 0.5 * th) ** 2
        y = base + off
        L = float(data.log_abs_a2(base, off))
        if tt_h is not None:
            L += float(tt_h(y))
        return L * y / math.sqrt(float(np.prod(np.abs((base - others) + off))))

    v1 = quad_real(f1, -0.5 * math.pi, 0.5 * math.pi, what="phase integral")
    total = -v1 / ph1
    if tt_h is not None and cp > 0.0:
        ph2 = _r_unit(0.5 * cp, cp, d, cm)

        def f2(th):
            y = cp * math.sin(th)
            return float(tt_h(y)) * y / math.sqrt((cm * cm - y * y) * (d * d - y * y))

        v2 = quad_real(f2, 0.0, 0.5 * math.pi, what="phase integral")
        total += -v2 / ph2
    if abs(total.imag) > 1e-12 * max(1.0, abs(total)):
        raise AccuracyError("phase integral is not real", diagnostics={"value": total})
    return -ct * total.real / K


def dsw_state(xi: float, data, select=None) -> DswState:
    """d, modulus, B, Delta and x0 on the ray ``xi`` of the oscillation zone.

    ``select`` picks the eigenvalues entering the Blaschke product; by
    default those with Im g(kappa, xi) < 0.
    """
    cm, cp = data.c_minus, data.c_plus
    if region_of(xi, cp, cm) != "dsw":
        raise DomainError(f"xi={xi} is not inside the oscillation zone")
    d = invert_d(xi, cp, cm)
    m = math.sqrt((d * d - cp * cp) / (cm * cm - cp * cp))
    K, E, _ = elliptic_KE_gap(m)
    if select is None:
        select = [
            complex(g_phase(e.kappa, xi, data, side=1)).imag < 0.0 for e in data.eigens
        ]
    elif isinstance(select, int):
        select = [i < select for i in range(len(data.eigens))]
    select = tuple(bool(v) for v in select)
    Delta = _delta(data, d, select, K)
    x0 = -K * Delta / math.pi + K
    return DswState(xi, d, m, K, E, _B(xi, cp, d, cm, K), Delta, x0, select)


def B_and_Delta(xi: float, data, select=None) -> tuple[float, float, float]:
    """(B, Delta, x0) on the ray ``xi``."""
    st = dsw_state(xi, data, select)
    return st.B, st.Delta, st.x0


# ---------------------------------------------------------------------------
# breather speeds


def _chi(kappa: complex, c: float) -> complex:
    w = complex(np.sqrt(complex(kappa) ** 2 + c * c))
    return complex(abs(w.real), abs(w.imag))


def breather_speed_const(kappa: complex, c: float) -> float:
    """Speed on a constant background ``c``; solitons (Re kappa = 0, |kappa| > c) use 2c^2 + 4|kappa|^2."""
    kappa = complex(kappa)
    if not kappa.imag > 0.0:
        raise DomainError(f"need Im kappa > 0, got {kappa}")
    if kappa.real == 0.0 and abs(kappa) > c:
        return 2.0 * c * c + 4.0 * abs(kappa) ** 2
    x = _chi(kappa, c)
    return 4.0 * x.imag**2 + 6.0 * c * c - 12.0 * x.real**2


def _elliptic_ratio(kappa: complex, c_plus: float, d: float, c_minus: float) -> float:
    """xi solving Im g(kappa, xi) = 0 for a frozen d."""
    cp2, d2, cm2 = c_plus**2, d * d, c_minus**2
    b0, b1 = _b_coeff(c_plus, d, c_minus)
    half_sum = 0.5 * (cm2 + cp2 + d2)
    top = 1j * c_minus
    span = kappa - top

    def path(t):
        sc = span * t * t  # s - i c_-, kept exact to avoid cancellation in the factors
        s = top + sc
        prod = sc * (sc + 2j * c_minus) * (sc + 1j * (c_minus - d)) * (sc + 1j * (c_minus + d)) * (s * s + cp2)
        r = np.sqrt(prod)
        r0 = complex(R_branch(s, c_plus, d, c_minus, 1))
        if abs(r - r0) > abs(r + r0):
            r = -r
        return s, 2.0 * span * t / r

    def num(t):
        s, w = path(t)
        return s * (s**4 + half_sum * s * s + b1) * w

    def den(t):
        s, w = path(t)
        return s * (s * s + b0) * w

    # near d = c_- the weight is ~ 1/sqrt(ts^2 + t^2); t = ts sinh(u) flattens it
    ts = math.sqrt(max(c_minus - d, 0.0) / abs(span))
    if 0.0 < ts < 0.1:
        u1 = math.asinh(1.0 / ts)
        top_i = _quad_c(lambda u: num(ts * math.sinh(u)) * ts * math.cosh(u), 0.0, u1).imag
        bot_i = _quad_c(lambda u: den(ts * math.sinh(u)) * ts * math.cosh(u), 0.0, u1).imag
    else:
        top_i = _quad_c(num, 0.0, 1.0).imag
        bot_i = _quad_c(den, 0.0, 1.0).imag
    if bot_i == 0.0:
        raise DomainError("breather speed ratio is singular for this kappa")
    return -top_i / bot_i


def breather_speed_elliptic(kappa: complex, c_plus: float, c_minus: float,
                            d: float | None = None) -> float:
    """Speed (in x/t) of a breather trapped in the oscillation zone.

    With ``d`` given the modulus is frozen; otherwise d follows the ray of
    the breather itself and the fixed point is solved by Brent's method.
    """
    kappa = complex(kappa)
    if kappa.real < 0.0:
        kappa = -kappa.conjugate()
    if not (kappa.imag > 0.0 and kappa.real > 0.0):
        raise DomainError("elliptic-background speed needs Re kappa > 0, Im kappa > 0")
    if d is not None:
        return 12.0 * _elliptic_ratio(kappa, c_plus, d, c_minus)
    trail, lead = dsw_cone(c_plus, c_minus)
    v_plus = breather_speed_const(kappa, c_plus)
    v_minus = breather_speed_const(kappa, c_minus)
    if v_plus >= lead or v_minus <= trail:
        raise DomainError(
            "kappa is not trapped; use the constant-background speed "
            f"(V on c_+ = {v_plus:.6g}, V on c_- = {v_minus:.6g})"
        )
    eps = 1e-9 * (lead - trail)
    lo, hi = trail / 12.0 + eps, lead / 12.0 - eps

    def F(xi):
        return xi - _elliptic_ratio(kappa, c_plus, invert_d(xi, c_plus, c_minus), c_minus)

    f_lo, f_hi = F(lo), F(hi)
    if f_lo * f_hi > 0.0:
        raise DomainError("no self-consistent trapped speed inside the oscillation zone")
    xi = optimize.brentq(F, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return 12.0 * xi


def effective_speed(eig, c_minus: float, c_plus: float) -> tuple[float, str]:
    """(speed, region) where region is 'right', 'left' or 'dsw' (trapped).

    A spectral point whose speed on c_+ beats the leading edge travels on
    the right background; one slower than the trailing edge on c_- stays on
    the left.  Anything else is trapped: its speed comes from the elliptic
    background when c_+ > 0, otherwise the c_+ speed is kept as an ordering key.
    """
    kappa = complex(getattr(eig, "kappa", eig))
    lead = 4.0 * c_minus**2 + 2.0 * c_plus**2
    trail = -6.0 * c_minus**2 + 12.0 * c_plus**2
    v_plus = breather_speed_const(kappa, c_plus)
    if v_plus >= lead:
        return v_plus, "right"
    v_minus = breather_speed_const(kappa, c_minus)
    if v_minus <= trail:
        return v_minus, "left"
    if c_plus > 0.0 and kappa.real > 0.0:
        try:
            return breather_speed_elliptic(kappa, c_plus, c_minus), "dsw"
        except DomainError:
            pass
    return v_plus, "dsw"


# ---------------------------------------------------------------------------
# self-similar solution


def _trig_branch(z, c_plus, c_minus, start):
    """Projected Newton for W_1 = W_2 = z with beta3 = c_-, from ``start``."""
    b1, b2 = start
    cm = c_minus

    def F(u, v):
        t = WhithamTriple(u, v, cm)
        return np.array([whitham_speed(1, t) - z, whitham_speed(2, t) - z])

    h = 1e-7
    for _ in range(60):
        f = F(b1, b2)
        if np.max(np.abs(f)) < 1e-12:
            return b1, b2, float(np.max(np.abs(f)))
        J = np.empty((2, 2))
        J[:, 0] = (F(b1 + h, max(b2, abs(b1 + h))) - f) / h
        J[:, 1] = (F(b1, b2 + h) - f) / h
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            break
        nb1 = min(b1 + step[0], 0.0)
        nb2 = max(b2 + step[1], abs(nb1))
        b1, b2 = nb1, nb2
    f = F(b1, b2)
    res = float(np.max(np.abs(f)))
    if res < 1e-10:
        return b1, b2, res
    # on the m = 0 line W_1 = W_2 = 12 beta1^2 - 6 beta3^2
    r = math.sqrt(max(z + 6.0 * cm * cm, 0.0) / 12.0)
    f = F(-r, r)
    res = float(np.max(np.abs(f)))
    if res > 1e-10:
        raise AccuracyError("two-parameter Whitham solve did not converge", diagnostics={"z": z, "residual": res})
    return -r, r, res


def whitham_selfsimilar(z_grid, c_plus: float, c_minus: float) -> np.ndarray:
    """Self-similar (beta1, beta2, beta3) against z = x/t, one row per z.

    Outside the wave zone the degenerate constant triples are returned.
    c_+ may be negative, in which case the trailing part is the
    two-parameter branch with beta3 = c_-.
    """
    if not c_minus > abs(c_plus):
        raise DomainError(f"need c_- > |c_+|, got ({c_minus}, {c_plus})")
    z_arr = np.atleast_1d(np.asarray(z_grid, dtype=float))
    out = np.empty((z_arr.size, 3))
    cm, cp = c_minus, c_plus
    lead = 4.0 * cm * cm + 2.0 * cp * cp
    if cp >= 0.0:
        trail = -6.0 * cm * cm + 12.0 * cp * cp
        for i, z in enumerate(z_arr):
            if z <= trail:
                b2 = cp
            elif z >= lead:
                b2 = cm
            else:
                b2 = _solve_beta2(z, cp, cm)
            out[i] = (cp, b2, cm)
        return out
    z_star = -6.0 * cm * cm + 12.0 * cp * cp
    left = -6.0 * cm * cm
    order = np.argsort(-z_arr)  # continue downward from the corner at z*
    prev = (cp, -cp)
    for i in order:
        z = z_arr[i]
        if z >= lead:
            out[i] = (cp, cm, cm)
        elif z >= z_star:
            b2 = -cp if z == z_star else _solve_beta2(z, cp, cm)
            out[i] = (cp, b2, cm)
        elif z > left:
            b1, b2, _ = _trig_branch(z, cp, cm, prev)
            prev = (b1, b2)
            out[i] = (b1, b2, cm)
        else:
            out[i] = (0.0, 0.0, cm)
    return out
