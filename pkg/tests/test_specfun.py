import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad, solve_ivp

from mkdvstep.errors import DomainError
from mkdvstep.specfun import (
    R_branch,
    branch_sqrt,
    elliptic_E,
    elliptic_K,
    elliptic_KE,
    jacobi_sn_cn_dn,
    log_gamma,
    theta3,
)

moduli = st.floats(0.0, 0.999999, allow_nan=False)


def test_K_E_degenerate_values():
    assert elliptic_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert elliptic_E(0.0) == pytest.approx(math.pi / 2, abs=1e-15)
    assert elliptic_E(1.0) == pytest.approx(1.0, abs=1e-15)


def test_K_E_at_half_against_quadrature():
    K, _ = quad(lambda th: 1 / math.sqrt(1 - 0.25 * math.sin(th) ** 2), 0, math.pi / 2, epsabs=1e-14)
    E, _ = quad(lambda th: math.sqrt(1 - 0.25 * math.sin(th) ** 2), 0, math.pi / 2, epsabs=1e-14)
    assert elliptic_K(0.5) == pytest.approx(K, abs=1e-13)
    assert elliptic_E(0.5) == pytest.approx(E, abs=1e-13)
    assert elliptic_K(0.5) == pytest.approx(1.685750354812596, abs=1e-13)
    assert elliptic_E(0.5) == pytest.approx(1.467462209339427, abs=1e-13)


def test_K_logarithmic_edge():
    for m in (1 - 1e-6, 1 - 1e-9):
        lead = 0.5 * math.log(16 / (1 - m * m))
        assert elliptic_K(m) / lead == pytest.approx(1.0, abs=2e-5)


def test_K_rejects_modulus_one():
    with pytest.raises(DomainError):
        elliptic_K(1.0)


@given(st.floats(-6, -1e-3))
def test_legendre_relation(logm):
    m = 10.0**logm
    mp_ = math.sqrt(1 - m * m)
    K, E = elliptic_KE(m)
    K2, E2 = elliptic_KE(mp_)
    assert E * K2 + E2 * K - K * K2 == pytest.approx(math.pi / 2, abs=1e-11)


@given(moduli)
def test_KE_match_mpmath(m):
    assert elliptic_K(m) == pytest.approx(float(mp.ellipk(m * m)), rel=1e-12)
    assert elliptic_E(m) == pytest.approx(float(mp.ellipe(m * m)), rel=1e-12)


def test_jacobi_special_points():
    assert jacobi_sn_cn_dn(0.0, 0.6) == pytest.approx((0.0, 1.0, 1.0), abs=1e-15)
    m = 0.6
    sn, cn, dn = jacobi_sn_cn_dn(elliptic_K(m), m)
    assert (sn, cn, dn) == pytest.approx((1.0, 0.0, math.sqrt(1 - m * m)), abs=1e-12)


def test_jacobi_against_amplitude_ode():
    # phi' = sqrt(1 - m^2 sin^2 phi), sn = sin phi
    m, u = 0.6455, 0.7
    sol = solve_ivp(lambda s, y: [math.sqrt(1 - m * m * math.sin(y[0]) ** 2)], (0, u), [0.0],
                    rtol=1e-13, atol=1e-14)
    phi = sol.y[0, -1]
    sn, cn, dn = jacobi_sn_cn_dn(u, m)
    assert sn == pytest.approx(math.sin(phi), abs=1e-11)
    assert cn == pytest.approx(math.cos(phi), abs=1e-11)
    assert dn == pytest.approx(math.sqrt(1 - m * m * math.sin(phi) ** 2), abs=1e-11)


def test_jacobi_identities_random(rng):
    u = rng.uniform(-20, 20, 1000)
    m = rng.uniform(0, 0.9999, 1000)
    for uu, mm in zip(u, m):
        sn, cn, dn = jacobi_sn_cn_dn(uu, mm)
        assert sn * sn + cn * cn == pytest.approx(1.0, abs=1e-12)
        assert dn * dn + mm * mm * sn * sn == pytest.approx(1.0, abs=1e-12)


@given(st.floats(-5, 5), moduli)
def test_jacobi_match_mpmath(u, m):
    ref = [float(mp.ellipfun(f, u, m=m * m)) for f in ("sn", "cn", "dn")]
    assert jacobi_sn_cn_dn(u, m) == pytest.approx(ref, abs=1e-11)


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-1, 1), st.floats(0.3, 3))
def test_theta3_quasi_periodicity(zr, zi, tr, ti):
    z, tau = complex(zr, zi), complex(tr, ti)
    th = theta3(z, tau)
    assert abs(theta3(z + 1, tau) - th) < 1e-11 * max(1, abs(th))
    assert abs(theta3(-z, tau) - th) < 1e-11 * max(1, abs(th))
    shifted = theta3(z + tau, tau) * np.exp(1j * math.pi * tau + 2j * math.pi * z)
    assert abs(shifted - th) < 1e-11 * max(1, abs(th))


@given(st.floats(-2, 2), st.floats(-0.5, 0.5), st.floats(0.4, 3))
def test_theta3_mpmath(zr, zi, ti):
    z, tau = complex(zr, zi), complex(0.1, ti)
    q = mp.exp(1j * mp.pi * tau)
    ref = complex(mp.jtheta(3, mp.pi * z, q))
    assert abs(theta3(z, tau) - ref) < 1e-11 * max(1, abs(ref))


def test_theta3_dn_relation():
    # dn(2K x) = sqrt(m') theta3(x, tau) / theta4(x, tau), theta4(x) = theta3(x + 1/2)
    m = 0.7
    K = elliptic_K(m)
    Kp = elliptic_K(math.sqrt(1 - m * m))
    tau = 1j * Kp / K
    for x in (0.0, 0.13, 0.37, 0.8):
        lhs = jacobi_sn_cn_dn(2 * K * x, m)[2]
        rhs = (1 - m * m) ** 0.25 * theta3(x, tau) / theta3(x + 0.5, tau)
        assert abs(lhs - rhs) < 1e-10


def test_log_gamma_basic():
    assert abs(log_gamma(1.0)) < 1e-14
    y = 1.0
    mod = math.exp(log_gamma(1j * y).real)
    assert mod == pytest.approx(math.sqrt(math.pi / (y * math.sinh(math.pi * y))), rel=1e-13)


def test_arg_gamma_integral_oracle():
    # Binet: ln Gamma(z) = (z - 1/2) ln z - z + ln(2 pi)/2 + int_0^inf (1/2 - 1/t + 1/(e^t - 1)) e^{-zt}/t dt
    # applied at z = 1 + 0.3i, then shifted back with ln Gamma(z) = ln Gamma(z + 1) - ln z
    z = 1 + 0.3j

    def integrand(t, part):
        g = 0.5 - 1 / t + 1 / math.expm1(min(t, 700.0)) if t > 1e-6 else t / 12
        val = g * np.exp(-z * t) / t
        return val.real if part == 0 else val.imag

    I = complex(quad(integrand, 0, np.inf, args=(0,), limit=200, epsabs=1e-15)[0],
                quad(integrand, 0, np.inf, args=(1,), limit=200, epsabs=1e-15)[0])
    lg1 = (z - 0.5) * np.log(z) - z + 0.5 * math.log(2 * math.pi) + I
    ref = lg1 - np.log(0.3j)
    assert abs(log_gamma(0.3j) - ref) < 1e-11
    assert log_gamma(0.3j).imag == pytest.approx(float(mp.arg(mp.gamma(0.3j))), abs=1e-12)


@given(st.floats(-8, 8), st.floats(-8, 8))
def test_log_gamma_mpmath(a, b):
    z = complex(a, b)
    if abs(z) < 1e-3 or (b == 0 and a <= 0 and a == round(a)):
        return
    ref = complex(mp.loggamma(z))
    val = log_gamma(z)
    assert abs(np.exp(val - ref) - 1) < 1e-11


def test_branch_sqrt_basic():
    assert branch_sqrt(1e-14, 1.0) == pytest.approx(1.0, abs=1e-12)
    for r in (50, 100):
        k = r * np.exp(0.3j)
        assert abs(branch_sqrt(k, 1.0) / k - 1) < 1 / r**2


def test_branch_sqrt_side_by_continuation():
    c = 1.0
    target = 0.5j
    # walk from k = +0 to 0.5i + 0 along a path in Re k > 0, tracking the sqrt continuously
    path = 1e-9 + np.linspace(0, 1, 4001) ** 1 * target + 0.2 * np.sin(np.pi * np.linspace(0, 1, 4001))
    w = c
    for k in path:
        cand = np.sqrt(k * k + c * c + 0j)
        w = cand if abs(cand - w) < abs(cand + w) else -cand
    assert abs(branch_sqrt(target, c, side=1) - w) < 1e-6


def test_branch_sqrt_cut_product():
    c = 0.9
    for y in np.linspace(-0.85, 0.85, 17):
        k = 1j * y
        p = branch_sqrt(k, c, side=1) * branch_sqrt(k, c, side=-1)
        assert p == pytest.approx(-abs(c * c - y * y), abs=1e-13)


def test_R_branch_values():
    cp, d, cm = 0.4, 0.6, 0.8
    assert R_branch(1e-14, cp, d, cm) == pytest.approx(cm * d * cp, abs=1e-12)
    k = 0.7 + 0.2j
    assert R_branch(k.conjugate(), cp, d, cm) == pytest.approx(np.conj(R_branch(k, cp, d, cm)), abs=1e-14)


def test_R_branch_on_cut_by_continuation():
    cp, d, cm = 0.4, 0.6, 0.8
    target = 1j * (d + cm) / 2
    s = np.linspace(0, 1, 8001)
    path = 1e-9 + s * target + 0.3 * np.sin(np.pi * s)
    w = cm * d * cp
    for k in path:
        cand = np.sqrt((k * k + cp * cp) * (k * k + d * d) * (k * k + cm * cm) + 0j)
        w = cand if abs(cand - w) < abs(cand + w) else -cand
    assert abs(R_branch(target, cp, d, cm, side=1) - w) < 1e-6
