"""Thin wrapper over QUADPACK with an explicit error-estimate check."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import integrate

from .errors import AccuracyError

QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
ACCEPT_REL = 1e-8


def quad_real(fun, a, b, points=None, what="integral") -> float:
    """Adaptive integral of a real function; raises when the estimate is poor.

    QUADPACK's roundoff warnings are silenced because the tolerances asked
    for are deliberately tighter than what is accepted.
    """
    opts = dict(QUAD_OPTS)
    if points:
        lo, hi = min(a, b), max(a, b)
        pts = sorted({float(p) for p in points if lo < p < hi})
        if pts:
            opts["points"] = pts
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(fun, a, b, **opts)[:2]
    if not np.isfinite(val) or err > ACCEPT_REL * max(1.0, abs(val)):
        raise AccuracyError(f"{what}: error estimate {err:.2e} on [{a}, {b}]",
                            {"value": val, "error": err})
    return val


def quad_complex(fun, a, b, points=None, what="integral") -> complex:
    re = quad_real(lambda t: complex(fun(t)).real, a, b, points, what)
    im = quad_real(lambda t: complex(fun(t)).imag, a, b, points, what)
    return complex(re, im)
