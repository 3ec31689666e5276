"""Modified Bessel functions of the second kind, orders 0 and 1.

Two regimes:

* ``0 < x <= 2``: the ascending series (with the logarithmic term),
  truncated at a fixed degree and evaluated by Horner's rule.
* ``x > 2``: piecewise Chebyshev expansions, in ``t = 4/x - 1``, of the
  exponentially scaled functions ``sqrt(x) e^x K_nu(x)``.  The coefficients
  are interpolated at import time from Steed's continued fraction, which is
  accurate to a few ulp for ``x >= 2`` but too slow for the pair loops.
  Eight panels of degree 8 keep each evaluation short.

The compiled scalar kernels (``k0_k1``, ``one_minus_xk1``) are what the
dynamics code calls; ``bessel_k0``/``bessel_k1`` are the checked,
array-friendly entry points.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit
from numpy.polynomial import chebyshev

from .exceptions import DomainError

EULER_GAMMA = 0.57721566490153286061
_CHEB_DEGREE = 8
_CHEB_PANELS = 8
_SERIES_CUTOFF = 2.0


def _steed_scaled(x: float) -> tuple[float, float]:
    """``sqrt(x) e^x (K0(x), K1(x))`` by Steed's continued fraction (x >= 2)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 2000):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels) < 1e-17 * abs(s):
            break
    h *= a1
    k0 = math.sqrt(math.pi / 2.0) / s
    return k0, k0 * (x + 0.5 - h) / x


def _panel_table(order):
    width = 2.0 / _CHEB_PANELS
    rows = []
    for p in range(_CHEB_PANELS):
        lo = -1.0 + p * width

        def f(s):
            t = lo + 0.5 * width * (np.atleast_1d(s) + 1.0)
            return np.array([_steed_scaled(4.0 / (ti + 1.0))[order] for ti in t])

        rows.append(chebyshev.chebinterpolate(f, _CHEB_DEGREE))
    return np.ascontiguousarray(rows)


_CHEB_K0 = _panel_table(0)
_CHEB_K1 = _panel_table(1)


@njit(cache=True)
def _clenshaw(table, t):
    # t in [-1, 1]: pick the panel, map to its local variable, sum the series.
    p = int((t + 1.0) * (0.5 * _CHEB_PANELS))
    if p >= _CHEB_PANELS:
        p = _CHEB_PANELS - 1
    s = (t + 1.0) * _CHEB_PANELS - (2 * p + 1)
    c = table[p]
    b1 = 0.0
    b2 = 0.0
    s2 = 2.0 * s
    for k in range(_CHEB_DEGREE, 0, -1):
        b1, b2 = c[k] + s2 * b1 - b2, b1
    return c[0] + s * b1 - b2


def _series_table():
    # Power-series coefficients in y = x^2/4 for x <= 2 (so y <= 1); degree 14
    # leaves the truncation error below 1e-20.
    n = 15
    rows = np.zeros((4, n))
    h = 0.0
    for k in range(n):
        if k:
            h += 1.0 / k
        f0 = 1.0 / math.factorial(k) ** 2
        f1 = 1.0 / (math.factorial(k) * math.factorial(k + 1))
        rows[0, k] = f0                                # I0
        rows[1, k] = h * f0                            # K0 harmonic part
        rows[2, k] = f1                                # 2 I1 / x
        rows[3, k] = (2.0 * h + 1.0 / (k + 1)) * f1    # K1 harmonic part
    return np.ascontiguousarray(rows[:, ::-1])


_SERIES = _series_table()


@njit(cache=True)
def _series(x):
    # Returns K0, K1 and 1 - x K1 (the last without cancellation).
    y = 0.25 * x * x
    lg = math.log(0.5 * x) + EULER_GAMMA
    i0 = 0.0
    s0 = 0.0
    i1s = 0.0
    s1 = 0.0
    for k in range(_SERIES.shape[1]):
        i0 = i0 * y + _SERIES[0, k]
        s0 = s0 * y + _SERIES[1, k]
        i1s = i1s * y + _SERIES[2, k]
        s1 = s1 * y + _SERIES[3, k]
    k0 = s0 - lg * i0
    tail = y * (s1 - 2.0 * lg * i1s)
    k1 = (1.0 - tail) / x
    return k0, k1, tail


@njit(cache=True)
def k0_k1(x):
    """(K0(x), K1(x)); NaN for x <= 0."""
    if not x > 0.0:
        return math.nan, math.nan
    if x <= _SERIES_CUTOFF:
        k0, k1, _ = _series(x)
        return k0, k1
    t = 4.0 / x - 1.0
    f = math.exp(-x) / math.sqrt(x)
    return f * _clenshaw(_CHEB_K0, t), f * _clenshaw(_CHEB_K1, t)


@njit(cache=True)
def one_minus_xk1(x):
    """1 - x K1(x), the Bessel-potential cumulative mass inside radius x."""
    if x <= 0.0:
        return 0.0
    if x <= _SERIES_CUTOFF:
        return _series(x)[2]
    if x > 40.0:
        # x K1(x) < 1e-16 here, so the result rounds to 1.
        return 1.0
    return 1.0 - math.sqrt(x) * math.exp(-x) * _clenshaw(_CHEB_K1, 4.0 / x - 1.0)


@njit(cache=True)
def _k_array(x, order, out):
    for i in range(x.shape[0]):
        out[i] = k0_k1(x[i])[order]


def _evaluate(x, order):
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"K{order}(x) requires x > 0")
    flat = np.ascontiguousarray(arr.reshape(-1))
    out = np.empty_like(flat)
    _k_array(flat, order, out)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def bessel_k0(x):
    """Modified Bessel function K0 for scalar or array ``x > 0``."""
    return _evaluate(x, 0)


def bessel_k1(x):
    """Modified Bessel function K1 for scalar or array ``x > 0``."""
    return _evaluate(x, 1)
