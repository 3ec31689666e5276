"""Independent quadrature references used to validate the closed forms.

Nothing here calls the package's own Bessel routines: the Bessel oracle
integrates the integral representation in extended precision, and the
density used by the gamma and inertia oracles comes from scipy.special.
"""
from __future__ import annotations

import math
import warnings

import mpmath
import numpy as np
from scipy import integrate, special

from .exceptions import QuadratureError
from .kernels import Blob, Family


def bessel_k_quadrature(order: int, x: float, dps: int = 30) -> float:
    """K_order(x) = int_0^inf exp(-x cosh t) cosh(order t) dt, by tanh-sinh quadrature."""
    if x <= 0:
        raise ValueError("x must be positive")
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        # Beyond t_max the integrand is below exp(-(3 dps)) relative to its peak.
        t_max = mpmath.acosh(1 + (3 * dps + 10) / xm)
        knots = [mpmath.mpf(k) for k in range(int(t_max) + 1)] + [t_max]
        val = mpmath.quad(lambda t: mpmath.exp(-xm * mpmath.cosh(t)) * mpmath.cosh(order * t), knots)
        return float(val)


def reference_density(blob: Blob, s):
    """Radial blob density from scipy.special (independent of the package kernels)."""
    a = blob.scale
    u = np.asarray(s, dtype=float) / a
    if blob.family is Family.EULER_ALPHA:
        return special.k0(u) / (2.0 * math.pi * a * a)
    if blob.family is Family.GAUSSIAN:
        return np.exp(-u * u) / (math.pi * a * a)
    return 1.0 / (math.pi * a * a * (1.0 + u * u) ** 2)


def _quad(f, a, b, epsrel):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(f, a, b, epsabs=0.0, epsrel=epsrel, limit=500)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature on [{a}, {b}] did not converge: {exc}") from exc
    return val


def gamma_quadrature(blob: Blob, r: float, epsrel: float = 1e-10) -> float:
    """2 pi int_0^r s g(s) ds by adaptive Gauss-Kronrod on scale-sized panels."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return 0.0
    a = blob.scale
    f = lambda s: 2.0 * math.pi * s * float(reference_density(blob, s))
    # Panels: [0, a/1000] isolates the log singularity; geometric up to a,
    # then panels of width a.
    edges = [0.0]
    e = a * 1e-3
    while e < min(r, a):
        edges.append(e)
        e *= 10.0
    e = a
    while e < r:
        edges.append(e)
        e += a if e < 50 * a else 10 * a
    edges.append(r)
    pieces = [_quad(f, lo, hi, epsrel) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]
    return math.fsum(pieces)


def normalization_quadrature(blob: Blob, R: float, epsrel: float = 1e-12) -> float:
    """2 pi int_0^R s g(s) ds; identical to ``gamma_quadrature`` but named for intent."""
    return gamma_quadrature(blob, R, epsrel)


def _radial_nodes(scale: float, reach: float, per_panel: int = 20):
    x, w = np.polynomial.legendre.leggauss(per_panel)
    edges = [0.0] + [scale * 10.0**k for k in range(-4, 1)]
    e = scale
    while e < reach:
        e = min(e + scale, reach)
        edges.append(e)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    return np.concatenate(nodes), np.concatenate(weights)


def filtered_inertia_quadrature(positions, masses, blob: Blob, n_angles: int = 16, reach: float = 60.0) -> float:
    """int |x|^2 sum_j m_j phi(x - X_j) dx by polar tensor quadrature around each X_j.

    Radial Gauss-Legendre panels out to ``reach * scale`` and a trapezoid
    rule in angle.  Only meaningful for blobs with exponential tails.
    """
    rho, w_rho = _radial_nodes(blob.scale, reach * blob.scale)
    theta = 2.0 * math.pi * np.arange(n_angles) / n_angles
    w_theta = 2.0 * math.pi / n_angles
    g = reference_density(blob, rho) * rho * w_rho * w_theta
    ex, ey = np.cos(theta), np.sin(theta)
    pos = np.asarray(positions, dtype=float)
    m = np.asarray(masses, dtype=float)
    total = []
    for (x0, y0), mj in zip(pos, m):
        px = x0 + rho[:, None] * ex[None, :]
        py = y0 + rho[:, None] * ey[None, :]
        total.append(mj * float(np.sum((px * px + py * py) * g[:, None])))
    return math.fsum(total)


def filtered_inertia_grid(positions, masses, blob: Blob, half_width: float, h: float) -> float:
    """Midpoint-rule Cartesian quadrature of int |x|^2 omega^eps over a square box."""
    n = int(math.ceil(2 * half_width / h))
    c = -half_width + (np.arange(n) + 0.5) * (2 * half_width / n)
    cell = (2 * half_width / n) ** 2
    X, Y = np.meshgrid(c, c, indexing="ij")
    r2 = X * X + Y * Y
    total = 0.0
    for (x0, y0), mj in zip(np.asarray(positions, float), np.asarray(masses, float)):
        d = np.hypot(X - x0, Y - y0)
        total += mj * float(np.sum(r2 * reference_density(blob, d))) * cell
    return total
