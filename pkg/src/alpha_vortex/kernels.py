"""Blob profiles, cumulative circulation functions and the regularized
Biot-Savart kernel ``K_reg(x) = x^perp / (2 pi |x|^2) * gamma(|x|)``.

Three radial blob families are supported, all normalized to unit mass:

=============  ==========================================  ======================
family         density g(r)                                gamma(r)
=============  ==========================================  ======================
euler-alpha    K0(r/a) / (2 pi a^2)                        1 - (r/a) K1(r/a)
gaussian       exp(-(r/e)^2) / (pi e^2)                    1 - exp(-(r/e)^2)
krasny         1 / (pi e^2 (1 + (r/e)^2)^2)                r^2 / (r^2 + e^2)
=============  ==========================================  ======================

The Euler-alpha density is the Green's function of ``(I - a^2 Laplacian)``;
its closed-form gamma is checked against direct quadrature in the test suite
and by ``alpha-vortex verify kernels``.
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from ._validation import as_points, check_increasing, check_positive, check_radius_array
from .bessel import bessel_k1, k0_k1, one_minus_xk1
from .exceptions import DomainError

EULER_ALPHA = 0
GAUSSIAN = 1
KRASNY = 2


class Family(str, enum.Enum):
    EULER_ALPHA = "euler-alpha"
    GAUSSIAN = "gaussian"
    KRASNY = "krasny"

    @property
    def code(self) -> int:
        return _FAMILY_CODES[self]

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"eulera": "euler-alpha", "alpha": "euler-alpha", "euler-α": "euler-alpha"}
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown blob family {value!r} (expected one of: {names})") from None


_FAMILY_CODES = {Family.EULER_ALPHA: EULER_ALPHA, Family.GAUSSIAN: GAUSSIAN, Family.KRASNY: KRASNY}


@dataclass(frozen=True)
class Blob:
    """A radial smoothing kernel: family plus length scale (alpha or epsilon)."""

    family: Family
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "scale", check_positive(self.scale, "blob scale"))

    @property
    def code(self) -> int:
        return self.family.code

    @property
    def exponential_tail(self) -> bool:
        """Whether the density decays exponentially (Krasny decays like r^-4)."""
        return self.family is not Family.KRASNY

    @property
    def tail_model(self) -> str:
        return "exponential" if self.exponential_tail else "algebraic"

    @property
    def second_moment(self) -> float:
        """Integral of ``|x|^2 * blob(x)`` over the plane."""
        if self.family is Family.EULER_ALPHA:
            return 4.0 * self.scale**2
        if self.family is Family.GAUSSIAN:
            return self.scale**2
        raise DomainError("the Krasny blob has an infinite second moment")

    def to_dict(self) -> dict:
        return {"family": self.family.value, "scale": self.scale}


# -- compiled scalar kernels -------------------------------------------------

@njit(cache=True)
def density_scalar(code, scale, r):
    s = r / scale
    norm = 1.0 / (math.pi * scale * scale)
    if code == EULER_ALPHA:
        return 0.5 * norm * k0_k1(s)[0]
    if code == GAUSSIAN:
        return norm * math.exp(-s * s)
    return norm / (1.0 + s * s) ** 2


@njit(cache=True)
def gamma_scalar(code, scale, r):
    s = r / scale
    if code == EULER_ALPHA:
        return one_minus_xk1(s)
    if code == GAUSSIAN:
        return -math.expm1(-s * s)
    s2 = s * s
    return s2 / (1.0 + s2)


@njit(cache=True)
def kernel_factor(code, scale, r2):
    """gamma(r) / (2 pi r^2), with the value 0 at r = 0.

    Multiplying by ``x^perp`` gives the kernel; zero at the origin makes the
    self-interaction of a particle vanish.
    """
    if r2 == 0.0:
        return 0.0
    if code == GAUSSIAN:
        return -math.expm1(-r2 / (scale * scale)) / (2.0 * math.pi * r2)
    if code == KRASNY:
        return 1.0 / (2.0 * math.pi * (r2 + scale * scale))
    return one_minus_xk1(math.sqrt(r2) / scale) / (2.0 * math.pi * r2)


@njit(cache=True)
def _map_radial(which, code, scale, r, out):
    for i in range(r.shape[0]):
        if which == 0:
            out[i] = density_scalar(code, scale, r[i])
        else:
            out[i] = gamma_scalar(code, scale, r[i])


@njit(cache=True)
def _k_reg_points(code, scale, x, out):
    for i in range(x.shape[0]):
        f = kernel_factor(code, scale, x[i, 0] * x[i, 0] + x[i, 1] * x[i, 1])
        out[i, 0] = -x[i, 1] * f
        out[i, 1] = x[i, 0] * f


def _radial(which, b: Blob, r):
    arr = check_radius_array(r)
    flat = np.ascontiguousarray(arr.reshape(-1))
    out = np.empty_like(flat)
    _map_radial(which, b.code, b.scale, flat, out)
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


# -- public operations -------------------------------------------------------

def blob_density(b: Blob, r):
    """Radial density g(r) of the blob; the Euler-alpha profile is singular at 0."""
    arr = check_radius_array(r)
    if b.family is Family.EULER_ALPHA and np.any(arr == 0.0):
        raise DomainError("the Euler-alpha density has a logarithmic singularity at r = 0")
    return _radial(0, b, arr)


def gamma(b: Blob, r):
    """Fraction of the blob's mass inside radius ``r``: 2 pi int_0^r s g(s) ds."""
    return _radial(1, b, r)


def gamma_complement(b: Blob, r):
    """Blob mass outside radius ``r`` (``1 - gamma``), accurate in the far tail."""
    arr = check_radius_array(r)
    s = arr / b.scale
    if b.family is Family.GAUSSIAN:
        out = np.exp(-s * s)
    elif b.family is Family.KRASNY:
        out = 1.0 / (1.0 + s * s)
    else:
        out = np.where(s > 0, s * bessel_k1(np.where(s > 0, s, 1.0)), 1.0)
    return float(out) if np.ndim(out) == 0 else out


def k_reg(b: Blob, x):
    """Velocity induced at ``x`` by a unit-circulation blob at the origin.

    Accepts one 2-vector or an ``(n, 2)`` array; ``k_reg(b, 0) == 0``.
    """
    arr = np.asarray(x, dtype=float)
    pts = as_points(arr, "x")
    out = np.empty_like(pts)
    _k_reg_points(b.code, b.scale, pts, out)
    return out[0] if arr.ndim == 1 else out


@dataclass(frozen=True)
class KernelTable:
    blob: Blob
    radii: np.ndarray
    gamma_values: np.ndarray

    def to_csv(self, dest=None) -> str:
        """Write ``r,gamma`` rows with 17 significant digits; returns the text."""
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "gamma"])
        for r, g in zip(self.radii, self.gamma_values):
            w.writerow([format_float(r), format_float(g)])
        text = buf.getvalue()
        if dest is not None:
            Path(dest).write_text(text, encoding="utf-8", newline="")
        return text


def tabulate(b: Blob, radii) -> KernelTable:
    grid = check_increasing(radii, "radii")
    g = np.asarray(gamma(b, grid), dtype=float).reshape(-1)
    return KernelTable(blob=b, radii=grid, gamma_values=g)


def format_float(value) -> str:
    """Round-trippable decimal with 17 significant digits."""
    return format(float(value), ".17g")
