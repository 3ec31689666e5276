"""Conserved quantities and confinement diagnostics for particle systems.

Radial quantities (support radii, radial velocity, tail functionals) are
measured about the center of mass; the far-field radial velocity decays
like |x|^-3 only in that frame.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate, optimize

from ._validation import check_increasing, check_positive
from .dynamics import velocity_at
from .exceptions import DomainError, InputError, QuadratureError
from .kernels import Blob, Family, blob_density, format_float, gamma, gamma_complement
from .measures import ParticleSystem, center_of_mass

DEFAULT_K = 6


@dataclass(frozen=True)
class Moments:
    mass: float
    center: np.ndarray
    inertia: float
    first_abs_moment: float

    @property
    def center_of_mass(self) -> np.ndarray:
        return self.center / self.mass


def moments(sys: ParticleSystem) -> Moments:
    m = sys.masses
    x, y = sys.positions[:, 0], sys.positions[:, 1]
    r2 = x * x + y * y
    return Moments(
        mass=math.fsum(m),
        center=np.array([math.fsum(m * x), math.fsum(m * y)]),
        inertia=math.fsum(m * r2),
        first_abs_moment=math.fsum(m * np.sqrt(r2)),
    )


def filtered_inertia(sys: ParticleSystem) -> float:
    """Moment of inertia of the smoothed vorticity: i0 + (blob second moment) * m0."""
    mo = moments(sys)
    return mo.inertia + sys.blob.second_moment * mo.mass


def _centered_radii(sys: ParticleSystem, centered: bool) -> np.ndarray:
    pos = sys.positions
    if centered:
        pos = pos - center_of_mass(sys)
    return np.hypot(pos[:, 0], pos[:, 1])


def support_radius(sys: ParticleSystem, quantile: float = 1.0, *, centered: bool = False) -> float:
    """Radius of the smallest origin-centered disk holding ``quantile`` of the mass.

    ``quantile=1`` is the particle support, ``max |X_i|``.  Pass
    ``centered=True`` to measure about the center of mass instead.
    """
    if not (0.0 < quantile <= 1.0):
        raise InputError(f"quantile must lie in (0, 1], got {quantile!r}")
    r = _centered_radii(sys, centered)
    if quantile == 1.0:
        return float(np.max(r))
    if not sys.nonnegative:
        raise DomainError("mass quantiles need nonnegative masses")
    order = np.argsort(r, kind="stable")
    cum = np.cumsum(sys.masses[order])
    target = quantile * cum[-1] * (1.0 - 1e-12)
    idx = int(np.searchsorted(cum, target, side="left"))
    return float(r[order][min(idx, r.size - 1)])


@dataclass(frozen=True)
class ConfinementParams:
    R0: float
    C: float
    k: int = DEFAULT_K

    def __post_init__(self):
        check_positive(self.R0, "R0")
        check_positive(self.C, "C")
        if int(self.k) != self.k or self.k < 1:
            raise InputError("k must be a positive integer")


def envelope(t, p: ConfinementParams):
    """``8 R0 + C (t log(2 + t))^(1/4)``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("envelope needs t >= 0")
    out = 8.0 * p.R0 + p.C * (t * np.log(2.0 + t)) ** 0.25
    return float(out) if out.ndim == 0 else out


def fit_envelope_constant(times, radii, *, window: float = 1.0, floor: float = 1e-12) -> float:
    """Smallest C with ``r(t) <= r(0) + C (t log(2+t))^(1/4)`` on ``0 < t <= window``.

    The growth rate is taken relative to the initial support so the fit
    reflects actual spreading; ``floor`` keeps C positive for static runs.
    """
    t = np.asarray(times, dtype=float)
    r = np.asarray(radii, dtype=float)
    sel = (t > 0) & (t <= window * (1 + 1e-12))
    if not np.any(sel):
        raise InputError("no recorded times inside the fitting window")
    growth = np.maximum(r[sel] - r[0], 0.0) / (t[sel] * np.log(2.0 + t[sel])) ** 0.25
    return float(max(np.max(growth), floor))


@dataclass(frozen=True)
class RadialProfile:
    radii: np.ndarray
    max_radial_speed: np.ndarray
    inside_support: np.ndarray

    def loglog_slope(self, r_min=None, r_max=None) -> float:
        sel = np.ones(self.radii.shape, dtype=bool)
        if r_min is not None:
            sel &= self.radii >= r_min * (1 - 1e-12)
        if r_max is not None:
            sel &= self.radii <= r_max * (1 + 1e-12)
        return loglog_slope(self.radii[sel], self.max_radial_speed[sel])


def loglog_slope(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.any(y <= 0):
        raise InputError("slope fit needs at least two points with positive values")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def radial_speed_profile(sys: ParticleSystem, radii, n_angles: int = 64) -> RadialProfile:
    """Max over ``n_angles`` equispaced probes of ``|u . x/|x||`` on each circle ``|x| = r``.

    Rows whose circle does not enclose the particle support are flagged in
    ``inside_support``; the decay bound is not claimed there.
    """
    grid = check_increasing(radii, "radii")
    if n_angles < 1:
        raise InputError("n_angles must be >= 1")
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    probes = (grid[:, None, None] * dirs[None, :, :]).reshape(-1, 2)
    u = velocity_at(sys, probes).reshape(grid.size, n_angles, 2)
    ur = np.abs(np.einsum("rak,ak->ra", u, dirs))
    r_supp = support_radius(sys, 1.0)
    return RadialProfile(grid, ur.max(axis=1), grid <= r_supp)


def eta(s):
    """Logistic function ``e^s / (e^s + 1)``, overflow-free for any ``s``."""
    s = np.asarray(s, dtype=float)
    e = np.exp(-np.abs(s))
    out = np.where(s >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(out) if out.ndim == 0 else out


def lambda_for(r: float, R0: float, k: int = DEFAULT_K) -> float:
    """Tail-functional width ``[4 (k+2) log(r/R0)]^-1``; must come out below 1."""
    if k < 1:
        raise InputError("k must be >= 1")
    check_positive(R0, "R0")
    log_ratio = math.log(r / R0) if r > 0 else -math.inf
    if log_ratio <= 0:
        raise DomainError(f"lambda_for needs r > R0 (r={r}, R0={R0})")
    lam = 1.0 / (4.0 * (k + 2) * log_ratio)
    if lam >= 1.0 - 1e-12:
        raise DomainError(f"r={r} too small: lambda={lam:.6g} is not below 1")
    return lam


def mass_tail(sys: ParticleSystem, r: float, lam: float, *, centered: bool = False) -> float:
    """Smoothed mass outside radius ``r``: sum_i m_i eta((|X_i|^2 - r^2) / (lam r^2))."""
    check_positive(r, "r")
    if not (0.0 < lam < 1.0):
        raise InputError(f"lambda must lie in (0, 1), got {lam!r}")
    rr = _centered_radii(sys, centered)
    s = (rr * rr - r * r) / (lam * r * r)
    return math.fsum(sys.masses * eta(s))


def mass_outside(sys: ParticleSystem, r: float, *, centered: bool = False) -> float:
    rr = _centered_radii(sys, centered)
    return math.fsum(sys.masses[rr > r])


def fr_gronwall_bound(t, r, lam, m0, C1, C_decay):
    """Right-hand side of the Gronwall estimate for the tail functional.

    The constants ``C1`` and ``C_decay`` are not determined by the analysis;
    this is an overlay for user-chosen values only.
    """
    return (m0 + lam * r**2 + lam * math.exp(1.0 / (2.0 * lam) - C_decay * r)) * math.exp(
        C1 * t / (lam**2 * r**4) - 1.0 / (2.0 * lam)
    )


# -- filtered (blob-smoothed) tail mass --------------------------------------

def _quad(f, a, b, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(f, a, b, points=points, epsabs=1e-14, epsrel=1e-10, limit=200)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc)) from exc
    return val


def blob_mass_outside_disk(blob: Blob, d: float, r: float) -> float:
    """Mass of a unit blob centered at distance ``d`` from the origin lying outside ``|y| = r``.

    Written as a 1D integral over the blob radius ``s``: the fraction of the
    circle of radius ``s`` around the center that falls outside the disk is
    ``arccos((r^2 - d^2 - s^2) / (2 d s)) / pi``.
    """
    if d == 0.0:
        return gamma_complement(blob, r)
    lo, hi = abs(r - d), r + d
    inner = gamma(blob, d - r) if d > r else 0.0
    outer = gamma_complement(blob, hi)

    def integrand(s):
        c = (r * r - d * d - s * s) / (2.0 * d * s)
        frac = math.acos(min(1.0, max(-1.0, c))) / math.pi
        return 2.0 * math.pi * s * blob_density(blob, s) * frac

    cut = hi if not blob.exponential_tail else min(hi, lo + 40.0 * blob.scale)
    pts = None
    if blob.family is Family.EULER_ALPHA and lo < blob.scale < cut:
        pts = [blob.scale]
    middle = _quad(integrand, lo, cut, points=pts) if cut > lo else 0.0
    return inner + middle + outer


def filtered_tail(sys: ParticleSystem, r: float, *, centered: bool = False) -> float:
    """Integral over ``|y| > r`` of the blob-smoothed vorticity ``sum_j m_j phi(y - X_j)``."""
    check_positive(r, "r")
    rr = _centered_radii(sys, centered)
    terms = [m * blob_mass_outside_disk(sys.blob, float(d), r) for d, m in zip(rr, sys.masses)]
    return math.fsum(terms)


def tail_transfer_bound(sys: ParticleSystem, r: float, c: float, *, centered: bool = False) -> float:
    """``c (1 + r) sum|m| e^(-c r) + (mass beyond r/2)``, which dominates the filtered tail."""
    rr = _centered_radii(sys, centered)
    far = math.fsum(sys.masses[rr > 0.5 * r])
    return c * (1.0 + r) * math.fsum(np.abs(sys.masses)) * math.exp(-c * r) + far


def fit_tail_constant(blob: Blob, r_grid) -> float:
    """Choose ``c`` so that ``c (1+r) e^(-c r) >= 1 - gamma(r/2)`` on ``r_grid``.

    Picks the c maximizing the worst-case log margin; raises if no c works
    (e.g. the algebraic Krasny tail over a long range).
    """
    r = np.asarray(r_grid, dtype=float)
    tail = np.maximum(np.asarray(gamma_complement(blob, 0.5 * r)), 1e-300)

    def neg_margin(logc):
        c = math.exp(logc)
        return -np.min(np.log(c * (1.0 + r)) - c * r - np.log(tail))

    res = optimize.minimize_scalar(neg_margin, bounds=(math.log(1e-6), math.log(1e6)), method="bounded")
    if res.fun > 0:
        raise DomainError(f"no exponential tail constant fits the {blob.family.value} blob on this grid")
    return math.exp(res.x)


# -- per-time records ---------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsConfig:
    probe_radii: tuple = ()
    fr_radii: tuple = ()
    k: int = DEFAULT_K
    n_angles: int = 64
    quantile: float = 0.99

    def to_dict(self) -> dict:
        return {"probe_radii": list(self.probe_radii), "fr_radii": list(self.fr_radii),
                "k": self.k, "n_angles": self.n_angles, "quantile": self.quantile}


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    moments: Moments
    filtered_inertia: float
    support_radius_max: float
    support_radius_quantile: float
    max_radial_speed: np.ndarray
    fr: np.ndarray
    envelope: float = math.nan
    flags: dict = field(default_factory=dict)

    def with_envelope(self, params: ConfinementParams) -> "DiagnosticsRecord":
        return replace(self, envelope=envelope(self.t, params))


def record(sys: ParticleSystem, params: ConfinementParams | None, config: DiagnosticsConfig) -> DiagnosticsRecord:
    """Evaluate every configured diagnostic on one snapshot.

    Component failures become NaN entries plus a message in ``flags``; this
    never raises for a valid snapshot.
    """
    flags = {}
    mo = moments(sys)
    try:
        fi = filtered_inertia(sys)
    except DomainError as exc:
        fi = math.nan
        flags["filtered_inertia"] = str(exc)
    r_max = support_radius(sys, 1.0, centered=True)
    try:
        r_q = support_radius(sys, config.quantile, centered=True)
    except DomainError as exc:
        r_q = math.nan
        flags["support_radius_quantile"] = str(exc)

    speeds = np.full(len(config.probe_radii), math.nan)
    if config.probe_radii:
        centered = ParticleSystem(sys.positions - center_of_mass(sys), sys.masses, sys.blob, sys.time)
        prof = radial_speed_profile(centered, config.probe_radii, config.n_angles)
        speeds = prof.max_radial_speed
        if np.any(prof.inside_support):
            flags["radial_speed_inside_support"] = [float(r) for r in prof.radii[prof.inside_support]]

    fr = np.full(len(config.fr_radii), math.nan)
    if params is not None:
        for i, r in enumerate(config.fr_radii):
            try:
                fr[i] = mass_tail(sys, r, lambda_for(r, params.R0, params.k), centered=True)
            except (DomainError, InputError) as exc:
                flags[f"f_r@{r:g}"] = str(exc)
    env = envelope(sys.time, params) if params is not None else math.nan
    return DiagnosticsRecord(sys.time, mo, fi, r_max, r_q, speeds, fr, env, flags)


def timeseries_header(config: DiagnosticsConfig) -> list[str]:
    cols = ["t", "mass", "center_x", "center_y", "inertia", "filtered_inertia", "abs_moment",
            "r_supp_max", "r_supp_q99"]
    cols += [f"max_radial_speed@{r:g}" for r in config.probe_radii]
    cols += [f"f_r@{r:g}" for r in config.fr_radii]
    cols.append("envelope")
    return cols


def timeseries_row(rec: DiagnosticsRecord) -> list[str]:
    mo = rec.moments
    vals = [rec.t, mo.mass, mo.center[0], mo.center[1], mo.inertia, rec.filtered_inertia,
            mo.first_abs_moment, rec.support_radius_max, rec.support_radius_quantile]
    vals += list(rec.max_radial_speed) + list(rec.fr) + [rec.envelope]
    return [format_float(v) for v in vals]


def write_timeseries_csv(path, records, config: DiagnosticsConfig) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(timeseries_header(config))
        for rec in records:
            w.writerow(timeseries_row(rec))
