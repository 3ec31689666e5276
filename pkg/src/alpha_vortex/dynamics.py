"""Velocity evaluation and time stepping for the blob ODE system

    dX_i/dt = sum_j m_j K_reg(X_i - X_j).

Velocities are direct O(M^2) sums.  In deterministic mode the pair loop
visits each unordered pair once in fixed index order, applies the
interaction with opposite signs to both particles and accumulates with
Kahan compensation, so results are bit-reproducible.  Otherwise target rows
are summed independently across numba threads.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numba
import numpy as np
from numba import njit, prange
from scipy.spatial import cKDTree

from ._validation import as_points, check_positive
from .exceptions import InputError, IntegrationBlowUp
from .kernels import EULER_ALPHA, GAUSSIAN, format_float, kernel_factor
from .measures import ParticleSystem

BLOWUP_FACTOR = 1e6

if "NUMBA_THREADING_LAYER" not in os.environ:
    # Prefer OpenMP: the TBB probe emits a version warning on many installs.
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]


@njit(cache=True, inline="always")
def _factor(code, scale, r2):
    # Literal family codes let each branch compile to a specialized inner
    # loop; a runtime code in the hot loop costs about 1.5x.
    if code == EULER_ALPHA:
        return kernel_factor(EULER_ALPHA, scale, r2)
    if code == GAUSSIAN:
        return kernel_factor(GAUSSIAN, scale, r2)
    return kernel_factor(code, scale, r2)


@njit(cache=True)
def _pair_sum(code, scale, pos, m, out):
    n = pos.shape[0]
    su = np.zeros(n)
    sv = np.zeros(n)
    cu = np.zeros(n)
    cv = np.zeros(n)
    for i in range(n):
        xi = pos[i, 0]
        yi = pos[i, 1]
        mi = m[i]
        for j in range(i + 1, n):
            dx = xi - pos[j, 0]
            dy = yi - pos[j, 1]
            f = _factor(code, scale, dx * dx + dy * dy)
            kx = -dy * f
            ky = dx * f
            # Kahan updates: i gets +m_j k, j gets -m_i k.
            y = m[j] * kx - cu[i]
            t = su[i] + y
            cu[i] = (t - su[i]) - y
            su[i] = t
            y = m[j] * ky - cv[i]
            t = sv[i] + y
            cv[i] = (t - sv[i]) - y
            sv[i] = t
            y = -mi * kx - cu[j]
            t = su[j] + y
            cu[j] = (t - su[j]) - y
            su[j] = t
            y = -mi * ky - cv[j]
            t = sv[j] + y
            cv[j] = (t - sv[j]) - y
            sv[j] = t
    for i in range(n):
        out[i, 0] = su[i]
        out[i, 1] = sv[i]


@njit(cache=True)
def _row_sum(code, scale, targets, pos, m, out):
    for k in range(targets.shape[0]):
        su = 0.0
        sv = 0.0
        cu = 0.0
        cv = 0.0
        xk = targets[k, 0]
        yk = targets[k, 1]
        for j in range(pos.shape[0]):
            dx = xk - pos[j, 0]
            dy = yk - pos[j, 1]
            f = m[j] * _factor(code, scale, dx * dx + dy * dy)
            y = -dy * f - cu
            t = su + y
            cu = (t - su) - y
            su = t
            y = dx * f - cv
            t = sv + y
            cv = (t - sv) - y
            sv = t
        out[k, 0] = su
        out[k, 1] = sv


@njit(cache=True, parallel=True)
def _row_sum_parallel(code, scale, targets, pos, m, out):
    for k in prange(targets.shape[0]):
        su = 0.0
        sv = 0.0
        xk = targets[k, 0]
        yk = targets[k, 1]
        for j in range(pos.shape[0]):
            dx = xk - pos[j, 0]
            dy = yk - pos[j, 1]
            f = m[j] * _factor(code, scale, dx * dx + dy * dy)
            su -= dy * f
            sv += dx * f
        out[k, 0] = su
        out[k, 1] = sv


def set_threads(n: int | None) -> int:
    """Bound numba's worker pool; returns the thread count in effect."""
    limit = numba.config.NUMBA_NUM_THREADS
    if n is not None:
        numba.set_num_threads(max(1, min(int(n), limit)))
    return numba.get_num_threads()


def velocity_at(sys: ParticleSystem, points, *, deterministic: bool = True) -> np.ndarray:
    """Velocity ``sum_j m_j K_reg(p - X_j)`` at each row of ``points``."""
    pts = as_points(points)
    out = np.empty_like(pts)
    kern = _row_sum if deterministic else _row_sum_parallel
    kern(sys.blob.code, sys.blob.scale, pts, sys.positions, sys.masses, out)
    return out


def _rhs_array(code, scale, pos, m, deterministic):
    out = np.empty_like(pos)
    if deterministic:
        _pair_sum(code, scale, pos, m, out)
    else:
        _row_sum_parallel(code, scale, pos, pos, m, out)
    return out


def rhs(sys: ParticleSystem, *, deterministic: bool = True) -> np.ndarray:
    """Particle velocities; a particle exerts no velocity on itself."""
    return _rhs_array(sys.blob.code, sys.blob.scale, np.ascontiguousarray(sys.positions),
                      sys.masses, deterministic)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    method: str = "rk4"
    deterministic_reduction: bool = True
    record_stride: int = 1

    def __post_init__(self):
        check_positive(self.dt, "dt")
        method = str(self.method).lower()
        if method not in ("rk4", "euler"):
            raise InputError(f"unknown integrator {self.method!r}")
        object.__setattr__(self, "method", method)
        if not (self.t_end == 0 or self.t_end >= self.dt):
            raise InputError("t_end must be 0 or at least dt")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise InputError("record_stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.t_end / self.dt * (1 + 1e-12)))


@dataclass
class Trajectory:
    snapshots: list = field(default_factory=list)
    record_stride: int = 1

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def final(self) -> ParticleSystem:
        return self.snapshots[-1]


def _advance(pos, m, code, scale, dt, method, det):
    k1 = _rhs_array(code, scale, pos, m, det)
    if method == "euler":
        return pos + dt * k1
    k2 = _rhs_array(code, scale, pos + (0.5 * dt) * k1, m, det)
    k3 = _rhs_array(code, scale, pos + (0.5 * dt) * k2, m, det)
    k4 = _rhs_array(code, scale, pos + dt * k3, m, det)
    return pos + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _blowup_radius(sys: ParticleSystem) -> float:
    r0 = float(np.max(np.hypot(sys.positions[:, 0], sys.positions[:, 1])))
    return BLOWUP_FACTOR * max(r0, sys.blob.scale)


def step(sys: ParticleSystem, cfg: IntegratorConfig, *, blowup_radius: float | None = None) -> ParticleSystem:
    """Advance one step of ``cfg.method``; masses and blob are carried over unchanged."""
    pos = _advance(np.ascontiguousarray(sys.positions), sys.masses, sys.blob.code, sys.blob.scale,
                   cfg.dt, cfg.method, cfg.deterministic_reduction)
    if not np.all(np.isfinite(pos)):
        raise IntegrationBlowUp(f"non-finite position at t={sys.time + cfg.dt:g}", state=sys)
    if blowup_radius is not None and np.max(np.abs(pos)) > blowup_radius:
        raise IntegrationBlowUp(f"particle left the disk of radius {blowup_radius:g}", state=sys)
    return sys.with_positions(pos, sys.time + cfg.dt)


def simulate(sys: ParticleSystem, cfg: IntegratorConfig, hooks=(), *, keep_snapshots: bool = True) -> Trajectory:
    """Integrate to ``cfg.t_end``, recording every ``record_stride`` steps.

    Each hook is called with every recorded snapshot (the initial state
    included).  On blow-up an :class:`IntegrationBlowUp` is raised whose
    ``trajectory`` holds the snapshots recorded so far.
    """
    traj = Trajectory(record_stride=cfg.record_stride)
    t0 = sys.time
    limit = _blowup_radius(sys)

    def emit(s):
        if keep_snapshots:
            traj.snapshots.append(s)
        else:
            traj.snapshots[:] = [s]
        for hook in hooks:
            hook(s)

    emit(sys)
    pos = np.ascontiguousarray(sys.positions)
    code, scale = sys.blob.code, sys.blob.scale
    for k in range(1, cfg.n_steps + 1):
        pos = _advance(pos, sys.masses, code, scale, cfg.dt, cfg.method, cfg.deterministic_reduction)
        t = t0 + k * cfg.dt
        bad = not np.all(np.isfinite(pos))
        if bad or np.max(np.abs(pos)) > limit:
            reason = "non-finite position" if bad else f"particle beyond radius {limit:g}"
            raise IntegrationBlowUp(f"{reason} at t={t:g}", trajectory=traj)
        if k % cfg.record_stride == 0:
            emit(sys.with_positions(pos, t))
    return traj


def default_dt(sys: ParticleSystem, *, factor: float = 0.1, bounds=(1e-6, 1.0)) -> float:
    """CFL-like step: ``factor * (min pair distance) / (max speed)``, clamped to ``bounds``."""
    lo, hi = bounds
    if sys.size < 2:
        return float(hi)
    dist, _ = cKDTree(sys.positions).query(sys.positions, k=2)
    dmin = float(np.min(dist[:, 1]))
    vmax = float(np.max(np.hypot(*rhs(sys).T)))
    if dmin == 0.0 or vmax == 0.0:
        return float(hi) if vmax == 0.0 else float(lo)
    return float(min(max(factor * dmin / vmax, lo), hi))


def write_snapshots_csv(path, snapshots) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "i", "x", "y", "mass"])
        for s in snapshots:
            t = format_float(s.time)
            for i, ((x, y), m) in enumerate(zip(s.positions, s.masses)):
                w.writerow([t, i, format_float(x), format_float(y), format_float(m)])
