"""Initial vorticity measures and their discretization into particles.

An analytic density is integrated over a grid of squares of side ``1/n``
covering its support box; each square becomes one particle placed at the
square's center and carrying the square's circulation.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import as_masses, as_points
from .exceptions import InputError, QuadratureError
from .kernels import Blob

GAUSS_ORDER = 4
DROP_THRESHOLD = 1e-14


@dataclass(frozen=True)
class Box:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise InputError(f"support box must have positive area: {self}")

    @property
    def area(self) -> float:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    def contains(self, points) -> np.ndarray:
        p = as_points(points)
        return (
            (p[:, 0] >= self.xmin) & (p[:, 0] <= self.xmax)
            & (p[:, 1] >= self.ymin) & (p[:, 1] <= self.ymax)
        )

    def union(self, other: "Box") -> "Box":
        return Box(min(self.xmin, other.xmin), max(self.xmax, other.xmax),
                   min(self.ymin, other.ymin), max(self.ymax, other.ymax))

    @classmethod
    def around(cls, center, radius) -> "Box":
        cx, cy = (float(c) for c in center)
        return cls(cx - radius, cx + radius, cy - radius, cy + radius)

    def to_list(self) -> list:
        return [self.xmin, self.xmax, self.ymin, self.ymax]


# -- analytic density profiles ----------------------------------------------

@dataclass(frozen=True)
class DiskPatch:
    """Constant vorticity ``value`` on the disk ``|x - center| <= radius``."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    value: float = 1.0

    def __call__(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        return np.where(dx * dx + dy * dy <= self.radius**2, self.value, 0.0)

    @property
    def support_box(self) -> Box:
        return Box.around(self.center, self.radius)

    @property
    def nonnegative(self) -> bool:
        return self.value >= 0

    @property
    def total_mass(self) -> float:
        return self.value * math.pi * self.radius**2

    @property
    def inertia_about_center(self) -> float:
        return self.value * math.pi * self.radius**4 / 2.0


@dataclass(frozen=True)
class SmoothBump:
    """``amplitude * (1 - |x - center|^2 / radius^2)_+^3``, a C^2 compact patch."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    amplitude: float = 1.0

    def __call__(self, x, y):
        dx = x - self.center[0]
        dy = y - self.center[1]
        u = 1.0 - (dx * dx + dy * dy) / self.radius**2
        return self.amplitude * np.maximum(u, 0.0) ** 3

    @property
    def support_box(self) -> Box:
        return Box.around(self.center, self.radius)

    @property
    def nonnegative(self) -> bool:
        return self.amplitude >= 0

    @property
    def total_mass(self) -> float:
        return self.amplitude * math.pi * self.radius**2 / 4.0

    @property
    def inertia_about_center(self) -> float:
        # int_0^R (1 - s^2/R^2)^3 s^3 ds = R^4 / 40
        return self.amplitude * 2.0 * math.pi * self.radius**4 / 40.0


@dataclass(frozen=True)
class DensitySum:
    parts: tuple

    def __call__(self, x, y):
        total = np.zeros(np.broadcast(x, y).shape)
        for p in self.parts:
            total = total + p(x, y)
        return total

    @property
    def support_box(self) -> Box:
        box = self.parts[0].support_box
        for p in self.parts[1:]:
            box = box.union(p.support_box)
        return box

    @property
    def nonnegative(self) -> bool:
        return all(p.nonnegative for p in self.parts)

    @property
    def total_mass(self) -> float:
        return sum(p.total_mass for p in self.parts)


PROFILE_TYPES = {"disk": DiskPatch, "bump": SmoothBump}


def profile_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("kind", None)
    if kind == "sum":
        parts = d.pop("parts", None)
        if d or not parts:
            raise InputError("a 'sum' density needs a non-empty 'parts' list and nothing else")
        return DensitySum(tuple(profile_from_dict(p) for p in parts))
    if kind not in PROFILE_TYPES:
        raise InputError(f"unknown density kind {kind!r}")
    cls = PROFILE_TYPES[kind]
    allowed = set(cls.__dataclass_fields__)
    unknown = set(d) - allowed
    if unknown:
        raise InputError(f"unknown keys for density {kind!r}: {sorted(unknown)}")
    if "center" in d:
        d["center"] = tuple(float(c) for c in d["center"])
    return cls(**d)


def profile_to_dict(p) -> dict:
    if isinstance(p, DensitySum):
        return {"kind": "sum", "parts": [profile_to_dict(q) for q in p.parts]}
    kind = {DiskPatch: "disk", SmoothBump: "bump"}[type(p)]
    out = {"kind": kind}
    for name in p.__dataclass_fields__:
        v = getattr(p, name)
        out[name] = list(v) if isinstance(v, tuple) else v
    return out


# -- measure descriptions and particle systems ------------------------------

@dataclass(frozen=True)
class VorticitySpec:
    kind: str
    density: object = None
    atom_positions: np.ndarray | None = None
    atom_masses: np.ndarray | None = None
    support_box: Box | None = None
    nonnegative: bool = True

    @classmethod
    def analytic(cls, density, support_box: Box | None = None) -> "VorticitySpec":
        box = support_box or density.support_box
        return cls("analytic", density=density, support_box=box, nonnegative=density.nonnegative)

    @classmethod
    def atoms(cls, positions, masses, support_box: Box | None = None) -> "VorticitySpec":
        pos = as_points(positions, "atom positions")
        if pos.shape[0] == 0:
            raise InputError("atom list is empty")
        m = as_masses(masses, pos.shape[0])
        if support_box is None:
            pad = 0.5 * max(np.ptp(pos[:, 0]), np.ptp(pos[:, 1]), 1.0)
            support_box = Box(pos[:, 0].min() - pad, pos[:, 0].max() + pad,
                              pos[:, 1].min() - pad, pos[:, 1].max() + pad)
        elif not np.all(support_box.contains(pos)):
            raise InputError("atoms lie outside the support box")
        return cls("atoms", atom_positions=pos, atom_masses=m, support_box=support_box,
                   nonnegative=bool(np.all(m >= 0)))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True, order="C")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ParticleSystem:
    """Discrete vorticity: circulations ``masses`` at ``positions`` (an (M, 2) array).

    Instances are immutable; arrays are read-only copies, so snapshots can be
    shared freely.
    """

    positions: np.ndarray
    masses: np.ndarray
    blob: Blob
    time: float = 0.0
    origin_shift: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        pos = as_points(self.positions, "positions")
        if pos.shape[0] < 1:
            raise InputError("a particle system needs at least one particle")
        object.__setattr__(self, "positions", _frozen(pos))
        object.__setattr__(self, "masses", _frozen(as_masses(self.masses, pos.shape[0])))
        object.__setattr__(self, "origin_shift", _frozen(np.asarray(self.origin_shift, float).reshape(2)))
        object.__setattr__(self, "time", float(self.time))

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def total_mass(self) -> float:
        return float(math.fsum(self.masses))

    @property
    def nonnegative(self) -> bool:
        return bool(np.all(self.masses >= 0))

    def with_positions(self, positions, time: float) -> "ParticleSystem":
        return ParticleSystem(positions, self.masses, self.blob, time, self.origin_shift)

    def with_blob(self, blob: Blob) -> "ParticleSystem":
        return ParticleSystem(self.positions, self.masses, blob, self.time, self.origin_shift)


def discretize(spec: VorticitySpec, n: int, blob: Blob) -> ParticleSystem:
    """Integrate the density over squares of side ``1/n`` (4x4 Gauss-Legendre each)."""
    if spec.kind != "analytic":
        raise InputError("discretize needs an analytic density; use from_atoms for atom lists")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    h = 1.0 / n
    box = spec.support_box
    nx = max(1, math.ceil((box.xmax - box.xmin) * n - 1e-9))
    ny = max(1, math.ceil((box.ymax - box.ymin) * n - 1e-9))
    # Center the (possibly slightly larger) grid on the box so symmetric
    # densities give symmetric particle sets.
    x0 = 0.5 * (box.xmin + box.xmax) - 0.5 * nx * h
    y0 = 0.5 * (box.ymin + box.ymax) - 0.5 * ny * h
    cx = x0 + (np.arange(nx) + 0.5) * h
    cy = y0 + (np.arange(ny) + 0.5) * h

    nodes, weights = np.polynomial.legendre.leggauss(GAUSS_ORDER)
    px = (cx[:, None] + 0.5 * h * nodes[None, :]).reshape(-1)
    py = (cy[:, None] + 0.5 * h * nodes[None, :]).reshape(-1)
    f = np.asarray(spec.density(px[:, None], py[None, :]), dtype=float)
    if not np.all(np.isfinite(f)):
        raise QuadratureError("density is not finite on the quadrature nodes")
    f = f.reshape(nx, GAUSS_ORDER, ny, GAUSS_ORDER)
    m = np.einsum("iajb,a,b->ij", f, weights, weights) * (0.25 * h * h)

    gx, gy = np.meshgrid(cx, cy, indexing="ij")
    centers = np.column_stack([gx.reshape(-1), gy.reshape(-1)])
    m = m.reshape(-1)
    biggest = np.max(np.abs(m)) if m.size else 0.0
    if biggest == 0.0:
        raise InputError("density integrates to zero on every square")
    keep = np.abs(m) >= DROP_THRESHOLD * biggest
    return ParticleSystem(centers[keep], m[keep], blob)


def from_atoms(spec: VorticitySpec, blob: Blob) -> ParticleSystem:
    if spec.kind != "atoms":
        raise InputError("from_atoms needs an atom-list spec")
    if spec.atom_positions is None or len(spec.atom_positions) == 0:
        raise InputError("atom list is empty")
    return ParticleSystem(spec.atom_positions, spec.atom_masses, blob)


def center_of_mass(sys: ParticleSystem) -> np.ndarray:
    m0 = sys.total_mass
    if m0 == 0.0:
        raise InputError("total mass is zero; the center of mass is undefined")
    z = np.array([math.fsum(sys.masses * sys.positions[:, 0]),
                  math.fsum(sys.masses * sys.positions[:, 1])])
    return z / m0


def recenter(sys: ParticleSystem) -> ParticleSystem:
    """Translate so the center of mass sits at the origin; the shift is accumulated in ``origin_shift``."""
    c = center_of_mass(sys)
    pos = sys.positions - c
    # One correction pass absorbs the rounding of the first subtraction.
    pos = pos - center_of_mass(ParticleSystem(pos, sys.masses, sys.blob))
    return ParticleSystem(pos, sys.masses, sys.blob, sys.time, sys.origin_shift + c)


# -- atom list files ---------------------------------------------------------

def read_atoms_csv(path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["x", "y", "mass"]:
            raise InputError(f"{path}: expected header 'x,y,mass'")
        rows = [(float(r["x"]), float(r["y"]), float(r["mass"])) for r in reader]
    if not rows:
        raise InputError(f"{path}: no atoms")
    arr = np.array(rows)
    return arr[:, :2], arr[:, 2]


def write_atoms_csv(path, positions, masses) -> None:
    from .kernels import format_float

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "mass"])
        for (x, y), m in zip(as_points(positions), masses):
            w.writerow([format_float(x), format_float(y), format_float(m)])
