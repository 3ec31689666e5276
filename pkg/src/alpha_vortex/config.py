"""Experiment configuration: JSON schema, validation, presets, resolution.

A config document looks like::

    {
      "name": "disk-patch",
      "spec": {"kind": "analytic",
               "density": {"kind": "disk", "center": [0, 0], "radius": 1, "value": 1}},
      "blob": {"family": "euler-alpha", "scale": 0.1},
      "n": 16,
      "integrator": {"method": "rk4", "dt": "auto", "t_end": 10, "record_interval": 0.1},
      "diagnostics": {"probe_radii": [10, 20, 40], "fr_radii": [1.5, 2, 3]},
      "outputs": {"snapshot_stride": 10},
      "seed": 0,
      "output_dir": "out/disk-patch"
    }

Every mapping rejects keys it does not know.  ``dt = "auto"`` is replaced by
the CFL-like heuristic of :func:`alpha_vortex.dynamics.default_dt`; with a
``record_interval`` the step is shrunk so that an integer number of steps
fits each interval exactly.  :meth:`SimConfig.resolved` returns the config
with every default filled in, which is what manifests echo.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .diagnostics import DEFAULT_K, DiagnosticsConfig
from .dynamics import IntegratorConfig, default_dt
from .exceptions import InputError
from .kernels import Blob
from .measures import (Box, ParticleSystem, VorticitySpec, discretize, from_atoms,
                       profile_from_dict, profile_to_dict, read_atoms_csv)

PRESETS = ("disk-patch", "smooth-bump", "two-patch", "two-vortex-orbit")

_TOP_KEYS = {"name", "spec", "blob", "n", "integrator", "diagnostics", "outputs", "seed", "output_dir"}
_SPEC_KEYS = {"kind", "density", "atoms", "atoms_file", "support_box"}
_BLOB_KEYS = {"family", "scale"}
_INTEGRATOR_KEYS = {"method", "dt", "t_end", "deterministic_reduction", "record_stride",
                    "record_interval", "dt_factor", "dt_bounds"}
_DIAG_KEYS = {"probe_radii", "fr_radii", "k", "n_angles", "quantile", "fit_window"}
_OUTPUT_KEYS = {"snapshots", "snapshot_stride"}


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise InputError(f"{where} must be a JSON object")
    unknown = set(d) - allowed
    if unknown:
        raise InputError(f"unknown key(s) in {where}: {', '.join(sorted(unknown))}")


def _number(v, where, *, positive=False, nonneg=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise InputError(f"{where} must be a finite number, got {v!r}")
    if positive and v <= 0:
        raise InputError(f"{where} must be positive")
    if nonneg and v < 0:
        raise InputError(f"{where} must be nonnegative")
    return float(v)


def _integer(v, where, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(f"{where} must be an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise InputError(f"{where} must be >= {minimum}")
    return v


def _radii(v, where):
    if not isinstance(v, list):
        raise InputError(f"{where} must be a list")
    return tuple(_number(x, f"{where}[]", positive=True) for x in v)


@dataclass
class SimConfig:
    spec: VorticitySpec
    blob: Blob
    n: int | None
    integrator: dict
    diagnostics: DiagnosticsConfig
    fit_window: float = 1.0
    snapshots: bool = True
    snapshot_stride: int = 1
    seed: int = 0
    output_dir: str = "alpha-vortex-out"
    name: str = "custom"
    source: dict = field(default_factory=dict)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "SimConfig":
        _check_keys(doc, _TOP_KEYS, "config")
        for key in ("spec", "blob", "integrator"):
            if key not in doc:
                raise InputError(f"config is missing '{key}'")
        spec = _parse_spec(doc["spec"], base_dir)

        _check_keys(doc["blob"], _BLOB_KEYS, "blob")
        if "family" not in doc["blob"] or "scale" not in doc["blob"]:
            raise InputError("blob needs 'family' and 'scale'")
        try:
            blob = Blob(doc["blob"]["family"], _number(doc["blob"]["scale"], "blob.scale"))
        except ValueError as exc:
            raise InputError(str(exc)) from exc

        n = doc.get("n")
        if spec.kind == "analytic":
            if n is None:
                raise InputError("an analytic spec needs the discretization 'n'")
            n = _integer(n, "n", 1)
        elif n is not None:
            raise InputError("'n' only applies to analytic specs")

        integ = dict(doc["integrator"])
        _check_keys(integ, _INTEGRATOR_KEYS, "integrator")
        if "t_end" not in integ:
            raise InputError("integrator needs 't_end'")
        _number(integ["t_end"], "integrator.t_end", nonneg=True)
        dt = integ.get("dt", "auto")
        if dt != "auto":
            _number(dt, "integrator.dt", positive=True)
        if "record_stride" in integ and "record_interval" in integ:
            raise InputError("give either record_stride or record_interval, not both")
        if "record_stride" in integ:
            _integer(integ["record_stride"], "integrator.record_stride", 1)
        if "record_interval" in integ:
            _number(integ["record_interval"], "integrator.record_interval", positive=True)
        method = integ.get("method", "rk4")
        if method not in ("rk4", "euler"):
            raise InputError(f"unknown integrator method {method!r}")
        if not isinstance(integ.get("deterministic_reduction", True), bool):
            raise InputError("integrator.deterministic_reduction must be true or false")
        _number(integ.get("dt_factor", 0.1), "integrator.dt_factor", positive=True)
        bounds = integ.get("dt_bounds", [1e-6, 1.0])
        if (not isinstance(bounds, list) or len(bounds) != 2
                or not 0 < _number(bounds[0], "dt_bounds") <= _number(bounds[1], "dt_bounds")):
            raise InputError("integrator.dt_bounds must be [lo, hi] with 0 < lo <= hi")

        dd = doc.get("diagnostics", {})
        _check_keys(dd, _DIAG_KEYS, "diagnostics")
        diag = DiagnosticsConfig(
            probe_radii=_radii(dd.get("probe_radii", []), "diagnostics.probe_radii"),
            fr_radii=_radii(dd.get("fr_radii", []), "diagnostics.fr_radii"),
            k=_integer(dd.get("k", DEFAULT_K), "diagnostics.k", 1),
            n_angles=_integer(dd.get("n_angles", 64), "diagnostics.n_angles", 1),
            quantile=_number(dd.get("quantile", 0.99), "diagnostics.quantile", positive=True),
        )
        if diag.quantile > 1:
            raise InputError("diagnostics.quantile must lie in (0, 1]")
        fit_window = _number(dd.get("fit_window", 1.0), "diagnostics.fit_window", positive=True)

        out = doc.get("outputs", {})
        _check_keys(out, _OUTPUT_KEYS, "outputs")
        snapshots = out.get("snapshots", True)
        if not isinstance(snapshots, bool):
            raise InputError("outputs.snapshots must be true or false")
        stride = _integer(out.get("snapshot_stride", 1), "outputs.snapshot_stride", 1)

        seed = _integer(doc.get("seed", 0), "seed")
        output_dir = doc.get("output_dir", "alpha-vortex-out")
        if not isinstance(output_dir, str) or not output_dir:
            raise InputError("output_dir must be a non-empty string")
        name = doc.get("name", "custom")
        if not isinstance(name, str):
            raise InputError("name must be a string")
        return cls(spec, blob, n, integ, diag, fit_window, snapshots, stride, seed,
                   output_dir, name, copy.deepcopy(doc))

    # -- resolution --------------------------------------------------------

    def initial_system(self) -> ParticleSystem:
        if self.spec.kind == "analytic":
            return discretize(self.spec, self.n, self.blob)
        return from_atoms(self.spec, self.blob)

    def integrator_config(self, sys: ParticleSystem, *, deterministic: bool | None = None) -> IntegratorConfig:
        """Turn the integrator section into a concrete :class:`IntegratorConfig`."""
        it = self.integrator
        t_end = float(it["t_end"])
        dt = it.get("dt", "auto")
        if dt == "auto":
            lo, hi = it.get("dt_bounds", [1e-6, 1.0])
            dt = default_dt(sys, factor=float(it.get("dt_factor", 0.1)), bounds=(lo, hi))
        dt = float(dt)
        stride = int(it.get("record_stride", 1))
        if "record_interval" in it:
            interval = float(it["record_interval"])
            stride = max(1, math.ceil(interval / dt * (1 - 1e-12)))
            dt = interval / stride
        if 0 < t_end < dt:
            dt = t_end
        det = it.get("deterministic_reduction", True) if deterministic is None else deterministic
        return IntegratorConfig(dt=dt, t_end=t_end, method=it.get("method", "rk4"),
                                deterministic_reduction=det, record_stride=stride)

    def resolved(self, icfg: IntegratorConfig) -> dict:
        """The config with every default filled in and ``dt`` made explicit."""
        return {
            "name": self.name,
            "spec": _spec_to_dict(self.spec),
            "blob": self.blob.to_dict(),
            **({"n": self.n} if self.n is not None else {}),
            "integrator": {"method": icfg.method, "dt": icfg.dt, "t_end": icfg.t_end,
                           "deterministic_reduction": icfg.deterministic_reduction,
                           "record_stride": icfg.record_stride},
            "diagnostics": {**self.diagnostics.to_dict(), "fit_window": self.fit_window},
            "outputs": {"snapshots": self.snapshots, "snapshot_stride": self.snapshot_stride},
            "seed": self.seed,
            "output_dir": self.output_dir,
        }


def _parse_spec(d, base_dir):
    _check_keys(d, _SPEC_KEYS, "spec")
    kind = d.get("kind")
    box = None
    if d.get("support_box") is not None:
        b = d["support_box"]
        if not isinstance(b, list) or len(b) != 4:
            raise InputError("support_box must be [xmin, xmax, ymin, ymax]")
        box = Box(*(_number(v, "support_box[]") for v in b))
    if kind == "analytic":
        if "density" not in d or "atoms" in d or "atoms_file" in d:
            raise InputError("an analytic spec takes 'density' (and optionally 'support_box')")
        try:
            density = profile_from_dict(d["density"])
        except TypeError as exc:
            raise InputError(f"bad density parameters: {exc}") from exc
        return VorticitySpec.analytic(density, box)
    if kind == "atoms":
        if "density" in d or ("atoms" in d) == ("atoms_file" in d):
            raise InputError("an atom spec takes exactly one of 'atoms' or 'atoms_file'")
        if "atoms" in d:
            rows = d["atoms"]
            if not isinstance(rows, list) or not all(isinstance(r, list) and len(r) == 3 for r in rows):
                raise InputError("atoms must be a list of [x, y, mass] triples")
            pos = [[_number(r[0], "atom x"), _number(r[1], "atom y")] for r in rows]
            masses = [_number(r[2], "atom mass") for r in rows]
            if not rows:
                raise InputError("atom list is empty")
        else:
            path = Path(d["atoms_file"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            try:
                pos, masses = read_atoms_csv(path)
            except OSError as exc:
                raise InputError(f"cannot read atoms file: {exc}") from exc
        return VorticitySpec.atoms(pos, masses, box)
    raise InputError(f"spec.kind must be 'analytic' or 'atoms', got {kind!r}")


def _spec_to_dict(spec: VorticitySpec) -> dict:
    if spec.kind == "analytic":
        return {"kind": "analytic", "density": profile_to_dict(spec.density),
                "support_box": spec.support_box.to_list()}
    atoms = [[float(x), float(y), float(m)] for (x, y), m in zip(spec.atom_positions, spec.atom_masses)]
    return {"kind": "atoms", "atoms": atoms, "support_box": spec.support_box.to_list()}


# -- loading -----------------------------------------------------------------

def preset_document(name: str) -> dict:
    if name not in PRESETS:
        raise InputError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    text = resources.files("alpha_vortex.presets").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def load_document(source: str) -> tuple[dict, Path | None]:
    """Read a config from a preset name, a config file or a run manifest."""
    if source in PRESETS:
        return preset_document(source), None
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read config {source!r}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: invalid JSON ({exc})") from exc
    if isinstance(doc, dict) and "manifest_version" in doc:
        doc = doc.get("config")
    return doc, path.parent


def load_config(source: str, *, output_dir: str | None = None) -> SimConfig:
    doc, base = load_document(source)
    if output_dir is not None and isinstance(doc, dict):
        doc = {**doc, "output_dir": output_dir}
    return SimConfig.from_dict(doc, base)
