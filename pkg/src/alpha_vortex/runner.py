"""Experiment drivers behind ``alpha-vortex run`` and ``alpha-vortex confinement``.

A run discretizes the configured measure, integrates it, evaluates the
diagnostics on every recorded snapshot, and finally fits the envelope
constant on the early window and fills in the envelope column.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import SimConfig
from .diagnostics import (ConfinementParams, DiagnosticsRecord, fit_envelope_constant,
                          fit_tail_constant, record, support_radius, write_timeseries_csv)
from .dynamics import IntegratorConfig, simulate, write_snapshots_csv
from .exceptions import DomainError, InputError, IntegrationBlowUp
from .kernels import format_float
from .measures import ParticleSystem, recenter

MANIFEST_VERSION = 1
C_FLOOR = 1e-12


@dataclass
class RunResult:
    config: SimConfig
    integrator: IntegratorConfig
    initial: ParticleSystem
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    params: ConfinementParams | None = None
    fitted: dict = field(default_factory=dict)
    blowup: IntegrationBlowUp | None = None

    @property
    def completed(self) -> bool:
        return self.blowup is None

    @property
    def theoretical_guarantee(self) -> bool:
        # Confinement is only guaranteed for exponentially decaying blobs and q >= 0.
        return self.initial.blob.exponential_tail and self.initial.nonnegative


def initial_radius(sys: ParticleSystem) -> float:
    """R0: particle support radius about the center of mass (blob scale if degenerate)."""
    r0 = support_radius(sys, 1.0, centered=True)
    return r0 if r0 > 0 else sys.blob.scale


def execute(cfg: SimConfig, *, deterministic: bool | None = None, recenter_initial: bool = False) -> RunResult:
    sys0 = cfg.initial_system()
    if recenter_initial:
        sys0 = recenter(sys0)
    icfg = cfg.integrator_config(sys0, deterministic=deterministic)
    R0 = initial_radius(sys0)
    # f_r needs only R0 and k; C is fitted after the run and patched in.
    provisional = ConfinementParams(R0, 1.0, cfg.diagnostics.k)
    result = RunResult(cfg, icfg, sys0)
    count = 0

    def hook(s):
        nonlocal count
        result.records.append(record(s, provisional, cfg.diagnostics))
        if cfg.snapshots and count % cfg.snapshot_stride == 0:
            result.snapshots.append(s)
        count += 1

    try:
        simulate(sys0, icfg, hooks=[hook], keep_snapshots=False)
    except IntegrationBlowUp as exc:
        result.blowup = exc

    times = [r.t for r in result.records]
    radii = [r.support_radius_max for r in result.records]
    try:
        C = fit_envelope_constant(times, radii, window=cfg.fit_window, floor=C_FLOOR)
        samples = int(sum(1 for t in times if 0 < t <= cfg.fit_window * (1 + 1e-12)))
    except InputError:
        C, samples = C_FLOOR, 0
    result.params = ConfinementParams(R0, C, cfg.diagnostics.k)
    result.records = [r.with_envelope(result.params) for r in result.records]

    tail_c = None
    if sys0.blob.exponential_tail:
        grid = np.linspace(2.0 * sys0.blob.scale, 60.0 * sys0.blob.scale, 200)
        try:
            tail_c = fit_tail_constant(sys0.blob, grid)
        except DomainError:
            tail_c = None
    result.fitted = {
        "R0": R0,
        "C": C,
        "C_fit_window": cfg.fit_window,
        "C_fit_samples": samples,
        "k": cfg.diagnostics.k,
        "tail_model": sys0.blob.tail_model,
        "tail_constant_c": tail_c,
    }
    return result


# -- output ------------------------------------------------------------------

def prepare_output_dir(path) -> Path:
    """Create ``path`` if needed and check it is writable (raises InputError otherwise)."""
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create output directory {str(out)!r}: {exc.strerror or exc}") from exc
    if not out.is_dir() or not os.access(out, os.W_OK | os.X_OK):
        raise InputError(f"output directory {str(out)!r} is not writable")
    return out


def manifest(result: RunResult, *, command: str, threads: int | None, extra: dict | None = None) -> dict:
    rec0 = result.records[0] if result.records else None
    doc = {
        "manifest_version": MANIFEST_VERSION,
        "package_version": __version__,
        "command": command,
        "config": result.config.resolved(result.integrator),
        "resolved": {
            "particles": result.initial.size,
            "dt": result.integrator.dt,
            "n_steps": result.integrator.n_steps,
            "record_stride": result.integrator.record_stride,
            "rows": len(result.records),
            "threads": threads,
            "deterministic_reduction": result.integrator.deterministic_reduction,
            "origin_shift": [float(v) for v in result.initial.origin_shift],
            "initial_mass": rec0.moments.mass if rec0 else None,
        },
        "fitted": result.fitted,
        "status": "completed" if result.completed else "blow-up",
        "theoretical_guarantee": result.theoretical_guarantee,
    }
    if result.blowup is not None:
        doc["blowup"] = str(result.blowup)
    if extra:
        doc.update(extra)
    return doc


def write_manifest(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False, allow_nan=False, default=_jsonable) + "\n",
                          encoding="utf-8", newline="\n")


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serialisable: {type(v).__name__}")


def write_run_outputs(result: RunResult, out: Path, *, threads: int | None, command: str = "run",
                      extra: dict | None = None) -> dict:
    write_timeseries_csv(out / "diagnostics.csv", result.records, result.config.diagnostics)
    if result.config.snapshots:
        write_snapshots_csv(out / "snapshots.csv", result.snapshots)
    doc = manifest(result, command=command, threads=threads, extra=extra)
    write_manifest(out / "manifest.json", doc)
    return doc


def confinement_rows(records: list[DiagnosticsRecord]) -> list[tuple[float, float, float, bool]]:
    return [(r.t, r.support_radius_max, r.envelope, bool(r.support_radius_max <= r.envelope)) for r in records]


def write_confinement_csv(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "r_supp", "envelope", "contained"])
        for t, r, env, ok in rows:
            w.writerow([format_float(t), format_float(r), format_float(env), "true" if ok else "false"])


def contained_fraction(rows) -> float:
    if not rows:
        return math.nan
    return sum(1 for row in rows if row[3]) / len(rows)
