"""Vortex-blob simulation of the 2D Euler-alpha equations, with diagnostics for
conserved quantities and vorticity confinement."""
__version__ = "0.1.0"

from .exceptions import DomainError, InputError, IntegrationBlowUp, QuadratureError
from .bessel import bessel_k0, bessel_k1
from .kernels import Blob, Family, KernelTable, blob_density, gamma, gamma_complement, k_reg, tabulate
from .measures import (Box, DensitySum, DiskPatch, ParticleSystem, SmoothBump, VorticitySpec,
                       center_of_mass, discretize, from_atoms, recenter)
from .dynamics import IntegratorConfig, Trajectory, default_dt, rhs, simulate, step, velocity_at
from .diagnostics import (ConfinementParams, DiagnosticsConfig, DiagnosticsRecord, Moments, envelope, eta,
                          filtered_inertia, filtered_tail, lambda_for, mass_tail, moments,
                          radial_speed_profile, record, support_radius)
from .config import SimConfig, load_config

__all__ = [
    "Blob", "Box", "ConfinementParams", "DensitySum", "DiagnosticsConfig", "DiagnosticsRecord",
    "DiskPatch", "DomainError", "Family", "InputError", "IntegrationBlowUp", "IntegratorConfig",
    "KernelTable", "Moments", "ParticleSystem", "QuadratureError", "SimConfig", "SmoothBump",
    "Trajectory", "VorticitySpec", "bessel_k0", "bessel_k1", "blob_density", "center_of_mass",
    "default_dt", "discretize", "envelope", "eta", "filtered_inertia", "filtered_tail", "from_atoms",
    "gamma", "gamma_complement", "k_reg", "lambda_for", "load_config", "mass_tail", "moments",
    "radial_speed_profile", "recenter", "record", "rhs", "simulate", "step", "support_radius",
    "tabulate", "velocity_at",
]
