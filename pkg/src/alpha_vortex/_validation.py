"""Small input-checking helpers shared by the public functions."""
from __future__ import annotations

import math

import numpy as np

from .exceptions import DomainError, InputError


def check_positive(value, name: str) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise InputError(f"{name} must be a positive finite number, got {value!r}")
    return value


def check_radius_array(r, name: str = "r", *, strict: bool = False) -> np.ndarray:
    """Return ``r`` as a float array, rejecting negative (or zero) entries."""
    arr = np.asarray(r, dtype=float)
    if np.any(np.isnan(arr)):
        raise DomainError(f"{name} contains NaN")
    if strict:
        if np.any(arr <= 0.0):
            raise DomainError(f"{name} must be > 0")
    elif np.any(arr < 0.0):
        raise DomainError(f"{name} must be >= 0")
    return arr


def as_points(points, name: str = "points") -> np.ndarray:
    """Coerce to a C-contiguous ``(n, 2)`` float array; a single 2-vector becomes ``(1, 2)``."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InputError(f"{name} must have shape (n, 2), got {arr.shape}")
    return np.ascontiguousarray(arr)


def as_masses(masses, n: int) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(masses, dtype=float).reshape(-1))
    if arr.shape[0] != n:
        raise InputError(f"expected {n} masses, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InputError("masses must be finite")
    return arr


def check_increasing(grid, name: str = "radii") -> np.ndarray:
    arr = np.asarray(grid, dtype=float).reshape(-1)
    if arr.size == 0:
        raise InputError(f"{name} must be non-empty")
    if np.any(np.diff(arr) <= 0.0):
        raise InputError(f"{name} must be strictly increasing")
    if arr[0] < 0.0:
        raise InputError(f"{name} must be nonnegative")
    return arr
