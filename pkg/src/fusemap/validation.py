"""Input validation helpers used at public API boundaries."""

from __future__ import annotations

import numpy as np

ROTATION_ORTHONORMALITY_TOL = 1e-9

KNOWN_FRAMES = ("camera", "lidar", "robot", "map")


def as_point(p, name: str = "point") -> np.ndarray:
    """Coerce to a finite float (3,) vector."""
    arr = np.asarray(p, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have 3 components, got shape {np.shape(p)}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_points(points, name: str = "points") -> np.ndarray:
    """Coerce to a finite float (N, 3) array; N may be zero."""
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 3)
    if arr.ndim == 1 and arr.shape == (3,):
        arr = arr.reshape(1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"{name} must have shape (N, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_rotation(R, name: str = "rotation") -> np.ndarray:
    """Validate a 3x3 rotation: orthonormal with determinant +1."""
    arr = np.asarray(R, dtype=float)
    if arr.shape != (3, 3):
        raise ValueError(f"{name} must be 3x3, got {arr.shape}")
    defect = np.abs(arr.T @ arr - np.eye(3)).max()
    if defect >= ROTATION_ORTHONORMALITY_TOL:
        raise ValueError(f"{name} is not orthonormal (defect {defect:.3e})")
    if np.linalg.det(arr) < 0:
        raise ValueError(f"{name} has negative determinant (reflection)")
    return arr


def check_frame(frame: str, *allowed: str) -> str:
    from .errors import FrameMismatchError

    if frame not in KNOWN_FRAMES:
        raise FrameMismatchError(f"unknown frame tag {frame!r}")
    if allowed and frame not in allowed:
        raise FrameMismatchError(
            f"expected frame in {allowed}, got {frame!r}"
        )
    return frame


def check_positive(value: float, name: str) -> float:
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return float(value)
