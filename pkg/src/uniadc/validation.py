"""Input validation helpers shared across the package."""

from __future__ import annotations

import hashlib

import numpy as np

from .errors import DimensionMismatchError, ShapeMismatchError


def check_image(image, name: str = "image") -> np.ndarray:
    """Validate an H x W x C float image in [0, 1] (grayscale H x W allowed)."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise DimensionMismatchError(f"{name} must be H x W or H x W x C, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatchError(f"{name} is empty")
    lo, hi = float(arr.min()), float(arr.max())
    if lo < -1e-9 or hi > 1 + 1e-9:
        raise ValueError(f"{name} values must lie in [0, 1], got range [{lo}, {hi}]")
    return np.clip(arr, 0.0, 1.0)


def check_binary_mask(mask, name: str = "mask") -> np.ndarray:
    """Validate an H x W {0,1} mask, returned as uint8."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    uniq = np.unique(arr)
    if not np.isin(uniq, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1, got values {uniq[:8]}")
    return arr.astype(np.uint8)


def check_same_shape(a: np.ndarray, b: np.ndarray, what: str = "inputs") -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"{what} differ in shape: {a.shape} vs {b.shape}")


def as_rng(seed) -> np.random.Generator:
    """Accept an int seed, a seed sequence list, or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def stable_seed(*parts) -> int:
    """Platform-independent 63-bit seed derived from hashing the parts.

    Python's builtin hash() is salted per process, so it cannot be used for
    reproducible seeding.
    """
    h = hashlib.sha256()
    for part in parts:
        h.update(repr(part).encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest()[:8], "big") >> 1
