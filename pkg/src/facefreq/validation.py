"""Input validation helpers shared by the estimators and the functional API."""

from __future__ import annotations

import numpy as np

def check_image(img, channels: int | None = None) -> np.ndarray:
    """Validate a decoded raster: uint8, HxW or HxWx3, nonempty.

    Returns the array unchanged so calls can be chained.
    """
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise TypeError(f"image must be uint8, got {img.dtype}")
    if img.ndim == 2:
        n_ch = 1
    elif img.ndim == 3 and img.shape[2] == 3:
        n_ch = 3
    else:
        raise ValueError(f"image must be (h, w) or (h, w, 3), got shape {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image has empty dimension: {img.shape}")
    if channels is not None and n_ch != channels:
        raise ValueError(f"expected {channels}-channel image, got {n_ch}")
    return img


def check_gray_image(img) -> np.ndarray:
    return check_image(img, channels=1)


def check_feature_map(values) -> np.ndarray:
    """Validate a feature map: finite float64 2D array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"feature map must be 2D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("feature map contains NaN or Inf")
    return arr


def check_matrix(X) -> np.ndarray:
    """Coerce a sample matrix to finite float64 (n_samples, n_features)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError(f"expected 2D sample matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("sample matrix contains NaN or Inf")
    return X

