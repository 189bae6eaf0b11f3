"""Handcrafted feature extractors over grayscale images.

Five map-producing transforms: blockwise DCT log-magnitude, high-pass
noise residual (SRM), centered DFT log-magnitude, error-level analysis,
and truncated-SVD reconstruction, plus a raw-RGB passthrough. Every
extractor returns a float64 map with only finite values.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import InvalidQualityError
from .image_io import decode_image, encode_jpeg, to_grayscale
from .validation import check_gray_image, check_image

FEATURE_TAGS = ("rgb", "dct", "srm", "dft", "ela", "svd")

# Zero-sum 3x3 high-pass residual kernel (4-neighbor Laplacian).
SRM_KERNEL = np.array(
    [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]], dtype=np.float64
)


@dataclass(frozen=True)
class FeatureKind:
    """Extractor selector plus its parameters.

    dct_block=None means one whole-image DCT tile.
    """

    tag: str
    dct_block: int | None = 20
    ela_quality: int = 90
    svd_rank: int = 50
    svd_residual: bool = False

    def __post_init__(self):
        if self.tag not in FEATURE_TAGS:
            raise ValueError(f"unknown feature tag {self.tag!r}, expected one of {FEATURE_TAGS}")
        if self.dct_block is not None and self.dct_block < 1:
            raise ValueError(f"dct_block must be >= 1 or None, got {self.dct_block}")
        if not 1 <= self.ela_quality <= 100:
            raise InvalidQualityError(f"ela_quality must be in [1, 100], got {self.ela_quality}")
        if self.svd_rank < 1:
            raise ValueError(f"svd_rank must be >= 1, got {self.svd_rank}")

    def cache_token(self) -> str:
        """Stable string identifying the extractor and every parameter it uses."""
        if self.tag == "dct":
            return f"dct:block={self.dct_block}"
        if self.tag == "ela":
            return f"ela:q={self.ela_quality}"
        if self.tag == "svd":
            return f"svd:rank={self.svd_rank}:residual={int(self.svd_residual)}"
        return self.tag


@lru_cache(maxsize=64)
def _dct_basis(n: int) -> np.ndarray:
    # Orthonormal DCT-II basis: B[k, m] = a(k) cos(pi (2m+1) k / (2n)).
    k = np.arange(n)[:, None]
    m = np.arange(n)[None, :]
    basis = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * m + 1) * k / (2 * n))
    basis[0, :] = np.sqrt(1.0 / n)
    return basis


def dct2d(block: np.ndarray) -> np.ndarray:
    """Orthonormal 2D DCT-II of a float map (any rectangular size)."""
    block = np.asarray(block, dtype=np.float64)
    h, w = block.shape
    return _dct_basis(h) @ block @ _dct_basis(w).T


def idct2d(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of dct2d (exact up to float rounding: the basis is orthonormal)."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    h, w = coeffs.shape
    return _dct_basis(h).T @ coeffs @ _dct_basis(w)


def extract_dct(img: np.ndarray, kind: FeatureKind) -> np.ndarray:
    """Blockwise DCT log-magnitude. Edge tiles shrink to the remainder so
    output dims equal input dims."""
    img = check_gray_image(img)
    x = img.astype(np.float64)
    h, w = x.shape
    block = kind.dct_block
    if block is None:
        return np.log1p(np.abs(dct2d(x)))
    out = np.empty_like(x)
    for i0 in range(0, h, block):
        i1 = min(i0 + block, h)
        for j0 in range(0, w, block):
            j1 = min(j0 + block, w)
            out[i0:i1, j0:j1] = np.log1p(np.abs(dct2d(x[i0:i1, j0:j1])))
    return out


def extract_srm(img: np.ndarray) -> np.ndarray:
    """High-pass noise residual: correlation with SRM_KERNEL, replicate-padded
    borders, raw (unnormalized) output."""
    img = check_gray_image(img)
    x = img.astype(np.float64)
    h, w = x.shape
    padded = np.pad(x, 1, mode="edge")
    out = np.zeros_like(x)
    for i in range(3):
        for j in range(3):
            tap = SRM_KERNEL[i, j]
            if tap != 0.0:
                out += tap * padded[i : i + h, j : j + w]
    return out


def extract_dft(img: np.ndarray) -> np.ndarray:
    """log(1 + |F|) of the 2D DFT, zero frequency shifted to the center."""
    img = check_gray_image(img)
    spectrum = np.fft.fft2(img.astype(np.float64))
    return np.fft.fftshift(np.log1p(np.abs(spectrum)))


def extract_ela(img: np.ndarray, quality: int) -> np.ndarray:
    """Error-level analysis: recompress at the given JPEG quality and return
    the absolute residual, max-normalized to [0, 1]."""
    img = check_gray_image(img)
    recompressed = decode_image(encode_jpeg(img, quality))[:, :, 0]
    diff = np.abs(recompressed.astype(np.float64) - img.astype(np.float64))
    peak = diff.max()
    if peak == 0.0:
        return diff
    return diff / peak


def extract_svd(img: np.ndarray, rank: int, residual: bool = False) -> np.ndarray:
    """Rank-k reconstruction of the [0, 1]-scaled image (k capped at the
    short dimension); optionally the residual image instead."""
    img = check_gray_image(img)
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    x = img.astype(np.float64) / 255.0
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    k = min(rank, min(x.shape))
    recon = (u[:, :k] * s[:k]) @ vt[:k]
    return x - recon if residual else recon


def extract(img: np.ndarray, kind: FeatureKind) -> np.ndarray:
    """Dispatch on kind.tag; non-RGB extractors see the grayscale image."""
    img = check_image(img)
    if kind.tag == "rgb":
        x = img.astype(np.float64) / 255.0
        if x.ndim == 2:
            x = np.stack([x, x, x], axis=-1)
        return np.vstack([x[:, :, 0], x[:, :, 1], x[:, :, 2]])
    gray = to_grayscale(img)
    if kind.tag == "dct":
        return extract_dct(gray, kind)
    if kind.tag == "srm":
        return extract_srm(gray)
    if kind.tag == "dft":
        return extract_dft(gray)
    if kind.tag == "ela":
        return extract_ela(gray, kind.ela_quality)
    return extract_svd(gray, kind.svd_rank, kind.svd_residual)


def kind_from_params(tag: str, **params) -> FeatureKind:
    """Build a FeatureKind from loosely-typed config values (TOML/CLI)."""
    kind = FeatureKind(tag=tag)
    if "dct_block" in params:
        block = params["dct_block"]
        if isinstance(block, str):
            if block != "whole":
                raise ValueError(f"dct_block must be an integer or 'whole', got {block!r}")
            block = None
        kind = replace(kind, dct_block=block)
    for name in ("ela_quality", "svd_rank", "svd_residual"):
        if name in params:
            kind = replace(kind, **{name: params[name]})
    return kind
