"""Image decode/encode and geometric primitives.

Images are numpy uint8 arrays, row-major: (h, w) for grayscale, (h, w, 3)
for RGB. No alpha, no other layouts. JPEG writing is pinned to baseline
sequential with 4:2:0 chroma subsampling so that repeated encodes of the
same pixels are byte-identical (error-level analysis depends on this).
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    EmptyIntersectionError,
    InvalidQualityError,
    MalformedImageError,
    UnsupportedFormatError,
    ZeroDimensionError,
)
from .validation import check_image

_DECODABLE = {"PNG", "JPEG"}

# ITU-R BT.601 luma weights.
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class FaceBox:
    """Pixel-space face bounding box; may extend past the image and get clamped."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"face box must have positive size, got {self.w}x{self.h}")


def decode_image(data: bytes) -> np.ndarray:
    """Decode PNG or JPEG bytes to an RGB (h, w, 3) uint8 array.

    Grayscale and palette sources are expanded to three identical channels.
    """
    try:
        with Image.open(io.BytesIO(data)) as im:
            fmt = im.format
            if fmt not in _DECODABLE:
                raise UnsupportedFormatError(f"unsupported image format: {fmt}")
            rgb = im.convert("RGB")
            return np.asarray(rgb, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise MalformedImageError("not a decodable image stream") from exc
    except OSError as exc:
        raise MalformedImageError(f"truncated or corrupt image: {exc}") from exc


def encode_jpeg(img: np.ndarray, quality: int) -> bytes:
    """Encode to baseline JPEG. Deterministic for fixed (img, quality)."""
    img = check_image(img)
    if not 1 <= int(quality) <= 100:
        raise InvalidQualityError(f"JPEG quality must be in [1, 100], got {quality}")
    buf = io.BytesIO()
    if img.ndim == 2:
        Image.fromarray(img, "L").save(buf, format="JPEG", quality=int(quality))
    else:
        # subsampling=2 is 4:2:0; fixed explicitly because PIL otherwise
        # switches to 4:4:4 at high qualities.
        Image.fromarray(img, "RGB").save(
            buf, format="JPEG", quality=int(quality), subsampling=2
        )
    return buf.getvalue()


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma conversion; grayscale input is returned unchanged."""
    img = check_image(img)
    if img.ndim == 2:
        return img
    luma = img.astype(np.float64) @ _LUMA
    return np.floor(luma + 0.5).astype(np.uint8)


def _axis_coords(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Half-pixel-centered source coordinates, clamped to valid range.
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1.0)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = src - lo
    return lo, hi, frac


def resize_bilinear(img: np.ndarray, out_w: int, out_h: int) -> np.ndarray:
    """Bilinear resize with half-pixel-centered sampling."""
    img = check_image(img)
    if out_w < 1 or out_h < 1:
        raise ZeroDimensionError(f"output size must be >= 1, got {out_w}x{out_h}")
    h, w = img.shape[:2]
    ylo, yhi, fy = _axis_coords(h, out_h)
    xlo, xhi, fx = _axis_coords(w, out_w)

    data = img.astype(np.float64)
    if data.ndim == 2:
        data = data[:, :, None]
    fy = fy[:, None, None]
    fx = fx[None, :, None]

    top = data[ylo][:, xlo] * (1 - fx) + data[ylo][:, xhi] * fx
    bot = data[yhi][:, xlo] * (1 - fx) + data[yhi][:, xhi] * fx
    out = top * (1 - fy) + bot * fy
    out = np.floor(out + 0.5).astype(np.uint8)
    if img.ndim == 2:
        out = out[:, :, 0]
    return out


def crop_with_padding(img: np.ndarray, box: FaceBox, pad_fraction: float) -> np.ndarray:
    """Expand the box by pad_fraction of its size (split evenly per side),
    clamp to image bounds and return the crop.

    The low edge floors and the high edge ceils, so a fractional padding
    never loses covered pixels.
    """
    img = check_image(img)
    if pad_fraction < 0:
        raise ValueError(f"pad_fraction must be >= 0, got {pad_fraction}")
    h, w = img.shape[:2]
    pad_x = 0.5 * pad_fraction * box.w
    pad_y = 0.5 * pad_fraction * box.h
    x0 = int(np.floor(box.x - pad_x))
    y0 = int(np.floor(box.y - pad_y))
    x1 = int(np.ceil(box.x + box.w + pad_x))
    y1 = int(np.ceil(box.y + box.h + pad_y))
    x0, y0 = max(x0, 0), max(y0, 0)
    x1, y1 = min(x1, w), min(y1, h)
    if x1 <= x0 or y1 <= y0:
        raise EmptyIntersectionError(
            f"box {box} (pad {pad_fraction}) lies outside a {w}x{h} image"
        )
    return img[y0:y1, x0:x1].copy()
