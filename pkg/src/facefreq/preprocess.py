"""Face preprocessing (crop, pad, resize) and training-time augmentation.

Both entry points are pure: augment draws every random parameter from an
RNG keyed by (seed, sample_index), so results do not depend on dataset
order or worker scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .image_io import FaceBox, crop_with_padding, decode_image, encode_jpeg, resize_bilinear
from .labels import ATTACK
from .validation import check_image


@dataclass(frozen=True)
class PreprocessConfig:
    pad_fraction: float = 0.5
    target_size: int = 384
    grayscale_for_handcrafted: bool = True

    def __post_init__(self):
        if self.target_size < 16:
            raise ValueError(f"target_size must be >= 16, got {self.target_size}")
        if self.pad_fraction < 0:
            raise ValueError(f"pad_fraction must be >= 0, got {self.pad_fraction}")


@dataclass(frozen=True)
class AugmentConfig:
    """Augmentation magnitudes. All ranges are inclusive; degenerate ranges
    and zero probabilities turn the corresponding step into the identity."""

    hflip_prob: float = 0.5
    brightness_delta: float = 0.1
    contrast_range: tuple[float, float] = (0.8, 1.2)
    hue_delta: float = 10.0
    saturation_range: tuple[float, float] = (0.8, 1.2)
    jpeg_quality_range: tuple[int, int] | None = (30, 90)
    jpeg_on_attacks_only: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.hflip_prob <= 1.0:
            raise ValueError("hflip_prob must be in [0, 1]")
        if self.brightness_delta < 0:
            raise ValueError("brightness_delta must be >= 0")
        for name in ("contrast_range", "saturation_range"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise ValueError(f"{name} is empty: {(lo, hi)}")
        if self.jpeg_quality_range is not None:
            lo, hi = self.jpeg_quality_range
            if hi < lo or lo < 1 or hi > 100:
                raise ValueError(f"jpeg_quality_range must lie in [1, 100]: {(lo, hi)}")


def synthesize_face_box(width: int, height: int) -> FaceBox:
    """Fallback when no detector output is available: a centered square
    covering 80% of the shorter dimension."""
    side = int(round(0.8 * min(width, height)))
    side = max(side, 1)
    return FaceBox((width - side) // 2, (height - side) // 2, side, side)


def preprocess_face(
    img: np.ndarray, box: FaceBox | None, cfg: PreprocessConfig = PreprocessConfig()
) -> np.ndarray:
    """Crop the (padded) face box and resize to target_size squared.

    Channels pass through untouched; grayscale conversion is the feature
    extractor's concern.
    """
    img = check_image(img)
    if box is None:
        box = synthesize_face_box(img.shape[1], img.shape[0])
    crop = crop_with_padding(img, box, cfg.pad_fraction)
    return resize_bilinear(crop, cfg.target_size, cfg.target_size)


def _rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    delta = maxc - minc
    safe = np.where(delta == 0, 1.0, delta)
    h = np.where(
        maxc == r,
        ((g - b) / safe) % 6.0,
        np.where(maxc == g, (b - r) / safe + 2.0, (r - g) / safe + 4.0),
    )
    h = np.where(delta == 0, 0.0, h) / 6.0
    s = np.where(maxc == 0, 0.0, delta / np.where(maxc == 0, 1.0, maxc))
    return np.stack([h, s, maxc], axis=-1)


def _hsv_to_rgb(hsv: np.ndarray) -> np.ndarray:
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    h6 = (h % 1.0) * 6.0
    i = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def augment(
    img: np.ndarray, label: int, cfg: AugmentConfig, sample_index: int
) -> np.ndarray:
    """Apply flip / brightness / contrast / hue / saturation / JPEG
    recompression with per-sample deterministic randomness.

    JPEG recompression is skipped for bona fide samples when
    cfg.jpeg_on_attacks_only is set (the default).
    """
    img = check_image(img, channels=3)
    seq = np.random.SeedSequence(entropy=(cfg.seed & 0xFFFFFFFFFFFFFFFF, sample_index))
    rng = np.random.default_rng(seq)

    # All parameters are drawn up front, in a fixed order, so that toggling
    # individual steps never shifts the stream consumed by the others.
    u_flip = rng.random()
    d_bright = rng.uniform(-cfg.brightness_delta, cfg.brightness_delta)
    f_contrast = rng.uniform(*cfg.contrast_range)
    d_hue = rng.uniform(-cfg.hue_delta, cfg.hue_delta)
    f_sat = rng.uniform(*cfg.saturation_range)
    if cfg.jpeg_quality_range is not None:
        lo, hi = cfg.jpeg_quality_range
        jpeg_q = int(rng.integers(lo, hi + 1))
    else:
        jpeg_q = None

    out = img
    if u_flip < cfg.hflip_prob:
        out = out[:, ::-1, :]

    x = out.astype(np.float64) / 255.0
    if d_bright != 0.0:
        x = np.clip(x + d_bright, 0.0, 1.0)
    if f_contrast != 1.0:
        mean = (x @ np.array([0.299, 0.587, 0.114])).mean()
        x = np.clip(mean + f_contrast * (x - mean), 0.0, 1.0)
    if d_hue != 0.0 or f_sat != 1.0:
        hsv = _rgb_to_hsv(x)
        hsv[..., 0] = (hsv[..., 0] + d_hue / 360.0) % 1.0
        hsv[..., 1] = np.clip(hsv[..., 1] * f_sat, 0.0, 1.0)
        x = _hsv_to_rgb(hsv)
    out = np.floor(np.clip(x, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)

    if jpeg_q is not None and (label == ATTACK or not cfg.jpeg_on_attacks_only):
        out = decode_image(encode_jpeg(out, jpeg_q))
    return out


class FacePreprocessor(BaseEstimator, TransformerMixin):
    """Transformer over lists of images (or (image, FaceBox) pairs).

    Stateless; fit is a no-op kept for pipeline compatibility.
    """

    def __init__(self, pad_fraction: float = 0.5, target_size: int = 384):
        self.pad_fraction = pad_fraction
        self.target_size = target_size

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> list[np.ndarray]:
        cfg = PreprocessConfig(
            pad_fraction=self.pad_fraction, target_size=self.target_size
        )
        out = []
        for item in X:
            if isinstance(item, tuple):
                img, box = item
            else:
                img, box = item, None
            out.append(preprocess_face(img, box, cfg))
        return out
