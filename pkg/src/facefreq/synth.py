"""Synthetic tamper corpus: procedurally rendered face-like images plus
spliced copies with a compression-mismatched patch.

Bona fide images are drawn (gradient background, shaded ellipse head, eyes,
mouth, fine noise) and saved once at JPEG quality 95. Each attack clones a
bona fide file, recompresses a rectangular patch at quality 40-60, blends
it back with a Gaussian-feathered seam and resaves the whole image at
quality 70-90: the patch then carries a different compression history than
its surroundings, which is exactly what the frequency extractors look for.

Everything is keyed off one integer seed; identical seeds give
byte-identical corpora.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .image_io import decode_image, encode_jpeg
from .labels import ATTACK, BONAFIDE
from .manifest import DatasetManifest, ManifestEntry, write_manifest

BONAFIDE_QUALITY = 95
PATCH_QUALITY = (40, 60)
RESAVE_QUALITY = (70, 90)


def _gaussian_blur(arr: np.ndarray, sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(3.0 * sigma)))
    taps = np.exp(-0.5 * (np.arange(-radius, radius + 1) / sigma) ** 2)
    taps /= taps.sum()
    for axis in (0, 1):
        pad = [(0, 0), (0, 0)]
        pad[axis] = (radius, radius)
        padded = np.pad(arr, pad, mode="edge")
        out = np.zeros_like(arr)
        for k, w in enumerate(taps):
            if axis == 0:
                out += w * padded[k : k + arr.shape[0], :]
            else:
                out += w * padded[:, k : k + arr.shape[1]]
        arr = out
    return arr


def _ellipse_field(h: int, w: int, cx: float, cy: float, rx: float, ry: float) -> np.ndarray:
    yy, xx = np.mgrid[0:h, 0:w]
    return ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2


def _soft_mask(field: np.ndarray, softness: float = 12.0) -> np.ndarray:
    return np.clip((1.0 - field) * softness, 0.0, 1.0)


def render_face(rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """One procedural face-like RGB image."""
    if size is None:
        size = int(rng.choice([224, 256, 288]))
    h = w = size
    yy, xx = np.mgrid[0:h, 0:w] / size

    # background: linear gradient between two soft colors plus a slow wave
    c0 = rng.uniform(90, 220, size=3)
    c1 = rng.uniform(90, 220, size=3)
    theta = rng.uniform(0, 2 * np.pi)
    t = np.cos(theta) * xx + np.sin(theta) * yy
    t = (t - t.min()) / max(t.max() - t.min(), 1e-9)
    img = c0 + t[:, :, None] * (c1 - c0)
    wave = rng.uniform(4, 12) * np.sin(
        2 * np.pi * (rng.uniform(0.5, 2.0) * xx + rng.uniform(0.5, 2.0) * yy + rng.random())
    )
    img += wave[:, :, None]

    # head
    cx = w * rng.uniform(0.44, 0.56)
    cy = h * rng.uniform(0.44, 0.56)
    rx = w * rng.uniform(0.24, 0.33)
    ry = rx * rng.uniform(1.15, 1.35)
    head = _ellipse_field(h, w, cx, cy, rx, ry)
    alpha = _soft_mask(head)
    skin = np.array(
        [rng.uniform(185, 230), rng.uniform(140, 185), rng.uniform(105, 150)]
    )
    shading = 1.0 - 0.30 * np.clip(head, 0.0, 1.0)
    face = skin[None, None, :] * shading[:, :, None]
    img = img * (1 - alpha[:, :, None]) + face * alpha[:, :, None]

    # eyes and mouth
    eye_dy = cy - 0.28 * ry
    eye_dx = 0.42 * rx
    eye_r = rng.uniform(0.10, 0.14) * rx
    dark = rng.uniform(15, 60, size=3)
    for side in (-1.0, 1.0):
        e = _ellipse_field(h, w, cx + side * eye_dx, eye_dy, eye_r, eye_r * 0.7)
        a = _soft_mask(e, softness=6.0)
        img = img * (1 - a[:, :, None]) + dark[None, None, :] * a[:, :, None]
    mouth = _ellipse_field(h, w, cx, cy + 0.48 * ry, 0.38 * rx, 0.10 * ry)
    mouth_color = np.array([rng.uniform(120, 180), rng.uniform(45, 85), rng.uniform(45, 85)])
    a = _soft_mask(mouth, softness=6.0)
    img = img * (1 - a[:, :, None]) + mouth_color[None, None, :] * a[:, :, None]

    # fine texture so that quantization has something to bite on
    img += rng.normal(0.0, rng.uniform(1.5, 3.0), size=img.shape)
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def splice_patch(
    img: np.ndarray, rng: np.random.Generator
) -> tuple[bytes, tuple[int, int, int, int]]:
    """Tamper one image: recompress a central rectangle at low quality, blend
    with a feathered seam, resave the whole frame at mid quality.

    Returns (encoded JPEG bytes, patch rect as (x, y, w, h))."""
    h, w = img.shape[:2]
    pw = int(rng.uniform(0.16, 0.30) * w)
    ph = int(rng.uniform(0.16, 0.30) * h)
    x0 = int(rng.integers(int(0.15 * w), w - pw - int(0.15 * w) + 1))
    y0 = int(rng.integers(int(0.15 * h), h - ph - int(0.15 * h) + 1))

    patch = img[y0 : y0 + ph, x0 : x0 + pw]
    q_patch = int(rng.integers(PATCH_QUALITY[0], PATCH_QUALITY[1] + 1))
    recompressed = decode_image(encode_jpeg(patch, q_patch))

    alpha = np.zeros((h, w), dtype=np.float64)
    alpha[y0 : y0 + ph, x0 : x0 + pw] = 1.0
    alpha = _gaussian_blur(alpha, float(rng.uniform(1.5, 3.5)))

    layer = img.astype(np.float64).copy()
    layer[y0 : y0 + ph, x0 : x0 + pw] = recompressed
    blended = img.astype(np.float64) * (1 - alpha[:, :, None]) + layer * alpha[:, :, None]
    blended = np.clip(np.floor(blended + 0.5), 0, 255).astype(np.uint8)

    q_final = int(rng.integers(RESAVE_QUALITY[0], RESAVE_QUALITY[1] + 1))
    return encode_jpeg(blended, q_final), (x0, y0, pw, ph)


def _split_counts(n: int) -> tuple[int, int, int]:
    train = int(np.floor(0.6 * n))
    val = int(np.floor(0.2 * n))
    return train, val, n - train - val


def _split_for_index(i: int, counts: tuple[int, int, int]) -> str:
    if i < counts[0]:
        return "train"
    if i < counts[0] + counts[1]:
        return "val"
    return "test"


def generate_synthetic_corpus(
    n_bonafide: int, n_attack: int, seed: int, out_dir: str | Path
) -> tuple[DatasetManifest, dict[str, tuple[int, int, int, int]]]:
    """Render the corpus into out_dir and write manifest.jsonl plus
    tamper_regions.json. Returns the manifest and the patch rect per attack
    file name. Deterministic per seed, byte for byte."""
    if n_bonafide < 1 or n_attack < 1:
        raise ValueError("need at least one sample of each class")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    streams = np.random.SeedSequence(seed).spawn(n_bonafide + n_attack)

    entries: list[ManifestEntry] = []
    bona_counts = _split_counts(n_bonafide)
    attack_counts = _split_counts(n_attack)
    bona_bytes: list[bytes] = []
    regions: dict[str, tuple[int, int, int, int]] = {}

    for i in range(n_bonafide):
        rng = np.random.default_rng(streams[i])
        data = encode_jpeg(render_face(rng), BONAFIDE_QUALITY)
        name = f"bonafide_{i:04d}.jpg"
        (out / name).write_bytes(data)
        bona_bytes.append(data)
        entries.append(
            ManifestEntry(out / name, BONAFIDE, _split_for_index(i, bona_counts), None, "synthetic")
        )

    for j in range(n_attack):
        rng = np.random.default_rng(streams[n_bonafide + j])
        source = decode_image(bona_bytes[j % n_bonafide])
        data, rect = splice_patch(source, rng)
        name = f"attack_{j:04d}.jpg"
        (out / name).write_bytes(data)
        regions[name] = rect
        entries.append(
            ManifestEntry(out / name, ATTACK, _split_for_index(j, attack_counts), None, "synthetic")
        )

    manifest = DatasetManifest(tuple(entries), base_dir=out)
    write_manifest(manifest, out / "manifest.jsonl")
    (out / "tamper_regions.json").write_text(
        json.dumps({k: list(v) for k, v in sorted(regions.items())}, sort_keys=True, indent=0)
        + "\n"
    )
    return manifest, regions


def attack_source_name(attack_name: str, n_bonafide: int) -> str:
    """Name of the bona fide file an attack image was cloned from."""
    idx = int(Path(attack_name).stem.split("_")[1])
    return f"bonafide_{idx % n_bonafide:04d}.jpg"
