"""Content-addressed feature vector cache.

Keys hash the image bytes together with every parameter that can change the
vector (extractor parameters, preprocessing config, pooling size), never
paths or mtimes: moving files around cannot serve stale features, and a hit
is bit-identical to a fresh computation. Writes go through a temp file and
os.replace, so concurrent extraction workers are safe.
"""

from __future__ import annotations

import hashlib
import os
import struct
import uuid
from pathlib import Path

import numpy as np

from .preprocess import PreprocessConfig


def serialize_vector(vec: np.ndarray) -> bytes:
    vec = np.asarray(vec, dtype=np.float64)
    return struct.pack("<I", vec.size) + vec.astype("<f8").tobytes()


def deserialize_vector(blob: bytes) -> np.ndarray:
    (dim,) = struct.unpack_from("<I", blob, 0)
    if len(blob) != 4 + 8 * dim:
        raise ValueError("corrupt feature vector payload")
    return np.frombuffer(blob, "<f8", dim, 4).copy()


def feature_key(
    image_bytes: bytes,
    recipe: str,
    pre_cfg: PreprocessConfig,
    extra: str = "",
) -> str:
    """Hex digest identifying one (image, extraction recipe) pair.

    `recipe` is the extractor's recipe_token() (tag, parameters, pooling);
    `extra` distinguishes variants that alter pixels before extraction
    (e.g. a specific augmentation draw) and is empty for the plain path.
    """
    h = hashlib.sha256()
    h.update(struct.pack("<Q", len(image_bytes)))
    h.update(image_bytes)
    parts = "|".join(
        [
            recipe,
            f"pad={pre_cfg.pad_fraction!r}",
            f"size={pre_cfg.target_size}",
            extra,
        ]
    )
    h.update(parts.encode())
    return h.hexdigest()


class FeatureCache:
    """File-per-key store under one directory; None directory disables it."""

    def __init__(self, cache_dir: str | Path | None):
        self.dir = Path(cache_dir) if cache_dir is not None else None
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0

    @property
    def enabled(self) -> bool:
        return self.dir is not None

    def _path(self, key: str) -> Path:
        return self.dir / f"{key}.fv"

    def get(self, key: str) -> np.ndarray | None:
        if self.dir is None:
            self.misses += 1
            return None
        path = self._path(key)
        try:
            blob = path.read_bytes()
        except FileNotFoundError:
            self.misses += 1
            return None
        self.hits += 1
        return deserialize_vector(blob)

    def put(self, key: str, vec: np.ndarray) -> None:
        if self.dir is None:
            return
        path = self._path(key)
        tmp = path.with_name(f".{path.name}.{uuid.uuid4().hex}.tmp")
        tmp.write_bytes(serialize_vector(vec))
        os.replace(tmp, path)
