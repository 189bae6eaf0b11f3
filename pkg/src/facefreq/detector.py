"""Trainable linear scorer over pooled feature maps.

The scorer standardizes features, then minimizes binary cross-entropy with
AdaGrad (per-dimension accumulator G += g^2, update w -= lr * g / sqrt(G + eps)).
It is the score-producing stand-in for a deep backbone: image in, number in
(0, 1) out, higher meaning more likely manipulated.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin, TransformerMixin

from .errors import DegenerateLabelsError, DimensionMismatchError
from .features import FEATURE_TAGS, FeatureKind, extract
from .validation import check_feature_map, check_matrix

ADAGRAD_EPS = 1e-8
STD_FLOOR = 1e-8

_MAGIC = b"FGF1"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    batch_size: int = 32
    max_steps: int = 225
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@lru_cache(maxsize=64)
def _pool_matrix(n_in: int, n_out: int) -> np.ndarray:
    # Row i holds the fractional overlap of output cell i with each input
    # pixel, normalized to sum to one (exact identity when n_in == n_out).
    edges = np.arange(n_out + 1) * (n_in / n_out)
    pixels = np.arange(n_in, dtype=np.float64)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    overlap = np.clip(np.minimum(hi, pixels + 1.0) - np.maximum(lo, pixels), 0.0, None)
    return overlap / overlap.sum(axis=1, keepdims=True)


def vectorize(feature_map: np.ndarray, dim_side: int) -> np.ndarray:
    """Area-averaged downsample of a map to dim_side x dim_side, flattened
    row-major. A map already at the target size is passed through exactly."""
    feature_map = check_feature_map(feature_map)
    if dim_side < 1:
        raise ValueError(f"dim_side must be >= 1, got {dim_side}")
    h, w = feature_map.shape
    if (h, w) == (dim_side, dim_side):
        return feature_map.ravel().copy()
    pooled = _pool_matrix(h, dim_side) @ feature_map @ _pool_matrix(w, dim_side).T
    return pooled.ravel()


def _sigmoid(z: np.ndarray) -> np.ndarray:
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def bce_loss_and_grad(
    weights: np.ndarray, bias: float, X: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray, float]:
    """Mean binary cross-entropy of sigmoid(X w + b) against y in {0,1},
    with its gradient. Written with logaddexp so large |z| cannot overflow."""
    z = X @ weights + bias
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    err = _sigmoid(z) - y
    grad_w = X.T @ err / len(y)
    grad_b = float(err.mean())
    return loss, grad_w, grad_b


class LinearScorer(BaseEstimator, ClassifierMixin):
    """Logistic scorer trained with AdaGrad.

    Parameters mirror the training setup used throughout: minibatch size 32,
    learning rate 1e-4, a step budget, and a shuffle seed. `kind` records
    which feature family the model was trained on (kept in the serialized
    form so score files can be attributed).

    Attributes after fit: weights_, bias_, mean_, std_ (standardization
    statistics, std floored at 1e-8), loss_curve_ (full-dataset loss at the
    end of each epoch), n_features_in_, classes_.
    """

    def __init__(
        self,
        learning_rate: float = 1e-4,
        batch_size: int = 32,
        max_steps: int = 225,
        seed: int = 0,
        kind: str = "rgb",
    ):
        self.learning_rate = learning_rate
        self.batch_size = batch_size
        self.max_steps = max_steps
        self.seed = seed
        self.kind = kind

    @classmethod
    def from_config(cls, cfg: TrainConfig, kind: str = "rgb") -> "LinearScorer":
        return cls(
            learning_rate=cfg.learning_rate,
            batch_size=cfg.batch_size,
            max_steps=cfg.max_steps,
            seed=cfg.seed,
            kind=kind,
        )

    def fit(self, X, y):
        cfg = TrainConfig(self.learning_rate, self.batch_size, self.max_steps, self.seed)
        X = check_matrix(X)
        y = np.asarray(y, dtype=np.float64).ravel()
        if len(y) != len(X):
            raise ValueError(f"X has {len(X)} rows but y has {len(y)}")
        if np.unique(y).size < 2:
            raise DegenerateLabelsError("training data contains a single class")
        if not np.all(np.isin(y, (0.0, 1.0))):
            raise ValueError("labels must be 0 (bona fide) or 1 (attack)")

        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1])
        self.mean_ = X.mean(axis=0)
        self.std_ = np.maximum(X.std(axis=0), STD_FLOOR)
        Z = (X - self.mean_) / self.std_

        n, d = Z.shape
        w = np.zeros(d)
        b = 0.0
        acc_w = np.zeros(d)
        acc_b = 0.0
        rng = np.random.default_rng(self.seed)
        losses: list[float] = []
        step = 0
        while step < cfg.max_steps:
            order = rng.permutation(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start : start + cfg.batch_size]
                _, gw, gb = bce_loss_and_grad(w, b, Z[idx], y[idx])
                acc_w += gw * gw
                acc_b += gb * gb
                w -= cfg.learning_rate * gw / np.sqrt(acc_w + ADAGRAD_EPS)
                b -= cfg.learning_rate * gb / np.sqrt(acc_b + ADAGRAD_EPS)
                step += 1
                if step >= cfg.max_steps:
                    break
            losses.append(bce_loss_and_grad(w, b, Z, y)[0])

        self.weights_ = w
        self.bias_ = float(b)
        self.loss_curve_ = losses
        return self

    def _standardize(self, X) -> np.ndarray:
        if not hasattr(self, "weights_"):
            raise RuntimeError("scorer is not fitted")
        X = check_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DimensionMismatchError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return (X - self.mean_) / self.std_

    def decision_function(self, X) -> np.ndarray:
        return self._standardize(X) @ self.weights_ + self.bias_

    def score_samples(self, X) -> np.ndarray:
        """Attack likelihood in the open interval (0, 1), one per row."""
        p = _sigmoid(self.decision_function(X))
        return np.clip(p, 1e-12, 1.0 - 1e-12)

    def predict_proba(self, X) -> np.ndarray:
        p = self.score_samples(X)
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.score_samples(X) >= 0.5).astype(int)

    def save(self, path: str | Path) -> None:
        """Flat little-endian binary: magic, kind tag byte, u32 dim, then
        weights / bias / mean / std as f64."""
        tag_code = FEATURE_TAGS.index(self.kind)
        dim = self.n_features_in_
        blob = (
            _MAGIC
            + struct.pack("<BI", tag_code, dim)
            + self.weights_.astype("<f8").tobytes()
            + struct.pack("<d", self.bias_)
            + self.mean_.astype("<f8").tobytes()
            + self.std_.astype("<f8").tobytes()
        )
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(blob)

    @classmethod
    def load(cls, path: str | Path) -> "LinearScorer":
        blob = Path(path).read_bytes()
        if blob[:4] != _MAGIC:
            raise ValueError(f"{path}: not a scorer file (bad magic)")
        tag_code, dim = struct.unpack_from("<BI", blob, 4)
        expected = 4 + 5 + 8 * (3 * dim + 1)
        if len(blob) != expected:
            raise ValueError(f"{path}: truncated scorer file")
        offset = 9
        w = np.frombuffer(blob, "<f8", dim, offset).copy()
        offset += 8 * dim
        (bias,) = struct.unpack_from("<d", blob, offset)
        offset += 8
        mean = np.frombuffer(blob, "<f8", dim, offset).copy()
        offset += 8 * dim
        std = np.frombuffer(blob, "<f8", dim, offset).copy()
        model = cls(kind=FEATURE_TAGS[tag_code])
        model.n_features_in_ = dim
        model.classes_ = np.array([0, 1])
        model.weights_ = w
        model.bias_ = float(bias)
        model.mean_ = mean
        model.std_ = std
        model.loss_curve_ = []
        return model


class FeatureExtractor(BaseEstimator, TransformerMixin):
    """Images in, fixed-length feature vectors out.

    Runs one handcrafted extractor and pools the resulting map to a
    vector_side x vector_side grid by area averaging. Signed residual maps
    (SRM, SVD residual) are pooled on their magnitudes when rectify is left
    at None, because averaging a zero-mean residual over coarse cells would
    cancel exactly the structure the kernel exposes.
    """

    def __init__(
        self,
        kind: str = "dct",
        dct_block: int | None = 20,
        ela_quality: int = 90,
        svd_rank: int = 50,
        svd_residual: bool = False,
        vector_side: int = 32,
        rectify: bool | None = None,
    ):
        self.kind = kind
        self.dct_block = dct_block
        self.ela_quality = ela_quality
        self.svd_rank = svd_rank
        self.svd_residual = svd_residual
        self.vector_side = vector_side
        self.rectify = rectify

    def feature_kind(self) -> FeatureKind:
        return FeatureKind(
            tag=self.kind,
            dct_block=self.dct_block,
            ela_quality=self.ela_quality,
            svd_rank=self.svd_rank,
            svd_residual=self.svd_residual,
        )

    def _rectify(self) -> bool:
        if self.rectify is not None:
            return self.rectify
        return self.kind == "srm" or (self.kind == "svd" and self.svd_residual)

    def recipe_token(self) -> str:
        """Stable string naming everything that shapes the output vector."""
        return (
            f"{self.feature_kind().cache_token()}"
            f"|side={self.vector_side}|rectify={int(self._rectify())}"
        )

    def fit(self, X, y=None):
        return self

    def transform_one(self, img: np.ndarray) -> np.ndarray:
        fmap = extract(img, self.feature_kind())
        if self._rectify():
            fmap = np.abs(fmap)
        return vectorize(fmap, self.vector_side)

    def transform(self, X) -> np.ndarray:
        return np.stack([self.transform_one(img) for img in X])
