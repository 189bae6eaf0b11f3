"""Score-level fusion (min/mean/max/weighted) and per-model calibration.

Calibration re-anchors a model's operating threshold to 0.5 through a
continuous piecewise-linear map ([0, t*] -> [0, 0.5], [t*, 1] -> [0.5, 1]),
so that fusing calibrated models compares like-for-like operating points.
The map is strictly monotone for t* in (0, 1), hence rank metrics such as
the D-EER are unchanged by it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IdMismatchError, LabelConflictError
from .metrics import ScoreSet, threshold_for_bpcer

FUSION_KINDS = ("min", "mean", "max", "weighted")

CALIBRATION_KINDS = ("default", "target_bpcer")


@dataclass(frozen=True)
class FusionRule:
    kind: str
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in FUSION_KINDS:
            raise ValueError(f"unknown fusion kind {self.kind!r}, expected one of {FUSION_KINDS}")
        if self.kind == "weighted":
            if not self.weights:
                raise ValueError("weighted fusion requires weights")
            w = np.asarray(self.weights, dtype=np.float64)
            if np.any(w < 0) or w.sum() <= 0:
                raise ValueError("weights must be nonnegative with positive sum")
        elif self.weights is not None:
            raise ValueError(f"{self.kind} fusion takes no weights")


@dataclass(frozen=True)
class CalibrationProtocol:
    """'default' leaves scores alone (t* = 0.5 is the identity map);
    'target_bpcer' picks t* so the dev-set BPCER meets the target
    (conventional operating points: 0.02 and 0.05)."""

    kind: str = "default"
    target: float | None = None

    def __post_init__(self):
        if self.kind not in CALIBRATION_KINDS:
            raise ValueError(
                f"unknown calibration kind {self.kind!r}, expected one of {CALIBRATION_KINDS}"
            )
        if self.kind == "target_bpcer":
            if self.target is None or not 0.0 < self.target < 1.0:
                raise ValueError("target_bpcer requires a target in (0, 1)")
        elif self.target is not None:
            raise ValueError("default calibration takes no target")

    def name(self) -> str:
        if self.kind == "default":
            return "default"
        return f"bpcer{self.target * 100:.2f}"


@dataclass(frozen=True)
class CalibratedScorer:
    """Piecewise-linear score map anchored at threshold -> 0.5."""

    threshold: float

    def map_scores(self, scores: np.ndarray) -> np.ndarray:
        s = np.asarray(scores, dtype=np.float64)
        t = self.threshold
        if t <= 0.0:
            mapped = 0.5 + 0.5 * s
        elif t >= 1.0:
            mapped = 0.5 * s / t
        else:
            mapped = np.empty_like(s)
            low = s <= t
            mapped[low] = 0.5 * s[low] / t
            mapped[~low] = 0.5 + 0.5 * (s[~low] - t) / (1.0 - t)
        return np.clip(mapped, 0.0, 1.0)


def calibrate(dev_scores: ScoreSet, protocol: CalibrationProtocol) -> CalibratedScorer:
    """Fit the calibration map on a development score set."""
    if protocol.kind == "default":
        return CalibratedScorer(0.5)
    return CalibratedScorer(threshold_for_bpcer(dev_scores, protocol.target))


def apply_calibration(calibrated: CalibratedScorer, scores: ScoreSet) -> ScoreSet:
    """Map every score; ids and labels pass through."""
    return scores.with_scores(calibrated.map_scores(scores.scores))


def fuse(score_sets: list[ScoreSet], rule: FusionRule) -> ScoreSet:
    """Per-sample aggregation of two or more score sets over identical ids.

    Output keeps the first set's record order and labels (labels must agree
    across inputs).
    """
    if len(score_sets) < 2:
        raise ValueError("fusion needs at least two score sets")
    first = score_sets[0]
    base_ids = first.ids
    base_key = sorted(base_ids)
    stacked = [first.scores]
    for other in score_sets[1:]:
        if sorted(other.ids) != base_key:
            raise IdMismatchError("score sets do not cover the same sample ids")
        index = {sid: i for i, sid in enumerate(other.ids)}
        order = np.fromiter((index[sid] for sid in base_ids), dtype=np.intp)
        if not np.array_equal(other.labels[order], first.labels):
            raise LabelConflictError("same sample id carries different labels")
        stacked.append(other.scores[order])
    matrix = np.vstack(stacked)

    if rule.kind == "min":
        fused = matrix.min(axis=0)
    elif rule.kind == "max":
        fused = matrix.max(axis=0)
    elif rule.kind == "mean":
        fused = matrix.mean(axis=0)
    else:
        w = np.asarray(rule.weights, dtype=np.float64)
        if len(w) != len(score_sets):
            raise ValueError(
                f"{len(w)} weights for {len(score_sets)} score sets"
            )
        fused = (w @ matrix) / w.sum()
    return first.with_scores(fused)
