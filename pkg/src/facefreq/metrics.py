"""ISO/IEC 30107-3 style evaluation: APCER, BPCER, DET curves, D-EER and
BPCER-targeted thresholds.

Conventions, fixed once and used everywhere:
  * higher score = more likely attack;
  * a sample is called an attack iff score >= threshold.

APCER is the fraction of attacks called bona fide; BPCER the fraction of
bona fide samples called attacks. Consequently APCER is nondecreasing and
BPCER nonincreasing in the threshold.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import NoBonafideError, ScoreFileError, SingleClassError
from .labels import ATTACK, BONAFIDE, label_name, parse_label


@dataclass(frozen=True)
class ScoreSet:
    """Aligned (sample_id, label, score) records; ids unique, scores in [0, 1]."""

    ids: tuple[str, ...]
    labels: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int8)
        scores = np.asarray(self.scores, dtype=np.float64)
        object.__setattr__(self, "ids", tuple(str(i) for i in self.ids))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "scores", scores)
        if not (len(self.ids) == len(labels) == len(scores)):
            raise ValueError("ids, labels and scores must have equal length")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("sample ids must be unique within a score set")
        if not np.all(np.isin(labels, (BONAFIDE, ATTACK))):
            raise ValueError("labels must be 0 (bona fide) or 1 (attack)")
        if len(scores) and not (
            np.all(np.isfinite(scores)) and scores.min() >= 0.0 and scores.max() <= 1.0
        ):
            raise ValueError("scores must be finite and within [0, 1]")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def bonafide_scores(self) -> np.ndarray:
        return self.scores[self.labels == BONAFIDE]

    @property
    def attack_scores(self) -> np.ndarray:
        return self.scores[self.labels == ATTACK]

    def with_scores(self, scores) -> "ScoreSet":
        return ScoreSet(self.ids, self.labels.copy(), scores)

    def records(self):
        for i in range(len(self.ids)):
            yield self.ids[i], int(self.labels[i]), float(self.scores[i])


@dataclass(frozen=True)
class DetCurve:
    """Operating points (threshold, apcer, bpcer), thresholds strictly increasing."""

    thresholds: np.ndarray
    apcer: np.ndarray
    bpcer: np.ndarray

    def __len__(self) -> int:
        return len(self.thresholds)


def _require_both_classes(scores: ScoreSet) -> tuple[np.ndarray, np.ndarray]:
    bona = scores.bonafide_scores
    att = scores.attack_scores
    if len(bona) == 0 or len(att) == 0:
        raise SingleClassError("metric needs at least one record of each class")
    return bona, att


def rates_at(scores: ScoreSet, threshold: float) -> tuple[float, float]:
    """(APCER, BPCER) at one decision threshold."""
    bona, att = _require_both_classes(scores)
    apcer = float(np.count_nonzero(att < threshold)) / len(att)
    bpcer = float(np.count_nonzero(bona >= threshold)) / len(bona)
    return apcer, bpcer


def _curve_counts(scores: ScoreSet) -> tuple[np.ndarray, np.ndarray, np.ndarray, int, int]:
    """Threshold grid (distinct scores plus sentinels) and integer error
    counts at each threshold."""
    bona, att = _require_both_classes(scores)
    thresholds = np.unique(
        np.concatenate([scores.scores, [0.0, np.nextafter(1.0, 2.0)]])
    )
    att_sorted = np.sort(att)
    bona_sorted = np.sort(bona)
    # attacks strictly below t; bona fide at or above t
    n_att_below = np.searchsorted(att_sorted, thresholds, side="left")
    n_bona_at_or_above = len(bona) - np.searchsorted(bona_sorted, thresholds, side="left")
    return thresholds, n_att_below, n_bona_at_or_above, len(att), len(bona)


def det_curve(scores: ScoreSet) -> DetCurve:
    """Operating points at every distinct score plus all-attack / all-bona-fide
    sentinels."""
    thresholds, a_cnt, b_cnt, n_att, n_bona = _curve_counts(scores)
    return DetCurve(thresholds, a_cnt / n_att, b_cnt / n_bona)


def d_eer(scores: ScoreSet) -> tuple[float, float]:
    """Detection equal error rate and its threshold.

    Walks the DET curve to the APCER-BPCER sign change and interpolates
    linearly between the bracketing points. The interpolation runs on exact
    rationals (error counts over class sizes), so algebraically equal inputs
    (e.g. flipped scores with swapped labels) give bit-equal results.
    """
    thresholds, a_cnt, b_cnt, n_att, n_bona = _curve_counts(scores)
    # diff is nondecreasing, from -n_att*n_bona at t=0 to +n_att*n_bona past 1
    diff = a_cnt.astype(np.int64) * n_bona - b_cnt.astype(np.int64) * n_att
    i = int(np.searchsorted(diff, 0, side="left"))
    if diff[i] == 0:
        return float(Fraction(int(a_cnt[i]), n_att)), float(thresholds[i])
    lo, hi = i - 1, i
    d1 = Fraction(int(a_cnt[lo]), n_att) - Fraction(int(b_cnt[lo]), n_bona)
    d2 = Fraction(int(a_cnt[hi]), n_att) - Fraction(int(b_cnt[hi]), n_bona)
    lam = -d1 / (d2 - d1)
    sum1 = Fraction(int(a_cnt[lo]), n_att) + Fraction(int(b_cnt[lo]), n_bona)
    sum2 = Fraction(int(a_cnt[hi]), n_att) + Fraction(int(b_cnt[hi]), n_bona)
    eer = ((1 - lam) * sum1 + lam * sum2) / 2
    threshold = (1.0 - float(lam)) * float(thresholds[lo]) + float(lam) * float(
        thresholds[hi]
    )
    return float(eer), threshold


def threshold_for_bpcer(scores: ScoreSet, target: float) -> float:
    """Smallest threshold whose BPCER does not exceed the target.

    With n bona fide scores, at most floor(target * n) of them may sit at or
    above the threshold; the result is one ulp above the first score that
    must stay below it.
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target BPCER must be in (0, 1), got {target}")
    bona = scores.bonafide_scores
    n = len(bona)
    if n == 0:
        raise NoBonafideError("threshold calibration needs bona fide records")
    # largest m with m/n <= target under float comparison, to stay consistent
    # with how rates_at will later evaluate the bound
    m = int(np.floor(target * n))
    while m + 1 <= n and (m + 1) / n <= target:
        m += 1
    while m > 0 and m / n > target:
        m -= 1
    if m >= n:
        return 0.0
    descending = np.sort(bona)[::-1]
    return float(np.nextafter(descending[m], np.inf))


def read_scores_csv(path: str | Path) -> ScoreSet:
    """Parse `sample_id,label,score` CSV (the interchange format for scores)."""
    path = Path(path)
    ids: list[str] = []
    labels: list[int] = []
    values: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["sample_id", "label", "score"]:
            raise ScoreFileError(f"{path}: expected header sample_id,label,score, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ScoreFileError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            sample_id, label_str, score_str = row
            try:
                label = parse_label(label_str)
            except Exception as exc:
                raise ScoreFileError(f"{path}:{lineno}: {exc}") from None
            try:
                score = float(score_str)
            except ValueError:
                raise ScoreFileError(f"{path}:{lineno}: bad score {score_str!r}") from None
            if not 0.0 <= score <= 1.0:
                raise ScoreFileError(f"{path}:{lineno}: score {score} outside [0, 1]")
            ids.append(sample_id)
            labels.append(label)
            values.append(score)
    try:
        return ScoreSet(tuple(ids), np.array(labels, np.int8), np.array(values))
    except ValueError as exc:
        raise ScoreFileError(f"{path}: {exc}") from None


def write_scores_csv(scores: ScoreSet, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "label", "score"])
        for sample_id, label, score in scores.records():
            writer.writerow([sample_id, label_name(label), repr(score)])


def write_det_csv(curve: DetCurve, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "apcer", "bpcer"])
        for t, a, b in zip(curve.thresholds, curve.apcer, curve.bpcer):
            writer.writerow([repr(float(t)), repr(float(a)), repr(float(b))])
