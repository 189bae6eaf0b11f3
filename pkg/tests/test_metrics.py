import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from facefreq.errors import NoBonafideError, ScoreFileError, SingleClassError
from facefreq.metrics import (
    ScoreSet,
    d_eer,
    det_curve,
    rates_at,
    read_scores_csv,
    threshold_for_bpcer,
    write_det_csv,
    write_scores_csv,
)

from oracles import eer_reference, random_score_set


def make_set(bona, att):
    scores = list(bona) + list(att)
    labels = [0] * len(bona) + [1] * len(att)
    ids = tuple(f"s{i}" for i in range(len(scores)))
    return ScoreSet(ids, np.array(labels, np.int8), np.array(scores))


class TestScoreSet:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            ScoreSet(("a", "a"), np.array([0, 1]), np.array([0.1, 0.2]))

    def test_out_of_range_scores_rejected(self):
        with pytest.raises(ValueError):
            make_set([1.5], [0.5])

    def test_bad_labels_rejected(self):
        with pytest.raises(ValueError):
            ScoreSet(("a",), np.array([2]), np.array([0.5]))


class TestRatesAt:
    def test_perfect_separation(self):
        assert rates_at(make_set([0.1, 0.2], [0.8, 0.9]), 0.5) == (0.0, 0.0)

    def test_threshold_zero_flags_everything(self):
        assert rates_at(make_set([0.1, 0.2], [0.8, 0.9]), 0.0) == (0.0, 1.0)

    def test_hand_counted_mix(self):
        assert rates_at(make_set([0.1, 0.6], [0.4, 0.9]), 0.5) == (0.5, 0.5)

    def test_tie_counts_as_attack(self):
        apcer, bpcer = rates_at(make_set([0.5], [0.5]), 0.5)
        assert (apcer, bpcer) == (0.0, 1.0)

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            rates_at(make_set([0.1], []), 0.5)


class TestDetCurve:
    def test_two_score_example(self):
        curve = det_curve(make_set([0.3], [0.7]))
        assert len(curve) == 4
        assert curve.thresholds[0] == 0.0
        assert (curve.apcer[0], curve.bpcer[0]) == (0.0, 1.0)
        assert (curve.apcer[1], curve.bpcer[1]) == (0.0, 1.0)  # t = 0.3
        assert (curve.apcer[2], curve.bpcer[2]) == (0.0, 0.0)  # t = 0.7
        assert (curve.apcer[3], curve.bpcer[3]) == (1.0, 0.0)

    def test_identical_scores_jump(self):
        curve = det_curve(make_set([0.5, 0.5], [0.5]))
        pairs = list(zip(curve.apcer, curve.bpcer))
        assert pairs[0] == (0.0, 1.0)
        assert pairs[-1] == (1.0, 0.0)
        assert len(pairs) == 3

    def test_monotonicity_on_random_sets(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            labels, scores = random_score_set(rng, max_n=60)
            ids = tuple(map(str, range(len(scores))))
            curve = det_curve(ScoreSet(ids, labels, scores))
            assert np.all(np.diff(curve.thresholds) > 0)
            assert np.all(np.diff(curve.apcer) >= 0)
            assert np.all(np.diff(curve.bpcer) <= 0)
            assert curve.apcer.min() >= 0 and curve.apcer.max() <= 1
            assert curve.bpcer.min() >= 0 and curve.bpcer.max() <= 1


class TestDEer:
    def test_separable_is_zero(self):
        eer, _ = d_eer(make_set([0.1, 0.2, 0.3], [0.7, 0.8, 0.9]))
        assert eer == 0.0

    def test_identical_distributions_near_half(self, rng):
        values = rng.random(100)
        eer, _ = d_eer(make_set(values, values))
        assert abs(eer - 0.5) <= 0.05

    def test_exhaustive_crossing_example(self):
        eer, threshold = d_eer(make_set([0.1, 0.4, 0.6], [0.5, 0.7, 0.9]))
        assert abs(eer - 1.0 / 3.0) < 1e-15
        assert threshold == 0.6

    def test_matches_reference_sweep(self, rng):
        for _ in range(200):
            labels, scores = random_score_set(rng, max_n=50)
            ids = tuple(map(str, range(len(scores))))
            eer, _ = d_eer(ScoreSet(ids, labels, scores))
            assert abs(eer - eer_reference(labels, scores)) < 1e-9

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_flip_symmetry_exact(self, seed):
        labels, scores = random_score_set(np.random.default_rng(seed), max_n=40)
        ids = tuple(map(str, range(len(scores))))
        eer, _ = d_eer(ScoreSet(ids, labels, scores))
        flipped, _ = d_eer(ScoreSet(ids, 1 - labels, 1.0 - scores))
        assert eer == flipped

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassError):
            d_eer(make_set([], [0.5, 0.6]))


class TestThresholdForBpcer:
    def test_nine_point_budget(self):
        bona = [0.1 * k for k in range(1, 10)]
        t = threshold_for_bpcer(make_set(bona, [0.99]), 0.2)
        assert t == np.nextafter(0.8, np.inf)
        _, bpcer = rates_at(make_set(bona, [0.99]), t)
        assert bpcer <= 0.2

    def test_point_mass(self):
        t = threshold_for_bpcer(make_set([0.5, 0.5, 0.5], [0.9]), 0.01)
        assert t == np.nextafter(0.5, np.inf)
        _, bpcer = rates_at(make_set([0.5, 0.5, 0.5], [0.9]), t)
        assert bpcer == 0.0

    def test_slack_budget_minimal(self):
        scores = make_set([0.5], [0.9])
        t = threshold_for_bpcer(scores, 0.9999999)
        assert rates_at(scores, t)[1] <= 0.9999999
        below = np.nextafter(t, -np.inf)
        assert rates_at(scores, below)[1] > 0.9999999

    def test_bound_and_minimality_random(self, rng):
        for _ in range(200):
            labels, scores = random_score_set(rng, max_n=40)
            ids = tuple(map(str, range(len(scores))))
            score_set = ScoreSet(ids, labels, scores)
            target = float(rng.uniform(0.01, 0.99))
            t = threshold_for_bpcer(score_set, target)
            assert rates_at(score_set, t)[1] <= target
            below = np.nextafter(t, -np.inf)
            if below >= 0:
                assert rates_at(score_set, below)[1] > target

    def test_no_bonafide_rejected(self):
        with pytest.raises(NoBonafideError):
            threshold_for_bpcer(make_set([], [0.5]), 0.1)

    def test_target_validation(self):
        with pytest.raises(ValueError):
            threshold_for_bpcer(make_set([0.5], [0.9]), 1.0)


class TestCsvRoundtrip:
    def test_scores_roundtrip_exact(self, tmp_path, rng):
        labels, scores = random_score_set(rng, max_n=30)
        ids = tuple(f"img_{i}.jpg" for i in range(len(scores)))
        original = ScoreSet(ids, labels, scores)
        path = tmp_path / "scores.csv"
        write_scores_csv(original, path)
        loaded = read_scores_csv(path)
        assert loaded.ids == original.ids
        assert np.array_equal(loaded.labels, original.labels)
        assert np.array_equal(loaded.scores, original.scores)

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("id,y,p\na,bonafide,0.5\n")
        with pytest.raises(ScoreFileError):
            read_scores_csv(path)

    def test_bad_label_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("sample_id,label,score\na,real,0.5\n")
        with pytest.raises(ScoreFileError):
            read_scores_csv(path)

    def test_bad_score_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("sample_id,label,score\na,attack,1.5\n")
        with pytest.raises(ScoreFileError):
            read_scores_csv(path)

    def test_det_csv_export(self, tmp_path):
        curve = det_curve(make_set([0.2, 0.3], [0.7, 0.8]))
        path = tmp_path / "det.csv"
        write_det_csv(curve, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "threshold,apcer,bpcer"
        assert len(lines) == len(curve) + 1
