import pytest

from conftest import gts, preds, random_squares, square
from digieval.base import (
    CriterionKind,
    GtStatus,
    MatchCriterion,
    PredStatus,
)
from digieval.exceptions import ConfigError, CountsError, UsageError
from digieval.geometry import Rect, bounding_box
from digieval.match import (
    GridIndex,
    build_spatial_index,
    match_features,
    match_features_exhaustive,
    tally_counts,
)


class TestTally:
    def test_first_run_counts(self):
        c = tally_counts(320, 604, 319, 488)
        assert (c.tp, c.fp, c.fn_) == (319, 116, 1)

    def test_second_run_counts(self):
        c = tally_counts(320, 498, 320, 402)
        assert (c.tp, c.fp, c.fn_) == (320, 96, 0)

    def test_all_zero(self):
        c = tally_counts(0, 0, 0, 0)
        assert (c.tp, c.fp, c.fn_, c.n_gt, c.n_pred) == (0, 0, 0, 0, 0)

    @pytest.mark.parametrize(
        "args", [(3, 5, 4, 1), (3, 5, 1, 6), (-1, 0, 0, 0), (3, 5, 1.5, 1)]
    )
    def test_inconsistent_inputs(self, args):
        with pytest.raises(CountsError):
            tally_counts(*args)

    def test_identities(self):
        c = tally_counts(40, 70, 25, 33)
        assert c.tp + c.fn_ == c.n_gt
        assert c.fp + c.n_pred_matched == c.n_pred
        assert c.to_dict()["fn"] == 15


class TestCriterion:
    def test_parse(self):
        assert MatchCriterion.parse("any-overlap").kind == CriterionKind.ANY_OVERLAP
        c = MatchCriterion.parse("iou:0.5")
        assert (c.kind, c.tau) == (CriterionKind.IOU_THRESHOLD, 0.5)
        assert c.describe() == "iou:0.5"

    @pytest.mark.parametrize("text", ["iou:0", "iou:1.5", "iou:x", "nearest"])
    def test_parse_rejects(self, text):
        with pytest.raises(ConfigError):
            MatchCriterion.parse(text)

    def test_tau_only_with_iou(self):
        with pytest.raises(ConfigError):
            MatchCriterion(CriterionKind.ANY_OVERLAP, tau=0.5)


class TestSpatialIndex:
    def test_query_covering_everything(self, rng):
        fs = gts({f"s{i}": p for i, p in enumerate(random_squares(rng, 50, 100))})
        index = build_spatial_index(fs)
        assert index.query(Rect(-10, -10, 200, 200)) == fs.ids()

    def test_query_disjoint(self, rng):
        fs = gts({f"s{i}": p for i, p in enumerate(random_squares(rng, 50, 100))})
        assert build_spatial_index(fs).query(Rect(500, 500, 600, 600)) == []

    def test_matches_linear_scan(self, rng):
        boxes = {f"s{i}": bounding_box(p) for i, p in enumerate(random_squares(rng, 1000, 1000))}
        index = GridIndex(boxes)
        for _ in range(100):
            x, y = rng.uniform(-50, 1000, 2)
            w, h = rng.uniform(0, 120, 2)
            query = Rect(x, y, x + w, y + h)
            expected = {fid for fid, box in boxes.items() if box.intersects(query)}
            assert set(index.query(query)) == expected

    def test_empty_index(self):
        assert GridIndex({}).query(Rect(0, 0, 1, 1)) == []


class TestMatchFeatures:
    def test_identity(self):
        out = match_features(preds({"p": square(0, 0)}), gts({"g": square(0, 0)}))
        assert (out.counts.tp, out.counts.fp, out.counts.fn_) == (1, 0, 0)
        assert out.pairs == (("p", "g"),)

    def test_two_predictions_on_one_building(self):
        pred = preds({"p1": square(0, 0), "p2": square(0.5, 0), "p3": square(10, 10)})
        out = match_features(pred, gts({"g": square(0, 0)}))
        c = out.counts
        assert (c.n_gt_matched, c.n_pred_matched, c.tp, c.fp, c.fn_) == (1, 2, 1, 1, 0)
        assert out.pred_status == {
            "p1": PredStatus.MATCHED,
            "p2": PredStatus.MATCHED,
            "p3": PredStatus.SPURIOUS,
        }

    def test_no_predictions(self):
        gt = gts({f"g{i}": square(3 * i, 0) for i in range(3)})
        out = match_features(preds({}), gt)
        assert (out.counts.tp, out.counts.fp, out.counts.fn_) == (0, 0, 3)
        assert set(out.gt_status.values()) == {GtStatus.MISSED}

    def test_touching_is_not_a_match(self):
        out = match_features(preds({"p": square(1, 0)}), gts({"g": square(0, 0)}))
        assert out.counts.tp == 0

    def test_wrong_sources(self):
        with pytest.raises(UsageError):
            match_features(gts({"a": square(0, 0)}), gts({"b": square(0, 0)}))
        with pytest.raises(UsageError):
            match_features(preds({"a": square(0, 0)}), preds({"b": square(0, 0)}))

    def test_equals_exhaustive_oracle(self, rng):
        for _ in range(100):
            n_pred, n_gt = (int(v) for v in rng.integers(0, 201, size=2))
            pred = preds({f"p{i}": p for i, p in enumerate(random_squares(rng, n_pred, 300))})
            gt = gts({f"g{i}": p for i, p in enumerate(random_squares(rng, n_gt, 300))})
            fast = match_features(pred, gt)
            slow = match_features_exhaustive(pred, gt)
            assert fast.counts == slow.counts
            assert fast.gt_status == slow.gt_status
            assert fast.pred_status == slow.pred_status
            assert fast.pairs == slow.pairs

    def test_order_independent(self, rng):
        polys_p = random_squares(rng, 80, 150)
        polys_g = random_squares(rng, 60, 150)
        pred = preds({f"p{i}": p for i, p in enumerate(polys_p)})
        gt = gts({f"g{i}": p for i, p in enumerate(polys_g)})
        order_p = rng.permutation(len(polys_p))
        order_g = rng.permutation(len(polys_g))
        shuffled_pred = preds({f"p{i}": polys_p[i] for i in order_p})
        shuffled_gt = gts({f"g{i}": polys_g[i] for i in order_g})
        a = match_features(pred, gt)
        b = match_features(shuffled_pred, shuffled_gt)
        assert a.counts == b.counts
        assert a.gt_status == b.gt_status
        assert a.pred_status == b.pred_status
        assert a.pairs == b.pairs

    def test_iou_threshold_is_a_restriction(self, rng):
        pred = preds({f"p{i}": p for i, p in enumerate(random_squares(rng, 150, 200))})
        gt = gts({f"g{i}": p for i, p in enumerate(random_squares(rng, 150, 200))})
        loose = match_features(pred, gt).counts
        for tau in (0.01, 0.3, 0.7, 1.0):
            strict = match_features(pred, gt, MatchCriterion(CriterionKind.IOU_THRESHOLD, tau)).counts
            assert strict.n_gt_matched <= loose.n_gt_matched
            assert strict.n_pred_matched <= loose.n_pred_matched

    def test_iou_pairs_satisfy_criterion(self):
        criterion = MatchCriterion.parse("iou:0.5")
        pred = preds({"good": square(0, 0.1), "weak": square(10.6, 0)})
        gt = gts({"a": square(0, 0), "b": square(10, 0)})
        out = match_features(pred, gt, criterion)
        assert out.pairs == (("good", "a"),)
        assert out.gt_status["b"] == GtStatus.MISSED
