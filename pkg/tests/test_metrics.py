import pytest

from conftest import gts, preds, square
from digieval.exceptions import UndefinedMetricError
from digieval.match import tally_counts
from digieval.metrics import build_report, evaluate, f1, format_percent, precision, recall


def counts(tp, fp, fn):
    return tally_counts(tp + fn, tp + fp, tp, tp)


class TestPrecision:
    def test_first_run(self):
        assert precision(counts(319, 116, 1)) == pytest.approx(0.7333, abs=5e-5)

    def test_second_run(self):
        assert precision(counts(320, 96, 0)) == pytest.approx(0.7692, abs=5e-5)

    def test_no_false_positives(self):
        assert precision(counts(5, 0, 3)) == 1.0

    def test_undefined(self):
        with pytest.raises(UndefinedMetricError) as info:
            precision(counts(0, 0, 4))
        assert info.value.metric == "precision"
        assert (info.value.counts.tp, info.value.counts.fp) == (0, 0)


class TestRecall:
    def test_first_run(self):
        assert recall(counts(319, 116, 1)) == pytest.approx(0.9969, abs=5e-5)

    def test_second_run(self):
        assert recall(counts(320, 96, 0)) == 1.0

    def test_nothing_detected(self):
        assert recall(counts(0, 3, 7)) == 0.0

    def test_undefined(self):
        with pytest.raises(UndefinedMetricError, match="recall"):
            recall(counts(0, 2, 0))


class TestF1:
    def test_first_run(self):
        assert f1(counts(319, 116, 1)) == pytest.approx(0.8450, abs=5e-5)

    def test_second_run(self):
        assert f1(counts(320, 96, 0)) == pytest.approx(0.8696, abs=5e-5)

    def test_equal_precision_and_recall(self):
        c = counts(6, 2, 2)
        assert precision(c) == recall(c)
        assert f1(c) == pytest.approx(precision(c))

    def test_zero_when_both_zero(self):
        assert f1(counts(0, 3, 4)) == 0.0

    def test_between_precision_and_recall(self, rng):
        for tp, fp, fn in rng.integers(1, 500, size=(200, 3)):
            c = counts(int(tp), int(fp), int(fn))
            lo, hi = sorted((precision(c), recall(c)))
            assert lo - 1e-12 <= f1(c) <= hi + 1e-12

    def test_scale_invariant(self, rng):
        for tp, fp, fn in rng.integers(1, 200, size=(50, 3)):
            for k in (2, 7, 13):
                base = counts(int(tp), int(fp), int(fn))
                scaled = counts(int(tp) * k, int(fp) * k, int(fn) * k)
                assert f1(scaled) == pytest.approx(f1(base), rel=1e-12)


class TestFormatting:
    @pytest.mark.parametrize(
        "args,expected",
        [
            ((320, 604, 319, 488), ("73.33", "99.69", "84.50")),
            ((320, 498, 320, 402), ("76.92", "100.00", "86.96")),
            ((10, 10, 10, 10), ("100.00", "100.00", "100.00")),
        ],
    )
    def test_reported_percentages(self, args, expected):
        r = build_report(tally_counts(*args))
        assert (format_percent(r.precision), format_percent(r.recall), format_percent(r.f1)) == expected

    def test_half_up(self):
        assert format_percent(0.03125) == "3.13"
        assert format_percent(0.0) == "0.00"
        assert format_percent(1.0) == "100.00"


class TestEvaluate:
    def test_identical_sets(self):
        polys = {f"b{i}": square(3 * i, 0) for i in range(10)}
        r = evaluate(preds(polys), gts(polys))
        assert (r.precision, r.recall, r.f1) == (1.0, 1.0, 1.0)
        assert r.config_echo["criterion"] == "any-overlap"

    def test_config_is_echoed(self):
        polys = {"b": square(0, 0)}
        r = evaluate(preds(polys), gts(polys), config_echo={"overlap_percent": 12})
        assert r.config_echo["overlap_percent"] == 12

    def test_empty_predictions_is_undefined(self):
        gt = gts({f"g{i}": square(3 * i, 0) for i in range(3)})
        with pytest.raises(UndefinedMetricError) as info:
            evaluate(preds({}), gt)
        assert (info.value.counts.tp, info.value.counts.fp) == (0, 0)
