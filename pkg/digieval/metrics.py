from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal
from typing import Any, Mapping

from .base import Counts, FeatureSet, MatchCriterion, MetricsReport
from .exceptions import UndefinedMetricError
from .match import match_features


def precision(c: Counts) -> float:
    if c.tp + c.fp == 0:
        raise UndefinedMetricError("precision", counts=c)
    return c.tp / (c.tp + c.fp)


def recall(c: Counts) -> float:
    if c.tp + c.fn_ == 0:
        raise UndefinedMetricError("recall", counts=c)
    return c.tp / (c.tp + c.fn_)


def f1(c: Counts) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    p, r = precision(c), recall(c)
    if p + r == 0:
        return 0.0
    return 2 * p * r / (p + r)


def build_report(c: Counts, config_echo: Mapping[str, Any] | None = None) -> MetricsReport:
    return MetricsReport(
        precision=precision(c),
        recall=recall(c),
        f1=f1(c),
        counts=c,
        config_echo=dict(config_echo or {}),
    )


def evaluate(
    pred: FeatureSet,
    gt: FeatureSet,
    criterion: MatchCriterion | None = None,
    config_echo: Mapping[str, Any] | None = None,
) -> MetricsReport:
    criterion = criterion or MatchCriterion()
    outcome = match_features(pred, gt, criterion)
    echo = {"criterion": criterion.describe(), "eps_area": criterion.eps_area}
    echo.update(config_echo or {})
    return build_report(outcome.counts, echo)


def format_percent(ratio: float) -> str:
    """Two-decimal percentage with half-up rounding, e.g. 0.73333 -> '73.33'."""
    value = (Decimal(ratio) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{value}"
