"""
Binary classification metrics at a 0.5 threshold, backed by scikit-learn.

ROC AUC is the Mann-Whitney statistic; tied scores between a positive and a
negative earn half credit.
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from sklearn import metrics

from app.core.errors import EmptyBatch, ShapeMismatch, SingleClassAUC
from app.schemas.report import FoldSummary, MetricsReport, MetricSummary

logger = logging.getLogger(__name__)

METRIC_NAMES = ("acc", "auc", "f1", "precision", "recall")


def _as_arrays(scores, labels):
    y_score = np.asarray(scores, dtype=np.float64).reshape(-1)
    y_true = np.asarray(labels, dtype=np.int64).reshape(-1)
    if y_score.size == 0:
        raise EmptyBatch("metrics over an empty set")
    if y_score.shape != y_true.shape:
        raise ShapeMismatch(f"{y_score.size} scores for {y_true.size} labels")
    return y_score, y_true


def roc_auc(scores, labels) -> float:
    y_score, y_true = _as_arrays(scores, labels)
    if len(np.unique(y_true)) < 2:
        raise SingleClassAUC("AUC is undefined when only one class is present")
    return float(metrics.roc_auc_score(y_true=y_true, y_score=y_score))


def compute_metrics(scores, labels, threshold: float = 0.5) -> MetricsReport:
    y_score, y_true = _as_arrays(scores, labels)
    y_pred = (y_score >= threshold).astype(np.int64)
    notes: List[str] = []
    try:
        auc: Optional[float] = roc_auc(y_score, y_true)
    except SingleClassAUC as exc:
        auc = None
        notes.append(f"{exc.code}: {exc}")
        logger.warning("%s", exc)
    return MetricsReport(
        acc=float(metrics.accuracy_score(y_true=y_true, y_pred=y_pred)),
        auc=auc,
        f1=float(metrics.f1_score(y_true=y_true, y_pred=y_pred, zero_division=0)),
        precision=float(metrics.precision_score(y_true=y_true, y_pred=y_pred, zero_division=0)),
        recall=float(metrics.recall_score(y_true=y_true, y_pred=y_pred, zero_division=0)),
        count=int(y_true.size),
        notes=notes,
    )


def aggregate_folds(reports: Sequence[MetricsReport], folds: Sequence[int]) -> FoldSummary:
    """Mean and population standard deviation of every metric across folds."""
    summary: Dict[str, MetricSummary] = {}
    for name in METRIC_NAMES:
        values = [getattr(r, name) for r in reports if getattr(r, name) is not None]
        if values:
            summary[name] = MetricSummary(mean=float(np.mean(values)), std=float(np.std(values)))
        else:
            summary[name] = MetricSummary()
    return FoldSummary(folds=list(folds), reports=list(reports), summary=summary)
