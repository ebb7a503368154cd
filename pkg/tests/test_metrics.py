"""
Tests for classification metrics and fold aggregation.
"""
import numpy as np
import pytest

from app.core.errors import EmptyBatch, ShapeMismatch, SingleClassAUC
from app.data.metrics import aggregate_folds, compute_metrics, roc_auc
from app.schemas.report import MetricsReport


def _brute_force_auc(scores, labels):
    positives = [s for s, y in zip(scores, labels) if y == 1]
    negatives = [s for s, y in zip(scores, labels) if y == 0]
    credit = sum(1.0 if p > n else 0.5 if p == n else 0.0 for p in positives for n in negatives)
    return credit / (len(positives) * len(negatives))


def test_accuracy_at_half():
    """Test predictions threshold at 0.5."""
    # Act
    report = compute_metrics([0.9, 0.2, 0.6], [1, 0, 0])

    # Assert
    assert report.acc == pytest.approx(2 / 3)
    assert report.precision == pytest.approx(0.5)
    assert report.recall == 1.0
    assert report.count == 3


def test_auc_textbook_case():
    """Test the four-sample example with AUC 0.75."""
    # Act
    auc = roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])

    # Assert
    assert auc == pytest.approx(0.75)


def test_auc_ties_earn_half_credit():
    """Test a tied positive/negative pair counts 0.5."""
    # Act / Assert
    assert roc_auc([0.5, 0.5], [0, 1]) == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(100))
def test_auc_matches_pairwise_count(seed):
    """Test AUC equals the pairwise ranking statistic, ties included, up to 200 samples."""
    # Arrange
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 201))
    scores = np.round(rng.random(n), 1)
    labels = rng.integers(0, 2, size=n)
    labels[:2] = [0, 1]

    # Act
    auc = roc_auc(scores, labels)

    # Assert
    assert auc == pytest.approx(_brute_force_auc(scores, labels))


def test_single_class_has_no_auc():
    """Test one-class sets report AUC as absent with a note."""
    # Act
    report = compute_metrics([0.2, 0.7], [1, 1])

    # Assert
    assert report.auc is None
    assert report.notes and report.notes[0].startswith("SingleClassAUC")
    with pytest.raises(SingleClassAUC):
        roc_auc([0.2, 0.7], [1, 1])


def test_no_positive_predictions():
    """Test precision and F1 are 0 when nothing crosses the threshold."""
    # Act
    report = compute_metrics([0.1, 0.2], [0, 1])

    # Assert
    assert report.precision == 0.0
    assert report.f1 == 0.0
    assert report.acc == 0.5


def test_metric_input_errors():
    """Test empty and mismatched inputs."""
    # Act / Assert
    with pytest.raises(EmptyBatch):
        compute_metrics([], [])
    with pytest.raises(ShapeMismatch):
        compute_metrics([0.1, 0.2], [1])


def test_aggregate_folds_mean_and_population_std():
    """Test fold summaries use the mean and population standard deviation."""
    # Arrange
    reports = [
        MetricsReport(acc=0.5, auc=None, f1=0.4, precision=0.5, recall=0.5, count=10),
        MetricsReport(acc=0.7, auc=None, f1=0.6, precision=0.5, recall=0.5, count=10),
    ]

    # Act
    summary = aggregate_folds(reports, [0, 1])

    # Assert
    assert summary.folds == [0, 1]
    assert summary.summary["acc"].mean == pytest.approx(0.6)
    assert summary.summary["acc"].std == pytest.approx(0.1)
    assert summary.summary["precision"].std == 0.0
    assert summary.summary["auc"].mean is None
