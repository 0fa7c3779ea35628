import math

import pytest
import torch

from meshgcn.eval import binary_metrics, rank_auc, roc_curve, trapezoid_auc


def test_perfect_predictions():
    probs = torch.tensor([0.9, 0.8, 0.3, 0.1])
    labels = torch.tensor([1, 1, 0, 0])
    metrics = binary_metrics(probs, labels)

    assert metrics['Accuracy'] == 1.
    assert metrics['Sensitivity'] == 1.
    assert metrics['Specificity'] == 1.
    assert metrics['AUC'] == 1.
    assert metrics['AUCDefined']


def test_counts():
    probs = torch.tensor([0.9, 0.4, 0.6, 0.2, 0.1])
    labels = torch.tensor([1, 1, 0, 0, 0])
    metrics = binary_metrics(probs, labels)

    assert metrics['Accuracy'] == pytest.approx(3 / 5)
    assert metrics['Sensitivity'] == pytest.approx(1 / 2)
    assert metrics['Specificity'] == pytest.approx(2 / 3)
    # 5 of the 6 (positive, negative) pairs are ordered correctly
    assert metrics['AUC'] == pytest.approx(5 / 6)


def test_threshold_is_inclusive():
    metrics = binary_metrics(torch.tensor([0.5, 0.5]), torch.tensor([1, 0]))
    assert metrics['Sensitivity'] == 1.
    assert metrics['Specificity'] == 0.


def test_ties_count_half():
    probs = torch.full((6,), 0.5)
    labels = torch.tensor([1, 0, 1, 0, 0, 1])
    assert binary_metrics(probs, labels)['AUC'] == pytest.approx(0.5)


def test_single_class():
    metrics = binary_metrics(torch.tensor([0.7, 0.2]), torch.tensor([1, 1]))

    assert metrics['Accuracy'] == 0.5
    assert metrics['Sensitivity'] == 0.5
    assert math.isnan(metrics['Specificity'])
    assert math.isnan(metrics['AUC'])
    assert not metrics['AUCDefined']

    with pytest.raises(ValueError):
        rank_auc(torch.tensor([0.7, 0.2]), torch.tensor([0, 0]))


def test_rank_auc_equals_trapezoid_auc():
    torch.manual_seed(0)
    for _ in range(20):
        # Rounding creates ties
        probs = torch.round(torch.rand(30) * 10) / 10
        labels = torch.randint(0, 2, (30,))
        labels[:2] = torch.tensor([0, 1])

        fpr, tpr, _ = roc_curve(probs, labels)
        assert rank_auc(probs, labels) == \
            pytest.approx(trapezoid_auc(fpr, tpr), abs=1e-12)


def test_roc_curve():
    probs = torch.tensor([0.1, 0.4, 0.35, 0.8])
    labels = torch.tensor([0, 0, 1, 1])
    fpr, tpr, thresholds = roc_curve(probs, labels)

    assert fpr[0] == 0 and tpr[0] == 0
    assert math.isinf(thresholds[0])
    assert fpr[-1] == 1 and tpr[-1] == 1
    assert torch.all(fpr[1:] >= fpr[:-1])
    assert torch.all(tpr[1:] >= tpr[:-1])
    assert torch.allclose(thresholds[1:],
                          torch.tensor([0.8, 0.4, 0.35, 0.1],
                                       dtype=torch.float64))
    assert trapezoid_auc(fpr, tpr) == pytest.approx(0.75)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        binary_metrics(torch.zeros(0), torch.zeros(0))
    with pytest.raises(ValueError):
        binary_metrics(torch.tensor([0.2, 0.3]), torch.tensor([1]))
    with pytest.raises(ValueError):
        binary_metrics(torch.tensor([0.2, 0.3]), torch.tensor([1, 2]))
