import math
from typing import Dict, Tuple

import torch
from scipy.stats import rankdata
from torch import Tensor


THRESHOLD = 0.5


def binary_metrics(
    probs: Tensor,
    labels: Tensor,
    threshold: float = THRESHOLD,
) -> Dict[str, float]:
    """Computes the classification metrics of predicted probabilities.

    A sample is predicted positive if its probability is at least
    ``threshold``. The AUC is the Mann-Whitney rank statistic: the fraction
    of (positive, negative) pairs in which the positive sample has the
    higher probability, with ties counting for one half.

    Args:
        probs: The predicted probability of class 1 for each sample.
        labels: The true label (0 or 1) of each sample.
        threshold: The decision threshold.

    Returns:
        A dictionary containing the metrics. The dict contains the following
        keys:

        - ``'Accuracy'``: The fraction of correct predictions.
        - ``'Sensitivity'``: ``TP / (TP + FN)``, NaN without positives.
        - ``'Specificity'``: ``TN / (TN + FP)``, NaN without negatives.
        - ``'AUC'``: The area under the ROC curve, NaN if only one class is
          present.
        - ``'AUCDefined'``: If both classes are present.
    """
    probs, labels = _check_inputs(probs, labels)

    preds = probs >= threshold
    pos = labels == 1
    tp = int((preds & pos).sum())
    tn = int((~preds & ~pos).sum())
    fp = int((preds & ~pos).sum())
    fn = int((~preds & pos).sum())

    n_pos, n_neg = tp + fn, tn + fp
    auc_defined = n_pos > 0 and n_neg > 0

    return {
        'Accuracy': (tp + tn) / len(labels),
        'Sensitivity': tp / n_pos if n_pos > 0 else math.nan,
        'Specificity': tn / n_neg if n_neg > 0 else math.nan,
        'AUC': rank_auc(probs, labels) if auc_defined else math.nan,
        'AUCDefined': auc_defined,
    }


def rank_auc(probs: Tensor, labels: Tensor) -> float:
    """The AUC from the sum of the (average) ranks of the positives."""
    probs, labels = _check_inputs(probs, labels)
    pos = (labels == 1).numpy()
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError('The AUC needs positive and negative samples')

    ranks = rankdata(probs.double().numpy(), method='average')
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2
    return float(u / (n_pos * n_neg))


def roc_curve(probs: Tensor, labels: Tensor) -> Tuple[Tensor, Tensor, Tensor]:
    """Computes the ROC curve.

    Adapted from the binary classification curve of torchmetrics: the
    samples are sorted by decreasing probability and the true and false
    positives are counted at every distinct probability.

    Returns:
        The false positive rates, the true positive rates and the
        thresholds. The curve starts at ``(0, 0)`` with an infinite
        threshold.
    """
    probs, labels = _check_inputs(probs, labels)
    idxs = torch.argsort(probs, descending=True, stable=True)
    probs = probs[idxs].double()
    targets = labels[idxs].double()

    tps = torch.cumsum(targets, dim=0)
    fps = torch.arange(1, len(targets) + 1, dtype=torch.float64) - tps

    # Last index of every run of equal probabilities
    distinct = torch.ones(len(probs), dtype=torch.bool)
    distinct[:-1] = probs[:-1] != probs[1:]
    tps, fps, thresholds = tps[distinct], fps[distinct], probs[distinct]

    zero = torch.zeros(1, dtype=torch.float64)
    tps = torch.cat([zero, tps])
    fps = torch.cat([zero, fps])
    thresholds = torch.cat([torch.full((1,), math.inf,
                                       dtype=torch.float64), thresholds])

    n_pos, n_neg = tps[-1], fps[-1]
    fpr = fps / n_neg if n_neg > 0 else torch.full_like(fps, math.nan)
    tpr = tps / n_pos if n_pos > 0 else torch.full_like(tps, math.nan)
    return fpr, tpr, thresholds


def trapezoid_auc(fpr: Tensor, tpr: Tensor) -> float:
    """Integrates a ROC curve with the trapezoidal rule."""
    return float(torch.trapezoid(tpr, fpr))


def _check_inputs(probs: Tensor, labels: Tensor) -> Tuple[Tensor, Tensor]:
    probs = torch.as_tensor(probs).detach().flatten().cpu()
    labels = torch.as_tensor(labels).detach().flatten().cpu()
    if len(probs) == 0:
        raise ValueError('Cannot compute metrics without samples')
    if probs.shape != labels.shape:
        raise ValueError(
            f'{len(probs)} probabilities do not match {len(labels)} labels'
        )
    if not torch.all((labels == 0) | (labels == 1)):
        raise ValueError('Labels should be 0 or 1')
    return probs, labels.long()
