import torch
from torch import Tensor


EPS_CLIP = 1e-7


def bce_loss(probs: Tensor, labels: Tensor, eps: float = EPS_CLIP) -> Tensor:
    """Computes the binary cross-entropy loss.

    ``L = -mean(y log(p) + (1 - y) log(1 - p))``, with the probabilities
    clamped to ``[eps, 1 - eps]``.

    Args:
        probs: The predicted probability of class 1 for each sample.
        labels: The true label (0 or 1) of each sample.
        eps: The clipping margin.

    Returns:
        The mean loss over the samples.
    """
    if probs.shape != labels.shape:
        raise ValueError(
            f'Probabilities of shape {tuple(probs.shape)} do not match labels '
            f'of shape {tuple(labels.shape)}'
        )
    labels = labels.to(probs.dtype)
    if not torch.all((labels == 0) | (labels == 1)):
        raise ValueError('Labels should be 0 or 1')

    probs = probs.clamp(eps, 1 - eps)
    return -torch.mean(
        labels * torch.log(probs) + (1 - labels) * torch.log(1 - probs)
    )


def softmax_bce_loss(logits: Tensor, labels: Tensor,
                     eps: float = EPS_CLIP) -> Tensor:
    """Binary cross-entropy on the class-1 softmax probability of two-logit
    outputs (``B x 2``)."""
    return bce_loss(torch.softmax(logits, dim=1)[:, 1], labels, eps=eps)
