import logging
import warnings
from typing import Tuple

import torch
from torch import nn, Tensor

from ..config import ModelConfig
from .residual_gcn import NUM_CLASSES


class MLPClassifier(nn.Module):
    """A fully connected baseline on the flattened vertex features.

    Each hidden layer is a linear layer followed by batch normalization and a
    ReLU. The output layer gives two logits.

    Attributes:
        in_features: The number of inputs (vertices times features).
        hidden_units: The width of each hidden layer.
        n_hidden: The number of hidden layers.
    """
    def __init__(
        self,
        in_features: int,
        hidden_units: int,
        n_hidden: int,
        dtype: torch.dtype = torch.float32,
    ):
        super().__init__()
        if n_hidden < 1 or hidden_units < 1:
            raise ValueError(
                'The MLP needs at least one hidden unit and layer'
            )
        self.in_features = in_features
        self.hidden_units = hidden_units
        self.n_hidden = n_hidden

        layers = []
        width = in_features
        for _ in range(n_hidden):
            layers += [
                nn.Linear(width, hidden_units),
                nn.BatchNorm1d(hidden_units),
                nn.ReLU(),
            ]
            width = hidden_units
        self.hidden = nn.Sequential(*layers)
        self.logits = nn.Linear(hidden_units, NUM_CLASSES)
        self.to(dtype)

    def forward(self, x: Tensor) -> Tensor:
        return self.logits(self.hidden(x.flatten(start_dim=1)))


def mlp_parameter_count(in_features: int, width: int, n_hidden: int) -> int:
    """The number of learnable parameters of an :class:`MLPClassifier`."""
    first = in_features * width + 3 * width
    middle = (n_hidden - 1) * (width * width + 3 * width)
    return first + middle + NUM_CLASSES * width + NUM_CLASSES


def gcn_conv_layers(config: ModelConfig) -> int:
    """The number of graph convolutions on the main path of the residual GCN
    (two per ResBlock, post-ResBlock included)."""
    return 2 * (config.n_blocks + 1)


def mlp_for_parameter_budget(
    in_features: int,
    n_hidden: int,
    target: int,
    tolerance: float = 0.05,
) -> Tuple[int, int]:
    """Finds the hidden width whose parameter count is closest to a target.

    The parameter count grows with the width, so the width is found by
    bisection. If the closest count is not within ``tolerance`` (relative)
    of the target, a warning is given and the closest count is returned.

    Args:
        in_features: The number of inputs of the MLP.
        n_hidden: The number of hidden layers.
        target: The target number of parameters.
        tolerance: The relative tolerance.

    Returns:
        The width and the corresponding number of parameters.
    """
    def count(w):
        return mlp_parameter_count(in_features, w, n_hidden)

    lo, hi = 1, 1
    while count(hi) < target:
        hi *= 2
    # Smallest width with count(width) >= target
    while lo < hi:
        mid = (lo + hi) // 2
        if count(mid) < target:
            lo = mid + 1
        else:
            hi = mid

    width = lo
    if width > 1 and target - count(width - 1) <= count(width) - target:
        width -= 1
    n_params = count(width)

    rel_diff = abs(n_params - target) / target
    if rel_diff > tolerance:
        warnings.warn(
            f'No MLP width gives a parameter count within {tolerance:.0%} of '
            f'{target}. Using the nearest count {n_params}.'
        )
    logging.info(
        f'MLP with {n_hidden} hidden layers of {width} units: {n_params} '
        f'parameters (target {target})'
    )
    return width, n_params
