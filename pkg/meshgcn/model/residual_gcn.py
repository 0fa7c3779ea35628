import logging
from typing import List, Sequence

import torch
from torch import nn, Tensor
import torch.nn.functional as F

from ..config import ModelConfig
from ..graph import normalized_laplacian, estimate_lambda_max,\
    scale_laplacian, to_torch_sparse
from ..mesh import MeshHierarchy
from .layers import GraphMaxPool
from .res_block import ResBlock


NUM_CLASSES = 2


def level_laplacians(
    h: MeshHierarchy,
    lambda_max_mode: str = 'computed',
    dtype: torch.dtype = torch.float32,
) -> List[Tensor]:
    """Computes the scaled Laplacian of each level of a hierarchy.

    Args:
        h: The hierarchy.
        lambda_max_mode: ``'computed'`` to estimate the largest eigenvalue of
            each level with :func:`estimate_lambda_max`, ``'fixed'`` to
            use 2.
        dtype: The dtype of the returned tensors.

    Returns:
        A sparse tensor per level, from the root to the finest level.
    """
    laplacians = []
    for level, graph in enumerate(h.levels):
        lap = normalized_laplacian(graph)
        if lambda_max_mode == 'computed':
            lambda_max = estimate_lambda_max(lap)
        elif lambda_max_mode == 'fixed':
            lambda_max = 2.0
        else:
            raise ValueError(f'Unknown lambda_max_mode "{lambda_max_mode}"')
        logging.debug(f'Level {level}: lambda_max = {lambda_max:.6f}')
        laplacians.append(
            to_torch_sparse(scale_laplacian(lap, lambda_max), dtype=dtype)
        )
    return laplacians


class ResidualGCN(nn.Module):
    """A residual graph convolutional network for mesh classification.

    The network alternates ``n_blocks`` ResBlocks with max-pooling layers
    that halve the number of vertices by going one level up the hierarchy.
    A post-ResBlock then maps the features to ``post_resblock_units``
    channels. These feature maps are flattened and passed through a fully
    connected layer with ``fc_units`` units and a ReLU, and a final linear
    layer that outputs two logits (one per class).

    Attributes:
        config: The model configuration.
        depth: The finest level of the hierarchy.
        blocks: The ResBlocks, from the finest level upwards.
        pools: The pooling layer after each ResBlock.
        post_block: The post-ResBlock. Its output contains the feature maps
            used for Grad-CAM.
        fc: The fully connected layer.
        logits: The output layer.
    """
    def __init__(
        self,
        config: ModelConfig,
        laplacians: Sequence[Tensor],
        in_features: int,
    ):
        """
        Args:
            config: The model configuration.
            laplacians: The scaled Laplacian of each level of the hierarchy,
                from the root (index 0) to the finest level (see
                :func:`level_laplacians`).
            in_features: The number of features per vertex.
        """
        super().__init__()
        self.config = config
        self.depth = len(laplacians) - 1
        if config.n_blocks > self.depth:
            raise ValueError(
                f'{config.n_blocks} blocks need a hierarchy of depth at '
                f'least {config.n_blocks}, got depth {self.depth}'
            )
        for level, lap in enumerate(laplacians):
            if lap.shape != (2 ** level, 2 ** level):
                raise ValueError(
                    f'Laplacian of level {level} has shape '
                    f'{tuple(lap.shape)}, expected {2 ** level} vertices'
                )
            self.register_buffer(f'laplacian_{level}', lap, persistent=False)

        channels = config.kernels_per_conv
        self.blocks = nn.ModuleList()
        self.pools = nn.ModuleList()
        in_channels = in_features
        for i in range(config.n_blocks):
            level = self.depth - i
            self.blocks.append(
                ResBlock(in_channels, channels, config.K,
                         bias=config.bias_enabled)
            )
            self.pools.append(GraphMaxPool(2 ** (level - 1)))
            in_channels = channels

        self.post_level = self.depth - config.n_blocks
        self.post_block = ResBlock(in_channels, config.post_resblock_units,
                                   config.K, bias=config.bias_enabled)
        self.fc = nn.Linear(
            2 ** self.post_level * config.post_resblock_units,
            config.fc_units,
        )
        self.logits = nn.Linear(config.fc_units, NUM_CLASSES)

        self.to(config.dtype)
        logging.info(
            f'Built a residual GCN with {count_parameters(self)} learnable '
            'parameters'
        )

    def laplacian(self, level: int) -> Tensor:
        return getattr(self, f'laplacian_{level}')

    def forward(self, x: Tensor) -> Tensor:
        """Computes the class scores (logits before softmax).

        Args:
            x: The finest-level features, of shape ``B x N x F``.

        Returns:
            The logits, of shape ``B x 2``.
        """
        if x.dim() != 3 or x.shape[1] != 2 ** self.depth:
            raise ValueError(
                f'Expected features of shape B x {2 ** self.depth} x F, got '
                f'{tuple(x.shape)}'
            )
        for i, (block, pool) in enumerate(zip(self.blocks, self.pools)):
            x = block(x, self.laplacian(self.depth - i))
            x = pool(x)

        x = self.post_block(x, self.laplacian(self.post_level))
        x = x.flatten(start_dim=1)
        x = F.relu(self.fc(x))
        return self.logits(x)


def count_parameters(model: nn.Module) -> int:
    """Returns the number of learnable parameters of a model."""
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


@torch.no_grad()
def predict_proba(
    model: nn.Module,
    features: Tensor,
    batch_size: int = 32,
) -> Tensor:
    """Returns the predicted probability of class 1 for each sample.

    The model is evaluated in inference mode, batch per batch.
    """
    was_training = model.training
    model.eval()
    dtype = next(model.parameters()).dtype
    probs = []
    for start in range(0, len(features), batch_size):
        batch = features[start:start + batch_size].to(dtype)
        probs.append(torch.softmax(model(batch), dim=1)[:, 1])
    model.train(was_training)
    if len(probs) == 0:
        return torch.zeros(0, dtype=dtype)
    return torch.cat(probs)
