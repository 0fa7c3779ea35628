from typing import Sequence, Tuple, Union

import torch
from torch import nn, Tensor


class GraphBatchNorm(nn.BatchNorm1d):
    """Batch normalization for graph features with the channels last.

    Each channel is normalized jointly over the samples of the batch and the
    vertices of the graph. Input and output have shape ``B x N x C``.

    The running statistics keep 90% of their previous value at each update
    (``momentum=0.1`` in PyTorch's convention) and ``eps=1e-5`` is added
    inside the square root.
    """
    def __init__(self, num_channels: int, momentum: float = 0.1,
                 eps: float = 1e-5):
        super().__init__(num_channels, eps=eps, momentum=momentum)

    def forward(self, x: Tensor) -> Tensor:
        if x.dim() != 3:
            raise ValueError(
                f'Expected features of shape B x N x C, got {tuple(x.shape)}'
            )
        if self.training and x.shape[0] < 2:
            raise ValueError(
                'Batch normalization in training mode needs a batch of at '
                f'least 2 samples, got {x.shape[0]}'
            )
        return super().forward(x.transpose(1, 2)).transpose(1, 2)


def pooling_index(
    groups: Union[Tensor, Sequence[Tuple[int, int, int]]],
) -> Tensor:
    """Converts ``(parent, child_a, child_b)`` pooling groups into a
    ``P x 2`` index tensor with the children of each parent, ordered by
    parent."""
    if isinstance(groups, Tensor):
        return groups
    groups = sorted(groups)
    parents = [p for p, _, _ in groups]
    if parents != list(range(len(groups))):
        raise ValueError('Pooling groups should cover parents 0, ..., P - 1')
    return torch.tensor([[a, b] for _, a, b in groups], dtype=torch.long)


def graph_max_pool(
    x: Tensor,
    groups: Union[Tensor, Sequence[Tuple[int, int, int]]],
    return_indices: bool = False,
):
    """Max-pools the vertices of a graph in groups of two children.

    The gradient flows only to the child with the maximum value. On a tie,
    the child with the lower index is taken.

    Args:
        x: The features at the child level, of shape ``B x N x C``.
        groups: The pooling groups as returned by
            :func:`meshgcn.mesh.pooling_groups`, or a ``P x 2`` index
            tensor with the children of each parent.
        return_indices: If ``True``, also return the index of the selected
            child for each parent and channel.

    Returns:
        The features at the parent level, of shape ``B x P x C`` (and the
        selected children if ``return_indices`` is ``True``).
    """
    index = pooling_index(groups).to(x.device)
    if index.numel() != 2 * index.shape[0] or x.shape[-2] != index.numel():
        raise ValueError(
            f'{index.shape[0]} pooling groups do not match '
            f'{x.shape[-2]} vertices'
        )

    left = x[..., index[:, 0], :]
    right = x[..., index[:, 1], :]
    take_left = left >= right
    out = torch.where(take_left, left, right)

    if return_indices:
        selected = torch.where(
            take_left, index[:, 0, None], index[:, 1, None]
        )
        return out, selected
    return out


class GraphMaxPool(nn.Module):
    """Module wrapper around :func:`graph_max_pool` for a fixed set of
    groups.

    Pooling groups always pair the consecutive siblings ``2i`` and
    ``2i + 1``, so only the number of parents is needed.
    """
    def __init__(self, num_parents: int):
        super().__init__()
        index = torch.arange(2 * num_parents).reshape(num_parents, 2)
        self.register_buffer('index', index, persistent=False)

    def forward(self, x: Tensor) -> Tensor:
        return graph_max_pool(x, self.index)
