from typing import Optional

from torch import nn, Tensor
import torch.nn.functional as F

from .cheb_conv import ChebConv
from .layers import GraphBatchNorm


class ResBlock(nn.Module):
    """A pre-activation residual block of graph convolutions.

    The main path has two stages of batch normalization, ReLU and Chebyshev
    convolution. The skip path is the identity when the number of channels
    does not change, and a ``K = 1`` convolution (a per-vertex linear map of
    the channels) otherwise. The output is the sum of both paths.

    Attributes:
        bn1: Batch normalization of the input.
        conv1: Convolution from ``in_channels`` to ``out_channels``.
        bn2: Batch normalization after the first convolution.
        conv2: Convolution from ``out_channels`` to ``out_channels``.
        skip: The skip path.
    """
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        K: int,
        bias: bool = True,
    ):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.bn1 = GraphBatchNorm(in_channels)
        self.conv1 = ChebConv(in_channels, out_channels, K, bias=bias)
        self.bn2 = GraphBatchNorm(out_channels)
        self.conv2 = ChebConv(out_channels, out_channels, K, bias=bias)
        if in_channels != out_channels:
            self.skip = ChebConv(in_channels, out_channels, 1, bias=bias)
        else:
            self.skip = nn.Identity()

    def forward(self, x: Tensor, laplacian: Optional[Tensor]) -> Tensor:
        """
        Args:
            x: The features, of shape ``B x N x in_channels``.
            laplacian: The scaled Laplacian of the graph.

        Returns:
            The features, of shape ``B x N x out_channels``.
        """
        out = self.conv1(F.relu(self.bn1(x)), laplacian)
        out = self.conv2(F.relu(self.bn2(out)), laplacian)
        return out + self.skip(x)
