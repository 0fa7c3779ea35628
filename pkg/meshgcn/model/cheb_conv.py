import math
from typing import Optional, Tuple

import torch
from torch import nn, Tensor


def cheb_basis(
    laplacian: Optional[Tensor],
    x: Tensor,
    K: int,
) -> Tensor:
    """Computes ``T_k(L) x`` for ``k = 0, ..., K - 1``.

    The Chebyshev polynomials of the scaled Laplacian ``L`` are applied to
    ``x`` with the recurrence ``T_k(L) x = 2 L T_{k-1}(L) x - T_{k-2}(L) x``,
    starting from ``T_0(L) x = x`` and ``T_1(L) x = L x``. The matrices
    ``T_k(L)`` themselves are never formed.

    Args:
        laplacian: The ``N x N`` scaled Laplacian (sparse or dense). Can be
            ``None`` if ``K == 1``.
        x: The features, of shape ``N x F`` or ``B x N x F``.
        K: The number of Chebyshev terms.

    Returns:
        A tensor of shape ``K x (B x) N x F``.
    """
    if K < 1:
        raise ValueError(f'K should be at least 1, got {K}')
    if K == 1:
        return x.unsqueeze(0)

    if laplacian is None:
        raise ValueError('A Laplacian is needed when K > 1')
    n = x.shape[-2]
    if laplacian.shape != (n, n):
        raise ValueError(
            f'Laplacian of shape {tuple(laplacian.shape)} does not match '
            f'features with {n} vertices'
        )

    tx_0 = x
    tx_1 = _lap_mm(laplacian, x)
    terms = [tx_0, tx_1]
    for _ in range(2, K):
        tx_2 = 2 * _lap_mm(laplacian, tx_1) - tx_0
        terms.append(tx_2)
        tx_0, tx_1 = tx_1, tx_2

    return torch.stack(terms)


def _lap_mm(laplacian: Tensor, x: Tensor) -> Tensor:
    """Multiplies the Laplacian with a batch of feature matrices."""
    if x.dim() == 2:
        return torch.mm(laplacian, x)

    # B x N x F -> N x B*F
    b, n, f = x.shape
    x2d = x.transpose(0, 1).reshape(n, b * f)
    out = torch.mm(laplacian, x2d)
    return out.reshape(n, b, f).transpose(0, 1)


def cheb_conv_forward(
    laplacian: Optional[Tensor],
    x: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
) -> Tuple[Tensor, Tensor]:
    """Applies a bank of Chebyshev filters.

    ``y[..., g] = sum_k sum_f (T_k(L) x)[..., f] * weight[k, f, g] + bias[g]``

    Args:
        laplacian: The scaled Laplacian.
        x: The input features, of shape ``(B x) N x F_in``.
        weight: The coefficients, of shape ``K x F_in x F_out``.
        bias: The bias of each output channel, or ``None``.

    Returns:
        The output features of shape ``(B x) N x F_out`` and the Chebyshev
        basis that is needed by :func:`cheb_conv_backward`.
    """
    K, f_in, f_out = weight.shape
    if x.shape[-1] != f_in:
        raise ValueError(
            f'Input has {x.shape[-1]} channels, the filters expect {f_in}'
        )
    if bias is not None and bias.shape != (f_out,):
        raise ValueError(
            f'Bias of shape {tuple(bias.shape)} does not match {f_out} '
            'output channels'
        )

    basis = cheb_basis(laplacian, x, K)
    y = torch.einsum('k...nf,kfg->...ng', basis, weight)
    if bias is not None:
        y = y + bias

    return y, basis


def cheb_conv_backward(
    grad_out: Tensor,
    basis: Optional[Tensor],
    laplacian: Optional[Tensor],
    weight: Tensor,
) -> Tuple[Tensor, Tensor, Tensor]:
    """Computes the gradients of :func:`cheb_conv_forward`.

    The gradient with respect to the input is ``sum_k T_k(L) G_k`` with
    ``G_k = grad_out @ weight[k]^T``. As ``L`` is symmetric, this is evaluated
    with Clenshaw's backward recurrence ``b_k = G_k + 2 L b_{k+1} - b_{k+2}``
    and ``dx = G_0 + L b_1 - b_2``, which again only needs products with
    ``L``.

    Args:
        grad_out: The gradient of the loss with respect to the output.
        basis: The Chebyshev basis returned by the forward pass.
        laplacian: The scaled Laplacian of the forward pass.
        weight: The coefficients of the forward pass.

    Returns:
        The gradients with respect to the input, the coefficients and the
        bias.
    """
    if basis is None:
        raise ValueError(
            'The Chebyshev basis of the forward pass is missing'
        )
    K = weight.shape[0]

    grad_weight = torch.einsum('k...nf,...ng->kfg', basis, grad_out)
    grad_bias = grad_out.reshape(-1, grad_out.shape[-1]).sum(dim=0)

    g = torch.einsum('...ng,kfg->k...nf', grad_out, weight)
    if K == 1:
        return g[0], grad_weight, grad_bias

    b_1 = torch.zeros_like(g[0])
    b_2 = torch.zeros_like(g[0])
    for k in range(K - 1, 0, -1):
        b_1, b_2 = g[k] + 2 * _lap_mm(laplacian, b_1) - b_2, b_1
    grad_x = g[0] + _lap_mm(laplacian, b_1) - b_2

    return grad_x, grad_weight, grad_bias


class ChebConvFunction(torch.autograd.Function):
    """Chebyshev graph convolution with a hand-written backward pass."""
    @staticmethod
    def forward(ctx, x, laplacian, weight, bias):
        y, basis = cheb_conv_forward(laplacian, x, weight, bias)
        ctx.save_for_backward(basis, weight)
        ctx.laplacian = laplacian
        ctx.has_bias = bias is not None
        return y

    @staticmethod
    def backward(ctx, grad_out):
        basis, weight = ctx.saved_tensors
        grad_x, grad_weight, grad_bias = cheb_conv_backward(
            grad_out, basis, ctx.laplacian, weight
        )
        return (
            grad_x,
            None,
            grad_weight,
            grad_bias if ctx.has_bias else None,
        )


class ChebConv(nn.Module):
    """A bank of Chebyshev spectral graph filters.

    Each pair of input channel ``f`` and output channel ``g`` has its own
    filter ``sum_k weight[k, f, g] T_k(L)``.

    Attributes:
        in_channels: The number of input channels.
        out_channels: The number of output channels.
        K: The number of Chebyshev terms (the kernel size). With ``K = 1``,
            the layer is a per-vertex linear map of the channels and does not
            need a Laplacian.
        weight: The ``K x in_channels x out_channels`` coefficients.
        bias: The bias of each output channel, or ``None``.
    """
    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        K: int,
        bias: bool = True,
    ):
        super().__init__()
        if K < 1:
            raise ValueError(f'K should be at least 1, got {K}')
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.K = K
        self.weight = nn.Parameter(torch.empty(K, in_channels, out_channels))
        if bias:
            self.bias = nn.Parameter(torch.empty(out_channels))
        else:
            self.register_parameter('bias', None)
        self.reset_parameters()

    def reset_parameters(self):
        bound = math.sqrt(6 / (self.K * self.in_channels + self.out_channels))
        nn.init.uniform_(self.weight, -bound, bound)
        if self.bias is not None:
            nn.init.zeros_(self.bias)

    def forward(
        self,
        x: Tensor,
        laplacian: Optional[Tensor] = None,
    ) -> Tensor:
        """
        Args:
            x: The features, of shape ``(B x) N x in_channels``.
            laplacian: The ``N x N`` scaled Laplacian.

        Returns:
            The filtered features, of shape ``(B x) N x out_channels``.
        """
        if laplacian is not None and laplacian.dtype != x.dtype:
            laplacian = laplacian.to(x.dtype)
        return ChebConvFunction.apply(x, laplacian, self.weight, self.bias)

    def extra_repr(self) -> str:
        return (f'{self.in_channels}, {self.out_channels}, K={self.K}, '
                f'bias={self.bias is not None}')
