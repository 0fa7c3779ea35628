import logging
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

import torch
from torch import nn, Tensor

from .layers import GraphMaxPool


KINK_THRESHOLD = 1e-3
FD_STEP = 1e-4


@dataclass(frozen=True)
class GradCheckReport:
    """The result of a finite-difference gradient check.

    Attributes:
        name: The name of the checked operation.
        max_rel_error: The maximum relative discrepancy between the analytic
            and the numerical gradient over all checked entries.
        tol: The tolerance.
        n_checked: The number of checked entries.
        passed: If ``max_rel_error < tol``.
    """
    name: str
    max_rel_error: float
    tol: float
    n_checked: int

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tol


def finite_difference_check(
    fn: Callable[[], Tensor],
    inputs: Sequence[Tensor],
    tol: float = 1e-6,
    h: float = FD_STEP,
    max_entries: Optional[int] = None,
    seed: int = 0,
    name: str = '',
) -> GradCheckReport:
    """Compares the gradients of a scalar function computed with autograd to
    central differences.

    The relative discrepancy of an entry is ``|a - n| / max(|a|, |n|, 1)``
    for the analytic gradient ``a`` and the numerical gradient ``n``. Run the
    check in float64.

    Args:
        fn: Computes the scalar from the current values of ``inputs``.
        inputs: The tensors to differentiate with respect to. They need
            ``requires_grad=True`` and are perturbed in place.
        tol: The tolerance.
        h: The finite-difference step.
        max_entries: If given, check at most this many randomly chosen
            entries per input.
        seed: The seed for choosing the entries.
        name: The name of the operation in the report.

    Returns:
        The report.
    """
    inputs = list(inputs)
    analytic = torch.autograd.grad(fn(), inputs, allow_unused=True)
    generator = torch.Generator().manual_seed(seed)

    max_err = 0.
    n_checked = 0
    for x, grad in zip(inputs, analytic):
        if grad is None:
            grad = torch.zeros_like(x)
        flat_idxs = torch.arange(x.numel())
        if max_entries is not None and x.numel() > max_entries:
            perm = torch.randperm(x.numel(), generator=generator)
            flat_idxs = perm[:max_entries]

        x_flat = x.data.view(-1)
        grad_flat = grad.reshape(-1)
        for i in flat_idxs.tolist():
            orig = x_flat[i].item()
            with torch.no_grad():
                x_flat[i] = orig + h
                f_plus = fn().item()
                x_flat[i] = orig - h
                f_minus = fn().item()
                x_flat[i] = orig
            numeric = (f_plus - f_minus) / (2 * h)
            a = grad_flat[i].item()
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1.)
            max_err = max(max_err, err)
            n_checked += 1

    report = GradCheckReport(name=name, max_rel_error=max_err, tol=tol,
                             n_checked=n_checked)
    logging.debug(
        f'Gradient check {name}: max relative error {max_err:.3e} over '
        f'{n_checked} entries (tol {tol:.1e})'
    )
    return report


def kink_margin(model: nn.Module, x: Tensor) -> float:
    """Returns how close a forward pass gets to a nondifferentiable point.

    The margin is the smallest magnitude of any input of a ReLU (the outputs
    of the batch normalization layers and of the ``fc`` layer) and of any
    difference between two pooled siblings.
    """
    margins: List[float] = []

    def abs_min_output(module, inputs, output):
        margins.append(output.detach().abs().min().item())

    def sibling_gap(module, inputs, output):
        x_in = inputs[0].detach()
        gap = (x_in[..., 0::2, :] - x_in[..., 1::2, :]).abs()
        margins.append(gap.min().item())

    handles = []
    for module in model.modules():
        if isinstance(module, nn.BatchNorm1d):
            handles.append(module.register_forward_hook(abs_min_output))
        elif isinstance(module, GraphMaxPool):
            handles.append(module.register_forward_hook(sibling_gap))
    fc = getattr(model, 'fc', None)
    if isinstance(fc, nn.Module):
        handles.append(fc.register_forward_hook(abs_min_output))

    try:
        with torch.no_grad():
            model(x)
    finally:
        for handle in handles:
            handle.remove()

    return min(margins) if len(margins) > 0 else float('inf')


def sample_off_kink(
    model: nn.Module,
    sample: Callable[[torch.Generator], Tensor],
    threshold: float = KINK_THRESHOLD,
    max_tries: int = 100,
    seed: int = 0,
) -> Tensor:
    """Draws inputs until the forward pass stays at least ``threshold`` away
    from every ReLU kink and pooling tie.

    Args:
        model: The model.
        sample: Draws an input from the given generator.
        threshold: The minimum margin (see :func:`kink_margin`).
        max_tries: The maximum number of draws.
        seed: The seed of the generator.

    Returns:
        The first input with a sufficient margin, or the one with the largest
        margin after ``max_tries`` draws.
    """
    generator = torch.Generator().manual_seed(seed)
    best_x, best_margin = None, -1.
    for _ in range(max_tries):
        x = sample(generator)
        margin = kink_margin(model, x)
        if margin >= threshold:
            return x
        if margin > best_margin:
            best_x, best_margin = x, margin

    warnings.warn(
        f'No input with a kink margin of {threshold} found in {max_tries} '
        f'draws. Using the best one (margin {best_margin:.2e}).'
    )
    return best_x
