import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import torch
from torch import nn, Tensor
from torch.utils.data import Dataset
from tqdm import tqdm

from ..mesh import MeshHierarchy, upsample_to_finest


@dataclass(frozen=True)
class ClassActivationMap:
    """A Grad-CAM relevance map over the partitions of a hierarchy level.

    Attributes:
        level: The hierarchy level at which the map was computed.
        values: The nonnegative relevance of each partition of ``level``.
        class_id: The class whose score was explained.
        finest_values: The map copied down to the finest level, if
            upsampled.
    """
    level: int
    values: np.ndarray
    class_id: int
    finest_values: Optional[np.ndarray] = None


def neuron_importance(grads: Tensor) -> Tensor:
    """Computes the importance weight of each feature map.

    The weight of a map is the mean over the vertices of the gradient of the
    class score with respect to that map.

    Args:
        grads: The gradients, of shape ``N x K`` (or ``B x N x K``).

    Returns:
        The ``K`` weights (or ``B x K``).
    """
    if grads.dim() not in [2, 3]:
        raise ValueError(
            'Expected gradients of shape (B x) N x K, got '
            f'{tuple(grads.shape)}'
        )
    return grads.mean(dim=-2)


def class_activation_map(
    alpha: Tensor,
    maps: Tensor,
    level: int,
    class_id: int,
) -> ClassActivationMap:
    """Combines the feature maps with their importance weights and clips the
    negative values.

    Args:
        alpha: The ``K`` importance weights.
        maps: The feature maps, of shape ``N x K``.
        level: The hierarchy level of the maps.
        class_id: The explained class.
    """
    if maps.dim() != 2 or alpha.shape != (maps.shape[1],):
        raise ValueError(
            f'{tuple(alpha.shape)} weights do not match feature maps of '
            f'shape {tuple(maps.shape)}'
        )
    values = torch.relu(maps @ alpha)
    return ClassActivationMap(
        level=level,
        values=values.detach().cpu().numpy(),
        class_id=class_id,
    )


def upsample_cam(
    cam: ClassActivationMap,
    h: MeshHierarchy,
) -> ClassActivationMap:
    """Copies a map down the partition tree to the finest level."""
    if len(cam.values) != 2 ** cam.level:
        raise ValueError(
            f'A map at level {cam.level} should have {2 ** cam.level} values, '
            f'got {len(cam.values)}'
        )
    return replace(cam, finest_values=upsample_to_finest(h, cam.values))


def normalize_cam(values: np.ndarray) -> np.ndarray:
    """Scales a map to ``[0, 1]`` by its maximum. An all-zero map stays
    zero."""
    max_val = np.max(values) if len(values) > 0 else 0.
    if max_val <= 0:
        return np.zeros_like(values)
    return values / max_val


class MeshGradCAM:
    """Grad-CAM for a :class:`meshgcn.model.ResidualGCN`.

    The feature maps are the output of the post-ResBlock. Their gradients
    with respect to the class score (the logit before the softmax) are
    captured with a tensor hook during the backward pass.

    Use as a context manager to remove the hooks afterwards::

        with MeshGradCAM(model) as grad_cam:
            cam = grad_cam(x, class_id=1)

    Attributes:
        model: The explained model.
        activations: The feature maps of the last explained sample.
        gradients: Their gradients.
        logits: The logits of the last explained sample.
    """
    def __init__(
        self,
        model: nn.Module,
        target_layer: Optional[nn.Module] = None,
    ):
        self.model = model
        self.target_layer = target_layer if target_layer is not None \
            else model.post_block
        self.level = getattr(model, 'post_level', None)
        self.activations = None
        self.gradients = None
        self.logits = None
        self._handle = self.target_layer.register_forward_hook(
            self._forward_hook
        )

    def _forward_hook(self, module, inputs, output):
        self.activations = output.detach()
        if output.requires_grad:
            output.register_hook(self._save_gradient)

    def _save_gradient(self, grad):
        self.gradients = grad.detach()

    def __call__(self, x: Tensor, class_id: int) -> ClassActivationMap:
        """Explains the score of ``class_id`` for a single sample.

        Args:
            x: The finest-level features, of shape ``N x F`` or ``1 x N x F``.
            class_id: The explained class.
        """
        if x.dim() == 2:
            x = x.unsqueeze(0)
        if x.shape[0] != 1:
            raise ValueError('Grad-CAM explains a single sample at a time')

        was_training = self.model.training
        self.model.eval()
        try:
            dtype = next(self.model.parameters()).dtype
            self.model.zero_grad()
            with torch.enable_grad():
                logits = self.model(x.to(dtype))
                logits[0, class_id].backward()
        finally:
            self.model.train(was_training)
        self.logits = logits.detach()[0]

        maps = self.activations[0]
        alpha = neuron_importance(self.gradients[0])
        level = self.level if self.level is not None \
            else int(np.log2(maps.shape[0]))
        return class_activation_map(alpha, maps, level, class_id)

    def remove_hooks(self):
        self._handle.remove()

    def __enter__(self):
        return self

    def __exit__(self, *args):
        self.remove_hooks()


def average_tp_cam(
    model: nn.Module,
    h: MeshHierarchy,
    dataset: Dataset,
    class_id: int = 1,
) -> ClassActivationMap:
    """Averages the finest-level maps of the true positives of a class.

    A sample is a true positive for ``class_id`` if its label is
    ``class_id`` and the model predicts it (class-1 probability at least 0.5
    for class 1, below 0.5 for class 0). The maps are averaged without
    normalizing them first.

    Args:
        model: The trained model.
        h: The hierarchy of the model.
        dataset: The evaluated samples, yielding ``(features, label)`` pairs.
        class_id: The explained class.

    Returns:
        The average map, at the finest level.
    """
    total = None
    n_tp = 0
    with MeshGradCAM(model) as grad_cam:
        for i in tqdm(range(len(dataset)), leave=False, desc='Grad-CAM'):
            x, label = dataset[i]
            if int(label) != class_id:
                continue
            cam = grad_cam(x, class_id)
            pred = int(torch.softmax(grad_cam.logits, dim=0)[1] >= 0.5)
            if pred != class_id:
                continue
            finest = upsample_cam(cam, h).finest_values
            total = finest.copy() if total is None else total + finest
            n_tp += 1

    if n_tp == 0:
        raise ValueError(f'No true positives for class {class_id}')
    logging.info(f'Averaged the maps of {n_tp} true positives')

    mean = total / n_tp
    return ClassActivationMap(level=h.depth, values=mean,
                              class_id=class_id, finest_values=mean)
