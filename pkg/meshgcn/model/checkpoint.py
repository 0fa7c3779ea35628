import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import torch

from ..config import ModelConfig, TrainConfig, config_from_dict,\
    config_to_dict
from ..mesh import MeshHierarchy
from ..utils import rng_state
from .residual_gcn import ResidualGCN, level_laplacians


CHECKPOINT_FORMAT_VERSION = 1


def save_checkpoint(
    path: Union[str, Path],
    model: ResidualGCN,
    in_features: int,
    train_config: Optional[TrainConfig] = None,
    optimizer: Optional[torch.optim.Optimizer] = None,
    scheduler: Optional[Any] = None,
    epoch: Optional[int] = None,
    extra: Optional[Dict[str, Any]] = None,
):
    """Saves a model with the state needed to rebuild and resume it.

    The checkpoint is a versioned dict in a :func:`torch.save` container,
    with the model and training configs, the parameters and buffers, the
    optimizer and scheduler state, the random generator state and any
    ``extra`` entries (such as the feature normalization).
    """
    checkpoint = {
        'format_version': CHECKPOINT_FORMAT_VERSION,
        'model_config': config_to_dict(model.config),
        'train_config': (config_to_dict(train_config)
                         if train_config is not None else None),
        'in_features': in_features,
        'depth': model.depth,
        'epoch': epoch,
        'state_dict': model.state_dict(),
        'optimizer': (optimizer.state_dict()
                      if optimizer is not None else None),
        'scheduler': (scheduler.state_dict()
                      if scheduler is not None else None),
        'rng_state': rng_state(),
        'extra': extra or {},
    }
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    torch.save(checkpoint, path)
    logging.info(f'Saved checkpoint to {path}')


def load_checkpoint(path: Union[str, Path]) -> Dict[str, Any]:
    """Loads a checkpoint written by :func:`save_checkpoint`."""
    checkpoint = torch.load(path, map_location='cpu', weights_only=False)
    version = checkpoint.get('format_version') \
        if isinstance(checkpoint, dict) else None
    if version != CHECKPOINT_FORMAT_VERSION:
        raise ValueError(
            f'Unsupported checkpoint format version {version} in {path}'
        )
    return checkpoint


def model_from_checkpoint(
    checkpoint: Dict[str, Any],
    h: MeshHierarchy,
) -> Tuple[ResidualGCN, ModelConfig]:
    """Rebuilds the model of a checkpoint on the given hierarchy."""
    config = config_from_dict(ModelConfig, checkpoint['model_config'])
    if h.depth != checkpoint['depth']:
        raise ValueError(
            f'The checkpoint was trained on a hierarchy of depth '
            f'{checkpoint["depth"]}, got depth {h.depth}'
        )
    laplacians = level_laplacians(h, config.lambda_max_mode, config.dtype)
    model = ResidualGCN(config, laplacians, checkpoint['in_features'])
    model.load_state_dict(checkpoint['state_dict'])
    return model, config
