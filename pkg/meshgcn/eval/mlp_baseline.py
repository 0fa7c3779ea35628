import logging
from typing import Dict

from ..config import ModelConfig, TrainConfig
from ..data import MeshFeatureDataset
from ..model import MLPClassifier, gcn_conv_layers, mlp_for_parameter_budget,\
    predict_proba, train
from ..utils import seed_everything
from .metrics import binary_metrics


def mlp_baseline(
    ds_train: MeshFeatureDataset,
    ds_val: MeshFeatureDataset,
    ds_test: MeshFeatureDataset,
    gcn_params: int,
    model_config: ModelConfig,
    train_config: TrainConfig,
) -> Dict[str, float]:
    """Trains and evaluates an MLP with the size of the residual GCN.

    The MLP gets as many hidden layers as the GCN has graph convolutions on
    its main path, and the width that brings its parameter count closest to
    ``gcn_params``. It is trained with the same settings and on the same
    normalized features (flattened) as the GCN.

    Returns:
        The metrics of :func:`binary_metrics` on the test set, with the
        additional keys ``'NumParams'`` and ``'Width'``.
    """
    x, _ = ds_train[0]
    in_features = x.numel()
    n_hidden = gcn_conv_layers(model_config)
    width, n_params = mlp_for_parameter_budget(in_features, n_hidden,
                                               gcn_params)

    seed_everything(train_config.seed, train_config.num_threads)
    model = MLPClassifier(in_features, width, n_hidden,
                          dtype=model_config.dtype)
    result = train(model, ds_train, ds_val, train_config)

    probs = predict_proba(result.model, ds_test.transformed_features(),
                          train_config.batch_size)
    metrics = binary_metrics(probs, ds_test.labels)
    logging.info(f'MLP baseline: test accuracy {metrics["Accuracy"]:.4f}')
    return {**metrics, 'NumParams': n_params, 'Width': width}
