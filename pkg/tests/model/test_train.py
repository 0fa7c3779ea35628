import math

import pytest
import torch
from torch import nn
from torch.utils.data import TensorDataset

from meshgcn.config import ModelConfig, TrainConfig
from meshgcn.errors import NonFiniteError
from meshgcn.model import ResidualGCN, train, make_optimizer,\
    evaluate_loss_accuracy
from meshgcn.utils import seed_everything


CONFIG = ModelConfig(kernels_per_conv=4, K=2, n_blocks=1, fc_units=8,
                     post_resblock_units=4, precision='float64')


def _blobs(n, seed=0):
    generator = torch.Generator().manual_seed(seed)
    labels = torch.arange(n) % 2
    x = 0.3 * torch.randn(n, 8, 3, generator=generator, dtype=torch.float64)
    x += (2 * labels.double() - 1)[:, None, None]
    return TensorDataset(x, labels)


def _model(laplacians, seed=0):
    seed_everything(seed)
    return ResidualGCN(CONFIG, laplacians, in_features=3)


def test_zero_epochs(make_laplacians):
    model = _model(make_laplacians(3))
    before = {k: v.clone() for k, v in model.state_dict().items()}
    result = train(model, _blobs(8), _blobs(4, seed=1),
                   TrainConfig(epochs=0))

    assert len(result.history) == 0
    assert result.best_epoch is None
    for k, v in result.model.state_dict().items():
        assert torch.equal(v, before[k])


def test_adam_first_step():
    param = nn.Parameter(torch.tensor([1.0], dtype=torch.float64))
    module = nn.Module()
    module.param = param
    optimizer, _ = make_optimizer(module, TrainConfig(lr=0.001))

    param.grad = torch.ones_like(param)
    optimizer.step()
    assert (param.item() - 1.0) == pytest.approx(-0.001, rel=1e-6)


def test_adam_zero_gradient():
    param = nn.Parameter(torch.tensor([1.0, -2.0], dtype=torch.float64))
    module = nn.Module()
    module.param = param
    optimizer, _ = make_optimizer(module, TrainConfig())

    for _ in range(3):
        param.grad = torch.zeros_like(param)
        optimizer.step()
    assert param.tolist() == [1.0, -2.0]


def test_learning_rate_decay(make_laplacians):
    config = TrainConfig(epochs=3, batch_size=4, lr=0.01, lr_decay=0.5)
    result = train(_model(make_laplacians(3)), _blobs(8), None, config)
    assert result.history['lr'].tolist() == pytest.approx([0.01, 0.005,
                                                           0.0025])


def test_history(make_laplacians):
    config = TrainConfig(epochs=4, batch_size=4)
    result = train(_model(make_laplacians(3)), _blobs(8), _blobs(6, seed=1),
                   config)
    history = result.history

    assert history['epoch'].tolist() == [0, 1, 2, 3]
    assert list(history.columns) == ['epoch', 'lr', 'train_loss',
                                     'train_acc', 'val_loss', 'val_acc']
    assert result.best_epoch == history['val_acc'].idxmax()


def test_selected_weights(make_laplacians):
    config = TrainConfig(epochs=4, batch_size=4)
    ds_val = _blobs(6, seed=1)
    result = train(_model(make_laplacians(3)), _blobs(8), ds_val, config)
    _, val_acc = evaluate_loss_accuracy(result.model, ds_val)
    assert val_acc == result.history['val_acc'].max()


def test_no_validation_set(make_laplacians):
    result = train(_model(make_laplacians(3)), _blobs(8), None,
                   TrainConfig(epochs=2, batch_size=4))
    assert result.best_epoch == 1
    assert result.history['val_acc'].isna().all()


def test_single_sample_last_batch(make_laplacians):
    result = train(_model(make_laplacians(3)), _blobs(9), None,
                   TrainConfig(epochs=1, batch_size=4))
    assert result.history['train_acc'].notna().all()


def test_nonfinite_loss(make_laplacians):
    ds = _blobs(8)
    ds.tensors[0][0, 0, 0] = math.nan
    with pytest.raises(NonFiniteError):
        train(_model(make_laplacians(3)), ds, None,
              TrainConfig(epochs=1, batch_size=8))


def test_reproducible(make_laplacians):
    config = TrainConfig(epochs=3, batch_size=4, seed=5, num_threads=1)
    histories = []
    for _ in range(2):
        seed_everything(config.seed, config.num_threads)
        model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3)
        result = train(model, _blobs(12), _blobs(6, seed=1), config)
        histories.append(result.history)
    assert histories[0].equals(histories[1])


@pytest.mark.slow
def test_separable(make_laplacians):
    config = TrainConfig(epochs=100, batch_size=8, lr=5e-3)
    result = train(_model(make_laplacians(3)), _blobs(64), None, config)
    assert result.history['train_acc'].max() >= 0.99


def test_loss_decreases_for_most_seeds(make_laplacians):
    n_decreasing = 0
    for seed in range(20):
        config = TrainConfig(epochs=10, batch_size=4, lr=5e-3, seed=seed,
                             num_threads=1)
        seed_everything(config.seed, config.num_threads)
        model = ResidualGCN(CONFIG, make_laplacians(3), in_features=3)
        result = train(model, _blobs(16, seed=seed), None, config)
        loss = result.history['train_loss']
        n_decreasing += loss.iloc[-1] < loss.iloc[0]
    assert n_decreasing >= 19
