import copy
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import pandas as pd
import torch
from torch import nn
from torch.optim import Adam
from torch.optim.lr_scheduler import ExponentialLR
from torch.utils.data import DataLoader, Dataset
from tqdm import tqdm

from ..config import TrainConfig
from ..errors import NonFiniteError
from ..utils import RunningExtrema, MAX
from .loss import softmax_bce_loss


HISTORY_COLUMNS = ['epoch', 'lr', 'train_loss', 'train_acc', 'val_loss',
                   'val_acc']


@dataclass
class TrainResult:
    """The outcome of :func:`train`.

    Attributes:
        model: The trained model, holding the weights of the epoch with the
            best validation accuracy (or of the last epoch if there is no
            validation set).
        history: The metrics of each epoch, with the columns ``epoch``,
            ``lr``, ``train_loss``, ``train_acc``, ``val_loss`` and
            ``val_acc``.
        best_epoch: The epoch of the selected weights, or ``None`` if no
            epoch was run.
        optimizer: The optimizer at the end of training.
        scheduler: The learning rate scheduler at the end of training.
    """
    model: nn.Module
    history: pd.DataFrame
    best_epoch: Optional[int]
    optimizer: Adam
    scheduler: ExponentialLR


def make_optimizer(
    model: nn.Module,
    config: TrainConfig,
) -> Tuple[Adam, ExponentialLR]:
    """Creates Adam and a scheduler that multiplies the learning rate with
    ``config.lr_decay`` after every epoch."""
    optimizer = Adam(
        model.parameters(),
        lr=config.lr,
        betas=(config.beta1, config.beta2),
        eps=config.eps,
    )
    scheduler = ExponentialLR(optimizer, gamma=config.lr_decay)
    return optimizer, scheduler


def check_finite_gradients(
    model: nn.Module,
    epoch: Optional[int] = None,
    step: Optional[int] = None,
):
    """Raises a :class:`NonFiniteError` naming every parameter with a NaN or
    infinite gradient."""
    names = [
        name for name, p in model.named_parameters()
        if p.grad is not None and not torch.isfinite(p.grad).all()
    ]
    if len(names) > 0:
        raise NonFiniteError('Nonfinite gradient', epoch=epoch, step=step,
                             names=names)


def train(
    model: nn.Module,
    ds_train: Dataset,
    ds_val: Optional[Dataset],
    config: TrainConfig,
) -> TrainResult:
    """Trains a two-logit classifier with the binary cross-entropy loss.

    The training set is shuffled with a generator seeded with
    ``config.seed``, so that runs are reproducible given the same initial
    model. The learning rate decays once per epoch. After every epoch, the
    model is evaluated on the validation set and the weights with the
    highest validation accuracy are kept (the earliest epoch on ties).

    Args:
        model: The model to train. Its parameters are updated in place.
        ds_train: The training set, yielding ``(features, label)`` pairs.
        ds_val: The validation set, or ``None``.
        config: The training settings.

    Returns:
        The trained model with its history.
    """
    dtype = next(model.parameters()).dtype
    optimizer, scheduler = make_optimizer(model, config)

    generator = torch.Generator()
    generator.manual_seed(config.seed)
    # Batch normalization cannot train on a last batch with a single sample
    drop_last = len(ds_train) % config.batch_size == 1
    dl_train = DataLoader(ds_train, batch_size=config.batch_size,
                          shuffle=True, generator=generator,
                          drop_last=drop_last)

    best = RunningExtrema(MAX)
    best_state = None
    rows = []

    for epoch in tqdm(range(config.epochs), leave=False, desc='Epochs'):
        lr = scheduler.get_last_lr()[0]
        model.train()
        loss_sum, num_correct, num_samples = 0., 0, 0

        for step, (x, y) in enumerate(dl_train):
            x = x.to(dtype)
            optimizer.zero_grad()
            logits = model(x)
            loss = softmax_bce_loss(logits, y)
            if not torch.isfinite(loss):
                raise NonFiniteError(f'Nonfinite loss {loss.item()}',
                                     epoch=epoch, step=step)
            loss.backward()
            check_finite_gradients(model, epoch=epoch, step=step)
            optimizer.step()

            loss_sum += loss.item() * len(y)
            num_correct += _num_correct(logits.detach(), y)
            num_samples += len(y)

        train_loss = loss_sum / max(num_samples, 1)
        train_acc = num_correct / max(num_samples, 1)
        if ds_val is not None and len(ds_val) > 0:
            val_loss, val_acc = evaluate_loss_accuracy(
                model, ds_val, config.batch_size
            )
        else:
            val_loss, val_acc = math.nan, math.nan

        scheduler.step()

        if ds_val is None or len(ds_val) == 0 or best.update(
            'val_acc', val_acc, epoch=epoch
        ):
            best_state = copy.deepcopy(model.state_dict())

        rows.append({
            'epoch': epoch,
            'lr': lr,
            'train_loss': train_loss,
            'train_acc': train_acc,
            'val_loss': val_loss,
            'val_acc': val_acc,
        })
        logging.info(
            f'Epoch {epoch}: lr {lr:.3e}, train loss {train_loss:.4f}, '
            f'train acc {train_acc:.4f}, val loss {val_loss:.4f}, '
            f'val acc {val_acc:.4f}'
        )

    if best_state is not None:
        model.load_state_dict(best_state)

    if 'val_acc' in best.epochs:
        best_epoch = best.epochs['val_acc']
    elif len(rows) > 0:
        best_epoch = rows[-1]['epoch']
    else:
        best_epoch = None
    if best_epoch is not None:
        logging.info(f'Selected the weights of epoch {best_epoch}')

    return TrainResult(
        model=model,
        history=pd.DataFrame(rows, columns=HISTORY_COLUMNS),
        best_epoch=best_epoch,
        optimizer=optimizer,
        scheduler=scheduler,
    )


@torch.no_grad()
def evaluate_loss_accuracy(
    model: nn.Module,
    dataset: Dataset,
    batch_size: int = 32,
) -> Tuple[float, float]:
    """Returns the mean loss and the accuracy of the model on a dataset, in
    inference mode."""
    was_training = model.training
    model.eval()
    dtype = next(model.parameters()).dtype

    loss_sum, num_correct, num_samples = 0., 0, 0
    for x, y in DataLoader(dataset, batch_size=batch_size, shuffle=False):
        logits = model(x.to(dtype))
        loss_sum += softmax_bce_loss(logits, y).item() * len(y)
        num_correct += _num_correct(logits, y)
        num_samples += len(y)

    model.train(was_training)
    return loss_sum / num_samples, num_correct / num_samples


def _num_correct(logits: torch.Tensor, labels: torch.Tensor) -> int:
    preds = (torch.softmax(logits, dim=1)[:, 1] >= 0.5).long()
    return int((preds == labels.long()).sum().item())
