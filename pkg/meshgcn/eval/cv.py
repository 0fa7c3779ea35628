import logging
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from torch import Tensor
from tqdm import tqdm

from ..config import ModelConfig, TrainConfig, SplitSpec
from ..data import DatasetManifest, MeshFeatureDataset, MinMaxScaler,\
    subject_level_split
from ..mesh import MeshHierarchy
from ..model import ResidualGCN, TrainResult, level_laplacians,\
    count_parameters, predict_proba, train
from ..utils import seed_everything
from .audit import subject_overlap
from .metrics import binary_metrics
from .mlp_baseline import mlp_baseline


METRICS = ['Accuracy', 'Sensitivity', 'Specificity', 'AUC']


@dataclass
class TrialData:
    """The normalized datasets of one trial.

    Attributes:
        train: The training scans.
        val: The validation scans.
        test: The test scans.
        scaler: The min-max normalization fitted on the training scans.
    """
    train: MeshFeatureDataset
    val: MeshFeatureDataset
    test: MeshFeatureDataset
    scaler: MinMaxScaler


def trial_datasets(
    ds: MeshFeatureDataset,
    spec: SplitSpec,
    trial: int,
) -> TrialData:
    """Splits the scans of a dataset at subject level and normalizes them
    with the statistics of the training scans.

    Raises:
        RuntimeError: If a subject ends up in more than one set.
    """
    df = ds.df.assign(record=np.arange(len(ds.df)))
    df_train, df_val, df_test = subject_level_split(df, spec, trial)
    leaked = subject_overlap(df_train, df_val, df_test)
    if len(leaked) > 0:
        raise RuntimeError(
            f'Trial {trial}: {len(leaked)} subjects in several sets'
        )

    idx_train = df_train['record'].values
    scaler = MinMaxScaler.fit(ds.features[idx_train], ds.mask)

    def subset(df_subset):
        idxs = df_subset['record'].values
        return MeshFeatureDataset.from_tensors(
            ds.features[idxs], ds.labels[idxs], mask=ds.mask,
            transform=scaler,
        )

    return TrialData(train=subset(df_train), val=subset(df_val),
                     test=subset(df_test), scaler=scaler)


def train_gcn(
    data: TrialData,
    laplacians: Sequence[Tensor],
    model_config: ModelConfig,
    train_config: TrainConfig,
) -> TrainResult:
    """Builds a residual GCN (initialized with ``train_config.seed``) and
    trains it on the data of a trial."""
    seed_everything(train_config.seed, train_config.num_threads)
    in_features = data.train.features.shape[-1]
    model = ResidualGCN(model_config, laplacians, in_features)
    return train(model, data.train, data.val, train_config)


def evaluate_gcn(
    model: ResidualGCN,
    ds: MeshFeatureDataset,
    batch_size: int = 32,
) -> Dict[str, float]:
    """Computes :func:`binary_metrics` of a model on a dataset."""
    probs = predict_proba(model, ds.transformed_features(), batch_size)
    return binary_metrics(probs, ds.labels)


def monte_carlo_cv(
    manifest: DatasetManifest,
    h: MeshHierarchy,
    model_config: ModelConfig,
    train_config: TrainConfig,
    spec: SplitSpec,
    with_mlp: bool = False,
    trials: Optional[Sequence[int]] = None,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Runs a Monte Carlo cross-validation.

    Every trial draws a fresh subject-level split (seed ``spec.seed +
    trial``), initializes a fresh model (seed ``train_config.seed +
    trial``), trains it and evaluates it on the test set.

    Args:
        manifest: The dataset.
        h: The hierarchy of the dataset.
        model_config: The model configuration.
        train_config: The training settings.
        spec: The split protocol.
        with_mlp: If ``True``, also train and evaluate the MLP baseline in
            every trial. Its metrics get the prefix ``'MLP'``.
        trials: The trials to run. Defaults to all ``spec.n_trials``.

    Returns:
        A DataFrame with one row per trial and a summary of the metrics (see
        :func:`summarize_trials`).
    """
    ds = MeshFeatureDataset(manifest.to_frame(), root=manifest.root)
    laplacians = level_laplacians(h, model_config.lambda_max_mode,
                                  model_config.dtype)
    trials = range(spec.n_trials) if trials is None else trials

    rows = []
    for trial in tqdm(trials, leave=False, desc='Trials'):
        data = trial_datasets(ds, spec, trial)
        config = replace(train_config, seed=train_config.seed + trial)
        result = train_gcn(data, laplacians, model_config, config)
        metrics = evaluate_gcn(result.model, data.test, config.batch_size)

        row = {
            'trial': trial,
            'n_train': len(data.train),
            'n_val': len(data.val),
            'n_test': len(data.test),
            'best_epoch': result.best_epoch,
            'NumParams': count_parameters(result.model),
            **metrics,
        }
        if with_mlp:
            mlp_metrics = mlp_baseline(data.train, data.val, data.test,
                                       row['NumParams'], model_config, config)
            row.update({f'MLP{k}': v for k, v in mlp_metrics.items()})

        logging.info(
            f'Trial {trial}: ' + ', '.join(
                f'{k} {row[k]:.4f}' for k in METRICS
            )
        )
        rows.append(row)

    df = pd.DataFrame(rows)
    metrics = METRICS + ([f'MLP{m}' for m in METRICS] if with_mlp else [])
    return df, summarize_trials(df, metrics)


def summarize_trials(
    df: pd.DataFrame,
    metrics: List[str] = METRICS,
) -> pd.DataFrame:
    """Summarizes the per-trial metrics for box plots.

    Returns:
        A DataFrame with one row per metric and the columns ``mean``,
        ``std``, ``min``, ``q1``, ``median``, ``q3`` and ``max``. NaN values
        (undefined metrics) are ignored.
    """
    rows = {}
    for metric in metrics:
        values = df[metric].astype(float)
        rows[metric] = {
            'mean': values.mean(),
            'std': values.std(ddof=0),
            'min': values.min(),
            'q1': values.quantile(0.25),
            'median': values.median(),
            'q3': values.quantile(0.75),
            'max': values.max(),
        }
    return pd.DataFrame.from_dict(rows, orient='index')
