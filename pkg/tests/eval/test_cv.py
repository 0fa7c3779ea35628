from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
import torch

from meshgcn.config import ModelConfig, TrainConfig, SplitSpec,\
    SyntheticSpec
from meshgcn.data import MeshFeatureDataset, generate_synthetic_dataset
from meshgcn.eval import METRICS, trial_datasets, train_gcn, evaluate_gcn,\
    monte_carlo_cv, summarize_trials
from meshgcn.mesh import load_hierarchy
from meshgcn.model import level_laplacians


MODEL = ModelConfig(kernels_per_conv=4, K=3, n_blocks=1, fc_units=8,
                    post_resblock_units=4)
TRAIN = TrainConfig(batch_size=4, epochs=2, lr=1e-3, seed=5, num_threads=1)
SPLIT = SplitSpec(n_trials=2, seed=1)


@pytest.fixture(scope='module')
def manifest(tmp_path_factory):
    spec = SyntheticSpec(n_subjects=10, scans_per_subject=2, subdivisions=1,
                         max_levels=2, seed=0)
    return generate_synthetic_dataset(spec, tmp_path_factory.mktemp('data'))


@pytest.fixture(scope='module')
def hierarchy(manifest):
    return load_hierarchy(manifest.resolve(manifest.hierarchy_file))


def _dataset(manifest):
    return MeshFeatureDataset(manifest.to_frame(), root=manifest.root)


def test_trial_datasets(manifest):
    ds = _dataset(manifest)
    data = trial_datasets(ds, SPLIT, trial=0)

    # 1 test and 1 validation subject per class, 2 scans per subject
    assert len(data.test) == 4
    assert len(data.val) == 4
    assert len(data.train) == 12
    for subset in [data.train, data.val, data.test]:
        assert subset.labels.sum() == len(subset) // 2

    # Normalized with the statistics of the training scans only
    x = data.train.transformed_features()
    assert torch.allclose(x.amin(dim=(0, 1)), -torch.ones_like(x[0, 0]))
    assert torch.allclose(x.amax(dim=(0, 1)), torch.ones_like(x[0, 0]))
    assert torch.allclose(data.scaler.fmin,
                          data.train.features.amin(dim=(0, 1)))


def test_trial_datasets_differ(manifest):
    ds = _dataset(manifest)
    first = trial_datasets(ds, SPLIT, trial=0)
    same = trial_datasets(ds, SPLIT, trial=0)
    assert torch.equal(first.test.features, same.test.features)

    others = [trial_datasets(ds, SPLIT, trial=t).test.features
              for t in range(1, 6)]
    assert any(not torch.equal(first.test.features, x) for x in others)


def test_single_trial_matches_direct_run(manifest, hierarchy):
    trials, summary = monte_carlo_cv(manifest, hierarchy, MODEL, TRAIN,
                                     SPLIT, trials=[1])
    assert len(trials) == 1
    row = trials.iloc[0]
    assert row['trial'] == 1
    assert row['n_train'] == 12 and row['n_val'] == 4 and row['n_test'] == 4
    assert row['NumParams'] > 0
    assert list(summary.index) == METRICS

    # Trial t trains with seed TRAIN.seed + t
    data = trial_datasets(_dataset(manifest), SPLIT, trial=1)
    laplacians = level_laplacians(hierarchy, MODEL.lambda_max_mode,
                                  MODEL.dtype)
    result = train_gcn(data, laplacians, MODEL,
                       replace(TRAIN, seed=TRAIN.seed + 1))
    metrics = evaluate_gcn(result.model, data.test, TRAIN.batch_size)

    assert row['best_epoch'] == result.best_epoch
    assert row['Accuracy'] == pytest.approx(metrics['Accuracy'])
    assert row['AUC'] == pytest.approx(metrics['AUC'])


def test_all_trials(manifest, hierarchy):
    trials, summary = monte_carlo_cv(manifest, hierarchy, MODEL,
                                     replace(TRAIN, epochs=1), SPLIT)
    assert trials['trial'].tolist() == [0, 1]
    for metric in METRICS:
        assert trials[metric].between(0, 1).all()
    assert list(summary.columns) == ['mean', 'std', 'min', 'q1', 'median',
                                     'q3', 'max']


def test_with_mlp(manifest, hierarchy):
    trials, summary = monte_carlo_cv(manifest, hierarchy, MODEL,
                                     replace(TRAIN, epochs=1), SPLIT,
                                     with_mlp=True, trials=[0])
    for metric in METRICS:
        assert f'MLP{metric}' in trials.columns
        assert f'MLP{metric}' in summary.index
    assert trials.iloc[0]['MLPWidth'] >= 1
    assert trials.iloc[0]['MLPNumParams'] > 0


def test_summarize_trials():
    df = pd.DataFrame({'Accuracy': [0.6, 0.8, 1.0, 0.8, np.nan]})
    summary = summarize_trials(df, ['Accuracy'])
    row = summary.loc['Accuracy']

    assert row['mean'] == pytest.approx(0.8)
    assert row['std'] == pytest.approx(np.sqrt(0.02))
    assert row['min'] == pytest.approx(0.6)
    assert row['max'] == pytest.approx(1.0)
    assert row['median'] == pytest.approx(0.8)
    assert row['q1'] == pytest.approx(0.75)
    assert row['q3'] == pytest.approx(0.85)
