import json

import pandas as pd
import pytest

from meshgcn.cli import main, build_parser, _configs, EXIT_OK,\
    EXIT_VALIDATION, EXIT_IO


MODEL_FLAGS = ['--kernels_per_conv', '4', '--K', '3', '--n_blocks', '1',
               '--fc_units', '8', '--post_resblock_units', '4']


@pytest.fixture(scope='module')
def data_dir(tmp_path_factory):
    out_dir = tmp_path_factory.mktemp('data')
    code = main(['generate', '--out_dir', str(out_dir), '--n_subjects', '10',
                 '--scans_per_subject', '2', '--subdivisions', '1',
                 '--max_levels', '2', '--log_level', 'warning'])
    assert code == EXIT_OK
    return out_dir


@pytest.fixture(scope='module')
def trained(data_dir, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp('train')
    code = main(['train', '--manifest', str(data_dir / 'manifest.json'),
                 '--out_dir', str(out_dir), '--epochs', '3',
                 '--batch_size', '4', '--n_trials', '2', '--trial', '1',
                 *MODEL_FLAGS])
    assert code == EXIT_OK
    return out_dir


def test_flag_overrides():
    args = build_parser().parse_args([
        'train', '--manifest', 'manifest.json', '--out_dir', 'out',
        '--seed', '3', '--kernels_per_conv', '8', '--bias_enabled', 'false',
    ])
    configs = _configs(args)

    assert configs['model'].kernels_per_conv == 8
    assert not configs['model'].bias_enabled
    # Shared field names override every section of the command
    assert configs['train'].seed == 3
    assert configs['split'].seed == 3
    # Sections the command does not use keep their defaults
    assert configs['synthetic'].seed == 0
    assert configs['model'].K == 3


def test_config_file(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'synthetic': {'patch_direction': [1, 0, 0],
                                              'radius': 20.}}))
    args = build_parser().parse_args([
        'generate', '--config', str(path), '--out_dir', 'out',
        '--radius', '30',
    ])
    spec = _configs(args)['synthetic']

    assert spec.patch_direction == (1., 0., 0.)
    assert spec.radius == 30.


def test_tuple_flag():
    args = build_parser().parse_args([
        'generate', '--out_dir', 'out', '--patch_direction', '0', '1', '0',
    ])
    assert _configs(args)['synthetic'].patch_direction == (0., 1., 0.)


def test_invalid_config_value(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text(json.dumps({'train': {'epochs': -1}}))
    assert main(['gradcheck', '--config', str(path)]) == EXIT_IO

    path.write_text(json.dumps({'train': {'momentum': 0.9}}))
    assert main(['gradcheck', '--config', str(path)]) == EXIT_IO

    assert main(['generate', '--out_dir', str(tmp_path),
                 '--n_subjects', '3']) == EXIT_IO


def test_invalid_json(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('{"model": ')
    assert main(['gradcheck', '--config', str(path)]) == EXIT_IO


def test_missing_files(tmp_path):
    assert main(['audit', '--manifest',
                 str(tmp_path / 'missing.json')]) == EXIT_IO
    assert main(['gradcheck', '--config',
                 str(tmp_path / 'missing.json')]) == EXIT_IO


def test_gradcheck(tmp_path):
    out = tmp_path / 'gradcheck.csv'
    assert main(['gradcheck', '--suites', 'cam', '--out', str(out)]) \
        == EXIT_OK
    df = pd.read_csv(out)
    assert (df['suite'] == 'cam').all()
    assert df['passed'].all()


def test_hierarchy(data_dir, tmp_path):
    out = tmp_path / 'hierarchy.json'
    code = main(['hierarchy', '--mesh', str(data_dir / 'template_cortex.off'),
                 '--max_levels', '2', '--out', str(out)])
    assert code == EXIT_OK
    assert out.exists()


def test_audit(data_dir, tmp_path):
    out = tmp_path / 'audit.csv'
    code = main(['audit', '--manifest', str(data_dir / 'manifest.json'),
                 '--n_trials', '3', '--out', str(out)])
    assert code == EXIT_OK
    df = pd.read_csv(out)
    assert len(df) == 3
    assert (df['overlap'] == 0).all()


def test_train(trained):
    history = pd.read_csv(trained / 'history.csv')
    assert history['epoch'].tolist() == [0, 1, 2]
    assert (trained / 'checkpoint.pt').exists()


def test_evaluate(data_dir, trained, tmp_path):
    out = tmp_path / 'metrics.csv'
    code = main(['evaluate', '--manifest', str(data_dir / 'manifest.json'),
                 '--checkpoint', str(trained / 'checkpoint.pt'),
                 '--out', str(out)])
    assert code == EXIT_OK
    df = pd.read_csv(out)
    assert len(df) == 1
    assert 0 <= df['Accuracy'][0] <= 1


def test_explain(data_dir, trained, tmp_path):
    # A class without true positives is reported as invalid data, but
    # unless every training scan is misclassified one class has them
    codes = {}
    for class_id in [0, 1]:
        codes[class_id] = main([
            'explain', '--manifest', str(data_dir / 'manifest.json'),
            '--checkpoint', str(trained / 'checkpoint.pt'),
            '--subset', 'train', '--class_id', str(class_id),
            '--normalize', '--out', str(tmp_path / f'cam_{class_id}.csv'),
        ])
    assert set(codes.values()) <= {EXIT_OK, EXIT_VALIDATION}
    assert EXIT_OK in codes.values()

    class_id = [c for c, code in codes.items() if code == EXIT_OK][0]
    df = pd.read_csv(tmp_path / f'cam_{class_id}.csv')
    assert len(df) == 42
    assert df['value'].min() >= 0
    assert df['value'].max() <= 1

    code = main([
        'explain', '--manifest', str(data_dir / 'manifest.json'),
        '--checkpoint', str(trained / 'checkpoint.pt'),
        '--subset', 'train', '--class_id', str(class_id),
        '--format', 'ply', '--out', str(tmp_path / 'cam.ply'),
    ])
    assert code == EXIT_OK
    assert (tmp_path / 'cam.ply').exists()


@pytest.mark.slow
def test_cv(data_dir, tmp_path):
    code = main(['cv', '--manifest', str(data_dir / 'manifest.json'),
                 '--out_dir', str(tmp_path), '--epochs', '2',
                 '--batch_size', '4', '--n_trials', '2', '--with_mlp',
                 *MODEL_FLAGS])
    assert code == EXIT_OK
    trials = pd.read_csv(tmp_path / 'trials.csv')
    assert trials['trial'].tolist() == [0, 1]
    summary = pd.read_csv(tmp_path / 'summary.csv', index_col='metric')
    assert 'AUC' in summary.index
    assert 'MLPAccuracy' in summary.index
