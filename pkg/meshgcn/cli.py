"""Command line interface of meshgcn.

Every command reads an optional JSON config file (``--config``) with the
sections ``model``, ``train``, ``split`` and ``synthetic``. Each config
field can be overridden with a flag of the same name, e.g.
``--kernels_per_conv 16``. A flag whose name occurs in several sections of
a command (like ``--seed``) overrides all of them.

Exit codes: 0 on success, 1 when a validation failed or the data is
invalid, 2 for I/O and configuration errors.
"""
import argparse
import json
import logging
import sys
from dataclasses import fields, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from .config import SECTIONS, SplitSpec, config_from_dict, config_to_dict,\
    load_config, override
from .data import MeshFeatureDataset, generate_synthetic_dataset,\
    load_manifest
from .errors import ConfigError
from .eval import audit_splits, evaluate_gcn, monte_carlo_cv, run_suites,\
    trial_datasets, train_gcn
from .explain import average_tp_cam, export_cam_csv, export_cam_mesh,\
    normalize_cam
from .mesh import build_hierarchy, compose_hierarchies, load_hierarchy,\
    load_mesh, save_hierarchy, upsample_to_mesh
from .model import level_laplacians, load_checkpoint, model_from_checkpoint,\
    save_checkpoint


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2

SUITES = ['spectral', 'gradient', 'hierarchy', 'cam']


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level.upper()),
        format='%(asctime)s %(levelname)s %(message)s',
    )

    try:
        configs = _configs(args)
        return args.func(args, configs)
    except ConfigError as e:
        logging.error(f'Invalid configuration: {e}')
        return EXIT_IO
    except json.JSONDecodeError as e:
        logging.error(f'Invalid JSON: {e}')
        return EXIT_IO
    except OSError as e:
        logging.error(str(e))
        return EXIT_IO
    except ValueError as e:
        logging.error(str(e))
        return EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='meshgcn',
        description='Residual spectral graph convolutional networks for '
        'mesh classification.',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    p = _add_command(subparsers, 'generate', cmd_generate, ['synthetic'],
                     'Generate a synthetic dataset.')
    p.add_argument('--out_dir', required=True)

    p = _add_command(subparsers, 'hierarchy', cmd_hierarchy, ['synthetic'],
                     'Build the hierarchy of one or more structures. Uses '
                     'sigma, stop_distance and max_levels.')
    p.add_argument('--mesh', nargs='+', required=True,
                   help='One mesh per structure (OFF or OBJ).')
    p.add_argument('--out', required=True, help='Output JSON file.')

    p = _add_command(subparsers, 'train', cmd_train,
                     ['model', 'train', 'split'],
                     'Train a model on one trial of the split protocol.')
    p.add_argument('--manifest', required=True)
    p.add_argument('--out_dir', required=True)
    p.add_argument('--trial', type=int, default=0)

    p = _add_command(subparsers, 'evaluate', cmd_evaluate, [],
                     'Evaluate a checkpoint on a subset of its trial.')
    p.add_argument('--manifest', required=True)
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--subset', choices=['train', 'val', 'test'],
                   default='test')
    p.add_argument('--out', help='Output CSV file.')

    p = _add_command(subparsers, 'cv', cmd_cv, ['model', 'train', 'split'],
                     'Run the Monte Carlo cross-validation.')
    p.add_argument('--manifest', required=True)
    p.add_argument('--out_dir', required=True)
    p.add_argument('--with_mlp', action='store_true',
                   help='Also evaluate the MLP baseline.')

    p = _add_command(subparsers, 'explain', cmd_explain, [],
                     'Export the average Grad-CAM of the true positives.')
    p.add_argument('--manifest', required=True)
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--subset', choices=['train', 'val', 'test'],
                   default='test')
    p.add_argument('--class_id', type=int, choices=[0, 1], default=1)
    p.add_argument('--format', choices=['csv', 'ply', 'off'], default='csv')
    p.add_argument('--normalize', action='store_true',
                   help='Scale the map to [0, 1] before export.')
    p.add_argument('--out', required=True,
                   help='Output file. Mesh formats get one file per '
                   'structure.')

    p = _add_command(subparsers, 'gradcheck', cmd_gradcheck, [],
                     'Run the numerical validation suites.')
    p.add_argument('--suites', nargs='+', choices=SUITES, default=SUITES)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', help='Output CSV file.')

    p = _add_command(subparsers, 'audit', cmd_audit, ['split'],
                     'Audit the subject-level splits of all trials.')
    p.add_argument('--manifest', required=True)
    p.add_argument('--out', help='Output CSV file.')

    return parser


def cmd_generate(args, configs) -> int:
    manifest = generate_synthetic_dataset(configs['synthetic'], args.out_dir)
    logging.info(f'Generated {len(manifest.records)} scans in '
                 f'{args.out_dir}')
    return EXIT_OK


def cmd_hierarchy(args, configs) -> int:
    spec = configs['synthetic']
    hierarchies = [
        build_hierarchy(load_mesh(path), sigma=spec.sigma,
                        stop_distance=spec.stop_distance,
                        max_levels=spec.max_levels)
        for path in args.mesh
    ]
    h = compose_hierarchies(hierarchies)
    save_hierarchy(h, args.out)
    logging.info(f'Level sizes: {h.level_sizes}')
    return EXIT_OK


def cmd_train(args, configs) -> int:
    manifest = load_manifest(args.manifest)
    h = load_hierarchy(manifest.resolve(manifest.hierarchy_file))
    model_config, split = configs['model'], configs['split']
    train_config = replace(configs['train'],
                           seed=configs['train'].seed + args.trial)

    ds = MeshFeatureDataset(manifest.to_frame(), root=manifest.root)
    data = trial_datasets(ds, split, args.trial)
    laplacians = level_laplacians(h, model_config.lambda_max_mode,
                                  model_config.dtype)
    result = train_gcn(data, laplacians, model_config, train_config)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result.history.to_csv(out_dir / 'history.csv', index=False)
    save_checkpoint(
        out_dir / 'checkpoint.pt', result.model,
        in_features=ds.features.shape[-1],
        train_config=train_config,
        optimizer=result.optimizer,
        scheduler=result.scheduler,
        epoch=result.best_epoch,
        extra={'trial': args.trial, 'split': config_to_dict(split)},
    )
    return EXIT_OK


def cmd_evaluate(args, configs) -> int:
    model, data = _load_trial_model(args)
    metrics = evaluate_gcn(model, getattr(data, args.subset))
    df = pd.DataFrame([metrics])
    logging.info('\n' + df.to_string(index=False))
    if args.out is not None:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(args.out, index=False)
    return EXIT_OK


def cmd_cv(args, configs) -> int:
    manifest = load_manifest(args.manifest)
    h = load_hierarchy(manifest.resolve(manifest.hierarchy_file))
    trials, summary = monte_carlo_cv(
        manifest, h, configs['model'], configs['train'], configs['split'],
        with_mlp=args.with_mlp,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    trials.to_csv(out_dir / 'trials.csv', index=False)
    summary.to_csv(out_dir / 'summary.csv', index_label='metric')
    logging.info('\n' + summary.to_string())
    return EXIT_OK


def cmd_explain(args, configs) -> int:
    manifest = load_manifest(args.manifest)
    h = load_hierarchy(manifest.resolve(manifest.hierarchy_file))
    model, data = _load_trial_model(args, manifest=manifest, h=h)

    cam = average_tp_cam(model, h, getattr(data, args.subset),
                         class_id=args.class_id)
    values = upsample_to_mesh(h, cam.finest_values)
    if args.normalize:
        values = normalize_cam(values)

    out = Path(args.out)
    if args.format == 'csv':
        export_cam_csv(values, out)
        return EXIT_OK

    offsets = np.cumsum([0] + list(h.structure_sizes))
    for s, template_file in enumerate(manifest.template_files):
        path = out if len(manifest.template_files) == 1 else \
            out.with_name(f'{out.stem}_{manifest.structures[s]}{out.suffix}')
        export_cam_mesh(load_mesh(manifest.resolve(template_file)),
                        values[offsets[s]:offsets[s + 1]],
                        path.with_suffix(f'.{args.format}'))
    return EXIT_OK


def cmd_gradcheck(args, configs) -> int:
    df = run_suites(args.suites, seed=args.seed)
    if args.out is not None:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(args.out, index=False)
    failed = df[~df['passed']]
    for _, row in failed.iterrows():
        logging.error(
            f'{row["suite"]}: {row["check"]} failed '
            f'(value {row["value"]:.3e}, tol {row["tol"]:.1e})'
        )
    return EXIT_OK if len(failed) == 0 else EXIT_VALIDATION


def cmd_audit(args, configs) -> int:
    manifest = load_manifest(args.manifest)
    df = audit_splits(manifest.to_frame(), configs['split'])
    if args.out is not None:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(args.out, index=False)
    return EXIT_OK if df['passed'].all() else EXIT_VALIDATION


def _load_trial_model(args, manifest=None, h=None):
    """Loads the model of a checkpoint and the datasets of its trial."""
    if manifest is None:
        manifest = load_manifest(args.manifest)
    if h is None:
        h = load_hierarchy(manifest.resolve(manifest.hierarchy_file))
    checkpoint = load_checkpoint(args.checkpoint)
    model, _ = model_from_checkpoint(checkpoint, h)

    extra = checkpoint['extra']
    split = config_from_dict(SplitSpec, extra['split'])
    ds = MeshFeatureDataset(manifest.to_frame(), root=manifest.root)
    return model, trial_datasets(ds, split, extra['trial'])


def _add_command(subparsers, name, func, sections, help_text):
    p = subparsers.add_parser(name, help=help_text, description=help_text)
    p.set_defaults(func=func, sections=sections)
    p.add_argument('--config', help='JSON config file.')
    p.add_argument('--log_level', default='info',
                   choices=['debug', 'info', 'warning', 'error'])

    added = set()
    for section in sections:
        for f in fields(SECTIONS[section]):
            if f.name in added:
                continue
            added.add(f.name)
            p.add_argument(f'--{f.name}', **_flag_kwargs(f.default))
    return p


def _flag_kwargs(default) -> Dict:
    if isinstance(default, bool):
        return {'type': _str2bool, 'default': None, 'metavar': 'BOOL'}
    if isinstance(default, tuple):
        return {'type': float, 'nargs': len(default), 'default': None}
    return {'type': type(default), 'default': None}


def _str2bool(s: str) -> bool:
    if s.lower() in ['1', 'true', 'yes']:
        return True
    if s.lower() in ['0', 'false', 'no']:
        return False
    raise argparse.ArgumentTypeError(f'Expected a boolean, got "{s}"')


def _configs(args) -> Dict:
    configs = load_config(args.config)
    overrides = vars(args)
    return {
        name: override(config, overrides) if name in args.sections
        else config
        for name, config in configs.items()
    }


if __name__ == '__main__':
    sys.exit(main())
