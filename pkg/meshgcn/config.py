import json
from dataclasses import dataclass, fields, asdict, replace
from pathlib import Path
from typing import Any, Dict, Optional, Type, TypeVar, Union

import torch

from .errors import ConfigError


LAMBDA_MAX_MODES = ['computed', 'fixed']
PRECISIONS = {'float32': torch.float32, 'float64': torch.float64}
HEADS = ['softmax']


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of the residual GCN.

    Attributes:
        kernels_per_conv: The number of filters of each convolution in the
            ResBlocks before the post-ResBlock.
        K: The number of Chebyshev terms of each graph convolution.
        pool_size: The pooling window. Must equal the branching factor of the
            hierarchy (2).
        n_blocks: The number of alternating ResBlock and pooling layers.
        fc_units: The number of units of the fully connected layer.
        post_resblock_units: The number of output channels of the
            post-ResBlock.
        bias_enabled: If ``True``, the graph convolutions have a bias.
        precision: The working precision, ``'float32'`` or ``'float64'``.
        head: The classification head. Only the two-logit ``'softmax'`` head
            is supported.
        lambda_max_mode: ``'computed'`` to estimate the largest eigenvalue of
            each level Laplacian, ``'fixed'`` to use 2.
    """
    kernels_per_conv: int = 16
    K: int = 3
    pool_size: int = 2
    n_blocks: int = 4
    fc_units: int = 128
    post_resblock_units: int = 128
    bias_enabled: bool = True
    precision: str = 'float32'
    head: str = 'softmax'
    lambda_max_mode: str = 'computed'

    def __post_init__(self):
        _check_positive(self, ['kernels_per_conv', 'K', 'fc_units',
                               'post_resblock_units'])
        if self.pool_size != 2:
            raise ConfigError(
                'pool_size must equal the branching factor of the '
                f'hierarchy (2), got {self.pool_size}'
            )
        if self.n_blocks < 0:
            raise ConfigError(f'n_blocks should be >= 0, got {self.n_blocks}')
        _check_choice(self, 'precision', list(PRECISIONS))
        _check_choice(self, 'head', HEADS)
        _check_choice(self, 'lambda_max_mode', LAMBDA_MAX_MODES)

    @property
    def dtype(self) -> torch.dtype:
        return PRECISIONS[self.precision]


@dataclass(frozen=True)
class TrainConfig:
    """Optimization settings.

    Attributes:
        batch_size: The number of samples per step.
        epochs: The number of epochs.
        lr: The initial learning rate of Adam.
        lr_decay: The factor with which the learning rate is multiplied after
            each epoch.
        beta1: Adam's first-moment decay.
        beta2: Adam's second-moment decay.
        eps: Adam's epsilon.
        seed: The seed for parameter initialization and shuffling.
        num_threads: If positive, the number of threads torch may use. Use 1
            for bitwise reproducible runs.
    """
    batch_size: int = 32
    epochs: int = 100
    lr: float = 5e-4
    lr_decay: float = 0.999
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    num_threads: int = 0

    def __post_init__(self):
        _check_positive(self, ['batch_size', 'lr', 'eps'])
        if self.epochs < 0:
            raise ConfigError(f'epochs should be >= 0, got {self.epochs}')
        if not 0 < self.lr_decay <= 1:
            raise ConfigError(
                f'lr_decay should be in (0, 1], got {self.lr_decay}'
            )
        for name in ['beta1', 'beta2']:
            if not 0 <= getattr(self, name) < 1:
                raise ConfigError(f'{name} should be in [0, 1)')


@dataclass(frozen=True)
class SplitSpec:
    """The Monte Carlo cross-validation protocol.

    Attributes:
        test_fraction: The fraction of subjects in the test set.
        val_fraction_of_remaining: The fraction of the remaining subjects in
            the validation set.
        n_trials: The number of Monte Carlo trials.
        seed: The base seed. Trial ``t`` uses ``seed + t``.
        label_tolerance: The maximum deviation of the label proportion of
            each set from the global proportion.
        max_retries: The number of draws before accepting a split that is
            out of tolerance.
    """
    test_fraction: float = 0.2
    val_fraction_of_remaining: float = 0.2
    n_trials: int = 25
    seed: int = 0
    label_tolerance: float = 0.05
    max_retries: int = 100

    def __post_init__(self):
        for name in ['test_fraction', 'val_fraction_of_remaining']:
            if not 0 < getattr(self, name) < 1:
                raise ConfigError(f'{name} should be in (0, 1)')
        _check_positive(self, ['n_trials', 'max_retries'])
        if not self.label_tolerance >= 0:
            raise ConfigError('label_tolerance should be >= 0')


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of the synthetic mesh dataset.

    Every subject has an icosphere "cortex". Subjects of class 1 get an
    inward radial dent around a patch center near ``patch_direction``.

    Attributes:
        n_subjects: The number of subjects (half of them in each class).
        scans_per_subject: The number of scans of each subject.
        subdivisions: The subdivisions of the icosphere template.
        radius: The radius of the template (mm).
        patch_radius: The radius of the dent as a fraction of ``radius``.
        patch_depth: The depth of the dent at its center (mm).
        patch_direction: The direction of the patch center on the template.
        center_jitter: The standard deviation (mm) of the per-subject
            displacement of the patch center along the surface.
        scale_jitter: The standard deviation of the per-subject, per-axis
            scale factor around 1.
        scan_noise: The standard deviation (mm) of the per-scan vertex
            noise.
        two_surfaces: If ``True``, each structure has an outer and an inner
            surface, giving 6 features per vertex.
        thickness: The distance (mm) between the outer and inner surface.
        with_subcortical: If ``True``, add a second, smaller structure whose
            hierarchy is composed with that of the cortex.
        subcortical_radius: The radius (mm) of the second structure.
        sigma: The spatial standard deviation (mm) of the edge weights.
        stop_distance: The stop distance (mm) of the hierarchy builder.
        max_levels: The maximum depth of each structure's hierarchy.
        seed: The seed of the generator.
    """
    n_subjects: int = 60
    scans_per_subject: int = 3
    subdivisions: int = 3
    radius: float = 50.0
    patch_radius: float = 0.5
    patch_depth: float = 8.0
    patch_direction: tuple = (0.0, 0.0, 1.0)
    center_jitter: float = 2.0
    scale_jitter: float = 0.02
    scan_noise: float = 0.3
    two_surfaces: bool = False
    thickness: float = 3.0
    with_subcortical: bool = False
    subcortical_radius: float = 20.0
    sigma: float = 2.0
    stop_distance: float = 2.5
    max_levels: int = 6
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'patch_direction',
                           tuple(float(v) for v in self.patch_direction))
        _check_positive(self, ['scans_per_subject', 'radius', 'sigma',
                               'stop_distance', 'subcortical_radius'])
        if self.n_subjects < 2 or self.n_subjects % 2 != 0:
            raise ConfigError(
                'n_subjects should be an even number >= 2, got '
                f'{self.n_subjects}'
            )
        for name in ['patch_radius', 'patch_depth', 'center_jitter',
                     'scale_jitter', 'scan_noise', 'thickness']:
            if not getattr(self, name) >= 0:
                raise ConfigError(f'{name} should be >= 0')
        if len(self.patch_direction) != 3 or not any(self.patch_direction):
            raise ConfigError('patch_direction should be a nonzero 3-vector')
        if self.thickness >= self.radius:
            raise ConfigError('thickness should be smaller than radius')


T = TypeVar('T')

SECTIONS = {
    'model': ModelConfig,
    'train': TrainConfig,
    'split': SplitSpec,
    'synthetic': SyntheticSpec,
}


def config_from_dict(cls: Type[T], d: Optional[Dict[str, Any]]) -> T:
    """Creates a config dataclass from a dict, rejecting unknown keys."""
    d = d or {}
    known = {f.name for f in fields(cls)}
    unknown = set(d) - known
    if len(unknown) > 0:
        raise ConfigError(
            f'Unknown {cls.__name__} fields: {", ".join(sorted(unknown))}'
        )
    try:
        return cls(**d)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def config_to_dict(config) -> Dict[str, Any]:
    d = asdict(config)
    for k, v in d.items():
        if isinstance(v, tuple):
            d[k] = list(v)
    return d


def override(config: T, overrides: Dict[str, Any]) -> T:
    """Returns a copy of ``config`` with the given fields replaced. Fields
    with a ``None`` value are ignored."""
    known = {f.name for f in fields(config)}
    changes = {
        k: v for k, v in overrides.items()
        if k in known and v is not None
    }
    try:
        return replace(config, **changes)
    except TypeError as e:
        raise ConfigError(str(e)) from e


def load_config(path: Optional[Union[str, Path]]) -> Dict[str, Any]:
    """Loads a JSON config file with the sections ``'model'``,
    ``'train'``, ``'split'`` and ``'synthetic'``.

    Missing sections (or a missing file, when ``path`` is ``None``) get the
    defaults.

    Returns:
        A dict with one config dataclass per section.
    """
    raw = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f'Invalid JSON in {path}: {e}') from e
        if not isinstance(raw, dict):
            raise ConfigError(f'{path} should contain a JSON object')

    unknown = set(raw) - set(SECTIONS)
    if len(unknown) > 0:
        raise ConfigError(
            f'Unknown config sections: {", ".join(sorted(unknown))}'
        )
    return {
        name: config_from_dict(cls, raw.get(name))
        for name, cls in SECTIONS.items()
    }


def _check_positive(config, names):
    for name in names:
        if not getattr(config, name) > 0:
            raise ConfigError(
                f'{name} should be positive, got {getattr(config, name)}'
            )


def _check_choice(config, name, choices):
    if getattr(config, name) not in choices:
        raise ConfigError(
            f'Unknown {name} "{getattr(config, name)}". '
            f'Possible values: {", ".join(choices)}.'
        )
