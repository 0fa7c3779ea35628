from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import torch
from torch import Tensor
from torch.utils.data import Dataset

from ..mesh import MeshHierarchy


def hierarchy_features(
    h: MeshHierarchy,
    surfaces: Sequence[Sequence[np.ndarray]],
) -> Tuple[Tensor, Tensor]:
    """Builds the finest-level features of a scan.

    Each finest-level partition is represented by its center vertex. Its
    features are the coordinates of that vertex in every surface of its
    structure (x, y and z per surface). The feature columns of the
    structures are block-diagonalized: a partition only has values in the
    columns of its own structure, the other columns are padding.

    Args:
        h: The (composed) hierarchy.
        surfaces: For each structure, in composition order, the vertex
            coordinates (``n_vertices x 3``) of each of its surfaces.

    Returns:
        The features (``N x F``) and the padding mask (``N x F``, ``True``
        for padded entries).
    """
    if len(surfaces) != len(h.structure_sizes):
        raise ValueError(
            f'Got surfaces for {len(surfaces)} structures, the hierarchy has '
            f'{len(h.structure_sizes)}'
        )
    for s, (structure, size) in enumerate(zip(surfaces, h.structure_sizes)):
        if len(structure) == 0:
            raise ValueError(f'Structure {s} has no surfaces')
        for surface in structure:
            if np.shape(surface) != (size, 3):
                raise ValueError(
                    f'Surface of structure {s} has shape '
                    f'{np.shape(surface)}, expected ({size}, 3)'
                )

    vertex_offsets = np.cumsum([0] + list(h.structure_sizes))
    col_offsets = np.cumsum([0] + [3 * len(s) for s in surfaces])
    n_features = int(col_offsets[-1])

    centers = h.centers[h.depth]
    structure_of = np.searchsorted(vertex_offsets, centers, side='right') - 1

    features = np.zeros((len(centers), n_features))
    mask = np.ones((len(centers), n_features), dtype=bool)
    for s, structure in enumerate(surfaces):
        rows = np.flatnonzero(structure_of == s)
        local = centers[rows] - vertex_offsets[s]
        cols = slice(col_offsets[s], col_offsets[s + 1])
        features[rows, cols] = np.hstack([
            np.asarray(surface)[local] for surface in structure
        ])
        mask[rows, cols] = False

    return torch.from_numpy(features), torch.from_numpy(mask)


def fit_minmax(
    features: Tensor,
    mask: Optional[Tensor] = None,
) -> Tuple[Tensor, Tensor]:
    """Computes the minimum and maximum of each feature over the unpadded
    entries.

    Args:
        features: The features of the samples, of shape ``S x N x F``.
        mask: The padding mask, of shape ``N x F`` or ``S x N x F``.

    Returns:
        The minimum and maximum of each of the ``F`` features.
    """
    if mask is None:
        mask = torch.zeros(features.shape[-2:], dtype=torch.bool)
    mask = mask.expand_as(features)
    flat = features.reshape(-1, features.shape[-1])
    flat_mask = mask.reshape(-1, features.shape[-1])

    empty = (~flat_mask).sum(dim=0) == 0
    if empty.any():
        raise ValueError(
            f'Features {torch.nonzero(empty).flatten().tolist()} have no '
            'unpadded entries'
        )

    fmin = flat.masked_fill(flat_mask, float('inf')).min(dim=0)[0]
    fmax = flat.masked_fill(flat_mask, float('-inf')).max(dim=0)[0]
    return fmin, fmax


def minmax_normalize(
    features: Tensor,
    fmin: Tensor,
    fmax: Tensor,
    mask: Optional[Tensor] = None,
) -> Tensor:
    """Maps each feature affinely from ``[fmin, fmax]`` to ``[-1, 1]``.

    A feature with ``fmin == fmax`` maps to 0. Padded entries stay 0.
    """
    span = fmax - fmin
    degenerate = span == 0
    scaled = 2 * (features - fmin) / torch.where(degenerate,
                                                 torch.ones_like(span),
                                                 span) - 1
    scaled = torch.where(degenerate, torch.zeros_like(scaled), scaled)
    if mask is not None:
        scaled = scaled.masked_fill(mask.expand_as(scaled), 0.)
    return scaled


@dataclass(frozen=True)
class MinMaxScaler:
    """A min-max normalization fitted on a training set.

    Attributes:
        fmin: The minimum of each feature.
        fmax: The maximum of each feature.
        mask: The padding mask (``N x F``).
    """
    fmin: Tensor
    fmax: Tensor
    mask: Optional[Tensor] = None

    @classmethod
    def fit(cls, features: Tensor, mask: Optional[Tensor] = None):
        fmin, fmax = fit_minmax(features, mask)
        return cls(fmin=fmin, fmax=fmax, mask=mask)

    def __call__(self, features: Tensor) -> Tensor:
        return minmax_normalize(features, self.fmin, self.fmax, self.mask)

    def state_dict(self) -> Dict[str, Optional[Tensor]]:
        return {'fmin': self.fmin, 'fmax': self.fmax, 'mask': self.mask}

    @classmethod
    def from_state_dict(cls, d: Dict[str, Optional[Tensor]]):
        return cls(fmin=d['fmin'], fmax=d['fmax'], mask=d.get('mask'))


def save_features(features: Tensor, mask: Tensor, path: Union[str, Path]):
    """Writes the features and the padding mask of a scan."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    torch.save({'features': features, 'mask': mask}, path)


def load_features(path: Union[str, Path]) -> Tuple[Tensor, Tensor]:
    """Reads the features and the padding mask of a scan."""
    d = torch.load(path, map_location='cpu')
    return d['features'], d['mask']


class MeshFeatureDataset(Dataset):
    """A dataset of scans based on a pandas DataFrame.

    The provided DataFrame contains the feature file of each scan and the
    corresponding label. All features are loaded in memory.

    Args:
        df: The DataFrame with the feature files and labels.
        root: The directory the feature files are relative to.
        feature_key: The column with the feature file of each scan.
        label_key: The column with the label (0 or 1) of each scan.
        transform: A transform to apply to the features before returning
            them, such as a fitted :class:`MinMaxScaler`.

    Attributes:
        df: The DataFrame with the feature files and labels.
        features: The features of all scans, of shape ``S x N x F``.
        labels: The label of each scan.
        mask: The padding mask shared by all scans (``N x F``).
        transform: The transform applied to the features.
    """
    def __init__(
        self,
        df: pd.DataFrame,
        root: Union[str, Path] = '.',
        feature_key: str = 'feature_file',
        label_key: str = 'label',
        transform: Optional[Callable] = None,
    ):
        self.df = df.reset_index(drop=True)
        self.transform = transform

        feats: List[Tensor] = []
        mask = None
        for path in self.df[feature_key]:
            x, m = load_features(Path(root) / path)
            if mask is not None and not torch.equal(mask, m):
                raise ValueError(
                    f'{path} has another padding mask than the other scans'
                )
            feats.append(x)
            mask = m

        if len(feats) > 0:
            self.features = torch.stack(feats)
        else:
            self.features = torch.zeros(0)
        self.labels = torch.as_tensor(self.df[label_key].values,
                                      dtype=torch.long)
        self.mask = mask

    @classmethod
    def from_tensors(
        cls,
        features: Tensor,
        labels: Tensor,
        mask: Optional[Tensor] = None,
        transform: Optional[Callable] = None,
    ) -> 'MeshFeatureDataset':
        """Creates a dataset from features that are already in memory."""
        ds = cls.__new__(cls)
        ds.df = pd.DataFrame({'label': labels.tolist()})
        ds.features = features
        ds.labels = labels.long()
        ds.mask = mask
        ds.transform = transform
        return ds

    def transformed_features(self) -> Tensor:
        """Returns the features of all scans after the transform."""
        if self.transform is None:
            return self.features
        return self.transform(self.features)

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, idx):
        x = self.features[idx]
        if self.transform is not None:
            x = self.transform(x)
        return x, self.labels[idx]
