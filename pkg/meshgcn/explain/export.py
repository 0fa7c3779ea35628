from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
import trimesh

from ..mesh import TriangleMesh
from .grad_cam import normalize_cam


MESH_FORMATS = ['ply', 'off']


def export_cam_csv(values: np.ndarray, path: Union[str, Path]):
    """Writes a map as a CSV file with the columns ``vertex_index`` and
    ``value``."""
    df = pd.DataFrame({
        'vertex_index': np.arange(len(values)),
        'value': np.asarray(values, dtype=float),
    })
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)


def export_cam_mesh(
    mesh: TriangleMesh,
    values: np.ndarray,
    path: Union[str, Path],
    normalize: bool = False,
):
    """Writes a mesh with a map as per-vertex data.

    Every vertex gets a gray color proportional to its max-normalized value.
    A PLY file also gets the raw values as a ``value`` vertex property.

    Args:
        mesh: The mesh, with one vertex per value.
        values: The value of each mesh vertex.
        path: The output file, ending on ``.ply`` or ``.off``.
        normalize: If ``True``, the stored values are max-normalized too.
    """
    path = Path(path)
    suffix = path.suffix.lower().lstrip('.')
    if suffix not in MESH_FORMATS:
        raise ValueError(
            f'Unsupported format "{suffix}" for a map. '
            f'Supported formats: {", ".join(MESH_FORMATS)}.'
        )
    values = np.asarray(values, dtype=float)
    if len(values) != mesh.n_vertices:
        raise ValueError(
            f'{len(values)} values do not match a mesh with '
            f'{mesh.n_vertices} vertices'
        )

    scaled = normalize_cam(values)
    if normalize:
        values = scaled
    gray = np.round(255 * scaled).astype(np.uint8)
    colors = np.column_stack([gray, gray, gray, np.full_like(gray, 255)])

    tm = trimesh.Trimesh(vertices=mesh.vertices, faces=mesh.faces,
                         vertex_colors=colors, process=False)
    if suffix == 'ply':
        tm.vertex_attributes['value'] = values
    path.parent.mkdir(parents=True, exist_ok=True)
    tm.export(str(path))
