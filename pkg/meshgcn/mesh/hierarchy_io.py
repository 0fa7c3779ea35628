import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from ..graph import build_graph
from .hierarchy import MeshHierarchy


HIERARCHY_FORMAT_VERSION = 1


def hierarchy_to_dict(h: MeshHierarchy) -> dict:
    """Converts a hierarchy into a JSON-serializable dict.

    Edge weights are stored as Python floats, which JSON writes with the
    shortest representation that reads back to the same 64-bit value.
    """
    return {
        'version': HIERARCHY_FORMAT_VERSION,
        'sigma': h.sigma,
        'structure_sizes': list(h.structure_sizes),
        'membership': h.membership.tolist(),
        'levels': [
            {
                'n_vertices': graph.n_vertices,
                'edges': [[i, j, w] for i, j, w in graph.edges],
                'parents': parents.tolist(),
                'centers': centers.tolist(),
                'neighbor_distance': (None if math.isnan(dist) else dist),
            }
            for graph, parents, centers, dist in zip(
                h.levels, h.parent_maps, h.centers, h.neighbor_distances
            )
        ],
    }


def hierarchy_from_dict(d: dict) -> MeshHierarchy:
    """Inverse of :func:`hierarchy_to_dict`."""
    version = d.get('version')
    if version != HIERARCHY_FORMAT_VERSION:
        raise ValueError(f'Unsupported hierarchy format version {version}')

    levels = d['levels']
    return MeshHierarchy(
        levels=[build_graph(lvl['n_vertices'], lvl['edges'])
                for lvl in levels],
        parent_maps=[np.array(lvl['parents'], dtype=np.int64)
                     for lvl in levels],
        centers=[np.array(lvl['centers'], dtype=np.int64) for lvl in levels],
        membership=np.array(d['membership'], dtype=np.int64),
        sigma=float(d['sigma']),
        neighbor_distances=[
            math.nan if lvl['neighbor_distance'] is None
            else float(lvl['neighbor_distance'])
            for lvl in levels
        ],
        structure_sizes=[int(s) for s in d['structure_sizes']],
    )


def save_hierarchy(h: MeshHierarchy, path: Union[str, Path]):
    """Writes a hierarchy to a JSON file."""
    Path(path).write_text(json.dumps(hierarchy_to_dict(h)))


def load_hierarchy(path: Union[str, Path]) -> MeshHierarchy:
    """Reads a hierarchy from a JSON file written by
    :func:`save_hierarchy`."""
    return hierarchy_from_dict(json.loads(Path(path).read_text()))
