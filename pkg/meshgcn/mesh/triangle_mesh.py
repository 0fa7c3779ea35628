from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import trimesh

from ..graph import build_graph, check_connected


SUPPORTED_FORMATS = ['off', 'obj']


@dataclass(frozen=True)
class TriangleMesh:
    """A triangulated surface.

    Attributes:
        vertices: ``V x 3`` array with the vertex positions (in mm).
        faces: ``F x 3`` array with the vertex indices of each triangle.
    """
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=np.float64)
        faces = np.asarray(self.faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ValueError(
                f'Vertices should have shape V x 3, got {vertices.shape}'
            )
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError(
                f'Faces should have shape F x 3, got {faces.shape}'
            )
        if faces.size > 0:
            if faces.min() < 0 or faces.max() >= len(vertices):
                raise ValueError('Faces reference vertices out of range')
            degenerate = (
                (faces[:, 0] == faces[:, 1])
                | (faces[:, 1] == faces[:, 2])
                | (faces[:, 0] == faces[:, 2])
            )
            if degenerate.any():
                bad = int(np.flatnonzero(degenerate)[0])
                raise ValueError(
                    f'Face {bad} {faces[bad].tolist()} does not reference '
                    'three distinct vertices'
                )
        object.__setattr__(self, 'vertices', vertices)
        object.__setattr__(self, 'faces', faces)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def edges(self) -> np.ndarray:
        """The unique undirected edges as an ``E x 2`` array with
        ``i < j``, sorted lexicographically."""
        pairs = np.concatenate([
            self.faces[:, [0, 1]],
            self.faces[:, [1, 2]],
            self.faces[:, [2, 0]],
        ])
        pairs = np.sort(pairs, axis=1)
        return np.unique(pairs, axis=0)

    def with_vertices(self, vertices: np.ndarray) -> 'TriangleMesh':
        """Returns a mesh with the same triangulation and other vertex
        positions."""
        return TriangleMesh(vertices=vertices, faces=self.faces)


def check_mesh_connected(mesh: TriangleMesh):
    """Raises a :class:`DisconnectedGraphError` if the edge graph of the
    mesh has more than one connected component."""
    g = build_graph(mesh.n_vertices,
                    [(i, j, 1.0) for i, j in mesh.edges])
    check_connected(g)


def load_mesh(path: Union[str, Path]) -> TriangleMesh:
    """Loads a triangle mesh from an OFF or OBJ file.

    Vertices are kept in file order and are not merged. The edge graph of the
    mesh should be connected.
    """
    path = Path(path)
    suffix = path.suffix.lower().lstrip('.')
    if suffix not in SUPPORTED_FORMATS:
        raise ValueError(
            f'Unsupported mesh format "{suffix}". '
            f'Supported formats: {", ".join(SUPPORTED_FORMATS)}.'
        )
    tm = trimesh.load(path, force='mesh', process=False,
                      maintain_order=True)
    mesh = TriangleMesh(vertices=np.asarray(tm.vertices),
                        faces=np.asarray(tm.faces))
    check_mesh_connected(mesh)
    return mesh


def save_mesh(mesh: TriangleMesh, path: Union[str, Path]):
    """Writes a mesh to a file. The format follows from the suffix."""
    tm = trimesh.Trimesh(vertices=mesh.vertices, faces=mesh.faces,
                         process=False)
    tm.export(str(path))


def icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriangleMesh:
    """Creates an icosphere, i.e. a subdivided icosahedron projected on a
    sphere.

    With ``subdivisions = 3``, the sphere has 642 vertices.
    """
    tm = trimesh.creation.icosphere(subdivisions=subdivisions,
                                    radius=radius)
    return TriangleMesh(vertices=np.asarray(tm.vertices),
                        faces=np.asarray(tm.faces))
