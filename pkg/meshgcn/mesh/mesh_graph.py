import math
from typing import Sequence, Union

import numpy as np
from scipy.sparse import csgraph

from ..graph import SparseGraph, build_graph
from .triangle_mesh import TriangleMesh


def gaussian_edge_weight(
    distance: Union[float, np.ndarray],
    sigma: float,
) -> Union[float, np.ndarray]:
    """The Gaussian edge weight of two vertices at a given geodesic distance.

    ``e = exp(-(distance / sigma)^2 / 2) / (sigma * sqrt(2 pi))``

    Args:
        distance: The geodesic distance (in mm).
        sigma: The spatial standard deviation (in mm).
    """
    if not sigma > 0:
        raise ValueError(f'sigma should be positive, got {sigma}')
    return (
        np.exp(-0.5 * (np.asarray(distance) / sigma) ** 2)
        / (sigma * math.sqrt(2 * math.pi))
    )


def edge_lengths_graph(mesh: TriangleMesh) -> SparseGraph:
    """Returns the edge graph of the mesh with the Euclidean edge lengths as
    weights.

    Zero-length edges are rejected, because they would vanish from a sparse
    representation and break shortest paths.
    """
    edges = mesh.edges
    lengths = np.linalg.norm(
        mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]], axis=1
    )
    degenerate = np.flatnonzero(lengths == 0)
    if len(degenerate) > 0:
        i, j = edges[degenerate[0]]
        raise ValueError(
            f'Degenerate (zero-length) edge between vertices {i} and {j}'
        )
    return build_graph(
        mesh.n_vertices,
        [(i, j, w) for (i, j), w in zip(edges, lengths)],
    )


def mesh_to_graph(mesh: TriangleMesh, sigma: float) -> SparseGraph:
    """Converts a triangle mesh into a weighted graph.

    Every mesh vertex becomes a graph vertex and every unique mesh edge
    becomes a graph edge, weighted with :func:`gaussian_edge_weight` of the
    edge length. Between two adjacent vertices, the geodesic distance along
    the surface is the length of the straight edge.

    Args:
        mesh: The mesh.
        sigma: The spatial standard deviation (in mm) of the edge weights.

    Returns:
        The weighted graph.
    """
    if not sigma > 0:
        raise ValueError(f'sigma should be positive, got {sigma}')
    lengths = edge_lengths_graph(mesh)
    return build_graph(
        mesh.n_vertices,
        [(i, j, gaussian_edge_weight(w, sigma)) for i, j, w in lengths.edges],
    )


def geodesic_distances(
    lengths: SparseGraph,
    sources: Sequence[int],
) -> np.ndarray:
    """Computes the shortest-path distances from each source to every
    vertex, with Dijkstra's algorithm on the edge lengths.

    Returns:
        A ``len(sources) x N`` array. Unreachable vertices are at infinity.
    """
    sources = np.asarray(sources, dtype=np.int64)
    if len(sources) > 0 and (
        sources.min() < 0 or sources.max() >= lengths.n_vertices
    ):
        raise ValueError('Source vertex out of range')
    dist = csgraph.dijkstra(lengths.adjacency, directed=False,
                            indices=sources)
    return np.atleast_2d(dist)


def geodesic_distance(lengths: SparseGraph, src: int, dst: int) -> float:
    """Computes the geodesic distance between two vertices, approximated by
    the shortest path along the mesh edges.

    Args:
        lengths: The graph with Euclidean edge lengths as weights (see
            :func:`edge_lengths_graph`).
        src: The source vertex.
        dst: The destination vertex.

    Returns:
        The length of the shortest path (in mm).
    """
    if not 0 <= dst < lengths.n_vertices:
        raise ValueError(f'Destination vertex {dst} out of range')
    dist = geodesic_distances(lengths, [src])[0, dst]
    if not np.isfinite(dist):
        raise ValueError(f'Vertex {dst} is unreachable from vertex {src}')
    return float(dist)
