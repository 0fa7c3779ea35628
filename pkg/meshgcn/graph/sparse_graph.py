from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from ..errors import DisconnectedGraphError


Edge = Tuple[int, int, float]

DUPLICATE_TOL = 1e-12


@dataclass(frozen=True)
class SparseGraph:
    """A weighted, undirected graph without self-loops.

    The graph is stored as a symmetric adjacency matrix in CSR format. Vertex
    ids are the dense range ``[0, n_vertices)``. Instances are not meant to be
    modified after construction; use :func:`build_graph` to create one from
    an edge list.

    Attributes:
        n_vertices: The number of vertices.
        adjacency: The symmetric ``n_vertices x n_vertices`` adjacency matrix
            with the (nonnegative) edge weights.
    """
    n_vertices: int
    adjacency: sp.csr_matrix

    @property
    def degrees(self) -> np.ndarray:
        """The weighted degree of each vertex."""
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    @property
    def edges(self) -> List[Edge]:
        """Each undirected edge once, as ``(i, j, w)`` with ``i < j``."""
        upper = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return [
            (int(upper.row[k]), int(upper.col[k]), float(upper.data[k]))
            for k in order
        ]

    @property
    def n_edges(self) -> int:
        return sp.triu(self.adjacency, k=1).nnz

    def subgraph(self, vertices: np.ndarray) -> 'SparseGraph':
        """Returns the subgraph induced by ``vertices``.

        Vertex ``vertices[k]`` of this graph becomes vertex ``k`` of the
        subgraph.
        """
        vertices = np.asarray(vertices, dtype=np.int64)
        adj = self.adjacency[vertices][:, vertices].tocsr()
        return SparseGraph(n_vertices=len(vertices), adjacency=adj)


def build_graph(
    n_vertices: int,
    edge_list: Iterable[Edge],
) -> SparseGraph:
    """Builds a canonical symmetric graph from an edge list.

    Each undirected edge can be given once (in any direction) or twice (once
    per direction). When an edge occurs more than once, all occurences must
    carry the same weight.

    Args:
        n_vertices: The number of vertices of the graph.
        edge_list: The edges as ``(i, j, w)`` triples with nonnegative weight
            ``w``.

    Returns:
        The graph.
    """
    if n_vertices < 0:
        raise ValueError(f'Negative number of vertices: {n_vertices}')

    weights = {}
    for i, j, w in edge_list:
        i, j, w = int(i), int(j), float(w)
        if not (0 <= i < n_vertices and 0 <= j < n_vertices):
            raise ValueError(
                f'Edge ({i}, {j}) out of range for a graph with '
                f'{n_vertices} vertices'
            )
        if i == j:
            raise ValueError(f'Self-loop on vertex {i} is not allowed')
        if not w >= 0:
            raise ValueError(f'Edge ({i}, {j}) has negative weight {w}')

        key = (min(i, j), max(i, j))
        if key in weights and abs(weights[key] - w) > DUPLICATE_TOL:
            raise ValueError(
                f'Conflicting duplicate weights for edge {key}: '
                f'{weights[key]} and {w}'
            )
        weights[key] = w

    if len(weights) == 0:
        adj = sp.csr_matrix((n_vertices, n_vertices), dtype=np.float64)
        return SparseGraph(n_vertices=n_vertices, adjacency=adj)

    rows, cols = np.array(list(weights.keys()), dtype=np.int64).T
    data = np.array(list(weights.values()), dtype=np.float64)
    adj = sp.coo_matrix(
        (np.concatenate([data, data]),
         (np.concatenate([rows, cols]), np.concatenate([cols, rows]))),
        shape=(n_vertices, n_vertices),
    ).tocsr()
    adj.sort_indices()

    return SparseGraph(n_vertices=n_vertices, adjacency=adj)


def graph_from_adjacency(adjacency: sp.spmatrix) -> SparseGraph:
    """Wraps a symmetric sparse adjacency matrix into a
    :class:`SparseGraph`, after validation."""
    coo = sp.coo_matrix(adjacency)
    return build_graph(
        coo.shape[0],
        zip(coo.row, coo.col, coo.data),
    )


def connected_components(g: SparseGraph) -> Tuple[int, np.ndarray]:
    """Returns the number of connected components and the component label
    of each vertex."""
    if g.n_vertices == 0:
        return 0, np.zeros(0, dtype=np.int64)
    n_comp, labels = csgraph.connected_components(g.adjacency,
                                                  directed=False)
    return n_comp, labels


def is_connected(g: SparseGraph) -> bool:
    return connected_components(g)[0] == 1


def check_connected(g: SparseGraph):
    """Raises a :class:`DisconnectedGraphError` when ``g`` has more than one
    connected component."""
    n_comp, _ = connected_components(g)
    if n_comp != 1:
        raise DisconnectedGraphError(n_comp)


def save_edge_list(g: SparseGraph, path: Union[str, Path]):
    """Writes the graph in the plain-text edge-list format.

    The first line holds the number of vertices and the number of undirected
    edges (``N E``). Each of the next ``E`` lines holds one edge as
    ``i j w`` with 0-based indices.
    """
    edges = g.edges
    lines = [f'{g.n_vertices} {len(edges)}']
    lines.extend(f'{i} {j} {w!r}' for i, j, w in edges)
    Path(path).write_text('\n'.join(lines) + '\n')


def load_edge_list(path: Union[str, Path]) -> SparseGraph:
    """Reads a graph written by :func:`save_edge_list`."""
    lines = [
        line.split() for line in Path(path).read_text().splitlines()
        if line.strip()
    ]
    if len(lines) == 0 or len(lines[0]) != 2:
        raise ValueError(f'Missing "N E" header in {path}')

    n_vertices, n_edges = int(lines[0][0]), int(lines[0][1])
    if len(lines) - 1 != n_edges:
        raise ValueError(
            f'Header of {path} announces {n_edges} edges, '
            f'found {len(lines) - 1}'
        )
    edge_list = [(int(i), int(j), float(w)) for i, j, w in lines[1:]]
    return build_graph(n_vertices, edge_list)
