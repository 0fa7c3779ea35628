from typing import List, Tuple

import numpy as np
import scipy.sparse as sp

from .sparse_graph import SparseGraph


def block_diagonalize(
    graphs: List[SparseGraph],
) -> Tuple[SparseGraph, np.ndarray]:
    """Composes several graphs into one graph with multiple connected
    components.

    The vertices of ``graphs[k]`` are offset by the total number of vertices
    of ``graphs[:k]``. No edges are added between the components, so the
    Laplacian of the result is the block-diagonal composition of the
    individual Laplacians.

    Args:
        graphs: The graphs to compose, in order.

    Returns:
        A tuple with the composed graph and the index of the input graph that
        each vertex of the composed graph comes from.
    """
    if len(graphs) == 0:
        raise ValueError('Cannot block-diagonalize an empty list of graphs')

    adj = sp.block_diag([g.adjacency for g in graphs], format='csr',
                        dtype=np.float64)
    adj.sort_indices()
    membership = np.concatenate([
        np.full(g.n_vertices, k, dtype=np.int64)
        for k, g in enumerate(graphs)
    ])
    n_vertices = sum(g.n_vertices for g in graphs)

    return SparseGraph(n_vertices=n_vertices, adjacency=adj), membership
