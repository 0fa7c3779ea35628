import numpy as np
import pytest
import scipy.sparse as sp

from meshgcn.graph import build_graph, block_diagonalize,\
    normalized_laplacian


def test_two_edges():
    k2 = build_graph(2, [(0, 1, 1.0)])
    g, membership = block_diagonalize([k2, k2])
    assert g.n_vertices == 4
    assert g.edges == [(0, 1, 1.0), (2, 3, 1.0)]
    assert list(membership) == [0, 0, 1, 1]


def test_single_graph():
    tri = build_graph(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])
    g, _ = block_diagonalize([tri])
    assert g.edges == tri.edges


def test_laplacian_is_block_diagonal():
    rng = np.random.RandomState(0)
    cortex = build_graph(
        12, [(i, (i + 1) % 12, rng.uniform(0.1, 1)) for i in range(12)]
        + [(0, 6, 0.5)]
    )
    sub = build_graph(4, [(0, 1, 1.0), (1, 2, 0.2), (2, 3, 0.7)])
    g, _ = block_diagonalize([cortex, sub])

    exp = sp.block_diag([normalized_laplacian(cortex).matrix,
                         normalized_laplacian(sub).matrix]).toarray()
    ret = normalized_laplacian(g).dense()
    assert g.n_vertices == 16
    assert np.allclose(ret, exp)


def test_empty_list():
    with pytest.raises(ValueError):
        block_diagonalize([])
