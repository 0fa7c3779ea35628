import math

import numpy as np
import pytest

from meshgcn.errors import SingletonPartitionError
from meshgcn.graph import is_connected
from meshgcn.mesh import TriangleMesh, build_hierarchy, compose_hierarchies,\
    pooling_groups, partition_assignment, level_of, upsample_to_finest,\
    upsample_to_mesh, icosphere, mesh_to_graph, save_hierarchy,\
    load_hierarchy


@pytest.fixture(scope='module')
def sphere():
    return icosphere(subdivisions=2, radius=10.0)


@pytest.fixture(scope='module')
def h(sphere):
    return build_hierarchy(sphere, sigma=2.0, stop_distance=1e-6,
                           max_levels=3)


def test_level_sizes(h):
    assert h.depth == 3
    assert h.level_sizes == [1, 2, 4, 8]


def test_parent_maps(h):
    assert len(h.parent_maps[0]) == 0
    for level in range(1, h.depth + 1):
        exp = np.arange(2 ** level) // 2
        assert (h.parent_maps[level] == exp).all()


def test_partitions_connected(sphere, h):
    g = mesh_to_graph(sphere, sigma=2.0)
    for level in range(h.depth + 1):
        membership = partition_assignment(h, level).membership
        assert set(membership) == set(range(2 ** level))
        for p in range(2 ** level):
            part = np.flatnonzero(membership == p)
            assert len(part) > 1
            assert is_connected(g.subgraph(part))


def test_children_split_parent(h):
    parent = partition_assignment(h, 1).membership
    child = partition_assignment(h, 2).membership
    assert (child // 2 == parent).all()


def test_centers_inside_partitions(h):
    for level in range(h.depth + 1):
        membership = partition_assignment(h, level).membership
        centers = h.centers[level]
        assert (membership[centers] == np.arange(2 ** level)).all()


def test_root_has_no_neighbors(h):
    assert h.levels[0].n_edges == 0
    assert math.isnan(h.neighbor_distances[0])
    assert h.levels[1].edges[0][:2] == (0, 1)


def test_stop_distance(sphere):
    h = build_hierarchy(sphere, sigma=2.0, stop_distance=100.0,
                        max_levels=5)
    assert h.depth == 1
    assert h.neighbor_distances[1] < 100.0


def test_singleton_partition():
    mesh = TriangleMesh(vertices=[[0, 0, 0], [1, 0, 0], [0, 1, 0]],
                        faces=[[0, 1, 2]])
    with pytest.raises(SingletonPartitionError):
        build_hierarchy(mesh, sigma=2.0, stop_distance=1e-9, max_levels=2)


def test_pooling_groups(h):
    assert pooling_groups(h, 1) == [(0, 0, 1)]
    groups = pooling_groups(h, 3)
    assert [(c0, c1) for _, c0, c1 in groups] == [
        (0, 1), (2, 3), (4, 5), (6, 7)
    ]
    with pytest.raises(ValueError):
        pooling_groups(h, 0)


def test_level_of(h):
    assert level_of(h, 1) == 0
    assert level_of(h, 8) == 3
    with pytest.raises(ValueError):
        level_of(h, 3)
    with pytest.raises(ValueError):
        level_of(h, 16)


def test_upsample_finest_identity(h):
    values = np.arange(8.0)
    assert (upsample_to_finest(h, values) == values).all()


def test_upsample_root(h):
    assert (upsample_to_finest(h, np.array([7.0])) == 7.0).all()


def test_upsample_level_one(h):
    ret = upsample_to_finest(h, np.array([1.0, 2.0]))
    assert ret.tolist() == [1.0] * 4 + [2.0] * 4


def test_upsample_to_mesh(h):
    values = np.array([1.0, 2.0, 3.0, 4.0])
    ret = upsample_to_mesh(h, values)
    exp = values[partition_assignment(h, 2).membership]
    assert ret.shape == (h.n_mesh_vertices,)
    assert (ret == exp).all()


def test_compose(h):
    composed = compose_hierarchies([h, h])
    assert composed.depth == h.depth + 1
    assert composed.level_sizes == [1, 2, 4, 8, 16]
    assert composed.levels[1].n_edges == 0
    assert (composed.centers[0] == -1).all()
    assert composed.structure_sizes == [h.n_mesh_vertices] * 2

    n = h.n_mesh_vertices
    assert (composed.membership[:n] == h.membership).all()
    assert (composed.membership[n:] == h.membership + 8).all()
    assert (composed.centers[4][8:] == h.centers[3] + n).all()

    finest = composed.levels[-1].adjacency.toarray()
    assert (finest[:8, 8:] == 0).all()
    assert np.allclose(finest[8:, 8:], h.levels[-1].adjacency.toarray())


def test_compose_not_power_of_two(h):
    with pytest.raises(ValueError):
        compose_hierarchies([h, h, h])


def test_compose_different_depths(sphere, h):
    other = build_hierarchy(sphere, sigma=2.0, stop_distance=1e-6,
                            max_levels=2)
    with pytest.raises(ValueError):
        compose_hierarchies([h, other])


def test_save_load(tmp_path, h):
    path = tmp_path / 'hierarchy.json'
    save_hierarchy(h, path)
    loaded = load_hierarchy(path)

    assert loaded.level_sizes == h.level_sizes
    assert loaded.sigma == h.sigma
    assert (loaded.membership == h.membership).all()
    for g, g2 in zip(h.levels, loaded.levels):
        assert g.edges == g2.edges
    for c, c2 in zip(h.centers, loaded.centers):
        assert (c == c2).all()
    assert math.isnan(loaded.neighbor_distances[0])
