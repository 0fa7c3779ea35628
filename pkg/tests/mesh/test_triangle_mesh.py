import numpy as np
import pytest

from meshgcn.errors import DisconnectedGraphError
from meshgcn.mesh import TriangleMesh, load_mesh, save_mesh, icosphere,\
    check_mesh_connected


def test_icosphere_size():
    mesh = icosphere(subdivisions=3, radius=50.0)
    assert mesh.n_vertices == 642
    assert np.allclose(np.linalg.norm(mesh.vertices, axis=1), 50.0)


def test_edges():
    mesh = TriangleMesh(
        vertices=np.eye(4, 3),
        faces=[[0, 1, 2], [2, 1, 3]],
    )
    assert mesh.edges.tolist() == [[0, 1], [0, 2], [1, 2], [1, 3], [2, 3]]


def test_degenerate_face():
    with pytest.raises(ValueError):
        TriangleMesh(vertices=np.eye(3), faces=[[0, 1, 1]])


def test_face_out_of_range():
    with pytest.raises(ValueError):
        TriangleMesh(vertices=np.eye(3), faces=[[0, 1, 3]])


def test_with_vertices():
    mesh = icosphere(subdivisions=1)
    moved = mesh.with_vertices(2 * mesh.vertices)
    assert (moved.faces == mesh.faces).all()
    assert np.allclose(moved.vertices, 2 * mesh.vertices)


def test_save_load_keeps_order(tmp_path):
    mesh = icosphere(subdivisions=2, radius=10.0)
    path = tmp_path / 'sphere.off'
    save_mesh(mesh, path)
    loaded = load_mesh(path)
    assert (loaded.faces == mesh.faces).all()
    assert np.allclose(loaded.vertices, mesh.vertices)


def test_disconnected_mesh(tmp_path):
    vertices = np.concatenate([np.eye(3), np.eye(3) + 5])
    mesh = TriangleMesh(vertices=vertices, faces=[[0, 1, 2], [3, 4, 5]])
    with pytest.raises(DisconnectedGraphError):
        check_mesh_connected(mesh)

    path = tmp_path / 'two.off'
    save_mesh(mesh, path)
    with pytest.raises(DisconnectedGraphError):
        load_mesh(path)


def test_unsupported_format(tmp_path):
    with pytest.raises(ValueError):
        load_mesh(tmp_path / 'mesh.stl')
