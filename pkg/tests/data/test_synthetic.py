import numpy as np
import torch

from meshgcn.config import SyntheticSpec
from meshgcn.data import generate_synthetic_dataset, load_manifest,\
    load_features, patch_vertices, MANIFEST_FILE, HIERARCHY_FILE
from meshgcn.mesh import load_hierarchy, load_mesh, icosphere


SPEC = SyntheticSpec(n_subjects=4, scans_per_subject=2, subdivisions=1,
                     max_levels=2, seed=3)


def test_files(tmp_path):
    manifest = generate_synthetic_dataset(SPEC, tmp_path)

    assert (tmp_path / MANIFEST_FILE).exists()
    assert len(manifest.records) == 8
    assert manifest.n_features == 3
    assert manifest.structures == ['cortex']

    loaded = load_manifest(tmp_path / MANIFEST_FILE)
    assert loaded.records == manifest.records

    h = load_hierarchy(tmp_path / HIERARCHY_FILE)
    assert h.level_sizes == [1, 2, 4]

    template = load_mesh(tmp_path / manifest.template_files[0])
    assert template.n_vertices == 42

    record = manifest.records[0]
    features, mask = load_features(tmp_path / record.feature_file)
    assert features.shape == (4, 3)
    mesh = load_mesh(tmp_path / record.mesh_files[0])
    assert np.allclose(features.numpy(), mesh.vertices[h.centers[-1]])


def test_balanced_subjects(tmp_path):
    manifest = generate_synthetic_dataset(SPEC, tmp_path)
    df = manifest.to_frame()
    labels = df.groupby('subject_id')['label'].first()
    assert sorted(labels) == [0, 0, 1, 1]
    assert (df.groupby('subject_id').size() == 2).all()


def test_same_seed_identical(tmp_path):
    a = generate_synthetic_dataset(SPEC, tmp_path / 'a')
    b = generate_synthetic_dataset(SPEC, tmp_path / 'b')
    assert a.records == b.records
    for r in a.records:
        fa, _ = load_features(tmp_path / 'a' / r.feature_file)
        fb, _ = load_features(tmp_path / 'b' / r.feature_file)
        assert torch.equal(fa, fb)


def test_dent(tmp_path):
    spec = SyntheticSpec(n_subjects=2, scans_per_subject=1, subdivisions=2,
                         max_levels=2, scan_noise=0., scale_jitter=0.,
                         center_jitter=0., patch_depth=8.)
    manifest = generate_synthetic_dataset(spec, tmp_path)
    patch = manifest.patch_vertices
    assert len(patch) > 0

    for r in manifest.records:
        mesh = load_mesh(tmp_path / r.mesh_files[0])
        radii = np.linalg.norm(mesh.vertices, axis=1)
        outside = np.setdiff1d(np.arange(mesh.n_vertices), patch)
        assert np.allclose(radii[outside], spec.radius)
        if r.label == 1:
            assert radii.min() < spec.radius - 1.
            assert radii.min() >= spec.radius - 8. - 1e-6
        else:
            assert np.allclose(radii, spec.radius)


def test_patch_vertices():
    template = icosphere(subdivisions=2, radius=50.)
    spec = SyntheticSpec(patch_direction=(0., 0., 1.), patch_radius=0.5)
    patch = patch_vertices(template, spec)
    angles = np.arccos(template.vertices[patch, 2] / 50.)
    assert (angles <= 0.5 + 1e-12).all()


def test_two_surfaces(tmp_path):
    spec = SyntheticSpec(n_subjects=2, scans_per_subject=1, subdivisions=1,
                         max_levels=2, two_surfaces=True, scan_noise=0.,
                         scale_jitter=0.)
    manifest = generate_synthetic_dataset(spec, tmp_path)
    assert manifest.n_features == 6

    record = manifest.records[0]
    assert len(record.mesh_files) == 2
    features, _ = load_features(tmp_path / record.feature_file)
    outer = np.linalg.norm(features[:, :3].numpy(), axis=1)
    inner = np.linalg.norm(features[:, 3:].numpy(), axis=1)
    assert np.allclose(outer - inner, spec.thickness)


def test_subcortical(tmp_path):
    spec = SyntheticSpec(n_subjects=2, scans_per_subject=1, subdivisions=1,
                         max_levels=2, with_subcortical=True)
    manifest = generate_synthetic_dataset(spec, tmp_path)
    assert manifest.structures == ['cortex', 'subcortical']
    assert len(manifest.template_files) == 2
    assert manifest.n_features == 6

    h = load_hierarchy(tmp_path / HIERARCHY_FILE)
    assert h.level_sizes == [1, 2, 4, 8]
    assert h.structure_sizes == [42, 42]

    _, mask = load_features(tmp_path / manifest.records[0].feature_file)
    assert mask[:4, 3:].all()
    assert mask[4:, :3].all()


def test_per_subject_dent(tmp_path):
    spec = SyntheticSpec(n_subjects=6, scans_per_subject=1, subdivisions=2,
                         max_levels=2, scan_noise=0., scale_jitter=0.,
                         center_jitter=6., patch_depth=8., seed=4)
    manifest = generate_synthetic_dataset(spec, tmp_path)
    template = load_mesh(tmp_path / manifest.template_files[0])

    patches = []
    for r in manifest.records:
        radii = np.linalg.norm(load_mesh(tmp_path / r.mesh_files[0]).vertices,
                               axis=1)
        dented = np.flatnonzero(radii < spec.radius - 1e-6)
        if r.label == 0:
            assert r.patch_vertices == ()
            continue
        patch = np.array(r.patch_vertices)
        assert len(patch) > 0
        assert np.isin(dented, patch).all()
        outside = np.setdiff1d(np.arange(template.n_vertices), patch)
        assert np.allclose(radii[outside], spec.radius)
        patches.append(set(r.patch_vertices))

    assert manifest.patch_vertices == sorted(set.union(*patches))
    loaded = load_manifest(tmp_path / MANIFEST_FILE)
    assert loaded.records == manifest.records
