import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from ..config import SyntheticSpec, config_to_dict
from ..mesh import TriangleMesh, MeshHierarchy, icosphere, build_hierarchy,\
    compose_hierarchies, save_hierarchy, save_mesh
from .features import hierarchy_features, save_features
from .manifest import DatasetManifest, SubjectRecord, save_manifest


MANIFEST_FILE = 'manifest.json'
HIERARCHY_FILE = 'hierarchy.json'


def patch_vertices(
    template: TriangleMesh,
    spec: SyntheticSpec,
    center: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Returns the template vertices within the dent around ``center`` (an
    arc of ``patch_radius * radius`` on the sphere). The center defaults to
    ``patch_direction``."""
    if center is None:
        center = spec.patch_direction
    return np.flatnonzero(
        _angle_to(template.vertices, _unit(center)) <= spec.patch_radius
    )


def generate_synthetic_dataset(
    spec: SyntheticSpec,
    out_dir: Union[str, Path],
) -> DatasetManifest:
    """Generates a dataset of sphere "cortices", half of them with a dent.

    All subjects share an icosphere template and its hierarchy. Each subject
    gets a random per-axis scale. The subjects of class 1 also get an inward
    radial dent with a smooth (raised cosine) profile around a patch center
    that is jittered per subject. Every scan of a subject adds independent
    vertex noise to the subject's shape, so the scans of a subject are more
    alike than those of different subjects.

    With ``two_surfaces``, each scan has an inner surface ``thickness`` mm
    below the outer one. With ``with_subcortical``, each scan has a second,
    smaller sphere without signal whose hierarchy is composed with the
    cortex hierarchy.

    Each record of a positive subject lists the template vertices of its
    own dent, and the manifest lists their union.

    The directory gets the manifest, the hierarchy, the template meshes,
    a feature file per scan and the meshes of every scan.

    Args:
        spec: The generator parameters.
        out_dir: The output directory.

    Returns:
        The manifest of the dataset.
    """
    out_dir = Path(out_dir)
    rng = np.random.default_rng(spec.seed)

    cortex = icosphere(spec.subdivisions, spec.radius)
    templates = [cortex]
    structures = ['cortex']
    if spec.with_subcortical:
        templates.append(icosphere(spec.subdivisions,
                                   spec.subcortical_radius))
        structures.append('subcortical')

    h = _build_hierarchy(templates, spec)
    save_hierarchy(h, out_dir / HIERARCHY_FILE)
    template_files = []
    for name, template in zip(structures, templates):
        template_files.append(f'template_{name}.off')
        save_mesh(template, out_dir / template_files[-1])

    labels = rng.permutation(np.arange(spec.n_subjects) % 2)
    records: List[SubjectRecord] = []
    for s in tqdm(range(spec.n_subjects), leave=False, desc='Subjects'):
        subject_id = f'sub-{s:03d}'
        label = int(labels[s])
        radii, patch = _subject_radii(cortex, spec, label, rng)
        if len(patch) > 0:
            logging.debug(f'Subject {subject_id}: the dent covers '
                          f'{len(patch)} of {cortex.n_vertices} vertices')
        scales = [1 + spec.scale_jitter * rng.standard_normal(3)
                  for _ in templates]

        for k in range(spec.scans_per_subject):
            scan_id = f'scan-{k}'
            surfaces, mesh_files = [], []

            names = ['outer', 'inner'] if spec.two_surfaces else ['outer']
            cortex_surfaces = []
            for name in names:
                r = radii if name == 'outer' else radii - spec.thickness
                verts = _noisy(_unit_rows(cortex.vertices) * r[:, None]
                               * scales[0], spec, rng)
                cortex_surfaces.append(verts)
                mesh_files.append(f'meshes/{subject_id}_{scan_id}_cortex_'
                                  f'{name}.off')
                save_mesh(cortex.with_vertices(verts),
                          out_dir / mesh_files[-1])
            surfaces.append(cortex_surfaces)

            if spec.with_subcortical:
                verts = _noisy(templates[1].vertices * scales[1], spec, rng)
                surfaces.append([verts])
                mesh_files.append(f'meshes/{subject_id}_{scan_id}_'
                                  'subcortical.off')
                save_mesh(templates[1].with_vertices(verts),
                          out_dir / mesh_files[-1])

            features, mask = hierarchy_features(h, surfaces)
            feature_file = f'features/{subject_id}_{scan_id}.pt'
            save_features(features, mask, out_dir / feature_file)

            records.append(SubjectRecord(
                subject_id=subject_id,
                scan_id=scan_id,
                label=label,
                feature_file=feature_file,
                mesh_files=tuple(mesh_files),
                patch_vertices=tuple(int(v) for v in patch),
            ))

    manifest = DatasetManifest(
        records=records,
        hierarchy_file=HIERARCHY_FILE,
        n_features=int(features.shape[1]),
        structures=structures,
        template_files=template_files,
        provenance={'generator': 'synthetic', **config_to_dict(spec)},
        root=out_dir,
    )
    manifest.patch_vertices = manifest.patch_union()
    save_manifest(manifest, out_dir / MANIFEST_FILE)
    return manifest


def _build_hierarchy(
    templates: List[TriangleMesh],
    spec: SyntheticSpec,
) -> MeshHierarchy:
    hierarchies = [
        build_hierarchy(t, sigma=spec.sigma, stop_distance=spec.stop_distance,
                        max_levels=spec.max_levels)
        for t in templates
    ]
    return compose_hierarchies(hierarchies)


def _subject_radii(
    template: TriangleMesh,
    spec: SyntheticSpec,
    label: int,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """The radius of every template vertex for one subject, and the template
    vertices of the subject's dent (empty without a dent)."""
    radii = np.full(template.n_vertices, spec.radius)
    # Drawn for every subject, also in class 0
    center = _jitter_direction(_unit(spec.patch_direction),
                               spec.center_jitter / spec.radius, rng)
    if label != 1 or spec.patch_depth == 0 or spec.patch_radius == 0:
        return radii, np.array([], dtype=np.int64)

    t = _angle_to(template.vertices, center) / spec.patch_radius
    profile = np.where(t < 1, 0.5 * (1 + np.cos(np.pi * t)), 0.)
    radii = radii - spec.patch_depth * profile
    return radii, patch_vertices(template, spec, center)


def _noisy(
    vertices: np.ndarray,
    spec: SyntheticSpec,
    rng: np.random.Generator,
) -> np.ndarray:
    return vertices + spec.scan_noise * rng.standard_normal(vertices.shape)


def _jitter_direction(
    direction: np.ndarray,
    angle_std: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Moves a unit vector along the sphere by a random tangent step."""
    step = angle_std * rng.standard_normal(3)
    step -= np.dot(step, direction) * direction
    return _unit(direction + step)


def _angle_to(vertices: np.ndarray, direction: np.ndarray) -> np.ndarray:
    cos = _unit_rows(vertices) @ direction
    return np.arccos(np.clip(cos, -1., 1.))


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _unit_rows(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=1, keepdims=True)
