import json
import logging
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import pandas as pd


MANIFEST_FORMAT_VERSION = 1
RECORD_COLUMNS = ['subject_id', 'scan_id', 'label', 'feature_file']


@dataclass(frozen=True)
class SubjectRecord:
    """A single scan of a subject.

    Attributes:
        subject_id: The identifier of the subject.
        scan_id: The identifier of the scan, unique within the subject.
        label: 0 for a control, 1 for a positive subject.
        feature_file: The file with the finest-level features of the scan,
            relative to the manifest directory.
        mesh_files: The surface meshes of the scan, relative to the manifest
            directory.
        patch_vertices: The template vertices of the subject's dent, for a
            synthetic positive subject. Empty otherwise.
    """
    subject_id: str
    scan_id: str
    label: int
    feature_file: str
    mesh_files: Tuple[str, ...] = ()
    patch_vertices: Tuple[int, ...] = ()


@dataclass
class DatasetManifest:
    """The description of a dataset of mesh scans.

    Attributes:
        records: The scans.
        hierarchy_file: The hierarchy shared by all scans, relative to
            ``root``.
        n_features: The number of features per vertex.
        structures: The names of the structures, in composition order.
        template_files: A template mesh per structure, relative to ``root``.
        provenance: The generator parameters, for a synthetic dataset.
        patch_vertices: The union of the per-subject dents, for a synthetic
            dataset.
        root: The directory of the manifest.
    """
    records: List[SubjectRecord]
    hierarchy_file: str
    n_features: int
    structures: List[str] = field(default_factory=list)
    template_files: List[str] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)
    patch_vertices: Optional[List[int]] = None
    root: Path = Path('.')

    def __post_init__(self):
        keys = [(r.subject_id, r.scan_id) for r in self.records]
        if len(set(keys)) != len(keys):
            raise ValueError('(subject_id, scan_id) pairs should be unique')
        bad = [r for r in self.records if r.label not in [0, 1]]
        if len(bad) > 0:
            raise ValueError(
                f'Labels should be 0 or 1, got {bad[0].label} for subject '
                f'{bad[0].subject_id}'
            )

    def resolve(self, path: str) -> Path:
        return self.root / path

    def to_frame(self) -> pd.DataFrame:
        """Returns the records as a DataFrame with the columns
        ``subject_id``, ``scan_id``, ``label`` and ``feature_file``."""
        return pd.DataFrame(
            [[r.subject_id, r.scan_id, r.label, r.feature_file]
             for r in self.records],
            columns=RECORD_COLUMNS,
        )

    def patch_union(
        self,
        subject_ids: Optional[Iterable[str]] = None,
    ) -> List[int]:
        """Returns the sorted union of the per-subject dents.

        Args:
            subject_ids: The subjects to include. If ``None``, include all
                subjects.
        """
        wanted = None if subject_ids is None else set(subject_ids)
        vertices = set()
        for r in self.records:
            if wanted is None or r.subject_id in wanted:
                vertices.update(r.patch_vertices)
        return sorted(vertices)


def save_manifest(manifest: DatasetManifest, path: Union[str, Path]):
    """Writes a manifest as JSON. File paths stay relative to the manifest
    directory."""
    d = {
        'format_version': MANIFEST_FORMAT_VERSION,
        'hierarchy_file': manifest.hierarchy_file,
        'n_features': manifest.n_features,
        'structures': manifest.structures,
        'template_files': manifest.template_files,
        'provenance': manifest.provenance,
        'patch_vertices': manifest.patch_vertices,
        'records': [
            {**asdict(r), 'mesh_files': list(r.mesh_files),
             'patch_vertices': list(r.patch_vertices)}
            for r in manifest.records
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(d, indent=2))
    logging.info(f'Wrote a manifest with {len(manifest.records)} records to '
                 f'{path}')


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """Reads a manifest written by :func:`save_manifest`."""
    path = Path(path)
    d = json.loads(path.read_text())
    if d.get('format_version') != MANIFEST_FORMAT_VERSION:
        raise ValueError(
            f'Unsupported manifest format version {d.get("format_version")}'
        )
    records = [
        SubjectRecord(
            subject_id=str(r['subject_id']),
            scan_id=str(r['scan_id']),
            label=int(r['label']),
            feature_file=r['feature_file'],
            mesh_files=tuple(r.get('mesh_files', [])),
            patch_vertices=tuple(
                int(v) for v in r.get('patch_vertices', [])
            ),
        )
        for r in d['records']
    ]
    return DatasetManifest(
        records=records,
        hierarchy_file=d['hierarchy_file'],
        n_features=int(d['n_features']),
        structures=list(d.get('structures', [])),
        template_files=list(d.get('template_files', [])),
        provenance=d.get('provenance', {}),
        patch_vertices=d.get('patch_vertices'),
        root=path.parent,
    )
