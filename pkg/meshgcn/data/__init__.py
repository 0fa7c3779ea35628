from .manifest import SubjectRecord, DatasetManifest, save_manifest,\
    load_manifest  # noqa
from .features import hierarchy_features, fit_minmax, minmax_normalize,\
    MinMaxScaler, save_features, load_features, MeshFeatureDataset  # noqa
from .subject_split import split_table, subject_level_split,\
    expected_set_sizes, SETS  # noqa
from .synthetic import generate_synthetic_dataset, patch_vertices,\
    MANIFEST_FILE, HIERARCHY_FILE  # noqa
