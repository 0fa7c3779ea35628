from .grad_cam import ClassActivationMap, MeshGradCAM, neuron_importance,\
    class_activation_map, upsample_cam, normalize_cam, average_tp_cam  # noqa
from .export import export_cam_csv, export_cam_mesh  # noqa
