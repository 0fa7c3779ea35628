from .triangle_mesh import TriangleMesh, load_mesh, save_mesh, icosphere,\
    check_mesh_connected  # noqa
from .mesh_graph import gaussian_edge_weight, edge_lengths_graph,\
    mesh_to_graph, geodesic_distance, geodesic_distances  # noqa
from .bipartition import bipartition  # noqa
from .hierarchy import MeshHierarchy, PartitionAssignment, build_hierarchy,\
    compose_hierarchies, pooling_groups, partition_assignment,\
    level_of, upsample_to_finest, upsample_to_mesh  # noqa
from .hierarchy_io import save_hierarchy, load_hierarchy,\
    hierarchy_to_dict, hierarchy_from_dict  # noqa
