from .sparse_graph import SparseGraph, build_graph, graph_from_adjacency,\
    connected_components, is_connected, check_connected, save_edge_list,\
    load_edge_list  # noqa
from .laplacian import NormalizedLaplacian, normalized_laplacian,\
    estimate_lambda_max, scale_laplacian, to_torch_sparse  # noqa
from .spectral import dense_spectral_filter, fiedler_vector  # noqa
from .block_diag import block_diagonalize  # noqa
