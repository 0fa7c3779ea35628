import pytest
import torch

from meshgcn.graph import build_graph, normalized_laplacian, scale_laplacian,\
    to_torch_sparse


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: mark test as slow to run")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return

    skip_slow = pytest.mark.skip(reason="need --runslow option to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def ring_laplacians(depth, dtype=torch.float64):
    """Scaled Laplacians of rings with 1, 2, ..., 2^depth vertices, with
    ``lambda_max = 2``."""
    laplacians = []
    for level in range(depth + 1):
        n = 2 ** level
        edges = [(i, (i + 1) % n, 1.0) for i in range(n) if n > 1]
        lap = normalized_laplacian(build_graph(n, edges))
        laplacians.append(to_torch_sparse(scale_laplacian(lap, 2.0), dtype))
    return laplacians


@pytest.fixture
def make_laplacians():
    return ring_laplacians
