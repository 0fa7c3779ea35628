"""Numerical validation suites behind the ``gradcheck`` command.

Every suite returns a DataFrame with one row per check and the columns
``suite``, ``check``, ``value``, ``tol`` and ``passed``. All suites work in
float64.
"""
import logging
from typing import List

import numpy as np
import pandas as pd
import torch
from torch import nn, Tensor

from ..config import ModelConfig
from ..explain import MeshGradCAM, neuron_importance, class_activation_map,\
    upsample_cam
from ..graph import SparseGraph, build_graph, normalized_laplacian,\
    estimate_lambda_max, scale_laplacian, to_torch_sparse,\
    dense_spectral_filter, is_connected
from ..mesh import MeshHierarchy, TriangleMesh, icosphere, build_hierarchy,\
    edge_lengths_graph, mesh_to_graph, geodesic_distances,\
    gaussian_edge_weight, partition_assignment
from ..model import ChebConv, GraphBatchNorm, ResBlock, ResidualGCN,\
    cheb_conv_forward, graph_max_pool, level_laplacians, softmax_bce_loss,\
    finite_difference_check, sample_off_kink


SPECTRAL_TOL = 1e-8
LAYER_TOL = 1e-6
MODEL_TOL = 1e-5
WEIGHT_TOL = 1e-12
DISTANCE_TOL = 1e-9

COLUMNS = ['suite', 'check', 'value', 'tol', 'passed']


def spectral_oracle_suite(
    n_graphs: int = 200,
    max_vertices: int = 64,
    max_order: int = 6,
    n_channels: int = 3,
    seed: int = 0,
) -> pd.DataFrame:
    """Compares the Chebyshev recurrence with filtering in the graph Fourier
    domain on random weighted graphs.

    For each graph, random coefficients are applied per channel with
    :func:`meshgcn.model.cheb_conv_forward` and with
    :func:`meshgcn.graph.dense_spectral_filter`. The check value is the
    maximum absolute difference relative to the largest output magnitude.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_graphs):
        n = int(rng.integers(2, max_vertices + 1))
        g = _random_graph(n, rng)
        lap = normalized_laplacian(g)
        lambda_max = estimate_lambda_max(lap)
        scaled = to_torch_sparse(scale_laplacian(lap, lambda_max),
                                 dtype=torch.float64)

        K = int(rng.integers(1, max_order + 1))
        theta = rng.standard_normal((K, n_channels))
        x = rng.standard_normal((n, n_channels))

        weight = torch.zeros(K, n_channels, n_channels, dtype=torch.float64)
        for k in range(K):
            weight[k] = torch.diag(torch.from_numpy(theta[k]))
        y, _ = cheb_conv_forward(scaled, torch.from_numpy(x), weight)

        expected = np.column_stack([
            dense_spectral_filter(lap, theta[:, f], x[:, f], lambda_max)
            for f in range(n_channels)
        ])
        err = np.abs(y.numpy() - expected).max() / max(
            np.abs(expected).max(), 1.
        )
        rows.append(_row('spectral', f'graph {i} (N={n}, K={K})', err,
                         SPECTRAL_TOL))

    return _frame(rows)


def gradient_suite(seed: int = 0, max_entries: int = 40) -> pd.DataFrame:
    """Finite-difference checks of every differentiable layer and of the
    loss of a small model, with inputs drawn away from kinks and ties."""
    torch.manual_seed(seed)
    rng = np.random.default_rng(seed)
    dtype = torch.float64
    rows = []

    n = 12
    lap = _random_scaled_laplacian(n, rng)

    conv = ChebConv(3, 4, K=3).to(dtype)
    x = torch.randn(2, n, 3, dtype=dtype, requires_grad=True)
    r = torch.randn(2, n, 4, dtype=dtype)
    report = finite_difference_check(
        lambda: (conv(x, lap) * r).sum(), [x, conv.weight, conv.bias],
        tol=LAYER_TOL, name='ChebConv'
    )
    rows.append(_report_row(report))

    bn = GraphBatchNorm(3).to(dtype)
    nn.init.uniform_(bn.weight, 0.5, 1.5)
    nn.init.uniform_(bn.bias, -0.5, 0.5)
    x = torch.randn(4, n, 3, dtype=dtype, requires_grad=True)
    r = torch.randn(4, n, 3, dtype=dtype)
    report = finite_difference_check(
        lambda: (bn(x) * r).sum(), [x, bn.weight, bn.bias],
        tol=LAYER_TOL, name='GraphBatchNorm'
    )
    rows.append(_report_row(report))

    sign = torch.randint(0, 2, (3, n, 2)).to(dtype) * 2 - 1
    x = (sign * (0.1 + torch.rand(3, n, 2, dtype=dtype))).requires_grad_()
    r = torch.randn(3, n, 2, dtype=dtype)
    report = finite_difference_check(
        lambda: (torch.relu(x) * r).sum(), [x], tol=LAYER_TOL, name='ReLU'
    )
    rows.append(_report_row(report))

    # Siblings at least 0.1 apart
    base = torch.randn(3, n // 2, 2, dtype=dtype)
    gap = (0.1 + torch.rand(3, n // 2, 2, dtype=dtype)) \
        * (torch.randint(0, 2, (3, n // 2, 2)).to(dtype) * 2 - 1)
    x = torch.stack([base, base + gap], dim=2).reshape(3, n, 2)
    x.requires_grad_()
    r = torch.randn(3, n // 2, 2, dtype=dtype)
    groups = [(p, 2 * p, 2 * p + 1) for p in range(n // 2)]
    report = finite_difference_check(
        lambda: (graph_max_pool(x, groups) * r).sum(), [x],
        tol=LAYER_TOL, name='GraphMaxPool'
    )
    rows.append(_report_row(report))

    fc = nn.Linear(6, 3).to(dtype)
    x = torch.randn(5, 6, dtype=dtype, requires_grad=True)
    r = torch.randn(5, 3, dtype=dtype)
    report = finite_difference_check(
        lambda: (fc(x) * r).sum(), [x, fc.weight, fc.bias],
        tol=LAYER_TOL, name='Linear'
    )
    rows.append(_report_row(report))

    block = _BlockOnGraph(ResBlock(3, 4, K=3).to(dtype), lap)
    x = sample_off_kink(
        block,
        lambda gen: torch.randn(4, n, 3, dtype=dtype, generator=gen),
        seed=seed,
    ).requires_grad_()
    r = torch.randn(4, n, 4, dtype=dtype)
    report = finite_difference_check(
        lambda: (block(x) * r).sum(), [x] + list(block.parameters()),
        tol=LAYER_TOL, max_entries=max_entries, seed=seed, name='ResBlock'
    )
    rows.append(_report_row(report))

    laplacians = [_random_scaled_laplacian(2 ** level, rng)
                  for level in range(4)]
    config = ModelConfig(kernels_per_conv=4, K=3, n_blocks=2, fc_units=8,
                         post_resblock_units=4, precision='float64')
    model = ResidualGCN(config, laplacians, in_features=3)
    labels = torch.tensor([0, 1, 0, 1])
    x = sample_off_kink(
        model,
        lambda gen: torch.randn(4, 8, 3, dtype=dtype, generator=gen),
        seed=seed,
    )
    report = finite_difference_check(
        lambda: softmax_bce_loss(model(x), labels),
        list(model.parameters()),
        tol=MODEL_TOL, max_entries=max_entries, seed=seed,
        name='ResidualGCN loss'
    )
    rows.append(_report_row(report))

    return _frame(rows)


def hierarchy_suite(
    n_meshes: int = 20,
    subdivisions: int = 2,
    radius: float = 50.,
    noise: float = 0.05,
    max_levels: int = 4,
    sigma: float = 2.,
    stop_distance: float = 2.5,
    seed: int = 0,
) -> pd.DataFrame:
    """Builds hierarchies on randomly perturbed icospheres and checks their
    structure against independent recomputations.

    The checks per mesh are: level sizes ``2^l``, parent maps pairing
    ``2i`` and ``2i + 1``, nonempty and connected partitions at every level,
    level edge weights equal to the Gaussian weight of the geodesic distance
    between the partition centers, and the recorded average neighbor
    distance of every level.
    """
    rng = np.random.default_rng(seed)
    template = icosphere(subdivisions, radius)
    rows = []
    for i in range(n_meshes):
        scale = 1 + noise * rng.uniform(-1, 1, template.n_vertices)
        mesh = template.with_vertices(template.vertices * scale[:, None])
        h = build_hierarchy(mesh, sigma=sigma, stop_distance=stop_distance,
                            max_levels=max_levels)
        rows.extend(_hierarchy_checks(f'mesh {i}', mesh, h))
    return _frame(rows)


def cam_suite(seed: int = 0, n_samples: int = 4) -> pd.DataFrame:
    """Checks the Grad-CAM invariants on a small model.

    The checks are nonnegative maps, a zero map for zero gradients, an
    argmax that does not change when the gradients are scaled by powers of
    two, and upsampled maps that are constant on the descendants of every
    partition.
    """
    torch.manual_seed(seed)
    h = build_hierarchy(icosphere(2, 50.), max_levels=3)
    config = ModelConfig(kernels_per_conv=4, K=3, n_blocks=2, fc_units=8,
                         post_resblock_units=4, precision='float64')
    model = ResidualGCN(config, level_laplacians(h, dtype=torch.float64),
                        in_features=3)
    model.eval()

    rows = []
    with MeshGradCAM(model) as grad_cam:
        for i in range(n_samples):
            x = torch.randn(2 ** h.depth, 3, dtype=torch.float64)
            for class_id in [0, 1]:
                cam = grad_cam(x, class_id)
                name = f'sample {i}, class {class_id}'
                rows.append(_row('cam', f'{name}: min value',
                                 float(cam.values.min()), 0.,
                                 passed=bool(np.all(cam.values >= 0))))

                maps = grad_cam.activations[0]
                grads = grad_cam.gradients[0]
                zero = class_activation_map(
                    neuron_importance(torch.zeros_like(grads)), maps,
                    cam.level, class_id
                )
                rows.append(_row('cam', f'{name}: zero gradients',
                                 float(np.abs(zero.values).max()), 0.,
                                 passed=bool(np.all(zero.values == 0))))

                argmax = int(np.argmax(cam.values))
                same = True
                for scale in [0.5, 2., 4.]:
                    scaled = class_activation_map(
                        neuron_importance(scale * grads), maps, cam.level,
                        class_id
                    )
                    same &= int(np.argmax(scaled.values)) == argmax
                rows.append(_row('cam', f'{name}: argmax under scaling',
                                 float(argmax), 0., passed=bool(same)))

                finest = upsample_cam(cam, h).finest_values
                ancestors = np.arange(2 ** h.depth) >> (h.depth - cam.level)
                constant = bool(np.all(finest == cam.values[ancestors]))
                rows.append(_row('cam', f'{name}: constant on descendants',
                                 0. if constant else 1., 0.,
                                 passed=constant))

    return _frame(rows)


def run_suites(names: List[str], seed: int = 0) -> pd.DataFrame:
    """Runs the named suites (``'spectral'``, ``'gradient'``,
    ``'hierarchy'``, ``'cam'``) and concatenates their results."""
    suites = {
        'spectral': spectral_oracle_suite,
        'gradient': gradient_suite,
        'hierarchy': hierarchy_suite,
        'cam': cam_suite,
    }
    unknown = set(names) - set(suites)
    if len(unknown) > 0:
        raise ValueError(
            f'Unknown suites: {", ".join(sorted(unknown))}. '
            f'Possible values: {", ".join(suites)}.'
        )
    frames = []
    for name in names:
        df = suites[name](seed=seed)
        logging.info(
            f'Suite {name}: {int(df["passed"].sum())} of {len(df)} checks '
            'passed'
        )
        frames.append(df)
    return pd.concat(frames, ignore_index=True)


class _BlockOnGraph(nn.Module):
    def __init__(self, block: ResBlock, laplacian: Tensor):
        super().__init__()
        self.block = block
        self.laplacian = laplacian

    def forward(self, x: Tensor) -> Tensor:
        return self.block(x, self.laplacian)


def _hierarchy_checks(
    name: str,
    mesh: TriangleMesh,
    h: MeshHierarchy,
) -> List[dict]:
    rows = []
    sizes_ok = h.level_sizes == [2 ** level for level in range(h.depth + 1)]
    rows.append(_row('hierarchy', f'{name}: level sizes', float(h.depth), 0.,
                     passed=sizes_ok))

    parents_ok = all(
        np.array_equal(h.parent_maps[level], np.arange(2 ** level) // 2)
        for level in range(1, h.depth + 1)
    )
    rows.append(_row('hierarchy', f'{name}: parent maps', 0., 0.,
                     passed=parents_ok))

    weights = mesh_to_graph(mesh, h.sigma)
    lengths = edge_lengths_graph(mesh)
    edges = mesh.edges

    parts_ok = True
    max_weight_err, max_dist_err = 0., 0.
    for level in range(h.depth + 1):
        membership = partition_assignment(h, level).membership
        for p in range(2 ** level):
            verts = np.flatnonzero(membership == p)
            parts_ok &= len(verts) > 0 and is_connected(
                weights.subgraph(verts)
            )

        pairs = membership[edges]
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        pairs = np.unique(np.sort(pairs, axis=1), axis=0)
        expected = np.zeros((2 ** level, 2 ** level))
        if len(pairs) > 0:
            centers = h.centers[level]
            dist = geodesic_distances(lengths, centers[pairs[:, 0]])
            pair_dist = dist[np.arange(len(pairs)), centers[pairs[:, 1]]]
            w = gaussian_edge_weight(pair_dist, h.sigma)
            expected[pairs[:, 0], pairs[:, 1]] = w
            expected[pairs[:, 1], pairs[:, 0]] = w
            max_dist_err = max(
                max_dist_err,
                abs(pair_dist.mean() - h.neighbor_distances[level]),
            )
        actual = h.levels[level].adjacency.toarray()
        max_weight_err = max(max_weight_err,
                             float(np.abs(actual - expected).max()))

    rows.append(_row('hierarchy', f'{name}: connected partitions', 0., 0.,
                     passed=bool(parts_ok)))
    rows.append(_row('hierarchy', f'{name}: edge weights', max_weight_err,
                     WEIGHT_TOL))
    rows.append(_row('hierarchy', f'{name}: neighbor distances',
                     max_dist_err, DISTANCE_TOL))
    return rows


def _random_graph(n: int, rng: np.random.Generator) -> SparseGraph:
    """A random connected graph: a random path plus random extra edges."""
    order = rng.permutation(n)
    edges = {(min(a, b), max(a, b)) for a, b in zip(order[:-1], order[1:])}
    n_extra = int(rng.integers(0, 2 * n + 1))
    for _ in range(n_extra):
        a, b = rng.integers(0, n, 2)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    return build_graph(n, [(a, b, rng.uniform(0.1, 2.)) for a, b in edges])


def _random_scaled_laplacian(n: int, rng: np.random.Generator) -> Tensor:
    lap = normalized_laplacian(_random_graph(n, rng) if n > 1
                               else build_graph(1, []))
    lambda_max = estimate_lambda_max(lap)
    return to_torch_sparse(scale_laplacian(lap, lambda_max),
                           dtype=torch.float64)


def _row(suite, check, value, tol, passed=None) -> dict:
    if passed is None:
        passed = bool(value <= tol)
    return {'suite': suite, 'check': check, 'value': float(value),
            'tol': float(tol), 'passed': bool(passed)}


def _report_row(report) -> dict:
    return _row('gradient', report.name, report.max_rel_error, report.tol,
                passed=report.passed)


def _frame(rows: List[dict]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=COLUMNS)
