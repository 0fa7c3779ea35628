from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import torch
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ..errors import ConvergenceError
from .sparse_graph import SparseGraph


MAX_LANCZOS_ITER = 10_000
DENSE_MAX_VERTICES = 256
LANCZOS_NCV = 40


@dataclass(frozen=True)
class NormalizedLaplacian:
    """The normalized Laplacian ``L = I - D^{-1/2} A D^{-1/2}`` of a graph.

    Attributes:
        n_vertices: The number of vertices.
        matrix: The sparse symmetric Laplacian in CSR format.
        lambda_max: The largest eigenvalue, if it is already known.
    """
    n_vertices: int
    matrix: sp.csr_matrix
    lambda_max: Optional[float] = None

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


def normalized_laplacian(g: SparseGraph) -> NormalizedLaplacian:
    """Computes the normalized graph Laplacian.

    Isolated vertices (degree 0) get a zero entry in ``D^{-1/2}``, so their
    row of the Laplacian equals the corresponding row of the identity.

    Args:
        g: The graph.

    Returns:
        The normalized Laplacian of ``g``.
    """
    degrees = g.degrees
    inv_sqrt = np.zeros_like(degrees)
    nonzero = degrees > 0
    inv_sqrt[nonzero] = 1.0 / np.sqrt(degrees[nonzero])

    d_inv_sqrt = sp.diags(inv_sqrt)
    norm_adj = d_inv_sqrt @ g.adjacency @ d_inv_sqrt
    lap = sp.identity(g.n_vertices, dtype=np.float64, format='csr') \
        - norm_adj
    lap = sp.csr_matrix(lap)
    lap.sort_indices()

    return NormalizedLaplacian(n_vertices=g.n_vertices, matrix=lap)


def estimate_lambda_max(
    laplacian: NormalizedLaplacian,
    tol: float = 1e-6,
    max_iter: int = MAX_LANCZOS_ITER,
) -> float:
    """Estimates the largest eigenvalue of a normalized Laplacian.

    Graphs with up to 256 vertices use a dense eigendecomposition. Larger
    graphs use implicitly restarted Lanczos (``eigsh``), a Krylov-accelerated
    power iteration, which stops once the residual ``||L v - rho v||`` is at
    most ``tol * rho``. For a symmetric matrix that bounds the relative error
    of the estimate by ``tol``, also when the spectral gap at the top is
    small. The start vector is the normalized all-ones vector with a small
    fixed perturbation, so that it is never exactly orthogonal to the
    dominant eigenvector (the all-ones direction is a null vector of the
    Laplacian of every regular graph). Because the spectrum lies in
    ``[0, 2]``, the estimate is clamped to ``(0, 2]``.

    If ``laplacian.lambda_max`` is already set, that value is returned.

    Args:
        laplacian: The normalized Laplacian.
        tol: The relative tolerance, in ``(0, 1)``.
        max_iter: The maximum number of Lanczos restarts.

    Returns:
        The estimate of the largest eigenvalue.
    """
    if not 0 < tol < 1:
        raise ValueError(f'Tolerance should be in (0, 1), got {tol}')
    if laplacian.lambda_max is not None:
        return laplacian.lambda_max

    n = laplacian.n_vertices
    if n == 0:
        raise ValueError('Cannot estimate lambda_max of an empty graph')

    if n <= DENSE_MAX_VERTICES:
        rho = float(np.linalg.eigvalsh(laplacian.dense())[-1])
    else:
        rho = _lanczos_lambda_max(laplacian.matrix, tol, max_iter)

    return float(min(max(rho, np.finfo(float).tiny), 2.0))


def _start_vector(n: int) -> np.ndarray:
    """Returns the deterministic unit start vector of the eigen-solvers."""
    v = np.ones(n) + 1e-2 * np.cos(np.arange(n) * 2.399963229728653)
    return v / np.linalg.norm(v)


def _lanczos_lambda_max(
    mat: sp.csr_matrix,
    tol: float,
    max_iter: int,
) -> float:
    v0 = _start_vector(mat.shape[0])
    try:
        eigvals, eigvecs = eigsh(
            mat, k=1, which='LA', v0=v0, tol=0.1 * tol,
            ncv=min(mat.shape[0] - 1, LANCZOS_NCV), maxiter=max_iter,
        )
    except ArpackNoConvergence as e:
        raise ConvergenceError(max_iter, _residual(mat, e.eigenvalues,
                                                   e.eigenvectors)) from e

    rho = float(eigvals[0])
    residual = _residual(mat, eigvals, eigvecs)
    if residual > tol:
        raise ConvergenceError(max_iter, residual)
    return rho


def _residual(
    mat: sp.csr_matrix,
    eigvals: np.ndarray,
    eigvecs: np.ndarray,
) -> float:
    if len(eigvals) == 0:
        return np.inf
    rho = float(eigvals[0])
    v = eigvecs[:, 0] / np.linalg.norm(eigvecs[:, 0])
    return float(np.linalg.norm(mat @ v - rho * v)) / max(abs(rho), 1e-300)


def scale_laplacian(
    laplacian: NormalizedLaplacian,
    lambda_max: float,
) -> sp.csr_matrix:
    """Rescales the Laplacian to ``2 L / lambda_max - I``.

    With the exact ``lambda_max``, the spectrum of the result lies in
    ``[-1, 1]``, the domain of the Chebyshev polynomials.

    Args:
        laplacian: The normalized Laplacian.
        lambda_max: The largest eigenvalue of the Laplacian (or an upper
            bound, like 2).

    Returns:
        The scaled Laplacian in CSR format.
    """
    if not lambda_max > 0:
        raise ValueError(f'lambda_max should be positive, got {lambda_max}')
    eye = sp.identity(laplacian.n_vertices, dtype=np.float64, format='csr')
    scaled = sp.csr_matrix((2.0 / lambda_max) * laplacian.matrix - eye)
    scaled.sort_indices()
    return scaled


def to_torch_sparse(
    matrix: sp.spmatrix,
    dtype: torch.dtype = torch.float32,
) -> torch.Tensor:
    """Converts a scipy sparse matrix into a coalesced
    ``torch.sparse_coo_tensor``."""
    coo = sp.coo_matrix(matrix)
    indices = torch.from_numpy(
        np.vstack([coo.row, coo.col]).astype(np.int64)
    )
    values = torch.from_numpy(coo.data).to(dtype)
    return torch.sparse_coo_tensor(
        indices, values, size=coo.shape, dtype=dtype
    ).coalesce()
