from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from numpy.polynomial import chebyshev
from scipy.sparse.linalg import eigsh

from .laplacian import DENSE_MAX_VERTICES, NormalizedLaplacian,\
    normalized_laplacian
from .sparse_graph import SparseGraph, check_connected


def dense_spectral_filter(
    laplacian: NormalizedLaplacian,
    theta: Sequence[float],
    x: np.ndarray,
    lambda_max: Optional[float] = None,
) -> np.ndarray:
    """Filters a graph signal in the graph Fourier domain.

    The filter is the Chebyshev series ``sum_k theta[k] T_k`` evaluated on the
    eigenvalues of the scaled Laplacian ``2 L / lambda_max - I``. We compute
    ``U g(Lambda) U^T x`` from a dense eigendecomposition, which makes this
    function a reference for the recurrence-based convolution. Only graphs
    with at most 256 vertices are supported.

    Args:
        laplacian: The normalized Laplacian.
        theta: The ``K`` Chebyshev coefficients of the filter.
        x: The signal, a vector of length ``N`` or an ``N x F`` matrix (each
            column is filtered independently).
        lambda_max: The scaling eigenvalue. If ``None``, use
            ``laplacian.lambda_max`` or, when that is unknown, the largest
            eigenvalue of the eigendecomposition.

    Returns:
        The filtered signal, with the same shape as ``x``.
    """
    n = laplacian.n_vertices
    if n > DENSE_MAX_VERTICES:
        raise ValueError(
            f'Dense spectral filtering supports at most '
            f'{DENSE_MAX_VERTICES} vertices, got {n}'
        )
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != n:
        raise ValueError(
            f'Signal has {x.shape[0]} rows, expected {n}'
        )
    if len(theta) == 0:
        raise ValueError('At least one filter coefficient is needed')

    eigvals, eigvecs = np.linalg.eigh(laplacian.dense())
    if lambda_max is None:
        lambda_max = laplacian.lambda_max
    if lambda_max is None:
        lambda_max = float(eigvals[-1])

    scaled = 2.0 * eigvals / lambda_max - 1.0
    response = chebyshev.chebval(scaled, np.asarray(theta, dtype=np.float64))

    x_hat = eigvecs.T @ x
    if x.ndim == 1:
        return eigvecs @ (response * x_hat)
    return eigvecs @ (response[:, None] * x_hat)


def fiedler_vector(g: SparseGraph) -> np.ndarray:
    """Computes the Fiedler vector of a connected graph.

    This is the unit-norm eigenvector of the normalized Laplacian that
    belongs to the second-smallest eigenvalue. Its sign is fixed such that
    the first entry that is not (numerically) zero is positive. Graphs with up
    to 256 vertices use a dense eigendecomposition; larger graphs use a
    Lanczos solver on ``2 I - L``, whose two largest eigenpairs correspond to
    the two smallest of ``L``.

    Args:
        g: A connected graph with at least two vertices.

    Returns:
        The Fiedler vector.
    """
    if g.n_vertices < 2:
        raise ValueError(
            f'The Fiedler vector needs at least 2 vertices, got '
            f'{g.n_vertices}'
        )
    check_connected(g)

    lap = normalized_laplacian(g)
    if g.n_vertices <= DENSE_MAX_VERTICES:
        _, eigvecs = np.linalg.eigh(lap.dense())
        vec = eigvecs[:, 1]
    else:
        vec = _fiedler_lanczos(lap)

    return _fix_sign(vec / np.linalg.norm(vec))


def _fiedler_lanczos(lap: NormalizedLaplacian) -> np.ndarray:
    n = lap.n_vertices
    flipped = 2.0 * sp.identity(n, format='csr') - lap.matrix
    v0 = np.ones(n) + 1e-2 * np.cos(np.arange(n) * 2.399963229728653)
    eigvals, eigvecs = eigsh(flipped, k=2, which='LA', v0=v0, tol=1e-12,
                             maxiter=100 * n)
    order = np.argsort(eigvals)[::-1]
    return eigvecs[:, order[1]]


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    nonzero = np.flatnonzero(np.abs(vec) > 1e-12 * np.abs(vec).max())
    if len(nonzero) > 0 and vec[nonzero[0]] < 0:
        return -vec
    return vec
