from typing import Tuple

import numpy as np

from ..graph import SparseGraph, fiedler_vector, connected_components


def bipartition(g: SparseGraph) -> Tuple[np.ndarray, np.ndarray]:
    """Splits a connected graph into two connected parts with spectral
    clustering.

    Vertices are split by the sign of the Fiedler vector. Vertices where the
    Fiedler vector is zero go to the part that is smaller so far (to the
    first part on a tie). If the sign split leaves a part empty, we split at
    the median of the Fiedler vector instead. Finally, a part that is not
    connected keeps its largest component and hands the other components over
    to the other part. Doing this for the first and then for the second part
    yields two connected parts, as every stray component only borders the
    other part.

    Args:
        g: A connected graph with at least two vertices.

    Returns:
        The sorted vertex indices of both parts. The first part contains the
        vertices where the (sign-fixed) Fiedler vector is positive.
    """
    if g.n_vertices < 2:
        raise ValueError(
            f'Cannot bipartition a graph with {g.n_vertices} vertices'
        )
    vec = fiedler_vector(g)

    zero = np.abs(vec) <= 1e-12 * np.abs(vec).max()
    in_a = (vec > 0) & ~zero
    n_a = in_a.sum()
    n_b = (~in_a & ~zero).sum()
    if n_a <= n_b:
        in_a |= zero

    if in_a.all() or not in_a.any():
        in_a = vec > np.median(vec)
        if not in_a.any():
            in_a[np.argmax(vec)] = True

    in_a = _keep_largest_component(g, in_a)
    in_a = ~_keep_largest_component(g, ~in_a)

    return np.flatnonzero(in_a), np.flatnonzero(~in_a)


def _keep_largest_component(g: SparseGraph, mask: np.ndarray) -> np.ndarray:
    """Returns ``mask`` restricted to the largest connected component of
    the subgraph it induces. Ties go to the component with the lowest vertex
    index."""
    vertices = np.flatnonzero(mask)
    n_comp, labels = connected_components(g.subgraph(vertices))
    if n_comp <= 1:
        return mask

    sizes = np.bincount(labels)
    # np.argmax returns the first maximum, and component labels are numbered
    # in order of their lowest vertex
    keep = vertices[labels == np.argmax(sizes)]
    new_mask = np.zeros_like(mask)
    new_mask[keep] = True
    return new_mask
