import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from ..errors import SingletonPartitionError
from ..graph import SparseGraph, build_graph, block_diagonalize
from .bipartition import bipartition
from .mesh_graph import mesh_to_graph, edge_lengths_graph,\
    geodesic_distances, gaussian_edge_weight
from .triangle_mesh import TriangleMesh, check_mesh_connected


@dataclass(frozen=True)
class MeshHierarchy:
    """A binary partition tree over the vertices of a mesh.

    Level ``l`` holds ``2^l`` partitions, level 0 being the root and level
    ``depth`` the finest level. Partitions ``2i`` and ``2i + 1`` at level
    ``l`` are the children of partition ``i`` at level ``l - 1``. For every
    level, a graph connects the centers of neighboring partitions.

    Attributes:
        levels: The graph of each level, from the root (index 0) to the finest
            level.
        parent_maps: For each level, the parent (at the previous level) of
            each partition. ``parent_maps[0]`` is empty.
        centers: For each level, the index of the central mesh vertex of each
            partition, or ``-1`` for the virtual levels that group several
            structures (see :func:`compose_hierarchies`).
        membership: The finest-level partition of each mesh vertex.
        sigma: The spatial standard deviation (in mm) of the edge weights.
        neighbor_distances: For each level, the average geodesic distance
            between the centers of neighboring partitions (``nan`` if a
            level has no neighboring partitions).
        structure_sizes: The number of mesh vertices of each structure,
            in the order in which the structures were composed.
    """
    levels: List[SparseGraph]
    parent_maps: List[np.ndarray]
    centers: List[np.ndarray]
    membership: np.ndarray
    sigma: float
    neighbor_distances: List[float]
    structure_sizes: List[int]

    @property
    def depth(self) -> int:
        """The index of the finest level."""
        return len(self.levels) - 1

    @property
    def level_sizes(self) -> List[int]:
        return [g.n_vertices for g in self.levels]

    @property
    def n_mesh_vertices(self) -> int:
        return len(self.membership)


@dataclass(frozen=True)
class PartitionAssignment:
    """The partition of each mesh vertex at a given level.

    Attributes:
        level: The level of the hierarchy.
        membership: The partition id (at ``level``) of each mesh vertex.
    """
    level: int
    membership: np.ndarray


def build_hierarchy(
    mesh: TriangleMesh,
    sigma: float = 2.0,
    stop_distance: float = 2.5,
    max_levels: int = 10,
) -> MeshHierarchy:
    """Builds a hierarchy by recursively bipartitioning a mesh.

    All partitions of a level are split together with :func:`bipartition`,
    which is applied to the subgraph induced by the partition on the mesh
    graph (weighted with :func:`gaussian_edge_weight`). The recursion stops at
    the first level where the average geodesic distance between the centers
    of neighboring partitions drops below ``stop_distance``, or when
    ``max_levels`` is reached.

    The center of a partition is its vertex with the highest closeness
    centrality (the lowest sum of geodesic distances to the other vertices of
    the partition), with ties going to the lowest vertex index. Two partitions
    are neighbors when a mesh edge connects them. The graph of each level
    connects neighboring partitions with the Gaussian weight of the geodesic
    distance between their centers.

    Args:
        mesh: A connected mesh.
        sigma: The spatial standard deviation (in mm) of the edge weights.
        stop_distance: The average neighbor distance (in mm) below which the
            recursion stops.
        max_levels: The maximum depth of the hierarchy.

    Returns:
        The hierarchy.
    """
    if not stop_distance > 0:
        raise ValueError(
            f'stop_distance should be positive, got {stop_distance}'
        )
    if max_levels < 0:
        raise ValueError(f'max_levels should be >= 0, got {max_levels}')
    check_mesh_connected(mesh)

    weights = mesh_to_graph(mesh, sigma)
    lengths = edge_lengths_graph(mesh)
    mesh_edges = mesh.edges

    partitions = [np.arange(mesh.n_vertices)]
    levels, parent_maps, centers, neighbor_distances = [], [], [], []

    for level in range(max_levels + 1):
        if level > 0:
            new_partitions = []
            for idx, part in enumerate(partitions):
                if len(part) < 2:
                    raise SingletonPartitionError(level - 1, idx)
                part_a, part_b = bipartition(weights.subgraph(part))
                new_partitions.extend([part[part_a], part[part_b]])
            partitions = new_partitions

        level_centers = np.array([
            _closeness_center(lengths, part) for part in partitions
        ], dtype=np.int64)
        graph, avg_dist = _level_graph(
            partitions, level_centers, mesh_edges, lengths, mesh.n_vertices,
            sigma
        )

        levels.append(graph)
        parent_maps.append(np.arange(len(partitions), dtype=np.int64) // 2
                           if level > 0 else np.zeros(0, dtype=np.int64))
        centers.append(level_centers)
        neighbor_distances.append(avg_dist)

        logging.debug(
            f'Hierarchy level {level}: {len(partitions)} partitions, '
            f'average neighbor distance {avg_dist:.3f} mm'
        )
        if avg_dist < stop_distance:
            break

    membership = np.empty(mesh.n_vertices, dtype=np.int64)
    for idx, part in enumerate(partitions):
        membership[part] = idx

    logging.info(
        f'Built a hierarchy with {len(levels)} levels over '
        f'{mesh.n_vertices} vertices (finest level: {len(partitions)} '
        'partitions)'
    )

    return MeshHierarchy(
        levels=levels,
        parent_maps=parent_maps,
        centers=centers,
        membership=membership,
        sigma=float(sigma),
        neighbor_distances=neighbor_distances,
        structure_sizes=[mesh.n_vertices],
    )


def _closeness_center(lengths: SparseGraph, part: np.ndarray) -> int:
    if len(part) == 1:
        return int(part[0])
    sub = lengths.subgraph(part)
    dist = geodesic_distances(sub, np.arange(len(part)))
    return int(part[np.argmin(dist.sum(axis=1))])


def _level_graph(
    partitions: List[np.ndarray],
    centers: np.ndarray,
    mesh_edges: np.ndarray,
    lengths: SparseGraph,
    n_mesh_vertices: int,
    sigma: float,
) -> Tuple[SparseGraph, float]:
    labels = np.empty(n_mesh_vertices, dtype=np.int64)
    for idx, part in enumerate(partitions):
        labels[part] = idx

    pairs = labels[mesh_edges]
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    if len(pairs) == 0:
        return build_graph(len(partitions), []), math.nan

    pairs = np.unique(np.sort(pairs, axis=1), axis=0)
    dist = geodesic_distances(lengths, centers)
    pair_dist = dist[pairs[:, 0], centers[pairs[:, 1]]]
    pair_weights = gaussian_edge_weight(pair_dist, sigma)

    graph = build_graph(
        len(partitions),
        [(p, q, w) for (p, q), w in zip(pairs, pair_weights)],
    )
    return graph, float(pair_dist.mean())


def compose_hierarchies(hierarchies: List[MeshHierarchy]) -> MeshHierarchy:
    """Composes the hierarchies of several structures into one hierarchy.

    The graphs of each level are block-diagonalized, so the structures stay
    disconnected. The number of structures ``m`` must be a power of two:
    ``log2(m)`` virtual levels (without edges or centers) are put on top, so
    that every level ``l`` still holds ``2^l`` partitions and the children of
    partition ``i`` are still ``2i`` and ``2i + 1``. Mesh vertex indices
    (memberships and centers) are offset by the total number of vertices of
    the preceding structures.

    Args:
        hierarchies: The hierarchies to compose. They must have the same depth
            and the same ``sigma``.

    Returns:
        The composed hierarchy.
    """
    m = len(hierarchies)
    if m == 0:
        raise ValueError('Cannot compose an empty list of hierarchies')
    if m & (m - 1) != 0:
        raise ValueError(
            f'The number of structures should be a power of two, got {m}'
        )
    if m == 1:
        return hierarchies[0]

    depths = {h.depth for h in hierarchies}
    if len(depths) != 1:
        raise ValueError(
            'All structures need hierarchies of the same depth to be '
            f'composed, got depths {sorted(depths)}'
        )
    sigmas = {h.sigma for h in hierarchies}
    if len(sigmas) != 1:
        raise ValueError(
            f'All hierarchies should use the same sigma, got {sorted(sigmas)}'
        )

    n_virtual = m.bit_length() - 1
    vertex_offsets = np.cumsum([0] + [h.n_mesh_vertices for h in hierarchies])

    levels, parent_maps, centers, neighbor_distances = [], [], [], []
    for level in range(n_virtual):
        levels.append(build_graph(2 ** level, []))
        centers.append(np.full(2 ** level, -1, dtype=np.int64))
        neighbor_distances.append(math.nan)

    for sub_level in range(hierarchies[0].depth + 1):
        graph, _ = block_diagonalize([h.levels[sub_level]
                                      for h in hierarchies])
        levels.append(graph)
        centers.append(np.concatenate([
            h.centers[sub_level] + offset
            for h, offset in zip(hierarchies, vertex_offsets)
        ]))

        counts = np.array([h.levels[sub_level].n_edges
                           for h in hierarchies])
        dists = np.array([h.neighbor_distances[sub_level]
                          for h in hierarchies])
        has_edges = counts > 0
        neighbor_distances.append(
            float(np.sum(counts[has_edges] * dists[has_edges])
                  / counts[has_edges].sum())
            if has_edges.any() else math.nan
        )

    for level, graph in enumerate(levels):
        parent_maps.append(np.arange(graph.n_vertices, dtype=np.int64) // 2
                           if level > 0 else np.zeros(0, dtype=np.int64))

    n_leaves = 2 ** hierarchies[0].depth
    membership = np.concatenate([
        h.membership + k * n_leaves for k, h in enumerate(hierarchies)
    ])

    return MeshHierarchy(
        levels=levels,
        parent_maps=parent_maps,
        centers=centers,
        membership=membership,
        sigma=hierarchies[0].sigma,
        neighbor_distances=neighbor_distances,
        structure_sizes=[s for h in hierarchies for s in h.structure_sizes],
    )


def pooling_groups(
    h: MeshHierarchy,
    level: int,
) -> List[Tuple[int, int, int]]:
    """Returns the pooling groups between ``level`` and its parent level.

    Args:
        h: The hierarchy.
        level: The child level, from 1 up to the finest level.

    Returns:
        A list of ``(parent, child_2i, child_2i+1)`` tuples, one per
        partition of level ``level - 1``.
    """
    if not 1 <= level <= h.depth:
        raise ValueError(
            f'Pooling level should be in [1, {h.depth}], got {level}'
        )
    return [(p, 2 * p, 2 * p + 1) for p in range(2 ** (level - 1))]


def partition_assignment(h: MeshHierarchy, level: int) -> PartitionAssignment:
    """Returns the partition of each mesh vertex at the given level."""
    if not 0 <= level <= h.depth:
        raise ValueError(f'Level should be in [0, {h.depth}], got {level}')
    return PartitionAssignment(
        level=level,
        membership=h.membership >> (h.depth - level),
    )


def level_of(h: MeshHierarchy, n_values: int) -> int:
    """Returns the level that has ``n_values`` partitions."""
    level = n_values.bit_length() - 1
    if n_values < 1 or 2 ** level != n_values or level > h.depth:
        raise ValueError(
            f'{n_values} values do not match any level of a hierarchy '
            f'with level sizes {h.level_sizes}'
        )
    return level


def upsample_to_finest(h: MeshHierarchy, values: np.ndarray) -> np.ndarray:
    """Copies per-partition values at some level down the tree to the finest
    level.

    Each finest-level partition receives the value of its ancestor. The level
    of ``values`` follows from its length (``2^l``).

    Args:
        h: The hierarchy.
        values: The values at level ``l``, with ``values.shape[0] == 2^l``.

    Returns:
        The values at the finest level.
    """
    level = level_of(h, len(values))
    ancestors = np.arange(2 ** h.depth) >> (h.depth - level)
    return values[ancestors]


def upsample_to_mesh(h: MeshHierarchy, values: np.ndarray) -> np.ndarray:
    """Copies per-partition values at any level to the mesh vertices."""
    return upsample_to_finest(h, values)[h.membership]
