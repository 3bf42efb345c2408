"""
Exact K-nearest-neighbor and epsilon-ball patch graphs under the Euclidean metric.

Neighbor lists are ordered by ascending distance with ties going to the lower
point index, so every graph is deterministic.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sparse
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from src.DataSet import DataSet
from src.errors import ConfigError, GraphError

logger = logging.getLogger(__name__)

# rows of the distance matrix computed at once
BLOCK_SIZE = 512


@dataclass
class NeighborGraph:
    neighbors: List[np.ndarray]
    distances: List[np.ndarray]
    k: Optional[int] = None
    eps: Optional[float] = None
    symmetric: bool = False
    rule: str = field(default="directed")

    @property
    def n_points(self) -> int:
        return len(self.neighbors)

    @property
    def edge_count(self) -> int:
        return int(sum(len(nb) for nb in self.neighbors))

    @property
    def min_degree(self) -> int:
        return int(min((len(nb) for nb in self.neighbors), default=0))

    @property
    def is_empty(self) -> bool:
        return self.edge_count == 0

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Directed edge list as (rows, cols, distances)."""
        if self.is_empty:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, np.zeros(0)
        rows = np.concatenate([np.full(len(nb), i, dtype=np.int64) for i, nb in enumerate(self.neighbors)])
        cols = np.concatenate(self.neighbors).astype(np.int64)
        dists = np.concatenate(self.distances).astype(float)
        return rows, cols, dists

    def adjacency(self) -> sparse.csr_matrix:
        """0/1 pattern of the directed edges."""
        rows, cols, _ = self.edges()
        n = self.n_points
        return sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))

    def is_symmetric(self) -> bool:
        pattern = self.adjacency()
        return (pattern != pattern.T).nnz == 0

    def require_nonempty(self) -> None:
        if self.is_empty:
            raise GraphError("neighbor graph has no edges")


def _sorted_neighbors(indices: np.ndarray, dists: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((indices, dists))
    return indices[order].astype(np.int64), dists[order]


def knn_graph(data: DataSet, k: int) -> NeighborGraph:
    points = data.points
    n = points.shape[0]
    if n < 2:
        raise ConfigError(f"K-NN graph needs at least 2 points, got {n}")
    if not 1 <= k <= n - 1:
        raise ConfigError(f"k must be in [1, {n - 1}], got {k}")

    neighbors: List[np.ndarray] = []
    distances: List[np.ndarray] = []
    for start in range(0, n, BLOCK_SIZE):
        stop = min(start + BLOCK_SIZE, n)
        block = cdist(points[start:stop], points, metric="euclidean")
        block[np.arange(stop - start), np.arange(start, stop)] = np.inf
        # stable sort keeps the lower index first among equal distances
        order = np.argsort(block, axis=1, kind="stable")[:, :k]
        for row, idx in enumerate(order):
            neighbors.append(idx.astype(np.int64))
            distances.append(block[row, idx])

    logger.debug("Built %d-NN graph on %d points", k, n)
    return NeighborGraph(neighbors=neighbors, distances=distances, k=k)


def eps_graph(data: DataSet, eps: float) -> NeighborGraph:
    if not eps > 0:
        raise ConfigError(f"eps must be positive, got {eps}")
    points = data.points
    tree = cKDTree(points)
    candidates = tree.query_ball_point(points, r=eps)

    neighbors: List[np.ndarray] = []
    distances: List[np.ndarray] = []
    for i, found in enumerate(candidates):
        idx = np.array([j for j in found if j != i], dtype=np.int64)
        if idx.size == 0:
            neighbors.append(idx)
            distances.append(np.zeros(0))
            continue
        # recompute exactly; the tree's own comparison is only used for pruning
        dists = cdist(points[i:i + 1], points[idx], metric="euclidean")[0]
        keep = dists <= eps
        nb, ds = _sorted_neighbors(idx[keep], dists[keep])
        neighbors.append(nb)
        distances.append(ds)

    graph = NeighborGraph(neighbors=neighbors, distances=distances, eps=float(eps))
    if graph.is_empty:
        logger.warning("eps=%g produced an empty graph", eps)
    return graph


def symmetrize(graph: NeighborGraph) -> NeighborGraph:
    """
    Union rule: j in neighbors[i] iff i in neighbors[j]. Distances are preserved.
    """
    n = graph.n_points
    rows, cols, dists = graph.edges()
    all_rows = np.concatenate([rows, cols])
    all_cols = np.concatenate([cols, rows])
    all_dists = np.concatenate([dists, dists])

    keys = all_rows * n + all_cols
    _, first = np.unique(keys, return_index=True)
    all_rows, all_cols, all_dists = all_rows[first], all_cols[first], all_dists[first]

    neighbors: List[np.ndarray] = []
    distances: List[np.ndarray] = []
    order = np.argsort(all_rows, kind="stable")
    all_rows, all_cols, all_dists = all_rows[order], all_cols[order], all_dists[order]
    bounds = np.searchsorted(all_rows, np.arange(n + 1))
    for i in range(n):
        lo, hi = bounds[i], bounds[i + 1]
        nb, ds = _sorted_neighbors(all_cols[lo:hi], all_dists[lo:hi])
        neighbors.append(nb)
        distances.append(ds)

    return NeighborGraph(
        neighbors=neighbors,
        distances=distances,
        k=graph.k,
        eps=graph.eps,
        symmetric=True,
        rule="union",
    )
