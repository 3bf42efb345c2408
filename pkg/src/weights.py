"""
Baseline and curvature-aware weight matrices (LEP, CA-LEP, LLE, CA-LLE).
"""
import logging
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np
import pandas as pd
import scipy.sparse as sparse
from scipy import linalg

from src.DataSet import DataSet
from src.errors import ConfigError, DegeneratePatchError, GraphError
from src.localgeom import LocalFrame, QuadraticFit
from src.neighborhood import NeighborGraph
from src.utils import median_positive

logger = logging.getLogger(__name__)

LLE_REG = 1e-3
LLE_REG_FULL_RANK = 1e-8


@dataclass
class WeightMatrix:
    matrix: sparse.csr_matrix
    kind: str
    sigma: Optional[float] = None
    sigma_c: Optional[float] = None
    mode: Optional[str] = None
    # CA-LEP before averaging with its transpose
    raw: Optional[sparse.csr_matrix] = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()


@dataclass
class PatchFeatures:
    """Per-patch neighbor features B_ij = [tau_ij; q_ij]; the center's own feature is zero."""

    neighbors: List[np.ndarray]
    tangent: List[np.ndarray]  # K_i x d
    curvature: List[np.ndarray]  # K_i x (D - d)
    d: int

    def stacked(self, i: int) -> np.ndarray:
        return np.hstack([self.tangent[i], self.curvature[i]])

    def without_curvature(self) -> "PatchFeatures":
        return replace(self, curvature=[np.zeros_like(q) for q in self.curvature])


def default_sigma(graph: NeighborGraph) -> float:
    """Median of all edge distances."""
    _, _, dists = graph.edges()
    return median_positive(dists)


def _check_bandwidth(name: str, value: float) -> None:
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value}")


def _require_symmetric(graph: NeighborGraph) -> None:
    graph.require_nonempty()
    if not graph.is_symmetric():
        raise GraphError("Laplacian weights need a symmetrized graph")


def _heat_kernel(graph: NeighborGraph, sigma: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows, cols, dists = graph.edges()
    return rows, cols, np.exp(-(dists**2) / (2.0 * sigma**2))


def lep_weights(data: DataSet, graph: NeighborGraph, sigma: Optional[float] = None) -> WeightMatrix:
    _require_symmetric(graph)
    sigma = default_sigma(graph) if sigma is None else float(sigma)
    _check_bandwidth("sigma", sigma)

    rows, cols, values = _heat_kernel(graph, sigma)
    n = data.n
    matrix = sparse.csr_matrix((values, (rows, cols)), shape=(n, n))
    return WeightMatrix(matrix=matrix, kind="lep", sigma=sigma)


def _require_fits(n: int, frames: List[LocalFrame], fits: List[QuadraticFit]) -> None:
    if fits is None or len(fits) != n or any(fit is None for fit in fits):
        raise ConfigError("curvature-aware weights need a quadratic fit for every point")
    if frames is None or len(frames) != n:
        raise ConfigError("curvature-aware weights need a local frame for every point")


def ca_lep_weights(
    data: DataSet,
    graph: NeighborGraph,
    frames: List[LocalFrame],
    fits: List[QuadraticFit],
    sigma: Optional[float] = None,
    sigma_c: Optional[float] = None,
    mode: str = "point-hessian",
) -> WeightMatrix:
    """
    Curvature-penalized heat kernel.

    point-hessian: W_ij = exp(-|x_i - x_j|^2 / 2 sigma^2) * exp(-c_j / 2 sigma_c^2),
        c_j the total squared principal curvature at x_j.
    patch-form: W_ij = exp(-|B_i0 - B_ij|^2 / 2 sigma^2) with B from patch i's fit.

    Both are symmetrized as (W + W^T) / 2.
    """
    _require_symmetric(graph)
    _require_fits(data.n, frames, fits)
    sigma = default_sigma(graph) if sigma is None else float(sigma)
    _check_bandwidth("sigma", sigma)
    n = data.n

    if mode == "point-hessian":
        curvature = np.array([fit.total_curvature for fit in fits])
        # c_j carries squared curvature units; sigma_c^2 sits at the median c_j
        sigma_c = float(np.sqrt(median_positive(curvature))) if sigma_c is None else float(sigma_c)
        _check_bandwidth("sigma_c", sigma_c)
        rows, cols, base = _heat_kernel(graph, sigma)
        penalty = np.exp(-curvature / (2.0 * sigma_c**2))
        values = base * penalty[cols]
    elif mode == "patch-form":
        features = patch_features(data, graph, frames, fits)
        rows, cols, _ = graph.edges()
        squared = np.concatenate([np.sum(features.stacked(i) ** 2, axis=1) for i in range(n)])
        values = np.exp(-squared / (2.0 * sigma**2))
    else:
        raise ConfigError(f"unknown curvature mode '{mode}'")

    raw = sparse.csr_matrix((values, (rows, cols)), shape=(n, n))
    matrix = ((raw + raw.T) * 0.5).tocsr()
    return WeightMatrix(matrix=matrix, kind="ca-lep", sigma=sigma, sigma_c=sigma_c, mode=mode, raw=raw)


def patch_features(
    data: DataSet,
    graph: NeighborGraph,
    frames: List[LocalFrame],
    fits: List[QuadraticFit],
) -> PatchFeatures:
    """
    tau_ij = u_ij in patch i's tangent coordinates, q_ij[a] = u_ij^T H^(i,a) u_ij.
    """
    _require_fits(data.n, frames, fits)
    neighbors, tangent, curvature = [], [], []
    for i, nb in enumerate(graph.neighbors):
        u, _ = frames[i].project(data.points[nb])
        q = np.einsum("kj,ajl,kl->ka", u, fits[i].hessians, u)
        neighbors.append(np.asarray(nb, dtype=np.int64))
        tangent.append(u)
        curvature.append(q)
    return PatchFeatures(neighbors=neighbors, tangent=tangent, curvature=curvature, d=frames[0].d)


def regularization(gram: np.ndarray, reg_dim: int) -> float:
    k = gram.shape[0]
    trace = float(np.trace(gram))
    if trace <= 0:
        return LLE_REG
    if k > reg_dim:
        return LLE_REG * trace / k
    return LLE_REG_FULL_RANK * trace


def _barycenter_row(offsets: np.ndarray, reg_dim: int, index: int) -> np.ndarray:
    """
    Minimize |sum_j w_j z_j|^2 + lambda |w|^2 subject to sum_j w_j = 1.
    """
    k = offsets.shape[0]
    gram = offsets @ offsets.T
    gram.flat[:: k + 1] += regularization(gram, reg_dim)
    try:
        w = linalg.solve(gram, np.ones(k), assume_a="pos")
    except linalg.LinAlgError:
        raise DegeneratePatchError(index, "singular reconstruction system")
    total = w.sum()
    if not np.isfinite(total) or total == 0:
        raise DegeneratePatchError(index, "singular reconstruction system")
    return w / total


def _reconstruction_matrix(neighbors: List[np.ndarray], offsets_of, reg_dim: int, kind: str) -> WeightMatrix:
    n = len(neighbors)
    rows, cols, values = [], [], []
    for i, nb in enumerate(neighbors):
        if len(nb) == 0:
            raise GraphError(f"point {i} has no neighbors")
        w = _barycenter_row(offsets_of(i), reg_dim, i)
        rows.append(np.full(len(nb), i, dtype=np.int64))
        cols.append(np.asarray(nb, dtype=np.int64))
        values.append(w)
    matrix = sparse.csr_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return WeightMatrix(matrix=matrix, kind=kind)


def lle_weights(data: DataSet, graph: NeighborGraph, d: Optional[int] = None) -> WeightMatrix:
    """
    Standard LLE reconstruction weights in ambient coordinates; rows sum to 1.
    """
    graph.require_nonempty()
    reg_dim = data.dim if d is None else d
    return _reconstruction_matrix(
        graph.neighbors,
        lambda i: data.points[graph.neighbors[i]] - data.points[i],
        reg_dim,
        "lle",
    )


def tangent_lle_weights(graph: NeighborGraph, features: PatchFeatures) -> WeightMatrix:
    """LLE weights computed in each patch's own tangent coordinates."""
    graph.require_nonempty()
    return _reconstruction_matrix(features.neighbors, lambda i: features.tangent[i], features.d, "lle")


def ca_lle_weights(data: DataSet, graph: NeighborGraph, features: PatchFeatures) -> WeightMatrix:
    """
    Minimize |0 - sum_j W_ij [tau_ij; q_ij]|^2 with sum_j W_ij = 1 per row.
    """
    graph.require_nonempty()
    if len(features.neighbors) != data.n:
        raise ConfigError("patch features do not cover every point")
    return _reconstruction_matrix(features.neighbors, features.stacked, features.d, "ca-lle")


def reconstruction_objective(
    features: PatchFeatures,
    i: int,
    w: np.ndarray,
    include_curvature: bool = True,
    include_regularization: bool = True,
) -> float:
    """Phi_i at weights w, plus the Tikhonov term the solver adds when requested."""
    offsets = features.stacked(i) if include_curvature else features.tangent[i]
    w = np.asarray(w, dtype=float)
    value = float(np.sum((w @ offsets) ** 2))
    if include_regularization:
        gram = offsets @ offsets.T
        value += regularization(gram, features.d) * float(w @ w)
    return value


def weights_frame(weights: WeightMatrix) -> pd.DataFrame:
    coo = weights.matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    return pd.DataFrame({"i": coo.row[order], "j": coo.col[order], "w": coo.data[order]})
