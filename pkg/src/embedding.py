import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sparse
from scipy import linalg
from scipy.sparse.csgraph import connected_components
from sklearn.decomposition import PCA

from src.DataSet import DataSet
from src.errors import ConfigError, DisconnectedGraphError, GraphError, NumericalError
from src.utils import fix_signs
from src.weights import WeightMatrix

logger = logging.getLogger(__name__)

TRIVIAL_EIGENVALUE_TOL = 1e-10
# smallest allowed degree, relative to the largest
DEGREE_FLOOR = 1e-12

LAPLACIAN_KINDS = ("lep", "ca-lep")
RECONSTRUCTION_KINDS = ("lle", "ca-lle")


@dataclass
class Embedding:
    Y: np.ndarray
    eigenvalues: np.ndarray
    method: str
    # PCA only
    basis: Optional[np.ndarray] = None
    mean: Optional[np.ndarray] = None
    explained_variance_ratio: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.Y.shape[0]

    @property
    def d(self) -> int:
        return self.Y.shape[1]

    def as_dataset(self, labels: Optional[np.ndarray] = None, name: str = "") -> DataSet:
        return DataSet(points=self.Y, labels=labels, name=name or self.method)


def _check_target_dim(n: int, d: int) -> None:
    if d < 1:
        raise ConfigError(f"d must be >= 1, got {d}")
    if d >= n - 1:
        raise ConfigError(f"d must be smaller than N-1={n - 1}, got {d}")


def _check_connected(matrix: sparse.spmatrix) -> None:
    n_components, _ = connected_components(matrix, directed=True, connection="weak")
    if n_components > 1:
        raise DisconnectedGraphError(n_components)


def _spectral_bound(matrix: np.ndarray) -> float:
    """Gershgorin bound on the largest eigenvalue."""
    return float(np.max(np.sum(np.abs(matrix), axis=1)))


def _deflated_bottom(matrix: np.ndarray, trivial: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
    """
    The d smallest eigenpairs of a symmetric PSD `matrix` on the complement of
    its known null vector `trivial` (unit norm).

    The null direction is shifted above the spectrum before solving, so the
    returned vectors never mix with it even when the bottom of the spectrum
    is clustered. They are projected off `trivial` and re-orthonormalized.
    """
    lam_max = _spectral_bound(matrix)
    lam_0 = float(trivial @ matrix @ trivial)
    if lam_0 > TRIVIAL_EIGENVALUE_TOL * max(lam_max, 1.0):
        raise NumericalError(f"trivial eigenvalue is not zero (lambda_0={lam_0:.3e}, bound={lam_max:.3e})")

    deflated = matrix + (lam_max + 1.0) * np.outer(trivial, trivial)
    values, vectors = linalg.eigh(deflated, subset_by_index=[0, d - 1])
    vectors = vectors - np.outer(trivial, trivial @ vectors)
    vectors, _ = linalg.polar(vectors)
    logger.debug("lambda_0=%.3e, bottom of the deflated spectrum: %s", lam_0, values)
    return values, vectors


def laplacian_matrix(weights: WeightMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Dense L = Dg - W and the degree vector."""
    if weights.kind not in LAPLACIAN_KINDS:
        raise ConfigError(f"Laplacian needs lep or ca-lep weights, got {weights.kind}")
    w = weights.dense()
    degree = w.sum(axis=1)
    return np.diag(degree) - w, degree


def laplacian_embedding(weights: WeightMatrix, d: int) -> Embedding:
    """
    Solve L v = lambda Dg v through Dg^{-1/2} L Dg^{-1/2} and keep the d
    eigenvectors after the constant one, Dg-orthonormal.
    """
    n = weights.n
    _check_target_dim(n, d)
    _check_connected(weights.matrix)
    laplacian, degree = laplacian_matrix(weights)
    weakest = int(np.argmin(degree))
    if not degree[weakest] > DEGREE_FLOOR * degree.max():
        raise GraphError(
            f"vertex {weakest} has degree {degree[weakest]:.3e}, below {DEGREE_FLOOR:g} of the largest "
            f"({degree.max():.3e}); the weights underflowed"
        )

    sqrt_degree = np.sqrt(degree)
    inv_sqrt = 1.0 / sqrt_degree
    normalized = inv_sqrt[:, None] * laplacian * inv_sqrt[None, :]
    normalized = 0.5 * (normalized + normalized.T)

    # Dg^{-1/2} L Dg^{-1/2} annihilates Dg^{1/2} 1
    values, vectors = _deflated_bottom(normalized, sqrt_degree / np.linalg.norm(sqrt_degree), d)
    return Embedding(Y=fix_signs(inv_sqrt[:, None] * vectors), eigenvalues=values, method=weights.kind)


def lle_embedding(weights: WeightMatrix, d: int) -> Embedding:
    """
    Bottom eigenvectors 2..d+1 of M = (I - W)^T (I - W), unit-orthonormal.
    """
    if weights.kind not in RECONSTRUCTION_KINDS:
        raise ConfigError(f"LLE embedding needs lle or ca-lle weights, got {weights.kind}")
    n = weights.n
    _check_target_dim(n, d)
    _check_connected(weights.matrix)

    residual_op = np.eye(n) - weights.dense()
    m = residual_op.T @ residual_op
    # rows of W sum to one, so M annihilates the constant vector
    values, vectors = _deflated_bottom(m, np.full(n, 1.0 / np.sqrt(n)), d)
    return Embedding(Y=fix_signs(vectors), eigenvalues=values, method=weights.kind)


def pca_embedding(data: DataSet, d: int) -> Embedding:
    if data.n < 2:
        raise ConfigError(f"PCA needs at least 2 points, got {data.n}")
    if not 1 <= d <= min(data.n, data.dim):
        raise ConfigError(f"d must be in [1, {min(data.n, data.dim)}], got {d}")
    pca = PCA(n_components=d, svd_solver="full")
    scores = pca.fit_transform(data.points)

    # same rule as fix_signs, applied to the basis too so mean + basis Y^T reconstructs
    pivots = np.argmax(np.abs(scores), axis=0)
    signs = np.sign(scores[pivots, np.arange(d)])
    signs[signs == 0] = 1.0

    # constant data has no variance to explain
    ratio = np.nan_to_num(pca.explained_variance_ratio_, nan=0.0)
    return Embedding(
        Y=scores * signs,
        eigenvalues=pca.explained_variance_,
        method="pca",
        basis=pca.components_.T * signs,
        mean=pca.mean_,
        explained_variance_ratio=ratio,
    )


def laplacian_eigenvalues(weights: WeightMatrix) -> np.ndarray:
    """Full ascending spectrum of the combinatorial Laplacian Dg - W."""
    laplacian, _ = laplacian_matrix(weights)
    return linalg.eigvalsh(0.5 * (laplacian + laplacian.T))


def reconstruction_error_spectrum(weights: WeightMatrix, d: int) -> float:
    """Sum of the d smallest nontrivial eigenvalues of Dg - W."""
    n = weights.n
    _check_target_dim(n, d)
    _check_connected(weights.matrix)
    laplacian, _ = laplacian_matrix(weights)
    values = linalg.eigvalsh(0.5 * (laplacian + laplacian.T), subset_by_index=[0, d])
    return float(np.sum(values[1:]))


def embedding_objective(weights: WeightMatrix, Y: np.ndarray) -> float:
    """
    trace(Y^T L Y) for Laplacian weights, |(I - W) Y|_F^2 for reconstruction weights.
    """
    Y = np.asarray(Y, dtype=float)
    if weights.kind in LAPLACIAN_KINDS:
        laplacian, _ = laplacian_matrix(weights)
        return float(np.trace(Y.T @ laplacian @ Y))
    if weights.kind in RECONSTRUCTION_KINDS:
        residual = Y - weights.matrix @ Y
        return float(np.sum(residual**2))
    raise ConfigError(f"no embedding objective for weights of kind {weights.kind}")
