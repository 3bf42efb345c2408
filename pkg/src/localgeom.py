"""
Local tangent/normal frames, quadratic patch fits and the curvature read off them.

A patch U_i is the neighbor list of point i. Its frame comes from the SVD of the
neighbor offsets x_j - x_i; the normal deflections of the neighbors are then
fitted by a second-order polynomial in tangent coordinates,

    f(u) = f(0) + u^T g + 1/2 u^T H u,

whose Hessians H^alpha are the second-fundamental-form coefficients at x_i.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import linalg

from src.DataSet import DataSet
from src.errors import ConfigError, DegeneratePatchError, NumericalError
from src.neighborhood import NeighborGraph
from src.utils import fix_signs, resolve_threads

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
PINV_RCOND = 1e-10
RIDGE_SCALE = 1e-6


@dataclass
class LocalFrame:
    center: int
    neighbors: np.ndarray
    origin: np.ndarray
    tangent_basis: np.ndarray  # D x d
    normal_basis: np.ndarray  # D x (D - d)
    u: np.ndarray  # K x d
    fvals: np.ndarray  # K x (D - d)

    @property
    def d(self) -> int:
        return self.tangent_basis.shape[1]

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Tangent coordinates and normal deflections of arbitrary points."""
        offsets = np.atleast_2d(points) - self.origin
        return offsets @ self.tangent_basis, offsets @ self.normal_basis


@dataclass
class QuadraticFit:
    center: int
    gradient: np.ndarray  # d x (D - d)
    hessians: np.ndarray  # (D - d) x d x d, symmetric
    principal_curvatures: np.ndarray  # (D - d) x d, ascending per normal direction
    residual: float
    ridge_used: bool = False

    @property
    def total_curvature(self) -> float:
        return float(np.sum(self.hessians**2))


@dataclass
class CurvatureField:
    values: np.ndarray
    residuals: np.ndarray
    sectional: Optional[np.ndarray] = None
    components: Optional[np.ndarray] = None


@dataclass
class PatchFits:
    frames: List[LocalFrame]
    fits: List[QuadraticFit]
    d: int


def _complete_basis(tangent: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """Gram-Schmidt the candidate columns against the tangent basis and each other."""
    basis = [tangent[:, j] for j in range(tangent.shape[1])]
    completed = []
    for j in range(candidates.shape[1]):
        v = candidates[:, j].copy()
        # two passes keep orthogonality at rounding level
        for _ in range(2):
            for b in basis:
                v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm < RANK_TOL:
            raise NumericalError("normal completion failed: candidate direction lies in the span")
        v /= norm
        basis.append(v)
        completed.append(v)
    return np.column_stack(completed)


def local_frame(data: DataSet, graph: NeighborGraph, i: int, d: int) -> LocalFrame:
    dim = data.dim
    if not 1 <= d < dim:
        raise ConfigError(f"intrinsic dimension d must satisfy 1 <= d < D={dim}, got {d}")
    neighbors = graph.neighbors[i]
    if len(neighbors) < d:
        raise DegeneratePatchError(i, f"degenerate patch ({len(neighbors)} neighbors, need {d})")

    origin = data.points[i]
    offsets = data.points[neighbors] - origin
    _, s, vt = linalg.svd(offsets, full_matrices=True)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    if rank < d:
        raise DegeneratePatchError(i)

    tangent = fix_signs(vt[:d].T)
    normal = fix_signs(_complete_basis(tangent, vt[d:].T))
    return LocalFrame(
        center=i,
        neighbors=np.asarray(neighbors, dtype=np.int64),
        origin=origin,
        tangent_basis=tangent,
        normal_basis=normal,
        u=offsets @ tangent,
        fvals=offsets @ normal,
    )


def design_matrix(u: np.ndarray) -> np.ndarray:
    """
    Columns [1, u^1..u^d, (u^j)^2 / 2 for each j, u^j u^k for j < k].

    With this scaling the solved coefficients are the Hessian entries h_jj and
    h_jk themselves, and the fitted polynomial is f(0) + u^T g + 1/2 u^T H u.
    """
    u = np.atleast_2d(u)
    k, d = u.shape
    columns = [np.ones(k)]
    columns.extend(u[:, j] for j in range(d))
    columns.extend(0.5 * u[:, j] ** 2 for j in range(d))
    columns.extend(u[:, j] * u[:, l] for j in range(d) for l in range(j + 1, d))
    return np.column_stack(columns)


def n_coefficients(d: int) -> int:
    return 1 + d + d * (d + 1) // 2


def _unpack_hessians(coeffs: np.ndarray, d: int) -> np.ndarray:
    codim = coeffs.shape[1]
    hessians = np.zeros((codim, d, d))
    pos = 1 + d
    for j in range(d):
        hessians[:, j, j] = coeffs[pos]
        pos += 1
    for j in range(d):
        for l in range(j + 1, d):
            hessians[:, j, l] = coeffs[pos]
            hessians[:, l, j] = coeffs[pos]
            pos += 1
    return hessians


def quadratic_fit(frame: LocalFrame, ridge: bool = True) -> QuadraticFit:
    u, f = frame.u, frame.fvals
    k, d = u.shape
    psi = design_matrix(u)
    m = psi.shape[1]

    s = linalg.svdvals(psi)
    rank = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0

    ridge_used = False
    if k >= m and rank == m:
        coeffs = linalg.pinv(psi, rtol=PINV_RCOND) @ f
    elif ridge:
        gram = psi.T @ psi
        lam = RIDGE_SCALE * np.trace(gram) / m
        coeffs = linalg.solve(gram + lam * np.eye(m), psi.T @ f, assume_a="pos")
        ridge_used = True
        logger.warning("Point %d: quadratic design has rank %d < %d (K=%d), using ridge fallback", frame.center, rank, m, k)
    else:
        raise DegeneratePatchError(frame.center, f"rank-deficient quadratic design (rank {rank} < {m})")

    hessians = _unpack_hessians(coeffs, d)
    residual = float(np.sqrt(np.mean((psi @ coeffs - f) ** 2))) if f.size else 0.0
    return QuadraticFit(
        center=frame.center,
        gradient=coeffs[1:1 + d],
        hessians=hessians,
        principal_curvatures=np.array([np.linalg.eigvalsh(h) for h in hessians]).reshape(len(hessians), d),
        residual=residual,
        ridge_used=ridge_used,
    )


def curvature_components(fit: QuadraticFit) -> np.ndarray:
    """
    R[i, j, k, l] = sum_a h^a_ik h^a_jl - h^a_il h^a_jk, shape d x d x d x d.
    """
    products = np.einsum("aik,ajl->ijkl", fit.hessians, fit.hessians)
    # antisymmetric in (k, l) exactly: both terms come from the same array
    return products - products.transpose(0, 1, 3, 2)


def _fit_one(data: DataSet, graph: NeighborGraph, i: int, d: int, ridge: bool) -> tuple[LocalFrame, QuadraticFit]:
    frame = local_frame(data, graph, i, d)
    return frame, quadratic_fit(frame, ridge=ridge)


def fit_patches(data: DataSet, graph: NeighborGraph, d: int, ridge: bool = True, n_jobs: Optional[int] = None) -> PatchFits:
    """Frame and quadratic fit for every point, in point order."""
    n_jobs = resolve_threads(n_jobs)
    if n_jobs == 1:
        results = [_fit_one(data, graph, i, d, ridge) for i in range(data.n)]
    else:
        results = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_fit_one)(data, graph, i, d, ridge) for i in range(data.n)
        )
    frames = [frame for frame, _ in results]
    fits = [fit for _, fit in results]
    ridged = sum(fit.ridge_used for fit in fits)
    if ridged:
        logger.info("Ridge fallback used on %d of %d patches", ridged, data.n)
    return PatchFits(frames=frames, fits=fits, d=d)


def curvature_from_fits(fits: List[QuadraticFit], with_components: bool = False) -> CurvatureField:
    values = np.array([fit.total_curvature for fit in fits])
    residuals = np.array([fit.residual for fit in fits])
    d = fits[0].hessians.shape[1] if fits else 0

    components = None
    sectional = None
    if with_components or d == 2:
        all_components = np.array([curvature_components(fit) for fit in fits])
        if d == 2:
            sectional = all_components[:, 0, 1, 0, 1].copy()
        if with_components:
            components = all_components
    return CurvatureField(values=values, residuals=residuals, sectional=sectional, components=components)


def curvature_field(
    data: DataSet,
    graph: NeighborGraph,
    d: int,
    with_components: bool = False,
    ridge: bool = True,
    n_jobs: Optional[int] = None,
) -> CurvatureField:
    patches = fit_patches(data, graph, d, ridge=ridge, n_jobs=n_jobs)
    return curvature_from_fits(patches.fits, with_components=with_components)


def curvature_field_frame(field: CurvatureField) -> pd.DataFrame:
    df = pd.DataFrame({"point": np.arange(field.values.size), "curvature": field.values, "residual": field.residuals})
    if field.sectional is not None:
        df["sectional"] = field.sectional
    return df
