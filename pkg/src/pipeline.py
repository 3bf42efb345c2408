import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from src.DataSet import DataSet
from src.RunConfig import RunConfig
from src.embedding import Embedding, laplacian_embedding, lle_embedding, pca_embedding
from src.localgeom import PatchFits, fit_patches
from src.neighborhood import NeighborGraph, knn_graph, symmetrize
from src.weights import (
    WeightMatrix,
    ca_lep_weights,
    ca_lle_weights,
    lep_weights,
    lle_weights,
    patch_features,
)

logger = logging.getLogger(__name__)


@dataclass
class PipelineResult:
    embedding: Embedding
    weights: Optional[WeightMatrix] = None
    patches: Optional[PatchFits] = None
    metadata: dict = field(default_factory=dict)


class _Timer:
    def __init__(self):
        self.timings: dict[str, float] = {}

    def run(self, stage: str, fn, *args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        self.timings[stage] = round(time.perf_counter() - start, 6)
        return result


def build_weights(
    data: DataSet,
    graph: NeighborGraph,
    config: RunConfig,
    patches: Optional[PatchFits] = None,
    timer: Optional[_Timer] = None,
) -> tuple[WeightMatrix, Optional[PatchFits]]:
    """
    CAML steps 2-3: patch fits (curvature-aware algorithms only) and weights.
    `graph` is the directed K-NN graph; Laplacian weights symmetrize it here.
    """
    timer = timer or _Timer()
    algorithm = config.algorithm
    if algorithm in ("ca-lep", "ca-lle") and patches is None:
        patches = timer.run("fit", fit_patches, data, graph, config.d, ridge=config.ridge, n_jobs=config.n_jobs)

    if algorithm in ("lep", "ca-lep"):
        sym = timer.run("symmetrize", symmetrize, graph)
        if algorithm == "lep":
            weights = timer.run("weights", lep_weights, data, sym, sigma=config.sigma)
        else:
            weights = timer.run(
                "weights",
                ca_lep_weights,
                data,
                sym,
                patches.frames,
                patches.fits,
                sigma=config.sigma,
                sigma_c=config.sigma_c,
                mode=config.curvature_mode,
            )
    elif algorithm == "lle":
        weights = timer.run("weights", lle_weights, data, graph, d=config.d)
    elif algorithm == "ca-lle":
        features = patch_features(data, graph, patches.frames, patches.fits)
        weights = timer.run("weights", ca_lle_weights, data, graph, features)
    else:
        raise ValueError(f"{algorithm} has no weight matrix")
    return weights, patches


def run_embedding(data: DataSet, config: RunConfig, graph: Optional[NeighborGraph] = None) -> PipelineResult:
    """
    Embed `data` into R^d with the configured algorithm (CAML steps 1-4).
    """
    config.validate()
    timer = _Timer()
    weights = None
    patches = None

    if config.algorithm == "pca":
        embedding = timer.run("embed", pca_embedding, data, config.d)
    else:
        if graph is None:
            graph = timer.run("neighbors", knn_graph, data, config.k)
        weights, patches = build_weights(data, graph, config, timer=timer)
        if weights.kind in ("lep", "ca-lep"):
            embedding = timer.run("embed", laplacian_embedding, weights, config.d)
        else:
            embedding = timer.run("embed", lle_embedding, weights, config.d)

    metadata = {
        "algorithm": config.algorithm,
        "dataset": data.name,
        "n": data.n,
        "dim": data.dim,
        "k": config.k,
        "d": config.d,
        "sigma": None if weights is None else weights.sigma,
        "sigma_c": None if weights is None else weights.sigma_c,
        "curvature_mode": config.curvature_mode if config.algorithm == "ca-lep" else None,
        "eigenvalues": embedding.eigenvalues.tolist(),
        "ridge_patches": 0 if patches is None else int(sum(fit.ridge_used for fit in patches.fits)),
        "timings": timer.timings,
    }
    logger.info("Embedded %s with %s (K=%d, d=%d)", data.name, config.algorithm, config.k, config.d)
    return PipelineResult(embedding=embedding, weights=weights, patches=patches, metadata=metadata)
