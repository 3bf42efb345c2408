"""
Quantitative assessment: neighborhood preserving ratio, curvature histograms,
neighbor-size sweeps and the nearest-neighbor classification protocol.
"""
import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.spatial.distance import cdist

from src.DataSet import DataSet
from src.RunConfig import ALGORITHMS, RunConfig
from src.datasets import GenSpec, generate, make_rng
from src.embedding import Embedding
from src.errors import CamlError, ConfigError, DataValidationError, SweepCellError
from src.localgeom import CurvatureField
from src.neighborhood import knn_graph
from src.pipeline import run_embedding
from src.utils import resolve_threads

logger = logging.getLogger(__name__)

# curvature values below this are indistinguishable from a flat patch
FLAT_CURVATURE = 1e-8

PointsLike = Union[DataSet, Embedding, np.ndarray]


@dataclass
class NprReport:
    k: int
    value: float
    per_point: np.ndarray


@dataclass
class CurvatureHistogram:
    counts: np.ndarray
    edges: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"left": self.edges[:-1], "right": self.edges[1:], "count": self.counts})


@dataclass
class SweepReport:
    ks: List[int]
    algorithms: List[str]
    seeds: List[int]
    cells: Dict[Tuple[str, int, int], float]

    @property
    def rows(self) -> pd.DataFrame:
        """Seed-averaged NPR, one row per algorithm and one column per K."""
        table = {
            k: [float(np.mean([self.cells[(alg, k, seed)] for seed in self.seeds])) for alg in self.algorithms]
            for k in self.ks
        }
        df = pd.DataFrame(table, index=self.algorithms)
        df.index.name = "algorithm"
        return df

    def cells_frame(self) -> pd.DataFrame:
        records = [
            {"algorithm": alg, "k": k, "seed": seed, "npr": value}
            for (alg, k, seed), value in sorted(self.cells.items())
        ]
        return pd.DataFrame(records)


@dataclass
class ClassificationReport:
    accuracy: float
    predictions: np.ndarray


def _as_points(value: PointsLike) -> DataSet:
    if isinstance(value, DataSet):
        return value
    if isinstance(value, Embedding):
        return value.as_dataset()
    return DataSet(points=np.asarray(value, dtype=float))


def npr(X: PointsLike, Y: PointsLike, k: int) -> NprReport:
    """
    Mean fraction of each point's K nearest neighbors in X that remain among
    its K nearest neighbors in Y.
    """
    x, y = _as_points(X), _as_points(Y)
    if x.n != y.n:
        raise DataValidationError(f"size mismatch: X has {x.n} points, Y has {y.n}")
    before = knn_graph(x, k).neighbors
    after = knn_graph(y, k).neighbors
    per_point = np.array(
        [np.intersect1d(a, b, assume_unique=True).size / k for a, b in zip(before, after)]
    )
    return NprReport(k=k, value=float(per_point.mean()), per_point=per_point)


def curvature_histogram(
    field: Union[CurvatureField, np.ndarray],
    bins: int,
    value_range: Optional[Tuple[float, float]] = None,
) -> CurvatureHistogram:
    if bins < 1:
        raise ConfigError(f"bins must be >= 1, got {bins}")
    values = field.values if isinstance(field, CurvatureField) else np.asarray(field, dtype=float)
    if value_range is None:
        upper = max(float(values.max()) if values.size else 0.0, FLAT_CURVATURE)
        value_range = (0.0, upper)
    counts, edges = np.histogram(np.clip(values, *value_range), bins=bins, range=value_range)
    return CurvatureHistogram(counts=counts, edges=edges)


def _check_algorithms(algorithms: Iterable[str]) -> List[str]:
    algorithms = list(algorithms)
    unknown = [alg for alg in algorithms if alg not in ALGORITHMS]
    if unknown:
        raise ConfigError(f"unknown algorithm(s): {', '.join(unknown)}")
    if not algorithms:
        raise ConfigError("at least one algorithm is required")
    return algorithms


def _cell(data: DataSet, algorithm: str, k: int, seed: int, base: RunConfig) -> float:
    config = replace(base, algorithm=algorithm, k=k, n_jobs=1)
    try:
        result = run_embedding(data, config)
        return npr(data, result.embedding, k).value
    except CamlError as e:
        raise SweepCellError(algorithm, k, seed, e) from e


def _run_cells(jobs: List[Tuple[DataSet, str, int, int]], base: RunConfig, n_jobs: Optional[int]) -> List[float]:
    n_jobs = resolve_threads(n_jobs)
    if n_jobs == 1:
        return [_cell(data, alg, k, seed, base) for data, alg, k, seed in jobs]
    return Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_cell)(data, alg, k, seed, base) for data, alg, k, seed in jobs
    )


def k_sweep(
    spec: GenSpec,
    algorithms: Sequence[str],
    ks: Sequence[int],
    seeds: Sequence[int],
    d: int = 2,
    config: Optional[RunConfig] = None,
    n_jobs: Optional[int] = None,
) -> SweepReport:
    """
    For every (algorithm, K, seed): generate, embed to d dimensions, score NPR at the same K.
    """
    algorithms = _check_algorithms(algorithms)
    ks, seeds = list(ks), list(seeds)
    if not ks:
        raise ConfigError("ks must be nonempty")
    if not seeds:
        raise ConfigError("seeds must be nonempty")
    base = replace(config or RunConfig(), d=d)

    datasets = {seed: generate(spec.with_seed(seed)) for seed in seeds}
    keys = [(alg, k, seed) for alg in algorithms for k in ks for seed in seeds]
    logger.info("Sweep on %s: %d cells", spec.kind, len(keys))
    values = _run_cells([(datasets[seed], alg, k, seed) for alg, k, seed in keys], base, n_jobs)
    return SweepReport(ks=ks, algorithms=algorithms, seeds=seeds, cells=dict(zip(keys, values)))


def npr_table(
    specs: Sequence[GenSpec],
    algorithms: Sequence[str],
    k: int,
    seeds: Sequence[int],
    d: int = 2,
    config: Optional[RunConfig] = None,
    n_jobs: Optional[int] = None,
) -> pd.DataFrame:
    """Seed-averaged NPR, one row per algorithm and one column per dataset."""
    algorithms = _check_algorithms(algorithms)
    seeds = list(seeds)
    base = replace(config or RunConfig(), d=d)
    table = {}
    for spec in specs:
        print(f"> Comparing algorithms on {spec.kind}")
        datasets = {seed: generate(spec.with_seed(seed)) for seed in seeds}
        jobs = [(datasets[seed], alg, k, seed) for alg in algorithms for seed in seeds]
        values = np.array(_run_cells(jobs, base, n_jobs)).reshape(len(algorithms), len(seeds))
        table[spec.kind] = values.mean(axis=1)
    df = pd.DataFrame(table, index=algorithms)
    df.index.name = "algorithm"
    return df


def knn_classify(train: DataSet, test: DataSet, k: int = 1) -> ClassificationReport:
    """
    K-nearest-neighbor majority vote; ties go to the class of the nearest tied neighbor.
    """
    if train.labels is None or test.labels is None:
        raise DataValidationError("classification needs labels on both train and test data")
    if train.dim != test.dim:
        raise DataValidationError(f"dimension mismatch: train D={train.dim}, test D={test.dim}")
    if not 1 <= k <= train.n:
        raise ConfigError(f"k must be in [1, {train.n}], got {k}")

    distances = cdist(test.points, train.points, metric="euclidean")
    order = np.argsort(distances, axis=1, kind="stable")[:, :k]
    nearest_labels = train.labels[order]

    predictions = np.empty(test.n, dtype=np.int64)
    for row, labels in enumerate(nearest_labels):
        classes, first_seen, counts = np.unique(labels, return_index=True, return_counts=True)
        tied = counts == counts.max()
        predictions[row] = classes[tied][np.argmin(first_seen[tied])]
    accuracy = float(np.mean(predictions == test.labels)) if test.n else 0.0
    return ClassificationReport(accuracy=accuracy, predictions=predictions)


def embed_for_classification(data: DataSet, config: Optional[RunConfig]) -> DataSet:
    """Embed all points jointly; None keeps the raw coordinates."""
    if config is None:
        return data
    result = run_embedding(data, config)
    return result.embedding.as_dataset(labels=data.labels, name=f"{data.name}:{config.algorithm}")


def embed_and_classify(train: DataSet, test: DataSet, config: Optional[RunConfig], k: int = 1) -> ClassificationReport:
    if train.labels is None or test.labels is None:
        raise DataValidationError("classification needs labels on both train and test data")
    joint = DataSet(
        points=np.vstack([train.points, test.points]),
        labels=np.concatenate([train.labels, test.labels]),
        name="train+test",
    )
    embedded = embed_for_classification(joint, config)
    n_train = train.n
    return knn_classify(
        embedded.subset(np.arange(n_train)),
        embedded.subset(np.arange(n_train, joint.n)),
        k=k,
    )


def classification_protocol(
    data: DataSet,
    config: Optional[RunConfig],
    train_per_class: Sequence[int],
    trials: int = 5,
    seed: int = 0,
    k: int = 1,
) -> pd.DataFrame:
    """
    Embed once, then for each training size draw that many points per class
    for training, test on the rest, and repeat over random splits.
    """
    if data.labels is None:
        raise DataValidationError("classification protocol needs labeled data")
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    embedded = embed_for_classification(data, config)
    classes = np.unique(data.labels)
    members = {c: np.flatnonzero(data.labels == c) for c in classes}
    smallest = min(len(idx) for idx in members.values())

    rng = make_rng(seed)
    records = []
    for p in train_per_class:
        if not 1 <= p < smallest:
            raise ConfigError(f"train size per class must be in [1, {smallest - 1}], got {p}")
        accuracies = []
        for _ in range(trials):
            train_idx, test_idx = [], []
            for c in classes:
                shuffled = rng.permutation(members[c])
                train_idx.append(shuffled[:p])
                test_idx.append(shuffled[p:])
            train = embedded.subset(np.sort(np.concatenate(train_idx)))
            test = embedded.subset(np.sort(np.concatenate(test_idx)))
            accuracies.append(knn_classify(train, test, k=k).accuracy)
        records.append(
            {
                "algorithm": "raw" if config is None else config.algorithm,
                "train_per_class": p,
                "trials": trials,
                "mean_accuracy": float(np.mean(accuracies)),
                "std_accuracy": float(np.std(accuracies)),
            }
        )
    return pd.DataFrame(records)
