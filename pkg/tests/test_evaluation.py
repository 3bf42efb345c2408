"""
Tests for NPR, curvature histograms, neighbor-size sweeps and classification.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.DataSet import DataSet
from src.RunConfig import DEFAULT_SEEDS, SWEEP_KS, RunConfig
from src.datasets import GenSpec, generate
from src.errors import ConfigError, DataValidationError, SweepCellError
from src.evaluation import (
    classification_protocol,
    curvature_histogram,
    embed_and_classify,
    k_sweep,
    knn_classify,
    npr,
    npr_table,
)
from src.localgeom import curvature_field
from src.neighborhood import knn_graph
from src.pipeline import run_embedding


def _random_points(seed: int, n: int, dim: int) -> np.ndarray:
    return np.random.Generator(np.random.PCG64(seed)).random((n, dim))


def _brute_force_npr(x: np.ndarray, y: np.ndarray, k: int) -> float:
    def neighbor_sets(points):
        dist = np.sqrt(((points[:, None, :] - points[None, :, :]) ** 2).sum(axis=-1))
        np.fill_diagonal(dist, np.inf)
        return [set(row[:k]) for row in np.argsort(dist, axis=1, kind="stable")]

    total = sum(len(a & b) for a, b in zip(neighbor_sets(x), neighbor_sets(y)))
    return total / (k * x.shape[0])


class TestNpr:
    """Neighborhood preserving ratio."""

    @pytest.mark.parametrize("k", [1, 5, 10])
    def test_identity_embedding(self, small_sphere, k):
        assert npr(small_sphere, small_sphere, k).value == 1.0

    @given(seed=st.integers(min_value=0, max_value=10_000), k=st.sampled_from([1, 5, 10]))
    @settings(max_examples=20, deadline=None)
    def test_matches_brute_force(self, seed, k):
        x, y = _random_points(seed, 50, 3), _random_points(seed + 1, 50, 2)
        report = npr(x, y, k)
        assert report.value == pytest.approx(_brute_force_npr(x, y, k), abs=1e-15)
        assert 0.0 <= report.value <= 1.0
        assert report.value == pytest.approx(report.per_point.mean())

    def test_similarity_invariance(self):
        x, y = _random_points(0, 200, 3), _random_points(1, 200, 2)
        angle = 0.7
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        moved = 3.0 * y @ rotation.T + np.array([5.0, -2.0])
        assert npr(x, moved, 10).value == npr(x, y, 10).value

    def test_shuffled_rows_are_near_chance(self):
        x = _random_points(2, 400, 3)
        shuffled = x[np.random.Generator(np.random.PCG64(3)).permutation(400)]
        value = npr(x, shuffled, 10).value
        assert value < 0.08  # chance level is 10 / 399

    def test_size_mismatch(self):
        with pytest.raises(DataValidationError):
            npr(_random_points(0, 20, 3), _random_points(0, 21, 2), 5)

    def test_accepts_embeddings(self, gaussian_surface):
        result = run_embedding(gaussian_surface, RunConfig(algorithm="pca", d=2))
        assert 0.0 < npr(gaussian_surface, result.embedding, 10).value <= 1.0


class TestCurvatureHistogram:
    """Binning of per-point curvature."""

    def test_counts_every_point(self, small_sphere, sphere_graphs):
        directed, _ = sphere_graphs
        field = curvature_field(small_sphere, directed, 2)
        hist = curvature_histogram(field, 30)
        assert hist.counts.sum() == small_sphere.n
        assert len(hist.edges) == 31

    def test_flat_plane_lands_in_the_first_bin(self, plane):
        field = curvature_field(plane, knn_graph(plane, 10), 2)
        hist = curvature_histogram(field, 10)
        assert hist.counts[0] == plane.n

    def test_unit_sphere_concentrates_near_two(self, unit_sphere):
        field = curvature_field(unit_sphere, knn_graph(unit_sphere, 10), 2)
        hist = curvature_histogram(field, 3, value_range=(0.5, 3.5))
        assert hist.counts[1] >= 0.8 * unit_sphere.n

    def test_bins_must_be_positive(self):
        with pytest.raises(ConfigError):
            curvature_histogram(np.ones(5), 0)

    def test_frame_export(self):
        df = curvature_histogram(np.array([0.0, 1.0, 2.0]), 2).to_frame()
        assert list(df.columns) == ["left", "right", "count"]
        assert df["count"].tolist() == [1, 2]


class TestKSweep:
    """Neighbor-size sweeps."""

    SPEC = GenSpec(kind="gaussian", n=300)

    def test_single_cell_matches_manual_pipeline(self):
        report = k_sweep(self.SPEC, ["lep"], [10], [3])
        data = generate(self.SPEC.with_seed(3))
        manual = run_embedding(data, RunConfig(algorithm="lep", k=10, d=2))
        assert report.cells[("lep", 10, 3)] == npr(data, manual.embedding, 10).value

    def test_cells_are_reproducible(self):
        a = k_sweep(self.SPEC, ["lep", "ca-lep"], [8, 12], [0, 1])
        b = k_sweep(self.SPEC, ["lep", "ca-lep"], [8, 12], [0, 1])
        assert a.cells == b.cells

    def test_threads_do_not_change_results(self):
        serial = k_sweep(self.SPEC, ["lle", "ca-lle"], [10], [0, 1], n_jobs=1)
        threaded = k_sweep(self.SPEC, ["lle", "ca-lle"], [10], [0, 1], n_jobs=2)
        assert serial.cells == threaded.cells

    def test_rows_table_shape(self):
        report = k_sweep(self.SPEC, ["pca", "lep"], [10, 15, 20], [0])
        rows = report.rows
        assert rows.shape == (2, 3)
        assert list(rows.index) == ["pca", "lep"]
        assert ((rows >= 0) & (rows <= 1)).all().all()
        assert len(report.cells_frame()) == 6

    def test_failing_cell_is_annotated(self):
        with pytest.raises(SweepCellError) as excinfo:
            k_sweep(GenSpec(kind="gaussian", n=30), ["lep"], [40], [2])
        err = excinfo.value
        assert (err.algorithm, err.k, err.seed) == ("lep", 40, 2)
        assert err.exit_code == 2

    def test_unknown_algorithm(self):
        with pytest.raises(ConfigError):
            k_sweep(self.SPEC, ["isomap"], [10], [0])

    def test_npr_table(self):
        specs = [GenSpec(kind="gaussian", n=300), GenSpec(kind="twin-peaks", n=300)]
        table = npr_table(specs, ["lep", "ca-lep"], 10, [0])
        assert table.shape == (2, 2)
        assert list(table.columns) == ["gaussian", "twin-peaks"]


class TestClassification:
    """Nearest-neighbor accuracy."""

    def test_test_equal_to_train(self):
        data = generate(GenSpec(kind="blobs", n=50))
        assert knn_classify(data, data).accuracy == 1.0

    def test_well_separated_blobs(self):
        data = generate(GenSpec(kind="blobs", n=400, seed=1))
        train, test = data.subset(np.arange(200)), data.subset(np.arange(200, 400))
        assert knn_classify(train, test).accuracy >= 0.95

    def test_single_training_point(self):
        train = DataSet(points=np.array([[0.0, 0.0]]), labels=np.array([4]))
        test = DataSet(points=_random_points(0, 10, 2), labels=np.arange(10))
        assert knn_classify(train, test).predictions.tolist() == [4] * 10

    def test_distance_ties_go_to_the_lower_index(self):
        train = DataSet(points=np.array([[-1.0], [1.0]]), labels=np.array([5, 3]))
        test = DataSet(points=np.array([[0.0]]), labels=np.array([5]))
        assert knn_classify(train, test).predictions.tolist() == [5]

    def test_vote_ties_go_to_the_nearest_class(self):
        train = DataSet(points=np.array([[0.0], [2.0]]), labels=np.array([1, 0]))
        test = DataSet(points=np.array([[0.9]]), labels=np.array([0]))
        assert knn_classify(train, test, k=2).predictions.tolist() == [1]

    def test_majority_vote(self):
        train = DataSet(points=np.array([[0.0], [0.1], [0.2], [5.0]]), labels=np.array([1, 0, 0, 1]))
        test = DataSet(points=np.array([[0.0]]), labels=np.array([0]))
        assert knn_classify(train, test, k=3).predictions.tolist() == [0]

    def test_missing_labels(self):
        data = DataSet(points=np.zeros((3, 2)))
        with pytest.raises(DataValidationError, match="labels"):
            knn_classify(data, data)

    def test_embed_then_classify(self):
        data = generate(GenSpec(kind="blobs", n=200, seed=2))
        train, test = data.subset(np.arange(100)), data.subset(np.arange(100, 200))
        report = embed_and_classify(train, test, RunConfig(algorithm="pca", d=2))
        assert report.accuracy >= 0.95

    def test_protocol_reports_mean_and_std(self):
        data = generate(GenSpec(kind="blobs", n=200, seed=3))
        table = classification_protocol(data, None, [5, 10], trials=3, seed=0)
        assert table["train_per_class"].tolist() == [5, 10]
        assert (table["mean_accuracy"] >= 0.9).all()
        assert (table["std_accuracy"] >= 0).all()

    def test_protocol_is_seeded(self):
        data = generate(GenSpec(kind="blobs", n=200, seed=3))
        config = RunConfig(algorithm="pca", d=2)
        a = classification_protocol(data, config, [5], trials=4, seed=9)
        b = classification_protocol(data, config, [5], trials=4, seed=9)
        assert a.equals(b)

    def test_protocol_train_size_too_large(self):
        data = generate(GenSpec(kind="blobs", n=20))
        with pytest.raises(ConfigError):
            classification_protocol(data, None, [10])


@pytest.mark.slow
class TestBenchmarks:
    """Seed-averaged comparisons at full benchmark size."""

    def test_curvature_aware_variants_lead_on_curved_datasets(self):
        specs = [GenSpec(kind=kind, n=2000) for kind in ("punctured-sphere", "twin-peaks", "swiss-roll")]
        table = npr_table(specs, ["lep", "ca-lep", "lle", "ca-lle"], 10, DEFAULT_SEEDS)
        for kind in ("punctured-sphere", "twin-peaks"):
            assert table.loc["ca-lep", kind] >= table.loc["lep", kind] + 0.02
            assert table.loc["ca-lle", kind] >= table.loc["lle", kind] + 0.02
        assert abs(table.loc["ca-lle", "swiss-roll"] - table.loc["lle", "swiss-roll"]) <= 0.1
        assert 0.67 <= table.loc["ca-lep", "punctured-sphere"] <= 0.87

    def test_twin_peaks_sweep_is_stable_in_k(self):
        report = k_sweep(GenSpec(kind="twin-peaks", n=2000), ["ca-lep"], SWEEP_KS, DEFAULT_SEEDS)
        rows = report.rows
        assert rows.loc["ca-lep", 70] >= rows.loc["ca-lep", 10] - 0.02
