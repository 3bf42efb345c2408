"""
Shared fixtures: small deterministic point clouds and CSV helpers.
"""
# pylint: disable=redefined-outer-name

import json

import numpy as np
import pytest

from src.DataSet import DataSet
from src.csv_processing import metadata_path, save_csv
from src.datasets import GenSpec, generate
from src.neighborhood import knn_graph, symmetrize


@pytest.fixture(scope="session")
def unit_sphere() -> DataSet:
    return generate(GenSpec(kind="unit-sphere", n=2000, seed=0))


@pytest.fixture(scope="session")
def small_sphere() -> DataSet:
    return generate(GenSpec(kind="unit-sphere", n=300, seed=1))


@pytest.fixture(scope="session")
def gaussian_surface() -> DataSet:
    return generate(GenSpec(kind="gaussian", n=400, seed=2))


@pytest.fixture(scope="session")
def plane() -> DataSet:
    """A flat square lying in z = 0."""
    rng = np.random.Generator(np.random.PCG64(3))
    xy = rng.uniform(-1.0, 1.0, size=(300, 2))
    return DataSet(points=np.column_stack([xy, np.zeros(300)]), name="plane")


@pytest.fixture(scope="session")
def sphere_graphs(small_sphere):
    graph = knn_graph(small_sphere, 10)
    return graph, symmetrize(graph)


@pytest.fixture
def two_clusters() -> DataSet:
    """Two tight clusters far enough apart that no K-NN edge joins them."""
    rng = np.random.Generator(np.random.PCG64(4))
    left = rng.normal(0.0, 0.1, size=(30, 3))
    right = rng.normal(0.0, 0.1, size=(30, 3)) + np.array([100.0, 0.0, 0.0])
    return DataSet(points=np.vstack([left, right]), labels=np.repeat([0, 1], 30), name="two-clusters")


@pytest.fixture
def collinear() -> DataSet:
    t = np.linspace(0.0, 1.0, 40)
    return DataSet(points=np.column_stack([t, 2.0 * t, -t]), name="line")


@pytest.fixture
def write_csv(tmp_path):
    """Save a DataSet under tmp_path and return the path as a string."""

    def _write(dataset: DataSet, name: str) -> str:
        path = str(tmp_path / name)
        save_csv(dataset, path)
        return path

    return _write


@pytest.fixture
def read_sidecar():
    """Parse the JSON-lines metadata written next to an output file."""

    def _read(output_path: str) -> list[dict]:
        with open(metadata_path(output_path), "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]

    return _read
