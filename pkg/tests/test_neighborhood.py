"""
Tests for exact K-NN and epsilon-ball graphs and union symmetrization.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.DataSet import DataSet
from src.errors import ConfigError, GraphError
from src.neighborhood import eps_graph, knn_graph, symmetrize


def _line(n: int) -> DataSet:
    return DataSet(points=np.arange(n, dtype=float).reshape(-1, 1))


def _brute_force_neighbors(points: np.ndarray, k: int) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=-1))
    np.fill_diagonal(dist, np.inf)
    return np.argsort(dist, axis=1, kind="stable")[:, :k]


class TestKnnGraph:
    """Neighbor sets, ordering and tie-breaking."""

    def test_ties_go_to_the_lower_index(self):
        graph = knn_graph(_line(10), 2)
        assert graph.neighbors[5].tolist() == [4, 6]
        assert graph.neighbors[0].tolist() == [1, 2]
        assert graph.distances[5].tolist() == [1.0, 1.0]

    def test_never_contains_self(self, small_sphere):
        graph = knn_graph(small_sphere, 10)
        assert all(i not in nb for i, nb in enumerate(graph.neighbors))
        assert graph.edge_count == small_sphere.n * 10

    @given(seed=st.integers(min_value=0, max_value=10_000), k=st.sampled_from([1, 5, 10]))
    @settings(max_examples=20, deadline=None)
    def test_matches_brute_force(self, seed, k):
        points = np.random.Generator(np.random.PCG64(seed)).random((50, 3))
        graph = knn_graph(DataSet(points=points), k)
        assert np.array_equal(np.array(graph.neighbors), _brute_force_neighbors(points, k))

    def test_distances_are_ascending(self, small_sphere):
        graph = knn_graph(small_sphere, 10)
        assert all(np.all(np.diff(d) >= 0) for d in graph.distances)

    def test_blocks_do_not_change_the_result(self, monkeypatch):
        points = np.random.Generator(np.random.PCG64(0)).random((120, 2))
        expected = knn_graph(DataSet(points=points), 4).neighbors
        monkeypatch.setattr("src.neighborhood.BLOCK_SIZE", 7)
        blocked = knn_graph(DataSet(points=points), 4).neighbors
        assert all(np.array_equal(a, b) for a, b in zip(expected, blocked))

    @pytest.mark.parametrize("k", [0, 10])
    def test_k_out_of_range(self, k):
        with pytest.raises(ConfigError):
            knn_graph(_line(10), k)

    def test_needs_two_points(self):
        with pytest.raises(ConfigError):
            knn_graph(_line(1), 1)


class TestEpsGraph:
    """Fixed-radius neighborhoods."""

    def test_unit_radius_on_a_line(self):
        graph = eps_graph(_line(5), 1.0)
        assert [nb.tolist() for nb in graph.neighbors] == [[1], [0, 2], [1, 3], [2, 4], [3]]

    def test_tiny_radius_gives_an_empty_graph(self):
        graph = eps_graph(_line(5), 0.5)
        assert graph.is_empty
        with pytest.raises(GraphError):
            graph.require_nonempty()

    def test_non_positive_radius(self):
        with pytest.raises(ConfigError):
            eps_graph(_line(5), 0.0)

    def test_matches_brute_force_scan(self):
        points = np.random.Generator(np.random.PCG64(5)).random((200, 3))
        dist = np.sqrt(np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1))
        eps = float(np.median(dist[np.triu_indices(200, k=1)]))
        graph = eps_graph(DataSet(points=points), eps)
        for i, nb in enumerate(graph.neighbors):
            expected = {j for j in range(200) if j != i and dist[i, j] <= eps}
            assert set(nb.tolist()) == expected

    def test_unit_square_corners(self):
        corners = DataSet(points=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
        graph = eps_graph(corners, 1.0)
        # sides have length 1, diagonals sqrt(2)
        assert [nb.tolist() for nb in graph.neighbors] == [[1, 2], [0, 3], [0, 3], [1, 2]]
        assert graph.is_symmetric()


class TestSymmetrize:
    """Union rule."""

    def test_result_is_symmetric_and_keeps_every_edge(self, sphere_graphs):
        directed, sym = sphere_graphs
        assert sym.is_symmetric()
        for i, nb in enumerate(directed.neighbors):
            assert set(nb.tolist()) <= set(sym.neighbors[i].tolist())
        assert sym.min_degree >= 10

    def test_distances_are_preserved(self, small_sphere, sphere_graphs):
        _, sym = sphere_graphs
        rows, cols, dists = sym.edges()
        expected = np.linalg.norm(small_sphere.points[rows] - small_sphere.points[cols], axis=1)
        np.testing.assert_allclose(dists, expected, rtol=1e-12)

    def test_one_way_edge_becomes_mutual(self):
        # point 3 is far away: its nearest neighbor is 2 but 2 does not pick 3
        data = DataSet(points=np.array([[0.0], [1.0], [2.0], [10.0]]))
        sym = symmetrize(knn_graph(data, 1))
        assert 3 in sym.neighbors[2].tolist()
        assert sym.rule == "union"

    def test_adjacency_pattern(self, sphere_graphs):
        directed, sym = sphere_graphs
        pattern = directed.adjacency()
        assert pattern.nnz == directed.edge_count
        np.testing.assert_array_equal(np.asarray(pattern.sum(axis=1)).ravel(), 10)
        assert not directed.is_symmetric()
        assert (sym.adjacency() != sym.adjacency().T).nnz == 0

    def test_symmetrizing_twice_changes_nothing(self, sphere_graphs):
        _, sym = sphere_graphs
        again = symmetrize(sym)
        assert all(np.array_equal(a, b) for a, b in zip(sym.neighbors, again.neighbors))
        assert all(np.array_equal(a, b) for a, b in zip(sym.distances, again.distances))
