"""
Tests for SVG figures.
"""

import xml.etree.ElementTree as ET

import numpy as np
import pandas as pd
import pytest

from src.DataSet import DataSet
from src.errors import DataValidationError
from src.evaluation import curvature_histogram
from src.plotting import POINTS_GID, plot_embedding, plot_histogram, plot_sweep

SVG = "{http://www.w3.org/2000/svg}"


def _group(root: ET.Element, gid: str) -> ET.Element:
    matches = [el for el in root.iter() if el.get("id") == gid]
    assert len(matches) == 1, f"expected one element with id {gid}"
    return matches[0]


def count_markers(path) -> int:
    """Markers are <use> references when matplotlib shares one marker path, else one <path> each."""
    group = _group(ET.parse(path).getroot(), POINTS_GID)
    uses = group.findall(f".//{SVG}use")
    if uses:
        return len(uses)
    return len([p for p in group.iter(f"{SVG}path") if p not in group.findall(f".//{SVG}defs/{SVG}path")])


@pytest.fixture
def embedding_2d() -> DataSet:
    rng = np.random.Generator(np.random.PCG64(0))
    return DataSet(points=rng.normal(size=(60, 2)), labels=np.repeat([0, 1, 2], 20), name="demo")


class TestPlotEmbedding:
    """2-D scatter."""

    def test_one_marker_per_point(self, tmp_path, embedding_2d):
        path = tmp_path / "emb.svg"
        plot_embedding(embedding_2d, str(path))
        assert count_markers(path) == embedding_2d.n

    def test_color_by_latent_values(self, tmp_path, embedding_2d):
        path = tmp_path / "emb.svg"
        plot_embedding(embedding_2d, str(path), color_values=np.linspace(0.0, 1.0, embedding_2d.n))
        assert count_markers(path) == embedding_2d.n

    def test_identical_inputs_give_identical_files(self, tmp_path, embedding_2d):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        plot_embedding(embedding_2d, str(a))
        plot_embedding(embedding_2d, str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_needs_two_columns(self, tmp_path):
        with pytest.raises(DataValidationError):
            plot_embedding(DataSet(points=np.zeros((5, 1))), str(tmp_path / "x.svg"))

    def test_color_length_mismatch(self, tmp_path, embedding_2d):
        with pytest.raises(DataValidationError):
            plot_embedding(embedding_2d, str(tmp_path / "x.svg"), color_values=np.zeros(3))


class TestOtherFigures:
    """Sweep polylines and histogram bars."""

    def test_sweep_has_one_line_per_algorithm(self, tmp_path):
        rows = pd.DataFrame({10: [0.5, 0.6], 20: [0.55, 0.65]}, index=pd.Index(["lep", "ca-lep"], name="algorithm"))
        path = tmp_path / "sweep.svg"
        plot_sweep(rows, str(path))
        root = ET.parse(path).getroot()
        _group(root, "sweep-lep")
        _group(root, "sweep-ca-lep")

    def test_histogram_has_one_bar_per_bin(self, tmp_path):
        hist = curvature_histogram(np.linspace(0.0, 2.0, 100), 8)
        path = tmp_path / "hist.svg"
        plot_histogram(hist, str(path))
        ids = [el.get("id") for el in ET.parse(path).getroot().iter() if (el.get("id") or "").startswith("histogram-")]
        assert len(ids) == 8
