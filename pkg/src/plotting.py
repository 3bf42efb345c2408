"""
SVG rendering of embeddings, neighbor-size sweeps and curvature histograms.
"""
import logging
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from src.DataSet import DataSet
from src.errors import DataValidationError, FileIOError
from src.evaluation import CurvatureHistogram
from src.utils import atomic_write

logger = logging.getLogger(__name__)

# fixed ids and no timestamp, so identical inputs give identical files
matplotlib.rcParams["svg.hashsalt"] = "caml"
SVG_METADATA = {"Date": None}

POINTS_GID = "points"
HISTOGRAM_GID = "histogram"
FIGSIZE = (6.0, 5.0)


def _save(fig, path: str) -> None:
    print(f"- Saving figure to {path}...")
    try:
        with atomic_write(path, mode="wb") as f:
            fig.savefig(f, format="svg", metadata=SVG_METADATA)
    except OSError as e:
        raise FileIOError(f"cannot write {path}: {e.strerror or e}")
    finally:
        plt.close(fig)


def plot_embedding(
    embedding: DataSet,
    path: str,
    color_values: Optional[np.ndarray] = None,
    title: str = "",
) -> None:
    """
    Scatter the first two coordinates, colored by `color_values`, else by label.
    Every point is one marker inside the group with id "points".
    """
    if embedding.dim < 2:
        raise DataValidationError(f"scatter plot needs a 2-D embedding, got d={embedding.dim}")
    if embedding.dim > 2:
        logger.warning("Embedding has d=%d, plotting the first two coordinates", embedding.dim)
    categorical = color_values is None and embedding.labels is not None
    if categorical:
        color_values = embedding.labels
    if color_values is not None:
        color_values = np.asarray(color_values, dtype=float)
        if color_values.shape != (embedding.n,):
            raise DataValidationError(f"need one color value per point ({embedding.n}), got {color_values.shape}")

    fig, ax = plt.subplots(figsize=FIGSIZE)
    points = ax.scatter(
        embedding.points[:, 0],
        embedding.points[:, 1],
        c=color_values if color_values is not None else "tab:blue",
        cmap=("tab10" if categorical else "viridis") if color_values is not None else None,
        s=8,
        linewidths=0,
    )
    points.set_gid(POINTS_GID)
    ax.set_xlabel("y1")
    ax.set_ylabel("y2")
    ax.set_title(title or embedding.name)
    ax.set_aspect("equal", adjustable="datalim")
    _save(fig, path)


def plot_sweep(rows: pd.DataFrame, path: str, title: str = "NPR vs neighbor size") -> None:
    """One polyline per algorithm (row), K along the columns."""
    if rows.empty:
        raise DataValidationError("sweep table is empty")
    ks = np.array([int(k) for k in rows.columns])
    fig, ax = plt.subplots(figsize=FIGSIZE)
    for algorithm, values in rows.iterrows():
        (line,) = ax.plot(ks, values.to_numpy(dtype=float), marker="o", label=str(algorithm))
        line.set_gid(f"sweep-{algorithm}")
    ax.set_xlabel("K")
    ax.set_ylabel("NPR")
    ax.set_ylim(0.0, 1.0)
    ax.set_title(title)
    ax.legend()
    _save(fig, path)


def plot_histogram(histogram: CurvatureHistogram, path: str, title: str = "Curvature distribution") -> None:
    fig, ax = plt.subplots(figsize=FIGSIZE)
    widths = np.diff(histogram.edges)
    bars = ax.bar(histogram.edges[:-1], histogram.counts, width=widths, align="edge", edgecolor="black")
    for i, bar in enumerate(bars):
        bar.set_gid(f"{HISTOGRAM_GID}-{i}")
    ax.set_xlabel("total squared curvature")
    ax.set_ylabel("points")
    ax.set_title(title)
    _save(fig, path)
