from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from src.errors import DataValidationError

LABEL_COLUMN = "label"


@dataclass
class DataSet:
    points: np.ndarray
    labels: Optional[np.ndarray] = None
    name: str = ""
    # Generator parameters; never fed to the algorithms
    latent: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        if points.ndim != 2 or points.shape[0] < 1 or points.shape[1] < 1:
            raise DataValidationError(f"points must be an N x D matrix with N, D >= 1, got shape {points.shape}")
        if not np.all(np.isfinite(points)):
            raise DataValidationError("points contain non-finite coordinates")
        self.points = points

        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (points.shape[0],):
                raise DataValidationError(f"labels must have length {points.shape[0]}, got shape {labels.shape}")
            if labels.dtype.kind == "f":
                if not np.all(np.isfinite(labels)) or not np.all(labels == np.round(labels)):
                    raise DataValidationError("labels must be integers")
            self.labels = labels.astype(np.int64)

        if self.latent is not None:
            latent = np.asarray(self.latent, dtype=float)
            if latent.shape[0] != points.shape[0]:
                raise DataValidationError("latent parameters must have one row per point")
            self.latent = latent

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    def subset(self, indices: np.ndarray, name: Optional[str] = None) -> "DataSet":
        indices = np.asarray(indices, dtype=np.int64)
        return DataSet(
            points=self.points[indices],
            labels=None if self.labels is None else self.labels[indices],
            name=self.name if name is None else name,
            latent=None if self.latent is None else self.latent[indices],
        )

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.points, columns=[f"x{j + 1}" for j in range(self.dim)])
        if self.labels is not None:
            df[LABEL_COLUMN] = self.labels
        return df


def dataset_from_frame(df: pd.DataFrame, name: str = "", has_labels: bool = False) -> DataSet:
    if has_labels:
        return DataSet(
            points=df.iloc[:, :-1].to_numpy(dtype=float),
            labels=df.iloc[:, -1].to_numpy(),
            name=name,
        )
    return DataSet(points=df.to_numpy(dtype=float), name=name)
