import json
import logging
import re
from typing import Optional

import numpy as np
import pandas as pd

from src.DataSet import DataSet, dataset_from_frame
from src.errors import CsvFormatError, FileIOError
from src.utils import atomic_write

logger = logging.getLogger(__name__)

LABELS_HEADER = "# labels=last"
FLOAT_FORMAT = "%.17g"


def _read_header(path: str) -> bool:
    try:
        with open(path, "r", encoding="utf-8") as f:
            first_line = f.readline()
    except OSError as e:
        raise FileIOError(f"cannot read {path}: {e.strerror or e}")
    if not first_line.strip():
        raise CsvFormatError(f"empty file {path}", line=1)
    return first_line.strip().replace(" ", "") == LABELS_HEADER.replace(" ", "")


def load_csv(path: str, name: Optional[str] = None) -> DataSet:
    """
    Load a point cloud CSV into a DataSet.

    Args:
        path (str): Comma-separated reals, one point per row. A first line
            "# labels=last" marks the final column as integer labels.
        name (Optional[str]): Name tag for the DataSet, defaults to the path.

    Returns:
        DataSet: The loaded points and labels.
    """
    print(f"- Reading point cloud {path}...")
    has_labels = _read_header(path)
    offset = 1 if has_labels else 0

    try:
        df = pd.read_csv(
            path,
            header=None,
            skiprows=offset,
            dtype=str,
            na_filter=False,
            skip_blank_lines=False,
        )
    except pd.errors.EmptyDataError:
        raise CsvFormatError(f"empty file {path}", line=offset + 1)
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        line = int(match.group(1)) if match else None
        raise CsvFormatError(f"ragged row at line {line if line is not None else '?'}", line=line)

    # The trailing newline of the last row is not a row of its own
    while len(df) and (df.iloc[-1] == "").all():
        df = df.iloc[:-1]
    if df.empty:
        raise CsvFormatError(f"empty file {path}", line=offset + 1)

    # Short rows come back padded with empty (or NaN) trailing cells
    missing = (df.isna() | (df == "")).to_numpy()
    bad_rows = np.flatnonzero(missing.any(axis=1))
    if bad_rows.size:
        row = int(bad_rows[0])
        line = row + 1 + offset
        first = int(np.argmax(missing[row]))
        if missing[row, first:].all():
            raise CsvFormatError(f"ragged row at line {line}", line=line)
        raise CsvFormatError(f"empty cell at line {line}", line=line)

    stripped = df.apply(lambda column: column.str.strip())
    # to_numeric only locates bad cells; its fast parser is not correctly rounded
    bad = np.argwhere(stripped.apply(pd.to_numeric, errors="coerce").isna().to_numpy())
    if bad.size:
        row, col = bad[0]
        line = int(row) + 1 + offset
        raise CsvFormatError(f"non-numeric cell '{df.iat[row, col]}' at line {line}", line=line)

    values = stripped.astype(float)
    matrix = values.to_numpy()
    if has_labels:
        if matrix.shape[1] < 2:
            raise CsvFormatError("labeled file needs at least one coordinate column and a label column")
        labels = matrix[:, -1]
        if not np.all(labels == np.round(labels)):
            raise CsvFormatError("label column must hold integers")
        matrix = matrix[:, :-1]

    if not np.all(np.isfinite(matrix)):
        raise CsvFormatError("non-finite coordinate in file")

    return dataset_from_frame(values, name=name or path, has_labels=has_labels)


def save_csv(dataset: DataSet, path: str) -> None:
    """
    Save a DataSet as CSV, flagging a label column with the "# labels=last" header.
    """
    print(f"- Saving point cloud to {path}...")
    df = dataset.to_frame()
    try:
        with atomic_write(path) as f:
            if dataset.labels is not None:
                f.write(LABELS_HEADER + "\n")
            df.to_csv(f, header=False, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise FileIOError(f"cannot write {path}: {e.strerror or e}")


def save_frame(df: pd.DataFrame, path: str, index: bool = False) -> None:
    """Save a report table (NPR grid, histogram, curvature field, weights) as CSV."""
    print(f"- Saving report to {path}...")
    try:
        with atomic_write(path) as f:
            df.to_csv(f, index=index, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        raise FileIOError(f"cannot write {path}: {e.strerror or e}")


def load_frame(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path)
    except OSError as e:
        raise FileIOError(f"cannot read report {path}: {e.strerror or e}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise CsvFormatError(f"malformed report {path}: {e}")


def metadata_path(output_path: str) -> str:
    return f"{output_path}.meta.jsonl"


def write_metadata(record: dict, output_path: str) -> str:
    """
    Write the JSON-lines sidecar that describes how an output file was produced.
    """
    path = metadata_path(output_path)
    try:
        with atomic_write(path) as f:
            f.write(json.dumps(record, sort_keys=True, default=_json_default) + "\n")
    except OSError as e:
        raise FileIOError(f"cannot write {path}: {e.strerror or e}")
    logger.debug("Wrote metadata sidecar %s", path)
    return path


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"cannot serialize {type(value).__name__}")
