import os
import tempfile
from contextlib import contextmanager
from typing import Iterator, List

import numpy as np

from src.errors import ConfigError

THREADS_ENV_VAR = "CAML_THREADS"
DEFAULT_RANGE_STEP = 10


def fix_signs(matrix: np.ndarray) -> np.ndarray:
    """Flip columns so that each column's largest-magnitude entry is positive."""
    matrix = np.array(matrix, dtype=float, copy=True)
    if matrix.size == 0:
        return matrix
    pivots = np.argmax(np.abs(matrix), axis=0)
    signs = np.sign(matrix[pivots, np.arange(matrix.shape[1])])
    signs[signs == 0] = 1.0
    return matrix * signs


def median_positive(values: np.ndarray, fallback: float = 1.0) -> float:
    values = np.asarray(values, dtype=float)
    positive = values[values > 0]
    if positive.size == 0:
        return fallback
    return float(np.median(positive))


def resolve_threads(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got '{raw}'")


def parse_int_list(text: str) -> List[int]:
    """
    Parse "10,20,30", "10..70" (step 10) or "10..70:5" into a list of ints.
    """
    text = text.strip()
    try:
        if ".." in text:
            bounds, _, step = text.partition(":")
            start, stop = (int(part) for part in bounds.split(".."))
            step_value = int(step) if step else DEFAULT_RANGE_STEP
            if step_value <= 0 or stop < start:
                raise ValueError(text)
            return list(range(start, stop + 1, step_value))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse integer list '{text}'")


@contextmanager
def atomic_write(path: str, mode: str = "w") -> Iterator:
    """
    Write to a temporary file next to `path` and rename it into place on success.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    text_kwargs = {} if "b" in mode else {"encoding": "utf-8", "newline": ""}
    handle = tempfile.NamedTemporaryFile(mode=mode, dir=directory, delete=False, suffix=".tmp", **text_kwargs)
    try:
        with handle:
            yield handle
        os.replace(handle.name, path)
    except BaseException:
        try:
            os.unlink(handle.name)
        except OSError:
            pass
        raise
