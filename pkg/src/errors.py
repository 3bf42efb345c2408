from typing import Optional


class CamlError(Exception):
    exit_code = 1


class ConfigError(CamlError):
    exit_code = 2


class DataValidationError(CamlError):
    exit_code = 2


class GraphError(CamlError):
    exit_code = 3


class DisconnectedGraphError(GraphError):
    def __init__(self, n_components: int):
        super().__init__(f"graph is disconnected ({n_components} components)")
        self.n_components = n_components


class NumericalError(CamlError):
    exit_code = 4


class DegeneratePatchError(NumericalError):
    def __init__(self, index: int, reason: str = "degenerate patch"):
        super().__init__(f"{reason} at point {index}")
        self.index = index


class CsvFormatError(DataValidationError):
    """Malformed file content: ragged rows, non-numeric cells, bad labels."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.line = line


class FileIOError(CamlError):
    exit_code = 5


class SweepCellError(CamlError):
    """A sweep cell failed; keeps the failing (algorithm, K, seed) and the cause's exit code."""

    def __init__(self, algorithm: str, k: int, seed: int, cause: Exception):
        super().__init__(f"{algorithm} K={k} seed={seed}: {cause}")
        self.algorithm = algorithm
        self.k = k
        self.seed = seed
        self.exit_code = getattr(cause, "exit_code", 1)
