from dataclasses import dataclass, field
from typing import List, Optional

from src.errors import ConfigError

ALGORITHMS = ["pca", "lep", "lle", "ca-lep", "ca-lle"]
CURVATURE_MODES = ["point-hessian", "patch-form"]
SYMMETRIZE_RULES = ["union"]
DEFAULT_SEEDS = [0, 1, 2, 3, 4]
SWEEP_KS = [10, 20, 30, 40, 50, 60, 70]


@dataclass
class RunConfig:
    algorithm: str = "ca-lep"
    k: int = 10
    d: int = 2

    # Bandwidths; None means the median heuristic
    sigma: Optional[float] = None
    sigma_c: Optional[float] = None

    curvature_mode: str = "point-hessian"  # CA-LEP only
    symmetrize_rule: str = "union"  # LEP-style Laplacians only
    ridge: bool = True  # quadratic-fit fallback for rank-deficient patches

    # Evaluation
    seeds: List[int] = field(default_factory=lambda: list(DEFAULT_SEEDS))
    ks: List[int] = field(default_factory=lambda: list(SWEEP_KS))
    bins: int = 30
    n_jobs: Optional[int] = None

    def validate(self) -> "RunConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm '{self.algorithm}' (choose from {', '.join(ALGORITHMS)})")
        if self.curvature_mode not in CURVATURE_MODES:
            raise ConfigError(f"unknown curvature mode '{self.curvature_mode}'")
        if self.symmetrize_rule not in SYMMETRIZE_RULES:
            raise ConfigError(f"unknown symmetrize rule '{self.symmetrize_rule}'")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.d < 1:
            raise ConfigError(f"d must be >= 1, got {self.d}")
        for name in ("sigma", "sigma_c"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if not self.ks or min(self.ks) < 1:
            raise ConfigError("ks must be a nonempty list of positive integers")
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")
        if self.n_jobs is not None and self.n_jobs < 1:
            raise ConfigError(f"n_jobs must be >= 1, got {self.n_jobs}")
        return self


@dataclass
class ExperimentConfig:
    name: str
    kind: str
    output: str
    n: int = 2000
    noise: float = 0.0
    seed: int = 0
    params: dict = field(default_factory=dict)
    algorithms: List[str] = field(default_factory=lambda: ["lep", "ca-lep", "lle", "ca-lle"])
    run: RunConfig = field(default_factory=RunConfig)
    sweep_output: Optional[str] = None  # K sweep output, skipped when None
