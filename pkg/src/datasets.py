"""
Synthetic benchmark manifolds and analytic oracle surfaces.

Every generator draws from ``numpy.random.Generator(PCG64(seed))`` so the same
GenSpec produces bit-identical points on every platform numpy supports.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, Tuple

import numpy as np

from src.DataSet import DataSet
from src.errors import ConfigError

KINDS = ["swiss-roll", "punctured-sphere", "twin-peaks", "gaussian", "unit-sphere", "paraboloid", "blobs"]
BENCHMARK_KINDS = ["swiss-roll", "punctured-sphere", "twin-peaks", "gaussian"]

DEFAULT_PARAMS: Dict[str, Dict[str, float]] = {
    "swiss-roll": {"height": 21.0},
    "punctured-sphere": {"max_polar": 0.9 * np.pi},
    "twin-peaks": {},
    "gaussian": {"variance": 0.25},
    "unit-sphere": {"radius": 1.0},
    "paraboloid": {"a": 1.0, "b": 1.0, "c": 0.0, "half_width": 0.5},
    "blobs": {"dim": 3.0, "separation": 6.0, "spread": 1.0},
}


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int
    noise: float = 0.0
    seed: int = 0
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind '{self.kind}' (choose from {', '.join(KINDS)})")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"n must be a positive integer, got {self.n}")
        if not self.noise >= 0:
            raise ConfigError(f"noise must be >= 0, got {self.noise}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise ConfigError(f"unknown parameters for {self.kind}: {', '.join(sorted(unknown))}")

    def resolved_params(self) -> Dict[str, float]:
        return {**DEFAULT_PARAMS[self.kind], **{k: float(v) for k, v in self.params.items()}}

    def with_seed(self, seed: int) -> "GenSpec":
        return GenSpec(kind=self.kind, n=self.n, noise=self.noise, seed=seed, params=dict(self.params))


def _swiss_roll(rng: np.random.Generator, n: int, p: Dict[str, float]) -> Tuple[np.ndarray, np.ndarray]:
    t = 1.5 * np.pi * (1.0 + 2.0 * rng.random(n))
    h = p["height"] * rng.random(n)
    points = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    return points, np.column_stack([t, h])


def _punctured_sphere(rng: np.random.Generator, n: int, p: Dict[str, float]) -> Tuple[np.ndarray, np.ndarray]:
    # polar angle measured from the north pole; the cap around the south pole is missing
    phi = p["max_polar"] * rng.random(n)
    theta = 2.0 * np.pi * rng.random(n)
    points = np.column_stack([np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)])
    return points, np.column_stack([phi, theta])


def _twin_peaks(rng: np.random.Generator, n: int, p: Dict[str, float]) -> Tuple[np.ndarray, np.ndarray]:
    xy = rng.uniform(-1.0, 1.0, size=(n, 2))
    z = np.sin(np.pi * xy[:, 0]) * np.tanh(3.0 * xy[:, 1])
    return np.column_stack([xy, z]), xy.copy()


def _gaussian(rng: np.random.Generator, n: int, p: Dict[str, float]) -> Tuple[np.ndarray, np.ndarray]:
    xy = rng.uniform(-1.0, 1.0, size=(n, 2))
    z = np.exp(-(xy[:, 0] ** 2 + xy[:, 1] ** 2) / (2.0 * p["variance"]))
    return np.column_stack([xy, z]), xy.copy()


def _unit_sphere(rng: np.random.Generator, n: int, p: Dict[str, float]) -> Tuple[np.ndarray, np.ndarray]:
    directions = rng.standard_normal((n, 3))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # a zero draw has probability zero but would divide by zero
    norms[norms == 0] = 1.0
    directions = directions / norms
    points = p["radius"] * directions
    latent = np.column_stack([np.arccos(np.clip(directions[:, 2], -1.0, 1.0)), np.arctan2(directions[:, 1], directions[:, 0])])
    return points, latent


def _paraboloid(rng: np.random.Generator, n: int, p: Dict[str, float]) -> Tuple[np.ndarray, np.ndarray]:
    w = p["half_width"]
    xy = rng.uniform(-w, w, size=(n, 2))
    x, y = xy[:, 0], xy[:, 1]
    z = p["a"] * x**2 + p["b"] * y**2 + p["c"] * x * y
    return np.column_stack([xy, z]), xy.copy()


def _blobs(rng: np.random.Generator, n: int, p: Dict[str, float]) -> Tuple[np.ndarray, np.ndarray]:
    dim = int(p["dim"])
    if dim < 1:
        raise ConfigError(f"blobs dim must be >= 1, got {dim}")
    labels = np.zeros(n, dtype=np.int64)
    labels[n // 2:] = 1
    labels = rng.permutation(labels)
    points = p["spread"] * rng.standard_normal((n, dim))
    points[:, 0] += p["separation"] * labels
    return points, labels


GENERATORS: Dict[str, Callable] = {
    "swiss-roll": _swiss_roll,
    "punctured-sphere": _punctured_sphere,
    "twin-peaks": _twin_peaks,
    "gaussian": _gaussian,
    "unit-sphere": _unit_sphere,
    "paraboloid": _paraboloid,
    "blobs": _blobs,
}


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def generate(spec: GenSpec) -> DataSet:
    if spec.kind not in GENERATORS:
        raise ConfigError(f"unknown kind '{spec.kind}'")
    if spec.n < 1:
        raise ConfigError(f"n must be positive, got {spec.n}")

    rng = make_rng(spec.seed)
    points, extra = GENERATORS[spec.kind](rng, int(spec.n), spec.resolved_params())

    # Noise is drawn after the surface so noiseless and noisy runs share the same surface samples
    if spec.noise > 0:
        points = points + rng.normal(0.0, spec.noise, size=points.shape)

    if spec.kind == "blobs":
        return DataSet(points=points, labels=extra, name=spec.kind)
    return DataSet(points=points, name=spec.kind, latent=extra)
