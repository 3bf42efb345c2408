from src.RunConfig import ExperimentConfig, RunConfig

CONFIG = [
    ExperimentConfig(
        name="swiss-roll",
        kind="swiss-roll",
        output="runs/swiss-roll/data.csv",
        n=2000,
        seed=0,
        algorithms=["lle", "ca-lle", "lep", "ca-lep"],
        run=RunConfig(k=10, d=2),
    ),
    ExperimentConfig(
        name="punctured-sphere",
        kind="punctured-sphere",
        output="runs/punctured-sphere/data.csv",
        n=2000,
        seed=0,
        algorithms=["lep", "ca-lep", "lle", "ca-lle"],
        run=RunConfig(k=10, d=2),
    ),
    ExperimentConfig(
        name="twin-peaks",
        kind="twin-peaks",
        output="runs/twin-peaks/data.csv",
        n=2000,
        seed=0,
        algorithms=["lep", "ca-lep"],
        run=RunConfig(k=10, d=2),
        sweep_output="runs/twin-peaks/sweep.csv",
    ),
    ExperimentConfig(
        name="gaussian",
        kind="gaussian",
        output="runs/gaussian/data.csv",
        n=2000,
        seed=0,
        params={"variance": 0.25},
        algorithms=["lep", "ca-lep", "lle", "ca-lle"],
        run=RunConfig(k=10, d=2, curvature_mode="patch-form"),
    ),
]
