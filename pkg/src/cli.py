"""
Command-line front end: gen, curvature, embed, eval, sweep, classify, plot,
compare and batch.
"""
import argparse
import logging
import os
import sys
from dataclasses import replace
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.RunConfig import ALGORITHMS, CURVATURE_MODES, DEFAULT_SEEDS, SWEEP_KS, ExperimentConfig, RunConfig
from src.csv_processing import load_csv, load_frame, save_csv, save_frame, write_metadata
from src.datasets import BENCHMARK_KINDS, KINDS, GenSpec, generate
from src.errors import CamlError, ConfigError, DataValidationError
from src.evaluation import (
    CurvatureHistogram,
    classification_protocol,
    curvature_histogram,
    embed_and_classify,
    k_sweep,
    npr,
    npr_table,
)
from src.localgeom import curvature_from_fits, curvature_field_frame, fit_patches
from src.neighborhood import knn_graph
from src.pipeline import run_embedding
from src.plotting import plot_embedding, plot_histogram, plot_sweep
from src.utils import parse_int_list
from src.weights import weights_frame

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"
RAW_ALGORITHM = "none"


# ------------------------
# Flag parsing helpers
# ------------------------
def _parse_params(pairs: Optional[List[str]]) -> Dict[str, float]:
    params = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected KEY=VALUE for --param, got '{pair}'")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"parameter {key.strip()} must be numeric, got '{value}'")
    return params


def _parse_names(text: str, allowed: List[str], what: str) -> List[str]:
    names = [name.strip() for name in text.split(",") if name.strip()]
    unknown = [name for name in names if name not in allowed]
    if unknown:
        raise ConfigError(f"unknown {what} '{unknown[0]}' (choose from {', '.join(allowed)})")
    if not names:
        raise ConfigError(f"at least one {what} is required")
    return names


def _spec_from_args(args, kind: Optional[str] = None) -> GenSpec:
    return GenSpec(
        kind=kind or args.kind,
        n=args.n,
        noise=args.noise,
        seed=getattr(args, "seed", 0),
        params=_parse_params(args.param),
    )


def _run_config(args, algorithm: Optional[str] = None) -> RunConfig:
    return RunConfig(
        algorithm=algorithm or args.alg,
        k=args.k,
        d=args.d,
        sigma=getattr(args, "sigma", None),
        sigma_c=getattr(args, "sigma_c", None),
        curvature_mode=getattr(args, "curvature_mode", "point-hessian"),
        ridge=not getattr(args, "no_ridge", False),
        n_jobs=getattr(args, "threads", None),
    ).validate()


# ------------------------
# Commands
# ------------------------
def cmd_gen(args) -> int:
    spec = _spec_from_args(args)
    data = generate(spec)
    save_csv(data, args.out)
    if args.latent_out and data.latent is not None:
        save_frame(pd.DataFrame(data.latent, columns=["t1", "t2"]), args.latent_out)
    write_metadata(
        {"command": "gen", "kind": spec.kind, "n": spec.n, "noise": spec.noise, "seed": spec.seed, "params": spec.resolved_params()},
        args.out,
    )
    print(f"N={data.n} D={data.dim} name={data.name}")
    return 0


def cmd_curvature(args) -> int:
    config = RunConfig(algorithm="ca-lep", k=args.k, d=args.d, ridge=not args.no_ridge, bins=args.bins, n_jobs=args.threads).validate()
    data = load_csv(args.input)
    graph = knn_graph(data, config.k)
    patches = fit_patches(data, graph, config.d, ridge=config.ridge, n_jobs=config.n_jobs)
    field = curvature_from_fits(patches.fits)
    save_frame(curvature_field_frame(field), args.out)
    if args.hist_out:
        histogram = curvature_histogram(field, config.bins)
        save_frame(histogram.to_frame(), args.hist_out)
    print(f"mean curvature = {field.values.mean():.6f} (median {np.median(field.values):.6f}, N={data.n})")
    return 0


def cmd_embed(args) -> int:
    config = _run_config(args)
    data = load_csv(args.input)
    result = run_embedding(data, config)
    embedded = result.embedding.as_dataset(labels=data.labels, name=f"{data.name}:{config.algorithm}")
    save_csv(embedded, args.out)
    if args.weights_out and result.weights is not None:
        save_frame(weights_frame(result.weights), args.weights_out)
    write_metadata({"command": "embed", "input": args.input, **result.metadata}, args.out)
    print(f"Embedded {data.n} points into R^{config.d} with {config.algorithm}")
    return 0


def cmd_eval(args) -> int:
    x = load_csv(args.x)
    y = load_csv(args.y)
    if x.n != y.n:
        raise DataValidationError(f"row count mismatch: {args.x} has {x.n}, {args.y} has {y.n}")
    report = npr(x, y, args.k)
    if args.out:
        save_frame(pd.DataFrame({"point": np.arange(x.n), "overlap": report.per_point}), args.out)
    print(f"NPR(k={report.k}) = {report.value:.6f}")
    return 0


def cmd_sweep(args) -> int:
    algorithms = _parse_names(args.algs, ALGORITHMS, "algorithm")
    ks = parse_int_list(args.ks)
    seeds = parse_int_list(args.seeds)
    config = RunConfig(
        algorithm=algorithms[0],
        k=min(ks),
        d=args.d,
        curvature_mode=args.curvature_mode,
        seeds=seeds,
        ks=ks,
        n_jobs=args.threads,
    ).validate()
    spec = _spec_from_args(args)
    print(f"> Sweeping K over {ks} for {', '.join(algorithms)} on {spec.kind}")
    report = k_sweep(spec, algorithms, config.ks, config.seeds, d=config.d, config=config, n_jobs=config.n_jobs)
    save_frame(report.rows, args.out, index=True)
    if args.cells_out:
        save_frame(report.cells_frame(), args.cells_out)
    print(report.rows.to_string(float_format=lambda v: f"{v:.4f}"))
    return 0


def cmd_classify(args) -> int:
    config = None if args.alg == RAW_ALGORITHM else _run_config(args)
    if args.data:
        data = load_csv(args.data)
        sizes = parse_int_list(args.train_per_class)
        table = classification_protocol(data, config, sizes, trials=args.trials, seed=args.seed, k=args.knn)
        if args.out:
            save_frame(table, args.out)
        for _, row in table.iterrows():
            print(f"train/class={row.train_per_class}: accuracy {row.mean_accuracy:.4f} +/- {row.std_accuracy:.4f}")
        return 0

    if not (args.train and args.test):
        raise ConfigError("classify needs --data, or both --train and --test")
    train = load_csv(args.train)
    test = load_csv(args.test)
    if train.labels is None or test.labels is None:
        raise DataValidationError("classify needs labeled train and test files (# labels=last)")
    report = embed_and_classify(train, test, config, k=args.knn)
    if args.out:
        save_frame(pd.DataFrame({"predicted": report.predictions, "label": test.labels}), args.out)
    print(f"accuracy = {report.accuracy:.4f}")
    return 0


def cmd_plot(args) -> int:
    if args.type == "embedding":
        embedding = load_csv(args.input)
        color_values = None
        if args.color_by:
            colors = load_frame(args.color_by)
            if len(colors) != embedding.n:
                raise DataValidationError(f"row count mismatch: {args.color_by} has {len(colors)}, embedding has {embedding.n}")
            color_values = colors.iloc[:, args.color_column].to_numpy(dtype=float)
        plot_embedding(embedding, args.out, color_values=color_values, title=args.title or "")
    elif args.type == "sweep":
        rows = load_frame(args.input).set_index("algorithm")
        plot_sweep(rows, args.out, title=args.title or "NPR vs neighbor size")
    else:
        table = load_frame(args.input)
        edges = np.append(table["left"].to_numpy(dtype=float), table["right"].to_numpy(dtype=float)[-1:])
        histogram = CurvatureHistogram(counts=table["count"].to_numpy(), edges=edges)
        plot_histogram(histogram, args.out, title=args.title or "Curvature distribution")
    return 0


def cmd_compare(args) -> int:
    kinds = _parse_names(args.kinds, KINDS, "kind")
    algorithms = _parse_names(args.algs, ALGORITHMS, "algorithm")
    seeds = parse_int_list(args.seeds)
    config = RunConfig(algorithm=algorithms[0], k=args.k, d=args.d, seeds=seeds, n_jobs=args.threads).validate()
    specs = [GenSpec(kind=kind, n=args.n, noise=args.noise) for kind in kinds]
    table = npr_table(specs, algorithms, config.k, config.seeds, d=config.d, config=config, n_jobs=config.n_jobs)
    save_frame(table, args.out, index=True)
    print(table.to_string(float_format=lambda v: f"{v:.4f}"))
    return 0


def run_experiment(experiment: ExperimentConfig) -> None:
    """Generate one preset dataset, embed it with every listed algorithm and score NPR."""
    print(f"> Running experiment {experiment.name}")
    spec = GenSpec(kind=experiment.kind, n=experiment.n, noise=experiment.noise, seed=experiment.seed, params=experiment.params)
    data = generate(spec)
    save_csv(data, experiment.output)

    stem, ext = os.path.splitext(experiment.output)
    for algorithm in experiment.algorithms:
        config = replace(experiment.run, algorithm=algorithm).validate()
        result = run_embedding(data, config)
        out = f"{stem}.{algorithm}{ext or '.csv'}"
        save_csv(result.embedding.as_dataset(labels=data.labels, name=f"{data.name}:{algorithm}"), out)
        write_metadata({"command": "batch", "experiment": experiment.name, **result.metadata}, out)
        print(f"  {algorithm}: NPR(k={config.k}) = {npr(data, result.embedding, config.k).value:.4f}")

    if experiment.sweep_output:
        run = experiment.run
        report = k_sweep(spec, experiment.algorithms, run.ks, run.seeds, d=run.d, config=run, n_jobs=run.n_jobs)
        save_frame(report.rows, experiment.sweep_output, index=True)


def cmd_batch(args) -> int:
    from config import CONFIG

    experiments = CONFIG
    if args.only:
        wanted = set(args.only.split(","))
        experiments = [e for e in CONFIG if e.name in wanted]
        if not experiments:
            raise ConfigError(f"no preset named {args.only}")
    print("Starting CAML batch run")
    for experiment in experiments:
        run_experiment(experiment)
    print("All experiments processed successfully")
    return 0


# ------------------------
# Parser
# ------------------------
def _add_spec_flags(parser: argparse.ArgumentParser, with_kind: bool = True, with_seed: bool = True) -> None:
    if with_kind:
        parser.add_argument("--kind", required=True, help=f"dataset kind ({', '.join(KINDS)})")
    parser.add_argument("--n", type=int, default=2000, help="number of points")
    parser.add_argument("--noise", type=float, default=0.0, help="std of isotropic Gaussian noise")
    if with_seed:
        parser.add_argument("--seed", type=int, default=0, help="random seed")
    parser.add_argument("--param", action="append", metavar="KEY=VALUE", help="generator parameter, repeatable")


def _add_run_flags(parser: argparse.ArgumentParser, default_alg: str = "ca-lep") -> None:
    parser.add_argument("--alg", default=default_alg, help=f"algorithm ({', '.join(ALGORITHMS)})")
    parser.add_argument("--k", type=int, default=10, help="neighbor count K")
    parser.add_argument("--d", type=int, default=2, help="target / intrinsic dimension")
    parser.add_argument("--sigma", type=float, default=None, help="heat-kernel bandwidth (median edge length)")
    parser.add_argument("--sigma-c", dest="sigma_c", type=float, default=None, help="curvature bandwidth (square root of the median curvature)")
    parser.add_argument("--curvature-mode", dest="curvature_mode", default="point-hessian", help=f"CA-LEP mode ({', '.join(CURVATURE_MODES)})")
    parser.add_argument("--no-ridge", dest="no_ridge", action="store_true", help="fail on rank-deficient patches instead of ridge fallback")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (default: CAML_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="caml", description="Curvature-aware manifold learning")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--log-file", dest="log_file", default=None, help="write log records to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    _add_spec_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--latent-out", dest="latent_out", default=None, help="CSV of generator parameters")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("curvature", help="per-point curvature of a point cloud")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--bins", type=int, default=30)
    p.add_argument("--no-ridge", dest="no_ridge", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--hist-out", dest="hist_out", default=None)
    p.set_defaults(func=cmd_curvature)

    p = sub.add_parser("embed", help="embed a point cloud")
    p.add_argument("--in", dest="input", required=True)
    _add_run_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--weights-out", dest="weights_out", default=None)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("eval", help="neighborhood preserving ratio of an embedding")
    p.add_argument("--x", required=True, help="original point cloud CSV")
    p.add_argument("--y", required=True, help="embedding CSV")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", default=None, help="per-point overlap CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="NPR over a range of neighbor sizes")
    _add_spec_flags(p, with_seed=False)
    p.add_argument("--algs", default="lep,ca-lep")
    p.add_argument("--ks", default=",".join(str(k) for k in SWEEP_KS))
    p.add_argument("--seeds", default=",".join(str(s) for s in DEFAULT_SEEDS))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--curvature-mode", dest="curvature_mode", default="point-hessian")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--cells-out", dest="cells_out", default=None, help="per-seed cell CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("classify", help="nearest-neighbor classification after embedding")
    p.add_argument("--train", default=None)
    p.add_argument("--test", default=None)
    p.add_argument("--data", default=None, help="labeled CSV for the repeated-split protocol")
    p.add_argument("--train-per-class", dest="train_per_class", default="10")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--knn", type=int, default=1, help="classifier neighbor count")
    _add_run_flags(p, default_alg=RAW_ALGORITHM)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("plot", help="render an embedding, sweep or histogram as SVG")
    p.add_argument("--type", choices=["embedding", "sweep", "histogram"], default="embedding")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--color-by", dest="color_by", default=None, help="CSV with one color value per point")
    p.add_argument("--color-column", dest="color_column", type=int, default=0)
    p.add_argument("--title", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("compare", help="dataset x algorithm NPR table")
    p.add_argument("--kinds", default=",".join(BENCHMARK_KINDS))
    p.add_argument("--algs", default="lep,ca-lep,lle,ca-lle")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--seeds", default=",".join(str(s) for s in DEFAULT_SEEDS))
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("batch", help="run the presets in config.py")
    p.add_argument("--only", default=None, help="comma-separated preset names")
    p.set_defaults(func=cmd_batch)
    return parser


def configure_logging(verbose: bool, log_file: Optional[str]) -> None:
    logging.basicConfig(
        filename=log_file,
        level=logging.DEBUG if verbose else logging.WARNING,
        format=LOG_FORMAT,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.log_file)
    try:
        return args.func(args)
    except CamlError as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 5
