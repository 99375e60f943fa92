"""Command-line front end: audit, augment, fidelity, cluster, simulate.

Every command emits machine-readable JSON that embeds the fully resolved
run configuration; re-running a command from that configuration reproduces
its outputs byte for byte. Exit code 2 flags usage errors (bad flags,
missing input files), 1 flags data errors, 0 success.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import memorization
from .association import DEFAULT_CLUSTER_THRESHOLD, association_matrix, cluster_features
from .augment import DEFAULT_RATIO, AugmentConfig, AugmentMode, augment as run_augment
from .errors import TabmemError
from .fidelity import full_report
from .parallel import resolve_threads
from .scorelab import LatentSet, SdeConfig, SigmaSchedule, backward_sample, run_replication
from .table import load_csv, load_schema, write_csv


def _dump_json(obj: dict, path: str | None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def _require_files(*paths: str | None) -> None:
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise _UsageError(f"input file not found: {p}")


class _UsageError(Exception):
    pass


def _cmd_audit(args: argparse.Namespace) -> int:
    _require_files(args.train, args.synthetic, args.schema)
    threads = resolve_threads(args.threads)
    run_config = {
        "command": "audit",
        "train": args.train,
        "synthetic": args.synthetic,
        "schema": args.schema,
        "threshold": args.threshold,
        "bins": args.bins,
        "threads": threads,
        "out": args.out,
        "histogram_csv": args.histogram_csv,
    }
    schema = load_schema(args.schema)
    train = load_csv(args.train, schema)
    synthetic = load_csv(args.synthetic, schema)
    report = memorization.audit(
        synthetic, train, threshold=args.threshold, bins=args.bins, threads=threads
    )
    payload = report.to_dict()
    payload["run_config"] = run_config
    _dump_json(payload, args.out)
    if args.histogram_csv:
        report.write_histogram_csv(args.histogram_csv)
    print(f"mem_ratio {report.mem_ratio * 100:.2f}%")
    print(f"mem_auc {report.mem_auc:.6f}")
    if args.pretty:
        print(f"  samples: {len(report.ratios)}  threshold: {report.threshold}")
    return 0


def _cmd_augment(args: argparse.Namespace) -> int:
    _require_files(args.train, args.schema)
    threads = resolve_threads(args.threads)
    run_config = {
        "command": "augment",
        "train": args.train,
        "schema": args.schema,
        "mode": args.mode,
        "ratio": args.ratio,
        "seed": args.seed,
        "cluster_threshold": args.cluster_threshold,
        "threads": threads,
        "out": args.out,
    }
    schema = load_schema(args.schema)
    train = load_csv(args.train, schema)
    config = AugmentConfig(
        mode=AugmentMode(args.mode),
        ratio=args.ratio,
        seed=args.seed,
        cluster_threshold=args.cluster_threshold,
    )
    augmented = run_augment(train, config)
    write_csv(augmented, args.out)
    _dump_json(
        {
            "run_config": run_config,
            "rows_in": train.n_rows,
            "rows_out": augmented.n_rows,
        },
        args.out + ".json",
    )
    print(f"augmented {train.n_rows} -> {augmented.n_rows} rows ({args.mode})")
    return 0


def _cmd_fidelity(args: argparse.Namespace) -> int:
    _require_files(args.real, args.synthetic, args.schema, args.holdout)
    threads = resolve_threads(args.threads)
    run_config = {
        "command": "fidelity",
        "real": args.real,
        "synthetic": args.synthetic,
        "schema": args.schema,
        "holdout": args.holdout,
        "seed": args.seed,
        "threads": threads,
        "out": args.out,
    }
    schema = load_schema(args.schema)
    real = load_csv(args.real, schema)
    synthetic = load_csv(args.synthetic, schema)
    holdout = load_csv(args.holdout, schema) if args.holdout else None
    report = full_report(real, synthetic, holdout=holdout, seed=args.seed)
    payload = report.to_dict()
    payload["run_config"] = run_config
    _dump_json(payload, args.out)
    if args.pretty:
        for key, value in sorted(report.to_dict().items()):
            print(f"{key} {value:.4f}")
    else:
        print(f"shape_score {report.shape_score:.4f} trend_score {report.trend_score:.4f}")
    return 0


def _cmd_cluster(args: argparse.Namespace) -> int:
    _require_files(args.train, args.schema)
    threads = resolve_threads(args.threads)
    run_config = {
        "command": "cluster",
        "train": args.train,
        "schema": args.schema,
        "threshold": args.threshold,
        "eta_mapping": args.eta_mapping,
        "threads": threads,
        "out": args.out,
    }
    schema = load_schema(args.schema)
    train = load_csv(args.train, schema)
    assoc = association_matrix(train, eta_mapping=args.eta_mapping)
    clusters = cluster_features(assoc, args.threshold)
    payload = {
        "clusters": clusters.member_names(schema.feature_names),
        "threshold": args.threshold,
        "run_config": run_config,
    }
    print(_dump_json(payload, args.out), end="")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    threads = resolve_threads(args.threads)
    run_config = {
        "command": "simulate",
        "n_latents": args.n_latents,
        "dim": args.dim,
        "steps": args.steps,
        "trajectories": args.trajectories,
        "seed": args.seed,
        "horizon": args.horizon,
        "tolerance": args.tolerance,
        "threads": threads,
        "out": args.out,
        "emit_trajectories": args.emit_trajectories,
    }
    latents = LatentSet(
        np.random.default_rng(args.seed).standard_normal((args.n_latents, args.dim))
    )
    schedule = SigmaSchedule(horizon=args.horizon)
    config = SdeConfig(steps=args.steps, seed=args.seed, trajectories=args.trajectories)
    result = run_replication(latents, schedule, config, tolerance=args.tolerance)
    payload = result.to_dict()
    payload["run_config"] = run_config
    text = _dump_json(payload, args.out)
    print(text, end="")

    if args.emit_trajectories:
        streams = np.random.SeedSequence(args.seed).spawn(args.trajectories)
        times = np.linspace(0.0, args.horizon, args.steps + 1)
        with open(args.emit_trajectories, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["trajectory", "step", "t"] + [f"x{i}" for i in range(args.dim)])
            for j, stream in enumerate(streams):
                _, path = backward_sample(
                    latents, schedule, args.steps, np.random.default_rng(stream),
                    return_trajectory=True,
                )
                for k, state in enumerate(path):
                    t = float(times[args.steps - k]) if k < len(path) - 1 else 0.0
                    writer.writerow([j, k, repr(t)] + [repr(float(v)) for v in state])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabmem",
        description="Memorization auditing and augmentation toolkit for synthetic tabular data.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker cap (default: $TABMEM_THREADS or all cores); results do not depend on it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="memorization audit of synthetic vs train data")
    p.add_argument("--train", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--threshold", type=float, default=memorization.DEFAULT_THRESHOLD)
    p.add_argument("--bins", type=int, default=memorization.DEFAULT_BINS)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--histogram-csv", default=None, help="optional (bin_left, count) CSV")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(handler=_cmd_audit)

    p = sub.add_parser("augment", help="augment a training table")
    p.add_argument("--train", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--mode", choices=[m.value for m in AugmentMode], required=True)
    p.add_argument("--ratio", type=float, default=DEFAULT_RATIO)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--cluster-threshold", type=float, default=DEFAULT_CLUSTER_THRESHOLD)
    p.add_argument("--out", required=True, help="augmented CSV path")
    p.set_defaults(handler=_cmd_augment)

    p = sub.add_parser("fidelity", help="synthetic-data quality report")
    p.add_argument("--real", required=True)
    p.add_argument("--synthetic", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--holdout", default=None, help="enables the DCR protocol")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(handler=_cmd_fidelity)

    p = sub.add_parser("cluster", help="inspect correlation-based feature clusters")
    p.add_argument("--train", required=True)
    p.add_argument("--schema", required=True)
    p.add_argument("--threshold", type=float, default=DEFAULT_CLUSTER_THRESHOLD)
    p.add_argument("--eta-mapping", choices=["sqrt", "squared"], default="sqrt")
    p.add_argument("--out", default=None, help="optional JSON path (also printed)")
    p.set_defaults(handler=_cmd_cluster)

    p = sub.add_parser("simulate", help="replication check for the optimal-score SDE")
    p.add_argument("--n-latents", type=int, default=16)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--trajectories", type=int, default=256)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--horizon", type=float, default=1.0)
    p.add_argument("--tolerance", type=float, default=1e-2)
    p.add_argument("--out", default=None, help="optional JSON path (also printed)")
    p.add_argument("--emit-trajectories", default=None, help="optional per-step CSV path")
    p.set_defaults(handler=_cmd_simulate)

    return parser


def argv_from_run_config(run_config: dict) -> list[str]:
    """Rebuild the argv that reproduces a report's embedded run configuration."""
    argv = ["--threads", str(run_config["threads"]), run_config["command"]]
    skip = {"command", "threads"}
    for key, value in run_config.items():
        if key in skip or value is None:
            continue
        argv.extend([f"--{key.replace('_', '-')}", str(value)])
    return argv


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TabmemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
