"""Command line entry point: ``run``, ``aggregate``, ``snapshot`` and ``sweep``."""

from __future__ import annotations

import argparse
import dataclasses
import itertools
import logging
import sys
from pathlib import Path

from .experiment import (
    ExperimentConfig,
    SchemaError,
    aggregate_runs,
    load_config,
    run_arena,
    run_experiment,
    summary_to_csv,
    write_snapshot,
)
from .lattice import ConfigurationError

_PY_TYPES = {"int": int, "float": float, "str": str}


def _add_config_flags(p: argparse.ArgumentParser, skip=()) -> None:
    p.add_argument("--config", help="key = value config file")
    for f in dataclasses.fields(ExperimentConfig):
        if f.name in skip:
            continue
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=_PY_TYPES[f.type],
                       default=None, help=f"(default: {f.default})")


def _config_from(args, skip=()) -> ExperimentConfig:
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(ExperimentConfig)
        if f.name not in skip
    }
    return load_config(args.config, **overrides)


def _csv_groups(paths) -> dict[str, list[Path]]:
    groups: dict[str, list[Path]] = {}
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            found = sorted(p.rglob("metrics.csv"))
            if not found:
                raise SchemaError(f"{p}: no metrics.csv found")
            for csv_path in found:
                groups.setdefault(str(csv_path.parent), []).append(csv_path)
        elif p.is_file():
            groups.setdefault(str(p), []).append(p)
        else:
            raise SchemaError(f"{p}: no such file or directory")
    return groups


def cmd_run(args) -> None:
    out = run_experiment(_config_from(args))
    print(out / "metrics.csv")


def cmd_aggregate(args) -> None:
    groups = _csv_groups(args.paths)
    text = summary_to_csv(
        {label: aggregate_runs(paths, args.tail_episodes) for label, paths in groups.items()}
    )
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_snapshot(args) -> None:
    config = _config_from(args)
    _, arena = run_arena(config, config.seed, args.arena, return_arena=True)
    grid_path, csv_path = write_snapshot(arena, args.output)
    print(grid_path)
    print(csv_path)


def cmd_sweep(args) -> None:
    base = _config_from(args, skip=("b", "variant"))
    b_values = [float(x) for x in args.b_values.split(",")]
    variants = [v.strip() for v in args.variants.split(",")]
    root = Path(base.out_dir)
    summaries = {}
    for variant, b in itertools.product(variants, b_values):
        config = base.replace(variant=variant, b=b)
        out = run_experiment(config, root / f"{variant}_b{b:g}")
        summaries[out.name] = aggregate_runs(out / "metrics.csv", args.tail_episodes)
    (root / "summary.csv").write_text(summary_to_csv(summaries))
    print(root / "summary.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticerl", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="train according to a config")
    _add_config_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("aggregate", help="summarise the final episodes across seeds")
    p.add_argument("paths", nargs="+", help="metrics CSV files or run directories")
    p.add_argument("--tail-episodes", type=int, default=10)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("snapshot", help="train one arena and dump its final lattice")
    _add_config_flags(p)
    p.add_argument("--arena", type=int, default=0)
    p.add_argument("-o", "--output", default="snapshot", help="path prefix for .txt/.csv")
    p.set_defaults(func=cmd_snapshot)

    p = sub.add_parser("sweep", help="run every (variant, b) combination")
    _add_config_flags(p, skip=("b", "variant"))
    p.add_argument("--b-values", required=True, help="comma separated, e.g. 1.0,1.1,1.2")
    p.add_argument("--variants", default="dual", help="comma separated variant names")
    p.add_argument("--tail-episodes", type=int, default=10)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ConfigurationError, SchemaError, OSError, ValueError) as exc:
        print(f"latticerl: error: {exc}", file=sys.stderr)
        return 1
    return 0
