"""Command-line experiment runner.

Subcommands map one-to-one onto the experiment families: fig2 (BER vs
budget), fig34 (power-split curves and the per-split BER profile), outage
(fading outage sweeps), case-study (blind-spot link budget report) and
simulate (single-point per-symbol dump). Output is CSV with a fixed column
set; reruns with identical configuration and seed are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 numeric failure (solver
non-convergence), 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments
from .experiments import CSV_COLUMNS, ExperimentConfig
from .sysmodel import (ConfigError, PARAM_KEYS, params_from_mapping,
                       params_to_mapping, parse_config_text, render_config_text)
from .thresholds import BracketFailure, NoCrossing

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_EXPERIMENT_KEYS = {
    "budgets_dbm", "schemes", "threshold_kinds", "mc_iterations",
    "mc_symbols", "outage_periods", "outage_ber_threshold", "master_seed",
}


def load_config_file(path: str) -> ExperimentConfig:
    """Parse a key=value config file into an ExperimentConfig.

    The file may mix system-parameter keys with experiment keys; anything
    else is a hard error.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    mapping = parse_config_text(text)
    param_part = {k: v for k, v in mapping.items() if k in PARAM_KEYS}
    exp_part = {k: v for k, v in mapping.items() if k in _EXPERIMENT_KEYS}
    unknown = set(mapping) - PARAM_KEYS - _EXPERIMENT_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    kwargs = {"base": params_from_mapping(param_part)}
    try:
        if "budgets_dbm" in exp_part:
            kwargs["budgets_dbm"] = tuple(
                float(v) for v in exp_part["budgets_dbm"].split(","))
        if "schemes" in exp_part:
            kwargs["schemes"] = tuple(
                s.strip() for s in exp_part["schemes"].split(","))
        if "threshold_kinds" in exp_part:
            kwargs["threshold_kinds"] = tuple(
                s.strip() for s in exp_part["threshold_kinds"].split(","))
        for key in ("mc_iterations", "mc_symbols", "outage_periods", "master_seed"):
            if key in exp_part:
                kwargs[key] = int(exp_part[key])
        if "outage_ber_threshold" in exp_part:
            kwargs["outage_ber_threshold"] = float(exp_part["outage_ber_threshold"])
        return ExperimentConfig(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def dump_config(cfg: ExperimentConfig) -> str:
    """Serialize a config back to the key=value file form."""
    mapping = params_to_mapping(cfg.base)
    mapping["budgets_dbm"] = ",".join(repr(b) for b in cfg.budgets_dbm)
    mapping["schemes"] = ",".join(cfg.schemes)
    mapping["threshold_kinds"] = ",".join(cfg.threshold_kinds)
    mapping["mc_iterations"] = repr(cfg.mc_iterations)
    mapping["mc_symbols"] = repr(cfg.mc_symbols)
    mapping["outage_periods"] = repr(cfg.outage_periods)
    mapping["outage_ber_threshold"] = repr(cfg.outage_ber_threshold)
    mapping["master_seed"] = repr(cfg.master_seed)
    return render_config_text(mapping)


def write_rows(path: str | None, rows: list[dict]) -> None:
    """Write rows as CSV with the fixed column order; '-' means stdout."""
    if path is None or path == "-":
        _write_rows_to(sys.stdout, rows)
        return
    with open(path, "w", newline="") as fh:
        _write_rows_to(fh, rows)


def _write_rows_to(fh, rows: list[dict]) -> None:
    writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="key=value configuration file")
    common.add_argument("--seed", type=int, metavar="INT",
                        help="master seed (overrides config)")
    common.add_argument("--out", metavar="PATH", default="-",
                        help="output path ('-' for stdout)")
    common.add_argument("--paper-scale", action="store_true",
                        help="restore full simulation volumes")
    common.add_argument("--threads", type=int, default=1, metavar="INT",
                        help="worker processes for sweep points")

    parser = argparse.ArgumentParser(
        prog="bsrelay",
        description="backscatter relay link performance experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("fig2", parents=[common], help="BER vs source power budget")

    p34 = sub.add_parser("fig34", parents=[common], help="power allocation curves")
    p34.add_argument("--mode", choices=("fig3", "fig4"), default="fig3")
    p34.add_argument("--vary", choices=("pir", "pid"), default="pir",
                     help="interference level swept in fig3 mode")

    pout = sub.add_parser("outage", parents=[common],
                          help="outage probability sweeps")
    pout.add_argument("--variant", choices=experiments.OUTAGE_VARIANTS,
                      default="pir_sweep")

    pcase = sub.add_parser("case-study", parents=[common],
                           help="blind-spot link budget report")
    pcase.add_argument("--obstacles", type=int, default=3)
    pcase.add_argument("--obstacle-db", type=float, default=35.0)
    pcase.add_argument("--reference-db", type=float, default=32.0)

    psim = sub.add_parser("simulate", parents=[common],
                          help="single-point per-symbol dump")
    psim.add_argument("--scheme", choices=experiments.SCHEMES, default="AF")
    psim.add_argument("--symbols", type=int, default=None)

    return parser


def _configure(args) -> ExperimentConfig:
    cfg = load_config_file(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.paper_scale:
        cfg = cfg.paper_scale()
    if args.threads and args.threads > 1:
        cfg = replace(cfg, workers=args.threads)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _configure(args)
        if args.command == "fig2":
            rows = experiments.run_fig2(cfg)
        elif args.command == "fig34":
            if args.mode == "fig3":
                rows = experiments.run_fig3(cfg, vary=args.vary)
            else:
                rows = experiments.run_fig4(cfg)
        elif args.command == "outage":
            rows = experiments.run_outage(cfg, variant=args.variant)
        elif args.command == "case-study":
            report = experiments.run_case_study(
                cfg, n_obstacles=args.obstacles, obstacle_db=args.obstacle_db,
                reference_db=args.reference_db)
            if args.out in (None, "-"):
                sys.stdout.write(report)
            else:
                Path(args.out).write_text(report)
            return EXIT_OK
        elif args.command == "simulate":
            rows = experiments.run_simulate(cfg, scheme=args.scheme,
                                            n_symbols=args.symbols)
        else:  # pragma: no cover - argparse enforces the choice
            raise ConfigError(f"unknown command {args.command!r}")
        write_rows(args.out, rows)
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoCrossing, BracketFailure) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
