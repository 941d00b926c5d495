"""Command-line interface.

Subcommands:

* ``run <figure-id>``: run a named experiment preset and write its CSVs.
* ``ensemble <config.json>``: run one ensemble from a configuration file.
* ``oracle <N> <J-file>``: brute-force ground states of an Ising instance.
* ``threshold-scan <config.json>``: photon-number scan and threshold estimate
  for a discrete machine configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import observables as obs
from .discrete import estimate_threshold
from .ensemble import run_ensemble
from .experiments import (
    ConfigError,
    ExperimentSpec,
    FIGURES,
    ensemble_result_table,
    parse_config,
    parse_j_file,
    run_experiment,
    write_csv,
)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dopocim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"dopocim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a named experiment preset")
    p_run.add_argument("figure", choices=FIGURES)
    p_run.add_argument("--out", type=Path, default=Path("results"))
    p_run.add_argument("--trajectories", type=int)
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--dt", type=float)
    p_run.add_argument("--r", type=_float_list, dest="r_values", help="squeezing parameters, comma separated")
    p_run.add_argument("--nth", type=_float_list, dest="nth_values", help="thermal photon numbers")
    p_run.add_argument("--p-grid", type=_float_list, dest="p_grid", help="normalised pump grid")
    p_run.add_argument("--rounds", type=int)
    p_run.add_argument("--times", type=_float_list, help="post-selection sample times")
    p_run.add_argument("--ramp-times", type=_float_list, dest="ramp_times")
    p_run.add_argument("--xi", type=_float_list, dest="xi_values")
    p_run.add_argument("--workers", type=int)

    p_ens = sub.add_parser("ensemble", help="run an ensemble from a JSON config")
    p_ens.add_argument("config", type=Path)
    p_ens.add_argument("--out", type=Path, default=Path("results"))
    p_ens.add_argument("--name", default="ensemble")
    p_ens.add_argument("--workers", type=int)

    p_oracle = sub.add_parser("oracle", help="brute-force Ising ground states")
    p_oracle.add_argument("n", type=int)
    p_oracle.add_argument("j_file", type=Path)
    p_oracle.add_argument("--out", type=Path, help="optional CSV output path")

    p_thr = sub.add_parser("threshold-scan", help="estimate the oscillation threshold")
    p_thr.add_argument("config", type=Path)
    p_thr.add_argument("--out", type=Path, default=Path("results"))
    p_thr.add_argument("--grid", type=_float_list, help="pump values to scan")
    p_thr.add_argument("--workers", type=int)
    return parser


def _cmd_run(args) -> int:
    overrides = {}
    for key in ("trajectories", "seed", "dt", "r_values", "nth_values", "p_grid", "rounds", "times", "ramp_times", "xi_values"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    spec = ExperimentSpec(args.figure, args.out, overrides)
    paths = run_experiment(spec, workers=args.workers)
    for p in paths:
        print(p)
    return 0


def _cmd_ensemble(args) -> int:
    config = parse_config(args.config)
    series = run_ensemble(config, workers=args.workers)
    x_name = "round" if config.model.kind == "discrete" else "tau"
    table = ensemble_result_table(series, x_name=x_name, extra_meta={"model": config.model.kind})
    args.out.mkdir(parents=True, exist_ok=True)
    path = write_csv(table, args.out / f"{args.name}.csv")
    print(path)
    if series.divergent_count:
        print(f"warning: {series.divergent_count} divergent trajectories", file=sys.stderr)
    return 0


def _cmd_oracle(args) -> int:
    j = parse_j_file(args.j_file, args.n)
    ground, energy = obs.brute_force_ground_states(j)
    print(f"ground energy: {energy:.12g}")
    print(f"degeneracy: {len(ground)}")
    for code in ground:
        print(f"{int(code):>10d}  {obs.spin_string(int(code), args.n)}")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        rows = [
            json.dumps(
                {"code": int(c), "spins": obs.spin_string(int(c), args.n), "energy": energy},
                sort_keys=True,
            )
            for c in ground
        ]
        args.out.write_text("\n".join(rows) + "\n", encoding="utf-8")
        print(args.out)
    return 0


def _cmd_threshold(args) -> int:
    config = parse_config(args.config)
    if config.model.kind != "discrete":
        raise ConfigError("threshold-scan needs a discrete model configuration")
    grid = args.grid or tuple(float(x) for x in np.geomspace(0.008, 0.12, 16))
    photons = []
    ses = []
    from dataclasses import replace

    observables = config.observables if "photon" in config.observables else config.observables + ("photon",)
    for e in grid:
        params = replace(config.model.params, pump_e=float(e))
        model = replace(config.model, params=params)
        cfg = replace(config, model=model, observables=observables)
        series = run_ensemble(cfg, workers=args.workers)
        photons.append(series.series["photon"][-1])
        ses.append(series.series["photon_se"][-1])
    est = estimate_threshold(grid, photons)
    args.out.mkdir(parents=True, exist_ok=True)
    from .experiments import ResultTable

    table = ResultTable(
        {"pump_e": np.asarray(grid, dtype=float), "photon": np.array(photons), "photon_se": np.array(ses)},
        {"e_threshold": est.value, "unique": est.unique, "version": __version__},
    )
    path = write_csv(table, args.out / "threshold_scan.csv")
    print(f"e_threshold = {est.value:.6g} (grid point {est.grid_index}, unique={est.unique})")
    print(path)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "ensemble":
            return _cmd_ensemble(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "threshold-scan":
            return _cmd_threshold(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
