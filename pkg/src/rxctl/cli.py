"""Command-line surface.

Subcommands: linearize, simulate, tune, hurst, noisegen, grid.
Exit codes: 0 success, 2 configuration error, 3 simulation divergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import fracops, reactor, sim, stochastic, tuner
from .errors import ConfigError, DivergedSimulation, RxctlError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def _cmd_linearize(args) -> int:
    params = reactor.params_for_power(args.power, feedback=args.feedback)
    ss = reactor.linearize(params)
    tf = reactor.to_transfer_function(ss)
    print(f"power level: {args.power}% ({args.feedback} feedback coefficients)")
    print(f"gain: {tf.gain:.6g}")
    print("zeros: " + ", ".join(f"{z.real:.6g}" for z in tf.zeros))
    print("poles: " + ", ".join(f"{p.real:.6g}" for p in tf.poles))
    print(f"dc gain: {reactor.dc_gain(ss):.6g}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scn = sim.load_scenario(args.scenario)
    result = sim.run_scenario(scn)
    os.makedirs(args.out, exist_ok=True)
    base = os.path.splitext(os.path.basename(args.scenario))[0]
    csv_path = os.path.join(args.out, base + ".csv")
    sim.write_csv(result, csv_path)
    sim.write_summary(result, os.path.join(args.out, base + "_summary.json"))
    print(f"wrote {csv_path}")
    for key, val in sorted(result.summary.items()):
        print(f"  {key}: {val:.6g}")
    return EXIT_OK


def _cmd_tune(args) -> int:
    scn = sim.load_scenario(args.scenario)
    try:
        with open(args.ga) as fh:
            ga_dict = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read GA config {args.ga}: {exc}") from exc
    weights = tuner.ObjectiveSpec(w1=ga_dict.pop("w1", 0.5),
                                  w2=ga_dict.pop("w2", 0.5))
    try:
        ga = tuner.GAConfig(**ga_dict)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad GA config: {exc}") from exc
    result = tuner.tune_scenario(scn, ga, weights)
    os.makedirs(args.out, exist_ok=True)
    json_path = os.path.join(args.out, "tuning.json")
    tuner.write_tuning_result(result, json_path,
                              os.path.join(args.out, "leaderboard.csv"))
    print(f"wrote {json_path}")
    print(f"best J: {result['best_J']:.6g}")
    for name, val in result["best_parameters"].items():
        print(f"  {name}: {val:.6g}")
    return EXIT_OK


def _load_series(path: str) -> np.ndarray:
    try:
        if path.endswith(".csv"):
            data = np.genfromtxt(path, delimiter=",", names=True)
            if data.dtype.names and "y" in data.dtype.names:
                return np.asarray(data["y"], dtype=float)
            return np.loadtxt(path, delimiter=",", skiprows=1, usecols=0, ndmin=1)
        return np.loadtxt(path, ndmin=1)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read series {path}: {exc}") from exc


def _cmd_hurst(args) -> int:
    series = _load_series(args.series)
    est = stochastic.rs_hurst(series)
    print(f"H: {est.H:.4f}")
    print(f"intercept: {est.intercept:.4f}")
    print(f"r_squared: {est.r_squared:.4f}")
    print(f"block sizes: {list(est.block_sizes)}")
    if not est.valid:
        print("warning: estimate outside (0, 1.5); treat as unreliable")
    return EXIT_OK


def _cmd_noisegen(args) -> int:
    series = fracops.generate_fgn(args.beta, args.n, args.sigma, args.dt,
                                  args.seed)
    with open(args.out, "w") as fh:
        fh.write("noise\n")
        for v in series:
            fh.write("%.12g\n" % v)
    print(f"wrote {args.out} ({args.n} samples, beta = {args.beta})")
    return EXIT_OK


def _cmd_grid(args) -> int:
    rows = sim.reproduce_grid(args.section, args.out, seed=args.seed,
                              T=args.T, dt=args.dt)
    n_ok = sum(1 for r in rows if r["status"] == "ok")
    print(f"{len(rows)} cells, {n_ok} ok; summary at "
          f"{os.path.join(args.out, 'summary.csv')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rxctl",
        description="Fuzzy fractional-order PID control of a PWR model "
                    "with LRD noise and self-similar network delay")
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("linearize", help="print the zero-pole-gain plant model")
    q.add_argument("power", type=int, choices=sorted(reactor.POWER_LEVELS))
    q.add_argument("--feedback", choices=["fitted", "tabulated"],
                   default="fitted")
    q.set_defaults(func=_cmd_linearize)

    q = sub.add_parser("simulate", help="run one scenario JSON")
    q.add_argument("scenario")
    q.add_argument("--out", default="results")
    q.set_defaults(func=_cmd_simulate)

    q = sub.add_parser("tune", help="GA-tune the controller on a scenario")
    q.add_argument("scenario")
    q.add_argument("ga", help="GA hyperparameter JSON")
    q.add_argument("--out", default="results")
    q.set_defaults(func=_cmd_tune)

    q = sub.add_parser("hurst", help="rescaled-range Hurst estimate of a series")
    q.add_argument("series", help="CSV (uses the y column) or one value per line")
    q.set_defaults(func=_cmd_hurst)

    q = sub.add_parser("noisegen", help="write a shaped noise series")
    q.add_argument("beta", type=float)
    q.add_argument("n", type=int)
    q.add_argument("seed", type=int)
    q.add_argument("--sigma", type=float, default=1.0)
    q.add_argument("--dt", type=float, default=0.1)
    q.add_argument("--out", default="noise.csv")
    q.set_defaults(func=_cmd_noisegen)

    q = sub.add_parser("grid", help="run a canned experiment grid")
    q.add_argument("section", choices=["section-4", "section-5", "section-6"])
    q.add_argument("--out", default="grid")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--T", type=float, default=100.0)
    q.add_argument("--dt", type=float, default=sim.DEFAULT_DT)
    q.set_defaults(func=_cmd_grid)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivergedSimulation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ConfigError, KeyError, ValueError, RxctlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
