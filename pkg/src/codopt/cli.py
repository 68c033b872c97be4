"""Command line harness.

Subcommands: run, compare-triplets, sweep-perturbation, nonquadratic,
synthesize, check-model. Exit codes: 0 success, 2 config error,
3 synthesis failure, 4 divergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import consensus, dynamics, graphs, models, synthesis
from .harness import (
    CSV_FMT,
    ConfigError,
    ExperimentConfig,
    build_costs,
    compare_triplets,
    config_from_toml,
    gain_interval_for,
    prepare,
    run_experiment,
    run_nonquadratic,
    sweep_perturbation,
)

EXIT_CONFIG = 2
EXIT_SYNTHESIS = 3
EXIT_DIVERGENCE = 4


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--seed", type=int)
    p.add_argument("--T", type=int, dest="T")
    p.add_argument("--mu", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--triplet", choices=consensus.TRIPLET_NAMES)
    p.add_argument("--signal")
    p.add_argument("--nu", type=float)
    p.add_argument("--L", type=int, dest="L")
    p.add_argument("--perturb", type=float)


def _build_config(args) -> ExperimentConfig:
    cfg = config_from_toml(args.config) if args.config else ExperimentConfig()
    overrides = {
        k: getattr(args, k)
        for k in ("out", "seed", "T", "mu", "tau", "triplet", "signal", "nu",
                  "L", "perturb")
        if getattr(args, k, None) is not None
    }
    if getattr(args, "unstructured", False):
        overrides["mode"] = "unstructured"
    return replace(cfg, **overrides).validate()


def _cmd_run(args) -> int:
    cfg = _build_config(args)
    summary = run_experiment(cfg)
    margin = "-" if summary.margin is None else f"{summary.margin:.6f}"
    print(
        f"mode={cfg.mode} triplet={cfg.triplet} signal={cfg.signal} "
        f"T={cfg.T} asymptotic_error={summary.asymptotic_error:.6e} "
        f"margin={margin} wall={summary.wall_time:.2f}s"
    )
    return 0


def _cmd_compare(args) -> int:
    cfg = _build_config(args)
    traces = compare_triplets(cfg)
    for name, trace in traces.items():
        print(f"{name}: asymptotic_error={trace.asymptotic_error():.6e}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _build_config(args)
    e_values = np.linspace(0.0, args.e_max, args.points)
    result = sweep_perturbation(cfg, e_values)
    for e, err in zip(result.e_values, result.errors):
        print(f"e={e:.4f} asymptotic_error={err:.6e}")
    print(f"unstructured baseline: {result.unstructured_error:.6e}")
    return 0


def _cmd_nonquadratic(args) -> int:
    cfg = _build_config(args)
    if args.nu is None and not args.config:
        cfg = replace(cfg, nu=5.0)
    traces = run_nonquadratic(replace(cfg, cost_kind="nonquadratic",
                                      lam_lo=1.0, lam_hi=10.0))
    for name, trace in traces.items():
        print(f"{name}: asymptotic_error={trace.asymptotic_error():.6e}")
    return 0


def _cmd_synthesize(args) -> int:
    cfg = _build_config(args)
    prep = prepare(replace(cfg, mode="structured"))
    ctrl = prep.controller
    print("denominator coeffs (low to high): "
          f"{[float(c) for c in prep.denominator.coeffs]}")
    print(f"H = {ctrl.H.tolist()}")
    print(f"interval = [{ctrl.interval[0]:.6f}, {ctrl.interval[1]:.6f}]")
    print(f"margin = {ctrl.margin:.6f}")
    if cfg.out:
        gains = np.linspace(ctrl.interval[0], ctrl.interval[1], 200)
        with open(cfg.out, "w") as fh:
            fh.write("l,spectral_radius\n")
            for l in gains:
                rho = synthesis.verify_robust_stability(
                    prep.problem.realization, ctrl.H, (l, l), grid_points=2
                )
                fh.write(CSV_FMT.format(l) + "," + CSV_FMT.format(rho) + "\n")
    return 0


def _cmd_check_model(args) -> int:
    cfg = _build_config(args)
    g = graphs.make_graph(cfg.graph_kind, cfg.N, p=cfg.er_p, seed=cfg.seed)
    if cfg.model == "approx":
        local = models.model_for_signal("approx", cfg.nu, cfg.L)
    else:
        local = models.model_for_signal(cfg.signal, cfg.nu)
    K = graphs.diameter(g)
    per_agent = models.distributed_common_denominator(g, [local] * cfg.N, K)
    for i, multiset in enumerate(per_agent):
        poly = models.poly_from_roots(multiset)
        print(f"agent {i}: degree {poly.degree} coeffs "
              f"{[float(c) for c in poly.coeffs]}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="codopt",
        description="Control-based online distributed optimization harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="single structured or unstructured run")
    p.add_argument("--unstructured", action="store_true",
                   help="run the gradient-tracking baseline")
    _add_common(p)
    p.set_defaults(fn=_cmd_run)

    p = sub.add_parser("compare-triplets",
                       help="all four triplets, both modes, shared problem")
    _add_common(p)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("sweep-perturbation",
                       help="asymptotic error vs model perturbation")
    p.add_argument("--e-max", type=float, default=0.1)
    p.add_argument("--points", type=int, default=10)
    _add_common(p)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("nonquadratic",
                       help="approximate-model runs on the logistic cost")
    _add_common(p)
    p.set_defaults(fn=_cmd_nonquadratic)

    p = sub.add_parser("synthesize", help="controller synthesis only")
    _add_common(p)
    p.set_defaults(fn=_cmd_synthesize)

    p = sub.add_parser("check-model",
                       help="print the distributed common denominators")
    _add_common(p)
    p.set_defaults(fn=_cmd_check_model)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, graphs.GraphConstructionError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except synthesis.SynthesisError as exc:
        print(f"synthesis error: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    except dynamics.DivergenceError as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE


if __name__ == "__main__":
    sys.exit(main())
