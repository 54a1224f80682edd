"""Command-line entry point.

Each subcommand maps to one harness or diagnostic operation, emits its
result as JSON/CSV into the output directory (flag --out, else the
ERRWLAB_OUT_DIR environment variable, else ./errwlab-out), renders report
figures next to the delimited output, and exits 0 exactly when every
check it ran passed.  Failures print a machine-readable summary line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .circulant import (
    incidence_determinant,
    incidence_matrix,
    transpose_kernel_basis,
)
from .config import parse_config, parse_config_pair
from .errors import SchemaError
from .harness import (
    ExperimentConfig,
    compare_parities,
    edge_trap_frequency,
    edge_trap_probability,
    run_experiment,
)
from .martingale import (
    enumerate_increment_check,
    balance_trace,
    stopping_time_scan,
)
from .io import emit, write_json
from .walk import replica_generator, simulate

ENV_OUT_DIR = "ERRWLAB_OUT_DIR"
DEFAULT_OUT_DIR = "errwlab-out"

# Canned configurations, enumerable via `errwlab list`.
EXPERIMENTS = {
    "square-attraction": {
        "description": "4-cycle, quadratic weights: attraction frequency at "
        "horizon 1e5, window 100",
        "config": {
            "cycle_length": 4,
            "weight": {"family": "power", "exponent": 2.0},
            "horizon": 100_000,
            "replicas": 1000,
            "attraction_window": 100,
            "seed": 20260822,
        },
    },
    "square-attraction-null": {
        "description": "4-cycle, linear weights (reciprocals diverge): the "
        "detector should stay near zero",
        "config": {
            "cycle_length": 4,
            "weight": {"family": "power", "exponent": 1.0},
            "horizon": 100_000,
            "replicas": 1000,
            "attraction_window": 100,
            "seed": 20260822,
        },
    },
    "square-timeline-parity": {
        "description": "4-cycle timeline engine: parity boundary sums vs "
        "elapsed time",
        "config": {
            "cycle_length": 4,
            "weight": {"family": "exponential", "base": 2.0},
            "horizon": 300,
            "replicas": 100,
            "attraction_window": 20,
            "engine": "timeline",
            "seed": 7,
        },
    },
    "hexagon-timeline-parity": {
        "description": "6-cycle timeline engine: same parity diagnostic on a "
        "longer even cycle",
        "config": {
            "cycle_length": 6,
            "weight": {"family": "exponential", "base": 2.0},
            "horizon": 300,
            "replicas": 100,
            "attraction_window": 20,
            "engine": "timeline",
            "seed": 7,
        },
    },
    "trap-oracle-geometric": {
        "description": "stay-forever probability for doubling weights: "
        "product oracle vs Monte Carlo",
        "config": {
            "cycle_length": 4,
            "weight": {"family": "exponential", "base": 2.0},
            "horizon": 64,
            "replicas": 100_000,
            "seed": 11,
        },
    },
    "square-vs-triangle": {
        "description": "matched 4-cycle vs 3-cycle comparison, quadratic "
        "weights, descriptive only",
        "pair": {
            "even": {
                "cycle_length": 4,
                "weight": {"family": "power", "exponent": 2.0},
                "horizon": 10_000,
                "replicas": 200,
                "attraction_window": 100,
                "seed": 20260822,
            },
            "odd": {
                "cycle_length": 3,
                "weight": {"family": "power", "exponent": 2.0},
                "horizon": 10_000,
                "replicas": 200,
                "attraction_window": 100,
                "seed": 20260822,
            },
        },
    },
}


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get(ENV_OUT_DIR)
    return Path(env) if env else Path(DEFAULT_OUT_DIR)


def _overrides(args) -> dict:
    return {
        "seed": getattr(args, "seed", None),
        "replicas": getattr(args, "replicas", None),
        "horizon": getattr(args, "horizon", None),
    }


def _resolve_single(args, force_engine=None) -> tuple:
    """(config, stem) from --experiment or --config."""
    overrides = _overrides(args)
    if force_engine:
        overrides["engine"] = force_engine
    if args.experiment:
        entry = EXPERIMENTS.get(args.experiment)
        if entry is None:
            raise SchemaError([f"unknown experiment {args.experiment!r}"])
        if "config" not in entry:
            raise SchemaError(
                [f"experiment {args.experiment!r} is a comparison pair; "
                 f"use the compare subcommand"]
            )
        data = dict(entry["config"])
        for key, value in overrides.items():
            if value is not None:
                data[key] = value
        return ExperimentConfig.from_dict(data), args.experiment
    if not args.config:
        raise SchemaError(["either --config or --experiment is required"])
    cfg = parse_config(args.config, overrides)
    return cfg, Path(args.config).stem


def _finish(args, checks, payload, stem, figure_fn=None) -> int:
    """Emit payload, render figures, print the verdict, return exit code."""
    out_dir = _out_dir(args)
    payload = dict(payload)
    payload["checks"] = [
        {"name": name, "passed": ok, "detail": detail}
        for name, ok, detail in checks
    ]
    written = emit(payload, args.format, out_dir, stem)
    if figure_fn is not None and not args.no_plots:
        written += figure_fn(payload, out_dir, stem)
    for path in written:
        print(f"wrote {path}")
    failed = [
        {"name": name, "detail": detail}
        for name, ok, detail in checks
        if not ok
    ]
    for name, ok, detail in checks:
        print(f"check {name}: {'pass' if ok else 'FAIL'} ({detail})")
    if failed:
        print(json.dumps({"failed_checks": failed}, sort_keys=True))
        return 1
    return 0


def _cmd_simulate(args, force_engine=None, prefix="simulate") -> int:
    cfg, name = _resolve_single(args, force_engine)
    result = run_experiment(cfg, args.parallelism)
    payload = result.as_dict()
    agg = payload["aggregates"]
    print(
        f"{cfg.cycle_length}-cycle, engine {cfg.engine}: attracted fraction "
        f"{agg['attracted_fraction']:.4f} "
        f"(se {agg['attracted_fraction_se']:.4f}) over {cfg.replicas} replicas"
    )
    checks = []
    if cfg.engine == "timeline" and cfg.cycle_length % 2 == 0:
        residual = agg["parity_residual_max"]
        checks.append(
            (
                "parity-boundary-identity",
                bool(residual <= 1e-9),
                f"max relative residual {residual:.3e}, tolerance 1e-9",
            )
        )

    from .plots import render_experiment_figures

    return _finish(
        args, checks, payload, f"{prefix}-{name}", render_experiment_figures
    )


def _cmd_timeline(args) -> int:
    return _cmd_simulate(args, force_engine="timeline", prefix="timeline")


def _cmd_martingale_check(args) -> int:
    cfg, name = _resolve_single(args)
    graph = cfg.graph()
    weight = cfg.weight_fn()

    enum = enumerate_increment_check(
        graph, weight, cfg.initial_counts, cfg.start_vertex, args.depth
    )
    rng = replica_generator(cfg.seed, 0)
    traj = simulate(
        graph, weight, cfg.start_vertex, cfg.initial_counts, cfg.horizon, rng,
        seed_info={"master_seed": cfg.seed, "replica": 0},
    )
    trace = balance_trace(traj, weight)
    residual = trace.identity_residual()
    anchor = cfg.horizon // 2
    record = stopping_time_scan(trace, anchor, epsilon=args.epsilon)

    drift_tol = 0.0 if enum.exact else 1e-12
    checks = [
        (
            "tree-drift-free",
            enum.drift_free,
            f"max drift {enum.max_flow_increment:.3e} over "
            f"{enum.internal_nodes} nodes, exact={enum.exact}, "
            f"tolerance {drift_tol:g}",
        ),
    ]
    if graph.is_even:
        checks.append(
            (
                "pathwise-identity",
                bool(residual < 1e-9),
                f"max |balance - prefix side| {residual:.3e}, tolerance 1e-9",
            )
        )
    if record.stopped:
        checks.append(
            (
                "overshoot-bound",
                bool(record.overshoot_ok),
                f"|balance| at stop {abs(record.stop_value):.3e} vs bound "
                f"{record.overshoot_bound:.3e}",
            )
        )

    payload = {
        "schema": "errwlab.martingale.v1",
        "config": cfg.to_dict(),
        "enumeration": {
            "depth": enum.depth,
            "internal_nodes": enum.internal_nodes,
            "exact": enum.exact,
            "max_flow_increment": enum.max_flow_increment,
            "max_balance_increment": enum.max_balance_increment,
            "max_compensator_residual": enum.max_compensator_residual,
        },
        "trace": {
            "steps": trace.n_steps,
            "identity_residual": residual,
            "diagnostic_only": trace.diagnostic_only,
            "final_balance": float(trace.balance[-1]),
        },
        "stopping": {
            "anchor": record.anchor,
            "epsilon": record.epsilon,
            "level": record.level,
            "stopped": record.stopped,
            "stop_index": record.stop_index,
            "overshoot_bound": record.overshoot_bound,
            "overshoot_ok": record.overshoot_ok,
        },
    }
    return _finish(args, checks, payload, f"martingale-{name}")


def _cmd_det_m(args) -> int:
    lengths = list(range(args.min_length, args.max_length + 1))
    rows = []
    all_ok = True
    for l in lengths:
        det = incidence_determinant(l)
        expected = 1 - (-1) ** l
        ok = det == expected
        all_ok = all_ok and ok
        rows.append(
            {
                "length": l,
                "determinant": det,
                "expected": expected,
                "singular": det == 0,
                "kernel_dimension": len(transpose_kernel_basis(l)),
            }
        )
    payload = {
        "schema": "errwlab.detm.v1",
        "table": rows,
        "matrix_5": incidence_matrix(5).tolist(),
    }
    checks = [
        (
            "determinant-parity-law",
            all_ok,
            f"det equals 1 - (-1)^l for lengths {lengths[0]}..{lengths[-1]}",
        )
    ]
    return _finish(args, checks, payload, "det-m")


def _cmd_oracle(args) -> int:
    cfg, name = _resolve_single(args)
    weight = cfg.weight_fn()
    if not isinstance(cfg.initial_counts, int):
        raise SchemaError(
            ["oracle needs a scalar initial_counts (symmetric start)"]
        )
    oracle = edge_trap_probability(
        weight, cfg.initial_counts, cfg.initial_counts, tol=1e-12
    )
    mc = edge_trap_frequency(
        weight, cfg.cycle_length, cfg.horizon, cfg.replicas, cfg.seed
    )
    gap = abs(oracle - mc["frequency"])
    limit = 3.0 * mc["standard_error"]
    checks = [
        (
            "oracle-vs-monte-carlo",
            bool(gap <= limit),
            f"|{oracle:.6f} - {mc['frequency']:.6f}| = {gap:.6f}, "
            f"3 se = {limit:.6f}",
        )
    ]
    payload = {
        "schema": "errwlab.oracle.v1",
        "config": cfg.to_dict(),
        "oracle_probability": oracle,
        "monte_carlo": mc,
        "agreement": {"gap": gap, "three_se": limit},
    }

    from .plots import render_oracle_figure

    return _finish(args, checks, payload, f"oracle-{name}", render_oracle_figure)


def _cmd_compare(args) -> int:
    overrides = _overrides(args)
    if args.experiment:
        entry = EXPERIMENTS.get(args.experiment)
        if entry is None:
            raise SchemaError([f"unknown experiment {args.experiment!r}"])
        if "pair" not in entry:
            raise SchemaError(
                [f"experiment {args.experiment!r} is not a comparison pair"]
            )
        def load(key):
            data = dict(entry["pair"][key])
            for k, v in overrides.items():
                if v is not None:
                    data[k] = v
            return ExperimentConfig.from_dict(data)
        even_cfg, odd_cfg = load("even"), load("odd")
        name = args.experiment
    else:
        if not args.config:
            raise SchemaError(["either --config or --experiment is required"])
        even_cfg, odd_cfg = parse_config_pair(args.config, overrides)
        name = Path(args.config).stem
    report = compare_parities(even_cfg, odd_cfg, args.parallelism)
    payload = report.as_dict()
    side = payload["side_by_side"]["attracted_fraction"]
    print(
        f"attracted fraction: even {side['even']:.4f}, odd {side['odd']:.4f} "
        f"(descriptive contrast only)"
    )

    from .plots import render_comparison_figure

    return _finish(
        args, [], payload, f"compare-{name}", render_comparison_figure
    )


def _cmd_list(args) -> int:
    width = max(len(name) for name in EXPERIMENTS)
    for name in sorted(EXPERIMENTS):
        entry = EXPERIMENTS[name]
        kind = "pair" if "pair" in entry else "single"
        print(f"{name:<{width}}  [{kind}]  {entry['description']}")
    return 0


def _add_common(p: argparse.ArgumentParser, with_parallelism=True) -> None:
    p.add_argument("--config", help="path to a JSON config file")
    p.add_argument(
        "--experiment", help="name of a canned experiment (see `errwlab list`)"
    )
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--replicas", type=int, help="override the replica count")
    p.add_argument("--horizon", type=int, help="override the step horizon")
    p.add_argument("--out", help=f"output directory (default ${ENV_OUT_DIR} "
                   f"or ./{DEFAULT_OUT_DIR})")
    p.add_argument(
        "--format",
        choices=("json", "csv", "both"),
        default="both",
        help="delimited output format (default both)",
    )
    p.add_argument(
        "--no-plots", action="store_true", help="skip figure rendering"
    )
    if with_parallelism:
        p.add_argument(
            "--parallelism",
            type=int,
            default=1,
            help="worker processes (never changes results)",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="errwlab",
        description="Simulation and verification lab for strongly reinforced "
        "walks on cycles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a replica experiment")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser(
        "timeline", help="run a replica experiment on the timeline engine"
    )
    _add_common(p)
    p.set_defaults(func=_cmd_timeline)

    p = sub.add_parser(
        "martingale-check",
        help="tree drift audit plus pathwise identity on a fresh trajectory",
    )
    _add_common(p, with_parallelism=False)
    p.add_argument("--depth", type=int, default=6, help="enumeration depth")
    p.add_argument(
        "--epsilon", type=float, default=5.0, help="stopping threshold"
    )
    p.set_defaults(func=_cmd_martingale_check)

    p = sub.add_parser(
        "det-m", help="incidence determinant table over a length range"
    )
    _add_common(p, with_parallelism=False)
    p.add_argument("--min-length", type=int, default=3)
    p.add_argument("--max-length", type=int, default=12)
    p.set_defaults(func=_cmd_det_m)

    p = sub.add_parser(
        "oracle", help="stay-forever probability: product oracle vs Monte Carlo"
    )
    _add_common(p, with_parallelism=False)
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser(
        "compare", help="even vs odd cycle, matched weights and horizon"
    )
    _add_common(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("list", help="enumerate canned experiments")
    p.set_defaults(func=_cmd_list)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(
            json.dumps({"error": "config", "problems": exc.errors}, sort_keys=True),
            file=sys.stderr,
        )
        return 2
    except FileNotFoundError as exc:
        print(json.dumps({"error": "io", "detail": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
