"""Command-line interface: simulate | sweep | threshold | validate.

Exit codes: 0 success, 1 check failure, 2 usage error, 3 I/O error.
Model flags may come from a JSON config file (--config); explicit flags
override the file, which overrides built-in defaults. All lengths share
one arbitrary unit; only density-times-area products matter.
"""

import argparse
import json
import math
import sys
import time

from . import __version__, geometry, lower, upper
from .cascade import apply_attack, run_cascade
from .errors import ParameterDomainError
from .harness import (
    SweepSpec,
    density_series,
    first_round_load_probe,
    sweep,
)
from .rgg import (
    RNG_ALGORITHM,
    NetworkConfig,
    graph_to_text,
    make_rng,
    ring_mean,
    sample_graph,
)

_DEFAULTS = {
    "density": 400.0,
    "conn_radius": 0.1,
    "region_diameter": 1.0,
    "attack_radius": 0.1,
    "alpha": 1.5,
    "seed": 0,
}

# JSON config file keys mirror the CLI flags
_CONFIG_KEYS = {
    "lambda": "density",
    "r": "conn_radius",
    "d": "region_diameter",
    "ra": "attack_radius",
    "alpha": "alpha",
    "seed": "seed",
}


def _add_model_flags(p):
    p.add_argument("--lambda", dest="density", type=float, help="node density")
    p.add_argument("--r", dest="conn_radius", type=float, help="connection radius")
    p.add_argument("--d", dest="region_diameter", type=float, help="region diameter")
    p.add_argument("--ra", dest="attack_radius", type=float, help="attack radius")
    p.add_argument("--alpha", type=float, help="tolerance parameter")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--config", help="JSON config file")


def _resolve_model(args):
    resolved = dict(_DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise _IOFailure(f"cannot read config file: {exc}")
        for key, value in file_cfg.items():
            if key not in _CONFIG_KEYS:
                raise ParameterDomainError(f"unknown config key {key!r}")
            resolved[_CONFIG_KEYS[key]] = value
    for field in _DEFAULTS:
        flag = getattr(args, field, None)
        if flag is not None:
            resolved[field] = flag
    return resolved


def _network_config(resolved):
    return NetworkConfig(
        density=resolved["density"],
        conn_radius=resolved["conn_radius"],
        region_diameter=resolved["region_diameter"],
        attack_radius=resolved["attack_radius"],
        tolerance=resolved["alpha"],
        seed=resolved["seed"],
    )


class _IOFailure(Exception):
    pass


def _write_manifest(path, command, resolved, extra):
    manifest = {
        "tool": "geocascade",
        "version": __version__,
        "command": command,
        "config": resolved,
        "rng": RNG_ALGORITHM,
        "seed_rule": "splitmix64(master, trial[, attempt])",
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    manifest.update(extra)
    try:
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise _IOFailure(f"cannot write manifest: {exc}")


def cmd_simulate(args):
    resolved = _resolve_model(args)
    cfg = _network_config(resolved)
    g = sample_graph(cfg, make_rng(cfg.seed))
    attacked = apply_attack(g, cfg.attack_radius)
    result = run_cascade(g, attacked, cfg.tolerance, record_trace=args.trace)
    print(f"nodes {g.node_count}")
    print(f"attacked {attacked.size}")
    print(f"outside_total {result.outside_total}")
    print(f"outside_failures {result.outside_failures}")
    print(f"failure_ratio {result.failure_ratio:.17g}")
    print("stage_failures " + " ".join(str(c) for c in result.stage_failures))
    print(f"lost_load {result.lost_load:.17g}")
    if args.trace:
        for line in result.trace_lines:
            print(line)
    if args.save_graph:
        try:
            with open(args.save_graph, "w") as fh:
                fh.write(graph_to_text(g))
        except OSError as exc:
            raise _IOFailure(f"cannot write graph file: {exc}")
    return 0


def _alpha_grid(args):
    if args.alphas:
        grid = tuple(float(tok) for tok in args.alphas.split(","))
    else:
        if args.alpha_step <= 0:
            raise ParameterDomainError("--alpha-step must be positive")
        n = int(round((args.alpha_max - args.alpha_min) / args.alpha_step)) + 1
        if n < 1:
            raise ParameterDomainError("empty tolerance grid")
        grid = tuple(round(args.alpha_min + i * args.alpha_step, 12) for i in range(n))
    if not grid:
        raise ParameterDomainError("empty tolerance grid")
    return grid


def cmd_sweep(args):
    resolved = _resolve_model(args)
    cfg = _network_config(resolved)
    grid = _alpha_grid(args)
    spec = SweepSpec(
        config=cfg,
        alpha_grid=grid,
        trials=args.trials,
        condition_on_connected=args.condition_connected,
        master_seed=resolved["seed"],
        threads=args.threads,
    )
    # density * lens area at the attack edge: how well-populated the
    # Gaussian load approximation is (diagnostic only, never enforced)
    lens_coverage = cfg.density * geometry.lens_area(
        cfg.attack_radius, cfg.conn_radius, cfg.attack_radius
    )
    extra = {
        "trials": args.trials,
        "alpha_grid": list(grid),
        "condition_on_connected": args.condition_connected,
        "diagnostic_lens_coverage": lens_coverage,
    }
    try:
        if args.lambdas:
            densities = [float(tok) for tok in args.lambdas.split(",")]
            series = density_series(spec, densities)
            stem = args.out[:-4] if args.out.endswith(".csv") else args.out
            for density, curve in zip(series.densities, series.curves):
                name = f"{stem}_lambda{density:g}.csv"
                curve.write_csv(name)
                print(f"wrote {name}")
            sidecar = f"{stem}.alpha_upper.json"
            with open(sidecar, "w") as fh:
                json.dump(
                    {
                        "alpha_upper": _json_float(series.alpha_upper),
                        "q": cfg.radius_ratio,
                    },
                    fh,
                )
                fh.write("\n")
            print(f"wrote {sidecar}")
            _write_manifest(f"{stem}.manifest.json", "sweep", resolved, extra | {"lambdas": densities})
        else:
            curve = sweep(spec)
            curve.write_csv(args.out)
            print(f"wrote {args.out}")
            _write_manifest(f"{args.out}.manifest.json", "sweep", resolved, extra)
    except OSError as exc:
        raise _IOFailure(f"cannot write output: {exc}")
    return 0


def _json_float(x):
    # JSON has no infinity; thresholds can be unbounded when the attack
    # radius exceeds the connection radius
    return None if math.isinf(x) else x


def cmd_threshold(args):
    if args.q is not None:
        if args.q <= 0:
            raise ParameterDomainError("--q must be positive")
        conn_radius, attack_radius = 1.0, args.q
    else:
        resolved = _resolve_model(args)
        conn_radius = resolved["conn_radius"]
        attack_radius = resolved["attack_radius"]
    q = attack_radius / conn_radius
    cfg = NetworkConfig(
        density=max(6.0 / (math.pi * conn_radius**2), 3.0 / (math.pi * attack_radius**2)),
        conn_radius=conn_radius,
        region_diameter=4.0 * (attack_radius + conn_radius),
        attack_radius=attack_radius,
    )
    alpha_upper = upper.critical_tolerance_upper(cfg)
    alpha_lower = lower.critical_tolerance_lower(q)
    if args.csv:
        qs = []
        v = args.q_min
        while v <= args.q_max + 1e-12:
            qs.append(round(v, 12))
            v += args.q_step
        try:
            with open(args.csv, "w") as fh:
                fh.write("q,alpha_lower\n")
                for qv in qs:
                    fh.write(f"{qv:.17g},{lower.critical_tolerance_lower(qv):.17g}\n")
        except OSError as exc:
            raise _IOFailure(f"cannot write csv: {exc}")
        print(f"wrote {args.csv}")
    if args.json:
        print(
            json.dumps(
                {
                    "q": q,
                    "alpha_lower": alpha_lower,
                    "alpha_upper": _json_float(alpha_upper),
                }
            )
        )
    else:
        print(f"q {q:.17g}")
        print(f"alpha_lower {alpha_lower:.17g}")
        print(f"alpha_upper {alpha_upper:.17g}")
    return 0


def _report(line, ok):
    status = {True: "PASS", False: "FAIL", None: "N/A "}[ok]
    print(f"{status} {line}")
    return ok is not False


def cmd_validate(args):
    resolved = _resolve_model(args)
    cfg = _network_config(resolved)
    alpha = cfg.tolerance
    all_ok = True

    if cfg.mean_degree_area < 6:
        print(f"WARN density*pi*r^2 = {cfg.mean_degree_area:.4g} < 6 (regime assumption)")
    if cfg.mean_attacked < 3:
        print(f"WARN density*pi*ra^2 = {cfg.mean_attacked:.4g} < 3 (regime assumption)")

    in_regime = cfg.mean_degree_area >= 6 and cfg.mean_attacked >= 3
    ring1 = ring_mean(cfg, 1)
    all_ok &= _report(
        f"first-ring-mean-floor ring1={ring1:.4f} > 14",
        ring1 > 14.0 if in_regime else None,
    )

    for check in lower.ring_inequalities(cfg, alpha, depth=args.depth):
        ok = check["holds"] if check["applicable"] else None
        all_ok &= _report(
            f"{check['name']}[{check['index']}] {check['detail']}", ok
        )

    if args.draws > 0:
        ra = cfg.attack_radius
        probe = first_round_load_probe(
            cfg,
            node_dists=(ra, ra + cfg.conn_radius / 2.0),
            draws=args.draws,
            master_seed=cfg.seed,
        )
        for t, rec in sorted(probe.items()):
            ok = abs(rec["mean"] - rec["predicted_mean"]) <= 3 * rec["mean_stderr"]
            all_ok &= _report(
                f"first-round-load-mean r={t:g} sim={rec['mean']:.4f} "
                f"model={rec['predicted_mean']:.4f} se={rec['mean_stderr']:.4f}",
                ok,
            )
    return 0 if all_ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="geocascade",
        description="Cascading-failure simulation and bounds for circular "
        "attacks on random geometric networks",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one cascade realization")
    _add_model_flags(p_sim)
    p_sim.add_argument("--trace", action="store_true", help="print per-round failures")
    p_sim.add_argument("--save-graph", help="write the graph snapshot to this path")
    p_sim.set_defaults(handler=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="Monte Carlo + bounds over a tolerance grid")
    _add_model_flags(p_sweep)
    p_sweep.add_argument("--alpha-min", type=float, default=1.0)
    p_sweep.add_argument("--alpha-max", type=float, default=4.0)
    p_sweep.add_argument("--alpha-step", type=float, default=0.1)
    p_sweep.add_argument("--alphas", help="explicit comma-separated grid")
    p_sweep.add_argument("--trials", type=int, default=1000)
    p_sweep.add_argument("--threads", type=int, default=0, help="0 = auto")
    p_sweep.add_argument(
        "--condition-connected",
        action="store_true",
        help="reject disconnected realizations",
    )
    p_sweep.add_argument("--lambdas", help="comma-separated densities (one CSV each)")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_thr = sub.add_parser("threshold", help="critical tolerance values")
    _add_model_flags(p_thr)
    p_thr.add_argument("--q", type=float, help="attack/connection radius ratio")
    p_thr.add_argument("--json", action="store_true")
    p_thr.add_argument("--csv", help="write an alpha_lower-vs-q curve CSV")
    p_thr.add_argument("--q-min", type=float, default=0.1)
    p_thr.add_argument("--q-max", type=float, default=5.0)
    p_thr.add_argument("--q-step", type=float, default=0.1)
    p_thr.set_defaults(handler=cmd_threshold)

    p_val = sub.add_parser("validate", help="run the model's internal checks")
    _add_model_flags(p_val)
    p_val.add_argument("--depth", type=int, default=20, help="ring chain depth")
    p_val.add_argument(
        "--draws",
        type=int,
        default=2000,
        help="graph draws for the load check (0 disables)",
    )
    p_val.set_defaults(handler=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ParameterDomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
