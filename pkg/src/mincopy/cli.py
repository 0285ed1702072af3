"""Command-line front end.

Subcommands: solve, simulate, baseline, eta, analytic, bench.  Tables are
comma-separated with one comment header carrying the config hash, grid
sizes and tool version.  Exit codes: 0 success, 2 parse/usage error,
3 infeasible, 4 non-converged, 5 consistency failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import backend
from .config import PRESETS, ProblemConfig, parse_angle, preset
from .exceptions import ConfigError, InfeasibleError, RunawayTrialError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_NONCONVERGED = 4
EXIT_CONSISTENCY = 5


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors already; normalize other codes
        return EXIT_PARSE if exc.code not in (0,) else 0
    if args.command is None:
        parser.print_help()
        return EXIT_PARSE
    try:
        return args.func(args)
    except ConfigError as exc:
        key = f" (key: {exc.key})" if exc.key else ""
        print(f"error: {exc}{key}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except RunawayTrialError as exc:
        print(f"runaway trial: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mincopy",
        description="Minimum-copy adaptive discrimination strategies for qubit pairs",
    )
    parser.add_argument("--threads", type=int, default=0,
                        help="cap worker threads (default: backend decides)")
    sub = parser.add_subparsers(dest="command")

    ps = sub.add_parser("solve", help="solve a strategy and write value/policy files")
    _add_config_args(ps)
    ps.add_argument("--mode", choices=("goal", "goac"), default="goal")
    ps.add_argument("--solver-mode", choices=("hybrid", "exact"), default="hybrid",
                    help="goal only: hybrid accelerates with cached supports")
    ps.add_argument("--at", type=float, action="append", default=None,
                    help="print N(q) at this prior (repeatable)")
    ps.add_argument("--out", default="artifacts", help="output directory")
    ps.set_defaults(func=cmd_solve)

    pm = sub.add_parser("simulate", help="Monte Carlo run of a saved policy")
    pm.add_argument("--policy", required=True, help="solution .npz written by solve")
    pm.add_argument("--config", default=None, help="config file for hash verification")
    pm.add_argument("--preset", default=None, help="preset name for hash verification")
    pm.add_argument("--q0", type=float, required=True)
    pm.add_argument("--trials", type=int, required=True)
    pm.add_argument("--seed", type=int, default=20240501)
    pm.add_argument("--component-sampling", action="store_true",
                    help="sample pure preparation components each round")
    pm.add_argument("--out", default="artifacts")
    pm.set_defaults(func=cmd_simulate)

    pb = sub.add_parser("baseline", help="optimize a fixed measurement family")
    pb.add_argument("family", choices=("gofl", "gofc"))
    _add_config_args(pb)
    pb.add_argument("--at", type=float, default=0.5)
    pb.add_argument("--out", default=None, help="write a CSV table here")
    pb.set_defaults(func=cmd_baseline)

    pe = sub.add_parser("eta", help="small-error efficiency ratios over s")
    _add_config_args(pe)
    pe.add_argument("--q", type=float, default=0.5)
    pe.add_argument("--s", default=None,
                    help="comma-separated mixing weights (default: preset value)")
    pe.add_argument("--out", default=None)
    pe.set_defaults(func=cmd_eta)

    pa = sub.add_parser("analytic", help="pure-state closed forms")
    pa.add_argument("--x", required=True, help="separation angle (rad, or e.g. pi/6)")
    pa.add_argument("--eps", type=float, required=True)
    pa.add_argument("--q", type=float, required=True)
    pa.add_argument("--out", default=None)
    pa.set_defaults(func=cmd_analytic)

    pbench = sub.add_parser("bench", help="time the hot kernels on both backends")
    pbench.add_argument("--trials", type=int, default=100000)
    pbench.add_argument("--q-points", type=int, default=1001)
    pbench.add_argument("--theta-points", type=int, default=901)
    pbench.set_defaults(func=cmd_bench)
    return parser


def _add_config_args(sub):
    sub.add_argument("--preset", choices=sorted(PRESETS), default=None)
    sub.add_argument("--config", default=None, help="INI or JSON config file")
    sub.add_argument("--override", action="append", default=[],
                     metavar="KEY=VALUE", help="override a config key (section.key=value)")


def _load_config(args) -> ProblemConfig:
    if args.config:
        cfg = ProblemConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        raise ConfigError("provide --preset or --config", key="preset")
    for item in getattr(args, "override", []):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"override {item!r} is not KEY=VALUE", key=item)
        key = key.split(".")[-1]
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown override key {key!r}", key=key)
        current = getattr(cfg, key)
        if key in ProblemConfig._ANGLES:
            setattr(cfg, key, parse_angle(value))
        elif isinstance(current, int) and not isinstance(current, bool):
            setattr(cfg, key, int(value))
        elif isinstance(current, float):
            setattr(cfg, key, float(value))
        else:
            setattr(cfg, key, value)
    return cfg.validate()


def _apply_threads(args):
    n = getattr(args, "threads", 0)
    if n:
        backend.set_num_threads(n)
    env = os.environ.get("MINCOPY_THREADS")
    if not n and env:
        backend.set_num_threads(int(env))


def cmd_solve(args) -> int:
    from . import solver
    from .value import save_solution

    cfg = _load_config(args)
    _apply_threads(args)
    problem = cfg.problem()
    if args.mode == "goal":
        vf, policy, report = solver.solve_goal(
            problem,
            q_points=cfg.q_points,
            theta_points=cfg.theta_points,
            tol=cfg.tol,
            max_iter=cfg.max_iter,
            mode=args.solver_mode,
        )
    else:
        vf, policy, report = solver.solve_goac(
            problem,
            q_points=cfg.q_points,
            local_points=cfg.local_arm_points,
            collective_points=cfg.collective_arm_points,
            tol=cfg.tol,
            max_iter=cfg.max_iter,
        )
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.join(args.out, f"{cfg.label or 'run'}-{args.mode}-{cfg.content_hash()}")
    path = save_solution(stem, vf, policy, report, config_hash=cfg.content_hash(),
                         extra={"mode": args.mode})
    print(cfg.table_header(mode=args.mode, converged=report.converged,
                           iterations=report.iterations))
    print(f"wrote {path}")
    for q in args.at or []:
        print(f"N({q}) = {float(vf(q)):.6f}")
    if not report.converged:
        print("warning: not converged within max_iter", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_simulate(args) -> int:
    from . import simulate
    from .value import load_solution

    if args.trials < 1:
        raise ConfigError("--trials must be at least 1", key="trials")
    cfg = _load_config(args)
    _apply_threads(args)
    vf, policy, stored_hash = load_solution(args.policy)
    if stored_hash and stored_hash != cfg.content_hash():
        raise ConfigError(
            f"policy was solved under config {stored_hash}, not {cfg.content_hash()}",
            key="policy",
        )
    problem = cfg.problem()
    summary = simulate.monte_carlo(
        policy, problem, args.q0, args.trials, args.seed,
        component_sampling=args.component_sampling,
    )
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.join(
        args.out, f"sim-{cfg.label or 'run'}-q{args.q0}-n{args.trials}-s{args.seed}"
    )
    with open(stem + ".json", "w") as fh:
        json.dump(summary.to_dict(), fh, indent=2)
    with open(stem + ".csv", "w") as fh:
        fh.write(cfg.table_header(q0=args.q0, trials=args.trials, seed=args.seed) + "\n")
        fh.write("copies,count\n")
        for c, n in sorted(summary.histogram.items()):
            fh.write(f"{c},{n}\n")
    print(cfg.table_header(q0=args.q0, trials=args.trials, seed=args.seed))
    print(f"mean_copies = {summary.mean_copies:.6f}")
    if summary.stderr_copies is not None:
        print(f"stderr      = {summary.stderr_copies:.6f}")
    print(f"error_rate  = {summary.empirical_error:.3e}")
    print(f"wrote {stem}.json, {stem}.csv")
    if summary.error_flagged:
        print("warning: empirical error exceeds the requirement beyond noise",
              file=sys.stderr)
        return EXIT_CONSISTENCY
    return EXIT_OK


def cmd_baseline(args) -> int:
    from . import baselines

    cfg = _load_config(args)
    _apply_threads(args)
    problem = cfg.problem()
    family = "local" if args.family == "gofl" else "collective"
    result = baselines.optimize_fixed(
        problem, family, at_q=args.at, q_points=cfg.q_points
    )
    header = cfg.table_header(family=args.family, at=args.at)
    lines = [header, "family,best_theta_rad,best_theta_deg,consumption"]
    lines.append(
        f"{args.family},{result.best_theta:.8f},"
        f"{math.degrees(result.best_theta):.4f},{result.consumption_at[args.at]:.6f}"
    )
    text = "\n".join(lines)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def cmd_eta(args) -> int:
    from . import baselines, problems

    cfg = _load_config(args)
    _apply_threads(args)
    if args.s:
        s_values = [float(tok) for tok in args.s.split(",")]
    else:
        s_values = [cfg.s]
    header = cfg.table_header(q=args.q)
    lines = [header, "s,eta_collective_adaptive,eta_goal,eta_gofl,eta_gofc"]
    for s in s_values:
        problem = problems.overlap_mixture_problem(
            s, cfg.epsilon, cfg.mixture_angle0, cfg.mixture_angle1
        )
        col = baselines.eta_ratio(args.q, problem, family="collective")
        goal = baselines.eta_ratio(args.q, problem, family="local-povm",
                                   theta_points=cfg.theta_points)
        gofl = baselines.eta_ratio_fixed(args.q, problem, family="local")
        gofc = baselines.eta_ratio_fixed(args.q, problem, family="collective")
        lines.append(
            f"{s},{col.eta:.6f},{goal.eta:.6f},{gofl.eta:.6f},{gofc.eta:.6f}"
        )
    text = "\n".join(lines)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def cmd_analytic(args) -> int:
    from . import analytic

    x = parse_angle(args.x)
    if not 0.0 < x <= math.pi / 2.0:
        raise ConfigError("x must lie in (0, pi/2]", key="x")
    if not 0.0 <= args.eps < 0.5:
        raise ConfigError("eps must lie in [0, 0.5)", key="eps")
    if not 0.0 <= args.q <= 1.0:
        raise ConfigError("q must lie in [0, 1]", key="q")
    n = analytic.n_goal_analytic(args.q, x, args.eps)
    lines = [
        f"# x={x:.8f}, eps={args.eps}, q={args.q}, version=0.1.0",
        "quantity,value",
        f"n_goal_analytic,{n:.8f}",
        f"critical_q,{analytic.critical_q(x):.8f}",
    ]
    if args.eps == 0.0:
        lines.append(f"lower_bound,{analytic.lower_bound(args.q, x):.8f}")
    if 0.0 < args.q < 1.0 and args.eps < args.q < 1.0 - args.eps:
        ang = analytic.goal_angles(args.q, x, args.eps)
        lines.append(f"case,{int(ang.case)}")
        lines.append(f"theta0,{ang.theta0:.8f}")
        lines.append(f"theta1,{ang.theta1:.8f}")
        lines.append(f"theta2,{ang.theta2:.8f}")
    limits = analytic.small_prior_limits(x)
    for key, value in limits.items():
        lines.append(f"{key},{value:.8f}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import format_table, run_benchmarks

    rows = run_benchmarks(
        trials=args.trials, q_points=args.q_points, theta_points=args.theta_points
    )
    print(format_table(rows))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
