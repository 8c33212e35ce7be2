"""Command-line front end.

Subcommands
-----------
``run``
    Batch run against a built-in function; writes ``samples.csv``,
    ``scores_<k>.csv`` per adaptive step, ``run.json``, ``state.json``.
``init``
    Create a run directory for an external (ask/tell) evaluator.
``ask`` / ``tell``
    One proposal / one observation at a time against a persisted state;
    the ask -> tell -> ask sequence replays a batch run exactly when fed
    the same responses.
``noise-report``
    Closed-form noise-sum moments next to their Monte-Carlo estimates.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigError,
    EvaluationError,
    FlolaError,
    PendingProposalError,
)
from .benchmarks import make_evaluator
from .noise import (
    noise_sum_mean_formula,
    noise_sum_variance_formula,
    simulate_noise_sum,
)
from .persistence import (
    fmt_float,
    load_state,
    read_observed_csv,
    run_lock,
    save_state,
    write_proposed_csv,
    write_run_json,
    write_samples_csv,
    write_scores_csv,
)
from .sampler import (
    NOISE_STREAM,
    RunState,
    SamplerConfig,
    append_observation,
    derive_seed,
    propose,
    step,
)
from .design import DesignSpace

BUILTIN_FUNCTIONS = ("peaks", "linear", "quadratic")


def _add_sampler_flags(p, with_function):
    # "run" leaves the core flags optional at parse time so --from can
    # supply them; cmd_run checks completeness afterwards.
    required = not with_function
    if with_function:
        p.add_argument("--function", choices=BUILTIN_FUNCTIONS)
        p.add_argument("--dim", type=int, default=None)
        p.add_argument("--noise-lambda", type=float, default=0.0,
                       help="variance of the synthetic output noise")
    else:
        p.add_argument("--dim", type=int, required=True)
        p.add_argument("--lower", required=True,
                       help="comma-separated lower bounds (single value broadcasts)")
        p.add_argument("--upper", required=True,
                       help="comma-separated upper bounds (single value broadcasts)")
    p.add_argument("--budget", type=int, required=required)
    p.add_argument("--seed", type=int, required=required, help="master seed")
    p.add_argument("--neighbors", type=int, default=None,
                   help="neighborhood size cap (default 2*dim)")
    p.add_argument("--mc-points", type=int, default=None,
                   help="Monte-Carlo pool size (default max(1000, 100*n))")
    p.add_argument("--initial", default="auto",
                   choices=("auto", "corners_center", "latin_hypercube"))
    p.add_argument("--initial-size", type=int, default=None,
                   help="latin hypercube size (default 5*dim)")
    p.add_argument("--out", required=True, help="run directory")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flola",
        description="Sequential experimental design with Voronoi exploration "
        "and local-gradient exploitation.",
    )
    parser.add_argument("--version", action="version", version=f"flola {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="batch run against a built-in function")
    _add_sampler_flags(p_run, with_function=True)
    p_run.add_argument("--from", dest="from_json", default=None,
                       help="load every flag except --out from a previous run.json")
    p_run.set_defaults(func=cmd_run)

    p_init = sub.add_parser("init", help="create an ask/tell run directory")
    _add_sampler_flags(p_init, with_function=False)
    p_init.set_defaults(func=cmd_init)

    p_ask = sub.add_parser("ask", help="propose the next evaluation point")
    p_ask.add_argument("run_dir")
    p_ask.set_defaults(func=cmd_ask)

    p_tell = sub.add_parser("tell", help="record the observed response")
    p_tell.add_argument("run_dir")
    p_tell.add_argument("--observed", default=None,
                        help="observed.csv path (default <run_dir>/observed.csv)")
    p_tell.set_defaults(func=cmd_tell)

    p_noise = sub.add_parser("noise-report",
                             help="closed-form vs Monte-Carlo noise-sum moments")
    p_noise.add_argument("--t-max", type=int, default=3)
    p_noise.add_argument("--lambda-list", default="0.25,1,4")
    p_noise.add_argument("--draws", type=int, default=200000)
    p_noise.add_argument("--seed", type=int, default=0)
    p_noise.add_argument("--out", default=None, help="optional CSV output path")
    p_noise.set_defaults(func=cmd_noise_report)
    return parser


def _parse_bounds(text, dim):
    values = [float(v) for v in str(text).split(",") if v.strip() != ""]
    if len(values) == 1:
        values = values * dim
    if len(values) != dim:
        raise ConfigError(f"expected {dim} bounds, got {len(values)}")
    return tuple(values)


def _run_flags(args):
    return {
        "function": args.function,
        "dim": args.dim,
        "budget": args.budget,
        "noise_lambda": args.noise_lambda,
        "seed": args.seed,
        "neighbors": args.neighbors,
        "mc_points": args.mc_points,
        "initial": args.initial,
        "initial_size": args.initial_size,
    }


def cmd_run(args) -> int:
    if args.from_json:
        stored = json.loads(Path(args.from_json).read_text())
        flags = stored.get("flags", stored)
        for name in ("function", "dim", "budget", "noise_lambda", "seed",
                     "neighbors", "mc_points", "initial", "initial_size"):
            setattr(args, name, flags[name])
    for name in ("function", "budget", "seed"):
        if getattr(args, name) is None:
            raise ConfigError(f"--{name} is required (directly or via --from)")
    evaluator = make_evaluator(
        args.function,
        noise_lambda=args.noise_lambda,
        seed=derive_seed(args.seed, NOISE_STREAM),
        dim=args.dim,
    )
    config = SamplerConfig(
        space=evaluator.space,
        budget=args.budget,
        master_seed=args.seed,
        noise_lambda=args.noise_lambda,
        t_max=args.neighbors,
        mc_points=args.mc_points,
        initial_scheme=args.initial,
        initial_size=args.initial_size,
    )
    out = Path(args.out)
    with run_lock(out):
        state = RunState.fresh(config)
        write_run_json(out / "run.json", {"command": "run", "flags": _run_flags(args)})
        try:
            while len(state.design) < config.budget:
                state, table = step(state, evaluator)
                if table is not None:
                    write_scores_csv(out / f"scores_{table.iteration}.csv", table)
        except EvaluationError as exc:
            save_state(out / "state.json", replace(state, pending=exc.point))
            write_samples_csv(out / "samples.csv", state.design)
            print(f"error: {exc}; partial state preserved in {out}", file=sys.stderr)
            return 1
        save_state(out / "state.json", state)
        write_samples_csv(out / "samples.csv", state.design)
    print(f"wrote {len(state.design)} samples to {out / 'samples.csv'}")
    return 0


def cmd_init(args) -> int:
    space = DesignSpace(
        lower=_parse_bounds(args.lower, args.dim),
        upper=_parse_bounds(args.upper, args.dim),
    )
    config = SamplerConfig(
        space=space,
        budget=args.budget,
        master_seed=args.seed,
        t_max=args.neighbors,
        mc_points=args.mc_points,
        initial_scheme=args.initial,
        initial_size=args.initial_size,
    )
    out = Path(args.out)
    with run_lock(out):
        state = RunState.fresh(config)
        if (out / "state.json").exists():
            raise ConfigError(f"{out / 'state.json'} already exists")
        save_state(out / "state.json", state)
        write_run_json(out / "run.json",
                       {"command": "init",
                        "flags": {"dim": args.dim, "lower": list(space.lower),
                                  "upper": list(space.upper), "budget": args.budget,
                                  "seed": args.seed, "neighbors": args.neighbors,
                                  "mc_points": args.mc_points, "initial": args.initial,
                                  "initial_size": args.initial_size}})
    print(f"initialized run directory {out} (budget {args.budget})")
    return 0


def cmd_ask(args) -> int:
    run_dir = Path(args.run_dir)
    with run_lock(run_dir):
        state = load_state(run_dir / "state.json")
        if state.pending is not None:
            coords = np.asarray(state.pending)
        else:
            coords, table = propose(state)
            if table is not None:
                write_scores_csv(run_dir / f"scores_{table.iteration}.csv", table)
            state = replace(state, pending=tuple(float(c) for c in coords))
            save_state(run_dir / "state.json", state)
        write_proposed_csv(run_dir / "proposed.csv", coords)
    print("proposed: " + ", ".join(fmt_float(c) for c in coords))
    return 0


def cmd_tell(args) -> int:
    run_dir = Path(args.run_dir)
    observed_path = Path(args.observed) if args.observed else run_dir / "observed.csv"
    with run_lock(run_dir):
        state = load_state(run_dir / "state.json")
        if state.pending is None:
            raise PendingProposalError("no pending proposal; run 'ask' first")
        rows = read_observed_csv(observed_path, state.config.space.dim)
        if len(rows) != 1:
            raise PendingProposalError(
                f"observed.csv must contain exactly 1 row, got {len(rows)}"
            )
        coords, response = rows[0]
        pending = np.asarray(state.pending)
        if not np.allclose(coords, pending, rtol=1e-9, atol=1e-12):
            diff = np.asarray(coords) - pending
            raise PendingProposalError(
                "observed coordinates do not match the pending proposal; "
                f"expected {tuple(map(float, pending))}, got {coords}, "
                f"diff {tuple(map(float, diff))}"
            )
        # Append the pending coordinates (not the re-parsed ones) so a replay
        # stays bit-identical to a batch run.
        state = append_observation(state, pending, response)
        save_state(run_dir / "state.json", state)
        write_samples_csv(run_dir / "samples.csv", state.design)
        n, budget = len(state.design), state.config.budget
    print(f"recorded y={fmt_float(response)} ({n}/{budget} evaluations)")
    return 0


def cmd_noise_report(args) -> int:
    if args.t_max < 1:
        raise ConfigError("--t-max must be >= 1")
    lambdas = [float(v) for v in str(args.lambda_list).split(",") if v.strip() != ""]
    if not lambdas:
        raise ConfigError("--lambda-list must contain at least one value")
    header = (f"{'T':>3} {'lambda':>9} {'formula_mean':>14} {'formula_var':>14} "
              f"{'mc_mean':>12} {'(se)':>10} {'mc_var':>12} {'(se)':>10}")
    print(header)
    rows = []
    for t in range(1, args.t_max + 1):
        for j, lam in enumerate(lambdas):
            stats = simulate_noise_sum(t, lam, args.draws, derive_seed(args.seed, t, j))
            fm = noise_sum_mean_formula(t, lam)
            fv = noise_sum_variance_formula(t, lam)
            rows.append((t, lam, fm, fv, stats))
            print(f"{t:>3} {lam:>9.4g} {fm:>14.6f} {fv:>14.6f} "
                  f"{stats.mean:>12.6f} {stats.mean_se:>10.2e} "
                  f"{stats.variance:>12.6f} {stats.variance_se:>10.2e}")
    if args.out:
        lines = ["t,lambda,formula_mean,formula_variance,"
                 "mc_mean,mc_mean_se,mc_variance,mc_variance_se"]
        for t, lam, fm, fv, stats in rows:
            lines.append(",".join(
                [str(t), fmt_float(lam), fmt_float(fm), fmt_float(fv),
                 fmt_float(stats.mean), fmt_float(stats.mean_se),
                 fmt_float(stats.variance), fmt_float(stats.variance_se)]))
        Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FlolaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
