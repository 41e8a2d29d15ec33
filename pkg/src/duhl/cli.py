"""Command line entry point: ``duhl run | compare | bounds | gen-data``.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure, 5 bound violation.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import warnings

from .data import CLASSIFICATION, REGRESSION, SyntheticSpec, gen_synthetic, load_libsvm, write_libsvm
from .engine import DuhlConfig, RefreshMode, run_block_cd
from .exceptions import (ConvergenceError, GapInconsistencyError, LibsvmFormatError,
                         NumericalError)
from .metrics import (attach_suboptimality, descent_report, epochs_to, eta_hat,
                      check_linear_rate, max_block_sigma, reference_optimum, rounds_to,
                      sublinear_report, write_compare_csv, write_csv)
from .problems import Family, ProblemSpec
from .selectors import PolicyKind, SelectionPolicy
from .solver import SolverBudget

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERIC = 4
EXIT_BOUND = 5

OUTPUT_ENV = "DUHL_OUTPUT_DIR"
FAMILIES = ["ridge", "elastic-net", "lasso", "svm"]
POLICIES = [k.value for k in PolicyKind]

log = logging.getLogger("duhl")


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------- #
# argument parsing

def _data_args(p):
    g = p.add_argument_group("data")
    g.add_argument("--data", metavar="PATH", help="LIBSVM file (default: synthetic data)")
    g.add_argument("--transpose", action="store_true",
                   help="flip the default orientation (regression: samples as rows, "
                        "svm: samples as columns)")
    g.add_argument("--d", type=int, default=200, help="synthetic rows (default: 200)")
    g.add_argument("--n", type=int, default=400, help="synthetic columns (default: 400)")
    g.add_argument("--density", type=float, default=0.1,
                   help="fraction of nonzero true coefficients (default: 0.1)")
    g.add_argument("--noise-std", type=float, default=0.0, help="label noise (default: 0)")
    g.add_argument("--spread", type=float, default=0.0,
                   help="column scale spread, 0 gives homogeneous norms (default: 0)")
    g.add_argument("--data-seed", type=int, default=0, help="synthetic data seed (default: 0)")


def _problem_args(p):
    g = p.add_argument_group("problem")
    g.add_argument("--family", choices=FAMILIES, default="ridge",
                   help="model family; lasso is elastic-net with eta=0 (default: ridge)")
    g.add_argument("--lam", type=float, default=0.1, help="regularization strength (default: 0.1)")
    g.add_argument("--eta", type=float, default=None,
                   help="elastic-net L2 share in [0, 1] (default: 0, the Lasso)")


def _run_args(p, policy="gap-memory"):
    g = p.add_argument_group("training")
    if policy:
        g.add_argument("--policy", choices=POLICIES, default=policy,
                       help=f"block selection (default: {policy})")
    g.add_argument("--m", type=int, default=None, help="block size (overrides --m-frac)")
    g.add_argument("--m-frac", type=float, default=0.25,
                   help="block size as a fraction of n (default: 0.25)")
    g.add_argument("--passes", type=int, default=1,
                   help="coordinate sweeps per block solve (default: 1)")
    g.add_argument("--exact", action="store_true", help="solve every block to optimality")
    g.add_argument("--refresh", choices=[r.value for r in RefreshMode], default=None,
                   help="gap memory refresh mode, gap-memory policy only (default: fixed)")
    g.add_argument("--refresh-frac", type=float, default=None,
                   help="coordinates refreshed per round as a fraction of n, fixed mode "
                        "(default: 0.05)")
    g.add_argument("--max-rounds", type=int, default=100, help="round limit (default: 100)")
    g.add_argument("--stop-gap", type=float, default=0.0,
                   help="stop once the duality gap is at or below this (default: 0)")
    g.add_argument("--seed", type=int, default=0, help="run seed (default: 0)")
    g.add_argument("--out", metavar="PATH", default=None,
                   help=f"output CSV (default: <${OUTPUT_ENV} or .>/<command>.csv)")
    g.add_argument("-v", "--verbose", action="store_true", help="debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duhl", description="Duality-gap guided block coordinate descent.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="one training run, trace CSV")
    _problem_args(p)
    _data_args(p)
    _run_args(p)

    p = sub.add_parser("compare", help="all policies on the same data and seed")
    _problem_args(p)
    _data_args(p)
    _run_args(p, policy=None)
    p.add_argument("--target-gap", type=float, default=1e-4,
                   help="gap level for the rounds/epochs summary (default: 1e-4)")
    p.add_argument("--tune-passes", default=None, metavar="LIST",
                   help="comma separated passes tried per policy; the one reaching the "
                        "target in the fewest epochs is kept (default: off)")

    p = sub.add_parser("bounds", help="exact-solve run checked against the convergence bounds")
    _problem_args(p)
    _data_args(p)
    _run_args(p, policy="gap-oracle")
    p.add_argument("--sigma-scale", type=float, default=1.0, help=argparse.SUPPRESS)

    p = sub.add_parser("gen-data", help="write a synthetic dataset in LIBSVM format")
    _data_args(p)
    p.add_argument("--kind", choices=[REGRESSION, CLASSIFICATION], default=REGRESSION,
                   help="label type (default: regression)")
    p.add_argument("--out", metavar="PATH", default=None,
                   help=f"output file (default: <${OUTPUT_ENV} or .>/synthetic.libsvm)")
    return parser


# --------------------------------------------------------------------------- #
# config assembly

def _output_path(args, default_name):
    if args.out:
        return args.out
    return os.path.join(os.environ.get(OUTPUT_ENV, "."), default_name)


def _family(args):
    if args.family == "lasso":
        if args.eta not in (None, 0.0):
            raise ConfigError("--family lasso fixes eta=0")
        return Family.ELASTIC_NET, 0.0
    if args.eta is not None and args.family != "elastic-net":
        raise ConfigError("--eta only applies to the elastic-net family")
    return Family(args.family), args.eta


def load_dataset(args, family):
    """Dataset from ``--data`` or the synthetic flags, oriented for ``family``."""
    classification = family is Family.SVM
    if args.data:
        columns = classification != bool(args.transpose)
        return load_libsvm(args.data, orientation="columns" if columns else "rows")
    if args.transpose:
        raise ConfigError("--transpose only applies to --data")
    spec = SyntheticSpec(d=args.d, n=args.n, density=args.density, noise_std=args.noise_std,
                         column_scale_spread=args.spread, seed=args.data_seed,
                         kind=CLASSIFICATION if classification else REGRESSION)
    return gen_synthetic(spec)


def _block_size(args, n):
    if args.m is not None:
        m = args.m
    else:
        if not 0.0 < args.m_frac <= 1.0:
            raise ConfigError(f"--m-frac must lie in (0, 1], got {args.m_frac}")
        m = max(1, int(round(args.m_frac * n)))
    if not 1 <= m <= n:
        raise ConfigError(f"block size {m} must lie in [1, n={n}]")
    return m


def make_config(args, policy, n, passes=None) -> DuhlConfig:
    policy = PolicyKind(policy)
    refresh_given = args.refresh is not None or args.refresh_frac is not None
    if refresh_given and policy is not PolicyKind.GAP_MEMORY:
        raise ConfigError("--refresh/--refresh-frac need --policy gap-memory")
    if args.max_rounds < 0:
        raise ConfigError("--max-rounds must be nonnegative")
    if args.stop_gap < 0:
        raise ConfigError("--stop-gap must be nonnegative")
    return DuhlConfig(
        policy=SelectionPolicy(policy, _block_size(args, n)),
        budget=SolverBudget(args.passes if passes is None else passes),
        exact=args.exact,
        refresh=RefreshMode(args.refresh or RefreshMode.FIXED_COUNT),
        refresh_fraction=0.05 if args.refresh_frac is None else args.refresh_frac,
        max_rounds=args.max_rounds,
        stop_gap=args.stop_gap,
        seed=args.seed,
    )


def _setup(args):
    family, eta = _family(args)
    data = load_dataset(args, family)
    problem = ProblemSpec.for_data(family, data, args.lam, eta)
    return problem, data


def _summary(traces):
    last = traces[-1]
    swaps = sum(tr.swaps for tr in traces)
    return (f"final_gap={last.total_gap:.6e} rounds={last.round} "
            f"epochs={last.epochs:.4f} swaps={swaps}")


# --------------------------------------------------------------------------- #
# commands

def cmd_run(args) -> int:
    problem, data = _setup(args)
    cfg = make_config(args, args.policy, data.n)
    out = _output_path(args, "run.csv")
    traces = run_block_cd(problem, data, cfg)
    write_csv(traces, out)
    print(_summary(traces))
    return EXIT_OK


def _parse_passes(text):
    try:
        vals = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise ConfigError(f"--tune-passes expects integers, got {text!r}") from None
    if not vals or vals[0] < 1:
        raise ConfigError("--tune-passes needs positive integers")
    return vals


def cmd_compare(args) -> int:
    problem, data = _setup(args)
    options = _parse_passes(args.tune_passes) if args.tune_passes else [args.passes]
    out = _output_path(args, "compare.csv")
    runs = {}
    print(f"{'policy':<12} {'passes':>6} {'rounds':>8} {'epochs':>10} {'final_gap':>13}")
    for policy in POLICIES:
        best = None
        for passes in options:
            # the refresh flags only go to the gap-memory run
            saved = (args.refresh, args.refresh_frac)
            if policy != PolicyKind.GAP_MEMORY.value:
                args.refresh, args.refresh_frac = None, None
            try:
                cfg = make_config(args, policy, data.n, passes)
            finally:
                args.refresh, args.refresh_frac = saved
            traces = run_block_cd(problem, data, cfg)
            ep = epochs_to(traces, args.target_gap)
            key = (math.inf if ep is None else ep, passes)
            if best is None or key < best[0]:
                best = (key, passes, traces)
        _, passes, traces = best
        runs[policy] = traces
        r = rounds_to(traces, args.target_gap)
        e = epochs_to(traces, args.target_gap)
        print(f"{policy:<12} {passes:>6} {('-' if r is None else str(r)):>8} "
              f"{('-' if e is None else f'{e:.3f}'):>10} {traces[-1].total_gap:>13.6e}")
    write_compare_csv(runs, out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    problem, data = _setup(args)
    args.exact = True
    cfg = make_config(args, args.policy, data.n)
    out = _output_path(args, "bounds.csv")
    traces = run_block_cd(problem, data, cfg)
    attach_suboptimality(traces, reference_optimum(problem, data))
    sigma = max_block_sigma(data, traces) * args.sigma_scale
    eta = eta_hat(traces)
    violations = 0
    if problem.strongly_convex:
        steps = descent_report(problem, data, traces, sigma_scale=args.sigma_scale)
        rates = check_linear_rate(traces, problem, sigma, eta, cfg.m) if len(traces) > 1 else []
        violations = sum(not r.satisfied for r in steps) + sum(not r.satisfied for r in rates)
        write_csv(traces, out, steps, rates)
    else:
        steps = None
        rates = sublinear_report(traces, problem, sigma, eta, cfg.m) if len(traces) > 1 else []
        over = sum(not r.satisfied for r in rates)
        if over:
            warnings.warn(f"{over} rounds above the sublinear envelope (advisory)",
                          RuntimeWarning, stacklevel=1)
        write_csv(traces, out, [], rates)
    print(_summary(traces))
    print(f"sigma={sigma:.6e} eta_hat={eta:.6f} violations={violations}"
          + ("" if problem.strongly_convex else " (per-step check skipped: mu=0)"))
    return EXIT_BOUND if violations else EXIT_OK


def cmd_gen_data(args) -> int:
    spec = SyntheticSpec(d=args.d, n=args.n, density=args.density, noise_std=args.noise_std,
                         column_scale_spread=args.spread, seed=args.data_seed, kind=args.kind)
    data = gen_synthetic(spec)
    out = _output_path(args, "synthetic.libsvm")
    write_libsvm(data, out)
    print(f"wrote {out}: d={data.d} n={data.n} kind={data.kind}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "compare": cmd_compare, "bounds": cmd_bounds, "gen-data": cmd_gen_data}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (OSError, LibsvmFormatError) as exc:
        print(f"duhl: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, GapInconsistencyError, ConvergenceError) as exc:
        print(f"duhl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"duhl: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
