"""Command line entry point.

::

    barriernet solve    CONFIG [--eps E]
    barriernet sweep    CONFIG [--threads N]
    barriernet critical CONFIG [--threads N]
    barriernet validate CONFIG [--seed S]

Common flags: ``--out DIR`` (env ``BARRIERNET_OUT``, default ``./out``),
``--threads N`` (env ``BARRIERNET_THREADS``, default 1), ``--seed S`` for the
randomized maximum-principle trials, ``--no-figures`` to skip PNG output.

Exit codes: 0 success, 2 hypothesis violation, 3 solver failure, 4 config error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

from . import report as rep
from .config import parse_config
from .elliptic import verify_maximum_principle
from .errors import BarrierNetError, ConfigError, HypothesisViolation, PreconditionError, SolverError
from .monotone import lipschitz_shift, semilinear_residual
from .problem import regularize_problem
from .sweep import critical_exponent_study, run_sweep, solve_single, validate_conditions

EXIT_OK, EXIT_HYPOTHESIS, EXIT_SOLVER, EXIT_CONFIG = 0, 2, 3, 4

log = logging.getLogger("barriernet")


def _env_int(name, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="barriernet", description="Barrier-based monotone solver for semilinear elliptic nets.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="TOML config or a manifest.json from an earlier run")
    common.add_argument("--out", default=None, help="output directory (env BARRIERNET_OUT, default ./out)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (env BARRIERNET_THREADS, default 1)")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized diagnostics")
    common.add_argument("--no-figures", action="store_true", help="write CSVs only")
    common.add_argument("-v", "--verbose", action="store_true")
    s = sub.add_parser("solve", parents=[common], help="solve one instance")
    s.add_argument("--eps", type=float, default=None, help="mollification scale (default: sample coefficients directly)")
    sub.add_parser("sweep", parents=[common], help="run the eps-net and fit growth")
    sub.add_parser("critical", parents=[common], help="critical-exponent convergence study")
    sub.add_parser("validate", parents=[common], help="check hypotheses without solving")
    return p


def _cmd_solve(cfg, args, out):
    prob, bar, u, trace = solve_single(cfg, args.eps)
    res = semilinear_residual(prob, u)
    summary = {
        "eps": args.eps, "alpha": bar.alpha, "beta": bar.beta, "M": trace.M,
        "iterations": trace.iterations, "residual": res, "verdict": trace.verdict,
    }
    rep.emit_solution(u, trace, out, cfg, summary)
    if not args.no_figures:
        from .plotting import plot_solution

        plot_solution(u, out)
    print(f"alpha = {bar.alpha:.12g}  beta = {bar.beta:.12g}  iterations = {trace.iterations}  residual = {res:.3e}  [{trace.verdict}]")
    return EXIT_OK if trace.verdict == "converged" else EXIT_SOLVER


def _cmd_sweep(cfg, args, out, threads):
    report = run_sweep(cfg, threads=threads)
    rep.emit_report(report, out, cfg)
    if not args.no_figures:
        from .plotting import plot_sweep

        plot_sweep(report, out)
    for r in report.rows:
        print(f"eps = {r.eps:<12.6g} {r.status:<20} alpha = {r.alpha:.10g}  beta = {r.beta:.10g}  iters = {r.iters}")
    for g in report.growth:
        print(f"{g.name:<15} slope = {g.slope:+.4f}  {g.verdict}")
    print(f"verdict: {report.verdict}")
    if report.rows and not any(r.ok for r in report.rows):
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_critical(cfg, args, out, threads):
    if cfg.critical is None:
        raise ConfigError("the critical command needs a [critical] block")
    report = critical_exponent_study(cfg.critical, cfg.iteration.tol_sup, cfg.iteration.max_iter, threads)
    rep.emit_critical(report, out, cfg)
    if not args.no_figures:
        from .plotting import plot_critical

        plot_critical(report, out)
    for r in report.rows:
        print(f"j = {r.j}  beta_n = {r.beta:.10g}  iters = {r.iters}  H1 diff = {r.h1_diff_next:.4e}")
    print(f"beta = {report.beta:.10g}  decreasing = {report.decreasing}  last/first = {report.contraction:.4f}")
    return EXIT_OK


def _cmd_validate(cfg, args, out):
    spec = cfg.problem_spec()
    mol = cfg.mollifier.build()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cond = validate_conditions(spec, mol, cfg.schedule, cfg.mollifier.extension)
    for w in caught:
        print(f"warning: {w.message}")
    for eps, fails in zip(cond.eps, cond.failures):
        print(f"eps = {eps:<12.6g} {'ok' if not fails else 'FAIL: ' + ', '.join(fails)}")
    for name, slope in cond.exponents.items():
        print(f"{name:<18} growth exponent {slope:+.4f}")
    # maximum principle at the smallest usable eps with the iteration shift
    eps = min(cond.usable_eps)
    prob = regularize_problem(spec, mol, eps, cfg.mollifier.extension)
    from .barriers import compute_barriers

    bar = compute_barriers(prob.lsum, prob.rho)
    mp = verify_maximum_principle(prob.op, lipschitz_shift(prob.lsum, bar.alpha, bar.beta), trials=20, seed=args.seed)
    print(f"maximum principle at eps = {eps:g}: {'pass' if mp.passed else 'FAIL'} (min trial value {mp.min_value:.3e})")
    return EXIT_OK if mp.passed else EXIT_HYPOTHESIS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        out = args.out or os.environ.get("BARRIERNET_OUT") or "out"
        threads = args.threads if args.threads is not None else _env_int("BARRIERNET_THREADS", 1)
        if threads < 1:
            raise ConfigError(f"--threads must be at least 1, got {threads}")
        cfg = parse_config(args.config)
        if args.command == "solve":
            return _cmd_solve(cfg, args, out)
        if args.command == "sweep":
            return _cmd_sweep(cfg, args, out, threads)
        if args.command == "critical":
            return _cmd_critical(cfg, args, out, threads)
        return _cmd_validate(cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HypothesisViolation, PreconditionError) as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (SolverError, BarrierNetError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
