"""Command-line front end: ``uavmec {run,sweep,benchmarks,compare,oracle}``.

Exit codes: 0 success, 2 bad arguments or scenario, 3 infeasible scenario,
4 solver failure.  ``UAVMEC_OUTDIR`` redirects every output file into the
given directory.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from ..bcd.solver import bcd_solve
from ..comparison import scheme_gaps
from ..config import Decision, EvalMode, as_eval_mode
from ..errors import DomainError, InfeasibleError, ScenarioError, SolverError, ValidationError
from ..oracle import GridSpec, grid_search
from .scenario import load_scenario
from .sweep import (PARAMS, SweepRow, SweepSpec, _fill, rows_to_text, run_benchmarks, run_metadata, run_sweep,
                    write_csv)

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 2, 3, 4
OUTDIR_ENV = "UAVMEC_OUTDIR"
SCHEMES = ("noma", "fdma", "tdma")
REGIMES = ("inf", "fin")


def _expand(values, universe):
    if not values:
        return list(universe)
    out = []
    for v in values:
        for item in universe if v == "all" else [v]:
            if item not in out:
                out.append(item)
    return out


def _out_path(arg: str | None, default_name: str) -> Path | None:
    outdir = os.environ.get(OUTDIR_ENV)
    if arg is None:
        return Path(outdir) / default_name if outdir else None
    return Path(outdir) / Path(arg).name if outdir else Path(arg)


def _emit(rows, args, meta: dict, default_name: str) -> None:
    path = _out_path(args.out, default_name)
    if path is None:
        sys.stdout.write(rows_to_text(rows))
    else:
        write_csv(rows, path, meta)
        print(f"wrote {len(rows)} rows to {path}", file=sys.stderr)


def _common(p: argparse.ArgumentParser, multi: bool) -> None:
    p.add_argument("--config", metavar="PATH", help="scenario file (default: bundled scenario)")
    p.add_argument("--out", metavar="PATH", help="CSV output path (default: stdout)")
    p.add_argument("--eval-mode", choices=[m.value for m in EvalMode], default="strict")
    if multi:
        p.add_argument("--scheme", action="append", choices=SCHEMES + ("all",),
                       help="repeatable; default: all schemes")
        p.add_argument("--regime", action="append", choices=REGIMES + ("all",),
                       help="repeatable; default: both regimes")
    else:
        p.add_argument("--scheme", choices=SCHEMES, default="noma")
        p.add_argument("--regime", choices=REGIMES, default="fin")


def _sweep_flags(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--param", choices=PARAMS, required=required)
    p.add_argument("--from", dest="start", type=float, required=required)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--steps", type=int, default=1)
    spacing = p.add_mutually_exclusive_group()
    spacing.add_argument("--log", dest="log", action="store_true", default=None, help="logarithmic spacing")
    spacing.add_argument("--linear", dest="log", action="store_false", help="linear spacing")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="uavmec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="optimize one scheme/regime")
    _common(p, multi=False)

    p = sub.add_parser("sweep", help="sweep one parameter")
    _common(p, multi=True)
    _sweep_flags(p, required=True)
    for name in ("rho1", "rho2", "t", "d"):
        p.add_argument(f"--{name}", type=float, help=f"{name} of the fixed decision (rho2/d sweeps)")

    p = sub.add_parser("benchmarks", help="full optimization next to the three benchmarks")
    _common(p, multi=True)
    _sweep_flags(p, required=False)

    p = sub.add_parser("compare", help="optimal energies and gaps between schemes")
    _common(p, multi=True)
    p.add_argument("--tol", type=float, default=0.01, help="relative tolerance of the ordering flags")

    p = sub.add_parser("oracle", help="exhaustive grid search")
    _common(p, multi=False)
    p.add_argument("--rho-step", type=float, default=0.02)
    p.add_argument("--t-step", type=float, default=None, help="seconds (default: T_max/100)")
    return parser


def _spec(args) -> SweepSpec | None:
    if args.param is None:
        return None
    stop = args.start if args.stop is None else args.stop
    return SweepSpec(args.param, args.start, stop, args.steps, args.log)


def _summary(res) -> str:
    d = res.decision
    return (f"{res.scheme.value}-{res.regime.value}: E = {res.total:.6e} J  "
            f"rho = ({d.rho1:.6f}, {d.rho2:.6f})  t = {d.t:.6e} s  d = {d.d:.4f} m  "
            f"iterations = {res.iterations}  converged = {res.converged}")


def _result_row(res, args, bench: str) -> SweepRow:
    row = SweepRow("none", float("nan"), bench, res.scheme.value, res.regime.value, args.eval_mode, "ok", False,
                   iterations=res.iterations, converged=res.converged)
    scen = args._scenario
    return _fill(row, res.scheme, res.regime, res.decision, scen.cfg, scen.ues,
                 as_eval_mode(args.eval_mode) is EvalMode.SUCCESS_ONLY)


def _cmd_run(args) -> int:
    sc = args._scenario
    res = bcd_solve(args.scheme, args.regime, sc.cfg, sc.ues)
    print(_summary(res), file=sys.stderr if args.out is None and not os.environ.get(OUTDIR_ENV) else sys.stdout)
    meta = run_metadata(sc, command="run", eval_mode=args.eval_mode, schemes=[args.scheme], regimes=[args.regime],
                        extra={"trace": res.trace})
    _emit([_result_row(res, args, "full")], args, meta, "run.csv")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    sc = args._scenario
    grid = GridSpec(args.rho_step, args.t_step, eval_mode=args.eval_mode)
    res = grid_search(args.scheme, args.regime, sc.cfg, sc.ues, grid)
    print(_summary(res), file=sys.stderr if args.out is None and not os.environ.get(OUTDIR_ENV) else sys.stdout)
    meta = run_metadata(sc, command="oracle", eval_mode=args.eval_mode, schemes=[args.scheme],
                        regimes=[args.regime], grid=grid)
    _emit([_result_row(res, args, "exhaustive")], args, meta, "oracle.csv")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    sc = args._scenario
    spec = _spec(args)
    schemes, regimes = _expand(args.scheme, SCHEMES), _expand(args.regime, REGIMES)
    base = Decision(0.5, 0.5, 0.5 * sc.cfg.T_max, 0.25 * sc.cfg.D)
    fixed = base.with_(**{k: getattr(args, k) for k in ("rho1", "rho2", "t", "d") if getattr(args, k) is not None})
    rows = run_sweep(sc, spec, schemes, regimes, args.eval_mode, fixed=fixed, jobs=args.jobs)
    extra = {"fixed_decision": vars(fixed)} if spec.param in ("rho2", "d") else None
    meta = run_metadata(sc, command="sweep", eval_mode=args.eval_mode, sweep=spec, schemes=schemes,
                        regimes=regimes, extra=extra)
    _emit(rows, args, meta, f"sweep_{spec.param}.csv")
    return EXIT_OK


def _cmd_benchmarks(args) -> int:
    sc = args._scenario
    spec = _spec(args)
    schemes, regimes = _expand(args.scheme, SCHEMES), _expand(args.regime, REGIMES)
    grid = GridSpec(eval_mode=args.eval_mode)
    rows = run_benchmarks(sc, schemes, regimes, spec, grid=grid, eval_mode=args.eval_mode, jobs=args.jobs)
    meta = run_metadata(sc, command="benchmarks", eval_mode=args.eval_mode, sweep=spec, schemes=schemes,
                        regimes=regimes, grid=grid)
    _emit(rows, args, meta, "benchmarks.csv")
    return EXIT_OK


def _cmd_compare(args) -> int:
    sc = args._scenario
    schemes, regimes = _expand(args.scheme, SCHEMES), _expand(args.regime, REGIMES)
    rep = scheme_gaps(sc.cfg, sc.ues, regimes, schemes, tol=args.tol)
    lines = []
    for (sch, reg), status in rep.status.items():
        e = rep.energies.get((sch, reg))
        lines.append(f"{sch.value}-{reg.value}: " + (f"E* = {e:.6e} J" if e is not None else status))
    for (name, reg), gap in rep.gaps.items():
        lines.append(f"{name} [{reg.value}] = {gap:+.6e} J")
    for (name, reg), flag in rep.flags.items():
        lines.append(f"{name} [{reg.value}]: {flag}")
    if rep.delta is not None:
        p = rep.delta.point
        lines.append(f"NOMA-F gap bound at rho = ({p.rho1:.4f}, {p.rho2:.4f}), t = {p.t:.4e}, d = {p.d:.3f}: "
                     f"delta = {rep.delta.delta:+.6e} J, exact = {rep.delta.exact_difference:+.6e} J")
    print("\n".join(lines), file=sys.stderr if args.out is None and not os.environ.get(OUTDIR_ENV) else sys.stdout)
    rows = []
    for (sch, reg), dec in rep.decisions.items():
        row = SweepRow("none", float("nan"), "full", sch.value, reg.value, args.eval_mode, "ok", False)
        rows.append(_fill(row, sch, reg, dec, sc.cfg, sc.ues, as_eval_mode(args.eval_mode) is EvalMode.SUCCESS_ONLY))
    meta = run_metadata(sc, command="compare", eval_mode=args.eval_mode, schemes=schemes, regimes=regimes,
                        extra={"gaps": {f"{n}[{r.value}]": g for (n, r), g in rep.gaps.items()},
                               "flags": {f"{n}[{r.value}]": f for (n, r), f in rep.flags.items()}})
    _emit(rows, args, meta, "compare.csv")
    if not rep.energies:
        return EXIT_INFEASIBLE
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "benchmarks": _cmd_benchmarks,
             "compare": _cmd_compare, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        args._scenario = load_scenario(args.config)
        return _COMMANDS[args.verb](args)
    except (ScenarioError, ValidationError, DomainError) as exc:
        print(f"uavmec: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        where = f" (binding: {exc.constraint})" if exc.constraint else ""
        print(f"uavmec: infeasible: {exc}{where}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print(f"uavmec: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
