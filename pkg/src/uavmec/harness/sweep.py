"""Parameter sweeps, benchmark runs and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..bcd import location, offload_time, task_split
from ..bcd.solver import MAX_OUTER, bcd_solve, default_start
from ..config import (Decision, EvalMode, SystemConfig, UePair, as_eval_mode, as_regime, as_scheme,
                      default_decision)
from ..energy import FEAS_RTOL, constraint_scales, constraint_slacks, energy_terms, feasible_mask
from ..errors import InfeasibleError, UavMecError, ValidationError
from ..oracle import GridSpec, grid_search
from ..power import power_terms
from .scenario import Scenario

OPTIMIZING = ("L", "L2", "T_max", "B", "eps")
FIXED = ("rho2", "d")
PARAMS = OPTIMIZING + FIXED
BENCHMARKS = ("full", "fixed-rho", "fixed-t", "exhaustive")


@dataclass(frozen=True)
class SweepSpec:
    """``steps`` values of ``param`` from ``start`` to ``stop``.

    ``log=None`` picks logarithmic spacing for ``eps`` and linear spacing
    for everything else.
    """

    param: str
    start: float
    stop: float
    steps: int = 1
    log: bool | None = None

    def __post_init__(self):
        if self.param not in PARAMS:
            raise ValidationError("param", f"must be one of {', '.join(PARAMS)}; got {self.param!r}")
        if self.steps < 1:
            raise ValidationError("steps", "must be >= 1")
        if self.logarithmic and (self.start <= 0 or self.stop <= 0):
            raise ValidationError("from/to", "log spacing needs positive endpoints")

    @property
    def logarithmic(self) -> bool:
        return self.param == "eps" if self.log is None else self.log

    def values(self) -> list[float]:
        if self.steps == 1:
            return [float(self.start)]
        if self.logarithmic:
            return [float(v) for v in np.logspace(math.log10(self.start), math.log10(self.stop), self.steps)]
        return [float(v) for v in np.linspace(self.start, self.stop, self.steps)]


@dataclass
class SweepRow:
    param: str
    value: float
    benchmark: str
    scheme: str
    regime: str
    eval_mode: str
    status: str
    feasible: bool
    rho1: float = math.nan
    rho2: float = math.nan
    t: float = math.nan
    d: float = math.nan
    p1: float = math.nan
    p2: float = math.nan
    e_loc1: float = math.nan
    e_loc2: float = math.nan
    e_rem1: float = math.nan
    e_rem2: float = math.nan
    e_off1: float = math.nan
    e_off2: float = math.nan
    total: float = math.nan
    iterations: int = 0
    converged: bool = False


COLUMNS = tuple(f.name for f in dataclasses.fields(SweepRow))
_FLOATS = {f.name for f in dataclasses.fields(SweepRow) if f.type == "float"}
_BOOLS = {"feasible", "converged"}


def apply_param(scenario: Scenario, param: str, value: float) -> tuple[SystemConfig, UePair]:
    """Scenario with one optimizing-sweep parameter replaced."""
    cfg, (u1, u2) = scenario.cfg, scenario.ues
    if param == "L":
        return cfg, (u1.with_(L=value), u2.with_(L=value))
    if param == "L2":
        return cfg, (u1, u2.with_(L=value))
    if param == "eps":
        return cfg, (u1.with_(eps=value), u2.with_(eps=value))
    if param in ("T_max", "B"):
        return cfg.with_(**{param: value}), (u1, u2)
    return cfg, (u1, u2)


def _fill(row: SweepRow, scheme, regime, dec: Decision, cfg, ues, success_only: bool) -> SweepRow:
    terms = power_terms(scheme, regime, dec.rho1, dec.rho2, dec.t, dec.d, cfg, ues)
    e = energy_terms(scheme, regime, dec.rho1, dec.rho2, dec.t, dec.d, cfg, ues, success_only=success_only, terms=terms)
    slacks = constraint_slacks(scheme, regime, dec.rho1, dec.rho2, dec.t, dec.d, cfg, ues,
                               terms=dict(terms, p1=e["p1"], p2=e["p2"]))
    if success_only:
        slacks.pop("sic_margin", None)
    row.feasible = bool(feasible_mask(slacks, constraint_scales(scheme, regime, cfg, ues)))
    row.rho1, row.rho2, row.t, row.d = dec.rho1, dec.rho2, dec.t, dec.d
    for k in ("p1", "p2", "e_loc1", "e_loc2", "e_rem1", "e_rem2", "e_off1", "e_off2", "total"):
        setattr(row, k, float(e[k]))
    if not row.feasible and row.status == "ok":
        row.status = "infeasible"
    return row


def _solve_cell(args) -> SweepRow:
    """One (value, scheme, regime, benchmark) cell; errors are recorded, not raised."""
    param, value, bench, scheme, regime, eval_mode, cfg, ues, fixed, grid = args
    scheme, regime, eval_mode = as_scheme(scheme), as_regime(regime), as_eval_mode(eval_mode)
    success_only = eval_mode is EvalMode.SUCCESS_ONLY
    row = SweepRow(param, value, bench, scheme.value, regime.value, eval_mode.value, "ok", False)
    try:
        if bench == "fixed":
            dec = fixed.with_(rho2=value) if param == "rho2" else fixed.with_(d=value)
            return _fill(row, scheme, regime, dec, cfg, ues, success_only)
        if bench == "exhaustive":
            res = grid_search(scheme, regime, cfg, ues, dataclasses.replace(grid, eval_mode=eval_mode))
        elif bench == "fixed-rho":
            init = default_start(scheme, regime, cfg, ues, rho=(0.5, 0.5))
            res = bcd_solve(scheme, regime, cfg, ues, init, blocks=("t", "d"))
        elif bench == "fixed-t":
            init = default_start(scheme, regime, cfg, ues, t=0.5 * cfg.T_max)
            res = bcd_solve(scheme, regime, cfg, ues, init, blocks=("rho", "d"))
        else:
            # the optimizer always works on the strict objective; eval_mode only affects reporting
            res = bcd_solve(scheme, regime, cfg, ues)
        row.iterations, row.converged = res.iterations, res.converged
        return _fill(row, scheme, regime, res.decision, cfg, ues, success_only)
    except InfeasibleError as exc:
        row.status = f"infeasible: {exc}" + (f" [{exc.constraint}]" if exc.constraint else "")
    except UavMecError as exc:
        row.status = f"error: {exc}"
    return row


def _run(cells, jobs: int) -> list[SweepRow]:
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_solve_cell, cells))
    return [_solve_cell(c) for c in cells]


def run_sweep(scenario: Scenario, sweep: SweepSpec, schemes=("noma", "fdma", "tdma"), regimes=("inf", "fin"),
              eval_mode=EvalMode.STRICT, *, fixed: Decision | None = None, jobs: int = 1) -> list[SweepRow]:
    """One row per (value, scheme, regime), in sweep order.

    ``rho2`` and ``d`` sweeps evaluate the energy at ``fixed`` (default: the
    midpoint decision) with that one coordinate replaced; all other
    parameters re-run the optimizer on the modified scenario.
    """
    fixed = fixed or default_decision(scenario.cfg)
    bench = "fixed" if sweep.param in FIXED else "full"
    cells = []
    for v in sweep.values():
        cfg, ues = apply_param(scenario, sweep.param, v)
        for sch in schemes:
            for reg in regimes:
                cells.append((sweep.param, v, bench, sch, reg, eval_mode, cfg, ues, fixed, None))
    return _run(cells, jobs)


def run_benchmarks(scenario: Scenario, schemes=("noma", "fdma", "tdma"), regimes=("inf", "fin"),
                   sweep: SweepSpec | None = None, *, benchmarks=BENCHMARKS, grid: GridSpec | None = None,
                   eval_mode=EvalMode.STRICT, jobs: int = 1) -> list[SweepRow]:
    """Full optimization next to the fixed-split, fixed-window and grid benchmarks.

    The fixed-split benchmark pins ``rho = (0.5, 0.5)``; the fixed-window
    benchmark pins ``t = T_max / 2``.  Without ``sweep`` a single cell per
    scheme and regime is run at the scenario itself.
    """
    if sweep is not None and sweep.param in FIXED:
        raise ValidationError("param", "benchmarks need an optimizing sweep parameter")
    grid = grid or GridSpec()
    points = [(sweep.param, v) for v in sweep.values()] if sweep else [("none", math.nan)]
    cells = []
    for param, v in points:
        cfg, ues = apply_param(scenario, param, v)
        for sch in schemes:
            for reg in regimes:
                for bench in benchmarks:
                    cells.append((param, v, bench, sch, reg, eval_mode, cfg, ues, None, grid))
    return _run(cells, jobs)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_text(rows) -> str:
    """CSV text: header row, then rows in ``COLUMNS`` order with floats as ``repr``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def write_csv(rows, path: str | Path, meta: dict | None = None) -> Path:
    """Write the rows so floats round-trip exactly.

    A ``<basename>.meta.json`` sidecar is written next to the CSV when
    ``meta`` is given.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(rows_to_text(rows))
    if meta is not None:
        sidecar = path.with_name(path.stem + ".meta.json")
        sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return path


def read_csv(path: str | Path) -> list[SweepRow]:
    with Path(path).open(newline="") as fh:
        out = []
        for rec in csv.DictReader(fh):
            kw = {}
            for c in COLUMNS:
                raw = rec[c]
                if c in _BOOLS:
                    kw[c] = raw == "true"
                elif c in _FLOATS:
                    kw[c] = float(raw)
                elif c == "iterations":
                    kw[c] = int(raw)
                else:
                    kw[c] = raw
            out.append(SweepRow(**kw))
        return out


def run_metadata(scenario: Scenario, *, command: str, eval_mode, sweep: SweepSpec | None = None,
                 schemes=(), regimes=(), grid: GridSpec | None = None, extra: dict | None = None) -> dict:
    """Everything needed to reproduce a CSV; contains no timestamps so reruns are byte-identical."""
    from .. import __version__

    meta = {
        "artifact_version": __version__,
        "command": command,
        "scenario": scenario.as_dict(),
        "scenario_source": scenario.source,
        "eval_mode": as_eval_mode(eval_mode).value,
        "schemes": [as_scheme(s).value for s in schemes],
        "regimes": [as_regime(r).value for r in regimes],
        "columns": list(COLUMNS),
        "tolerances": {
            "sigma_conv": scenario.cfg.sigma_conv,
            "max_outer": MAX_OUTER,
            "task_split_inner_tol": task_split.INNER_TOL,
            "task_split_inner_max": task_split.INNER_MAX,
            "offload_time_inner_tol": offload_time.INNER_TOL,
            "offload_time_inner_max": offload_time.INNER_MAX,
            "golden_section_tol_m": location.D_TOL,
            "feasibility_rtol": FEAS_RTOL,
        },
    }
    if sweep is not None:
        meta["sweep"] = dataclasses.asdict(sweep) | {"values": sweep.values()}
    if grid is not None:
        meta["grid"] = {"rho_step": grid.rho_step, "t_step": grid.time_step(scenario.cfg)}
    if extra:
        meta.update(extra)
    return meta
