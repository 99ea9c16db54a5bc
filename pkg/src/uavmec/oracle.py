"""Exhaustive grid search: the global-optimum benchmark and brute-force
oracles for the two SCA subproblems.

Grids are evaluated with the same array kernels the optimizer uses, so an
oracle point is feasible exactly when :func:`~uavmec.energy.check_constraints`
says so.  Scan order is ``rho1`` outer, then ``rho2``, then ``t``; ties keep
the first point in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bcd.location import locate
from .bcd.solver import OptResult
from .config import Decision, EvalMode, SystemConfig, UePair, as_eval_mode, as_regime, as_scheme
from .energy import check_constraints, constraint_scales, constraint_slacks, energy_terms, feasible_mask, total_energy
from .errors import InfeasibleError, ValidationError
from .power import power_terms


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution; ``t_step=None`` means ``T_max / 100``.

    ``d_step`` is kept for completeness: the UAV position is always resolved
    per grid point by the shared location solver, never gridded.
    """

    rho_step: float = 0.02
    t_step: float | None = None
    d_step: float | None = None
    eval_mode: EvalMode = EvalMode.STRICT

    def __post_init__(self):
        if not 0 < self.rho_step < 1:
            raise ValidationError("rho_step", "must lie in (0, 1)")
        if self.t_step is not None and not self.t_step > 0:
            raise ValidationError("t_step", "must be > 0")
        if self.d_step is not None and not self.d_step > 0:
            raise ValidationError("d_step", "must be > 0")
        object.__setattr__(self, "eval_mode", as_eval_mode(self.eval_mode))

    def time_step(self, cfg: SystemConfig) -> float:
        step = cfg.T_max / 100 if self.t_step is None else self.t_step
        if step >= cfg.T_max:
            raise ValidationError("t_step", "must be smaller than T_max")
        return step


@dataclass(frozen=True)
class OracleResult:
    argmin: tuple[float, ...]
    value: float


def _axis(step: float, top: float = 1.0) -> np.ndarray:
    n = int(math.floor(top / step + 1e-9))
    return np.arange(n + 1) * step


def _time_axis(step: float, cfg: SystemConfig) -> np.ndarray:
    n = int(math.floor(cfg.t_cap / step + 1e-9))
    return np.arange(1, n + 1) * step


def _evaluate(scheme, regime, r1, r2, t, cfg, ues, success_only: bool):
    """Energy (``inf`` where infeasible) and UAV position on broadcast arrays."""
    d, placed = locate(scheme, regime, r1, r2, t, cfg, ues, success_only=success_only)
    dd = np.where(placed, d, 0.0)
    terms = power_terms(scheme, regime, r1, r2, t, dd, cfg, ues)
    e = energy_terms(scheme, regime, r1, r2, t, dd, cfg, ues, success_only=success_only, terms=terms)
    slacks = constraint_slacks(scheme, regime, r1, r2, t, dd, cfg, ues, terms=dict(terms, p1=e["p1"], p2=e["p2"]))
    if success_only:
        slacks.pop("sic_margin", None)
    ok = placed & feasible_mask(slacks, constraint_scales(scheme, regime, cfg, ues))
    return np.where(ok, e["total"], np.inf), dd


def grid_search(scheme, regime, cfg: SystemConfig, ues: UePair, spec: GridSpec | None = None) -> OptResult:
    """Minimum-energy feasible point of the ``(rho1, rho2, t)`` grid."""
    scheme, regime = as_scheme(scheme), as_regime(regime)
    spec = spec or GridSpec()
    success_only = spec.eval_mode is EvalMode.SUCCESS_ONLY
    rhos = _axis(spec.rho_step)
    times = _time_axis(spec.time_step(cfg), cfg)
    best = (np.inf, None)

    # the idle point is the only grid point with t = 0
    e0, d0 = _evaluate(scheme, regime, 0.0, 0.0, 0.0, cfg, ues, success_only)
    if np.isfinite(e0):
        best = (float(e0), Decision(0.0, 0.0, 0.0, float(d0)))

    R2, T = np.meshgrid(rhos, times, indexing="ij")
    for r1 in rhos:
        e, d = _evaluate(scheme, regime, r1, R2, T, cfg, ues, success_only)
        i = int(np.argmin(e))
        if e.flat[i] < best[0]:
            best = (float(e.flat[i]), Decision(float(r1), float(R2.flat[i]), float(T.flat[i]), float(d.flat[i])))
    if best[1] is None:
        raise InfeasibleError("no feasible grid point")
    dec = best[1]
    energy = total_energy(scheme, regime, dec, cfg, ues, spec.eval_mode)
    return OptResult(dec, energy, [energy.total], 1, True, scheme, regime, check_constraints(scheme, regime, dec, cfg, ues))


def subproblem_oracle(kind: str, scheme, regime, frozen: Decision, cfg: SystemConfig, ues: UePair,
                      step: float) -> OracleResult:
    """Brute-force minimum of one SCA subproblem.

    ``kind="task-split"`` grids ``(rho1, rho2)`` at ``frozen.t, frozen.d``;
    ``kind="time"`` grids ``t`` at ``frozen.rho, frozen.d`` (``t = 0`` is
    included only when nothing is offloaded).
    """
    scheme, regime = as_scheme(scheme), as_regime(regime)
    scales = constraint_scales(scheme, regime, cfg, ues)
    if kind == "task-split":
        axis = _axis(step)
        R1, R2 = np.meshgrid(axis, axis, indexing="ij")
        e = energy_terms(scheme, regime, R1, R2, frozen.t, frozen.d, cfg, ues)["total"]
        ok = feasible_mask(constraint_slacks(scheme, regime, R1, R2, frozen.t, frozen.d, cfg, ues), scales)
        e = np.where(ok, e, np.inf)
        i = int(np.argmin(e))
        if not np.isfinite(e.flat[i]):
            raise InfeasibleError("no feasible task split on the grid")
        return OracleResult((float(R1.flat[i]), float(R2.flat[i])), float(e.flat[i]))
    if kind == "time":
        r1, r2 = frozen.rho
        times = _time_axis(step, cfg)
        if not (r1 * ues[0].L > 0 or r2 * ues[1].L > 0):
            times = np.concatenate([[0.0], times])
        e = energy_terms(scheme, regime, r1, r2, times, frozen.d, cfg, ues)["total"]
        ok = feasible_mask(constraint_slacks(scheme, regime, r1, r2, times, frozen.d, cfg, ues), scales)
        e = np.where(ok, e, np.inf)
        i = int(np.argmin(e))
        if not np.isfinite(e[i]):
            raise InfeasibleError("no feasible offloading window on the grid")
        return OracleResult((float(times[i]),), float(e[i]))
    raise ValueError(f"unknown subproblem kind {kind!r}")
