"""MEC-related energy (local + remote computing + offloading) and constraint
reports for the six scheme/regime problems.

The optimizer, the grid oracles and the CLI all decide feasibility through
:func:`constraint_slacks`, so they can never disagree about a point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import Decision, EvalMode, Regime, Scheme, SystemConfig, UePair, as_eval_mode, as_regime, as_scheme
from .model import _check_windows, _computation, _frequencies
from .power import SIC_GUARD, PowerSolution, energy_weights, min_powers, power_terms

FEAS_RTOL = 1e-9


@dataclass(frozen=True)
class EnergyBreakdown:
    e_loc: tuple[float, float]
    e_rem: tuple[float, float]
    e_off: tuple[float, float]
    total: float
    sic_infeasible_evaluated_success_only: bool = False
    powers: PowerSolution | None = field(default=None, compare=False)

    def per_ue(self, k: int) -> float:
        i = k - 1
        return self.e_loc[i] + self.e_rem[i] + self.e_off[i]


@dataclass(frozen=True)
class Constraint:
    name: str
    satisfied: bool
    slack: float


@dataclass(frozen=True)
class ConstraintReport:
    entries: tuple[Constraint, ...]

    @property
    def feasible(self) -> bool:
        return all(c.satisfied for c in self.entries)

    def violations(self) -> list[Constraint]:
        return [c for c in self.entries if not c.satisfied]

    def __getitem__(self, name: str) -> Constraint:
        for c in self.entries:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.entries)


def energy_terms(scheme: Scheme, regime: Regime, rho1, rho2, t, d, cfg: SystemConfig, ues: UePair,
                 success_only: bool = False, terms: dict | None = None) -> dict:
    """Array kernel: energy components, powers and the success-only flag.

    Where NOMA-F loses its SIC margin the total is ``inf`` unless
    ``success_only`` substitutes the SIC-success powers.
    """
    scheme, regime = as_scheme(scheme), as_regime(regime)
    if terms is None:
        terms = power_terms(scheme, regime, rho1, rho2, t, d, cfg, ues)
    (el1, er1), (el2, er2) = _computation(scheme, rho1, rho2, t, cfg, ues)
    p1, p2 = terms["p1"], terms["p2"]
    fallback = np.zeros(np.shape(p1), dtype=bool)
    if success_only and "margin" in terms:
        fallback = ~(terms["margin"] > SIC_GUARD)
        p1 = np.where(fallback, terms["p_hat1"], p1)
        p2 = np.where(fallback, terms["p_hat2"], p2)
    w1, w2 = energy_weights(scheme, cfg)
    t = np.asarray(t, dtype=float)
    with np.errstate(invalid="ignore"):
        eo1 = np.where(p1 > 0, w1 * p1 * t, 0.0)
        eo2 = np.where(p2 > 0, w2 * p2 * t, 0.0)
    eo1 = np.where(np.isnan(eo1), np.inf, eo1)
    eo2 = np.where(np.isnan(eo2), np.inf, eo2)
    total = el1 + el2 + er1 + er2 + eo1 + eo2
    return dict(e_loc1=el1, e_loc2=el2, e_rem1=er1, e_rem2=er2, e_off1=eo1, e_off2=eo2,
                total=total, p1=p1, p2=p2, success_only=fallback)


def total_energy(scheme, regime, decision: Decision, cfg: SystemConfig, ues: UePair,
                 eval_mode=EvalMode.STRICT) -> EnergyBreakdown:
    """Total MEC-related energy of both UEs at ``decision``."""
    scheme, regime, eval_mode = as_scheme(scheme), as_regime(regime), as_eval_mode(eval_mode)
    _check_windows(scheme, decision.rho1, decision.rho2, decision.t, cfg)
    powers = min_powers(scheme, regime, decision, cfg, ues, eval_mode)
    fake = {"p1": np.asarray(powers.p1), "p2": np.asarray(powers.p2)}
    e = energy_terms(scheme, regime, decision.rho1, decision.rho2, decision.t, decision.d, cfg, ues, terms=fake)
    return EnergyBreakdown(
        e_loc=(float(e["e_loc1"]), float(e["e_loc2"])),
        e_rem=(float(e["e_rem1"]), float(e["e_rem2"])),
        e_off=(float(e["e_off1"]), float(e["e_off2"])),
        total=float(e["total"]),
        sic_infeasible_evaluated_success_only=powers.success_only,
        powers=powers,
    )


def constraint_scales(scheme: Scheme, regime: Regime, cfg: SystemConfig, ues: UePair) -> dict[str, float]:
    """Natural magnitude of each constraint, used to turn slacks into pass/fail."""
    scheme, regime = as_scheme(scheme), as_regime(regime)
    scales = {
        "uav_cpu_cap": cfg.f_U_max,
        "local_cpu_cap_1": ues[0].f_max,
        "local_cpu_cap_2": ues[1].f_max,
        "power_cap_1": ues[0].P_max,
        "power_cap_2": ues[1].P_max,
        "rho_bounds_1": 1.0,
        "rho_bounds_2": 1.0,
        "time_window": cfg.T_max,
        "location_bounds": cfg.D,
    }
    if scheme is Scheme.NOMA:
        scales["noma_order"] = cfg.D
        if regime is Regime.FINITE:
            scales["sic_margin"] = 0.0
    return scales


def constraint_slacks(scheme: Scheme, regime: Regime, rho1, rho2, t, d, cfg: SystemConfig, ues: UePair,
                      terms: dict | None = None) -> dict:
    """Array kernel: signed slack of every constraint (``>= 0`` means satisfied)."""
    scheme, regime = as_scheme(scheme), as_regime(regime)
    if terms is None:
        terms = power_terms(scheme, regime, rho1, rho2, t, d, cfg, ues)
    rho1 = np.asarray(rho1, dtype=float)
    rho2 = np.asarray(rho2, dtype=float)
    t = np.asarray(t, dtype=float)
    d = np.asarray(d, dtype=float)
    (fl1, fr1), (fl2, fr2) = _frequencies(scheme, rho1, rho2, t, cfg, ues)
    offloading = (rho1 * ues[0].L > 0) | (rho2 * ues[1].L > 0)
    t_top = np.where(offloading, cfg.t_cap, cfg.T_max)
    with np.errstate(invalid="ignore"):
        s = {
            "uav_cpu_cap": cfg.f_U_max - (fr1 + fr2),
            "local_cpu_cap_1": ues[0].f_max - fl1,
            "local_cpu_cap_2": ues[1].f_max - fl2,
            "power_cap_1": ues[0].P_max - terms["p1"],
            "power_cap_2": ues[1].P_max - terms["p2"],
            "rho_bounds_1": np.minimum(rho1, 1.0 - rho1),
            "rho_bounds_2": np.minimum(rho2, 1.0 - rho2),
            "time_window": np.minimum(t, t_top - t),
            "location_bounds": np.minimum(d, cfg.D - d),
        }
    if scheme is Scheme.NOMA:
        s["noma_order"] = cfg.D / 2 - d
        if regime is Regime.FINITE:
            s["sic_margin"] = terms["margin"] - SIC_GUARD
    return {k: np.where(np.isnan(v), -np.inf, v) for k, v in s.items()}


def satisfied_mask(slacks: dict, scales: dict) -> dict:
    return {k: v >= -FEAS_RTOL * scales[k] for k, v in slacks.items()}


def feasible_mask(slacks: dict, scales: dict):
    masks = satisfied_mask(slacks, scales)
    out = None
    for m in masks.values():
        out = m if out is None else out & m
    return out


def check_constraints(scheme, regime, decision: Decision, cfg: SystemConfig, ues: UePair) -> ConstraintReport:
    """Evaluate every constraint of the matching problem with signed slacks."""
    scheme, regime = as_scheme(scheme), as_regime(regime)
    slacks = constraint_slacks(scheme, regime, decision.rho1, decision.rho2, decision.t, decision.d, cfg, ues)
    scales = constraint_scales(scheme, regime, cfg, ues)
    ok = satisfied_mask(slacks, scales)
    return ConstraintReport(tuple(Constraint(k, bool(ok[k]), float(slacks[k])) for k in slacks))
