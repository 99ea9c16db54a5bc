"""Joint local step over ``(rho1, rho2, t)`` at a fixed UAV position.

Under NOMA-F the SIC margin couples the split and the window: at a block
fixed point the margin caps ``rho`` for the current ``t`` while the window
step pushes ``t`` down onto the same boundary.  Moving along that ridge needs
both blocks at once, so after the block steps the solver takes one local
step on the exact smooth problem and keeps it only if it lowers the energy.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.optimize import minimize

from ..config import Decision, SystemConfig, UePair, rho_floor
from ..energy import check_constraints, constraint_scales, constraint_slacks, energy_terms, total_energy
from .task_split import RHO_EPS

# bounds and box constraints are handled by the optimizer's own bounds
_BOX = {"rho_bounds_1", "rho_bounds_2", "time_window", "location_bounds", "noma_order"}
_PENALTY = 1e6


def solve_joint_split_time(scheme, regime, dec: Decision, cfg: SystemConfig, ues: UePair) -> Decision:
    """Local descent in ``(rho, t)``; returns ``dec`` unchanged if no improvement is found."""
    if dec.t <= 0:
        return dec
    e0 = total_energy(scheme, regime, dec, cfg, ues).total
    scales = constraint_scales(scheme, regime, cfg, ues)
    free = [k for k in range(2) if dec.rho[k] > 0 and ues[k].L > 0]
    if not free:
        return dec
    base = np.array([dec.rho1, dec.rho2, dec.t / cfg.T_max])
    idx = free + [2]

    def unpack(y):
        x = base.copy()
        x[idx] = y
        return x[0], x[1], x[2] * cfg.T_max

    def fun(y):
        r1, r2, t = unpack(y)
        v = float(energy_terms(scheme, regime, r1, r2, t, dec.d, cfg, ues)["total"])
        return v / e0 if np.isfinite(v) else _PENALTY

    def cons(y):
        r1, r2, t = unpack(y)
        s = constraint_slacks(scheme, regime, r1, r2, t, dec.d, cfg, ues)
        return np.array([max(float(s[k]) / (scales[k] or 1.0), -_PENALTY) for k in s if k not in _BOX])

    bounds = [(max(rho_floor(cfg, ues[k]), RHO_EPS), 1.0) for k in free]
    bounds.append((1e-9, cfg.t_cap / cfg.T_max))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(fun, base[idx], method="SLSQP", bounds=bounds,
                       constraints=[{"type": "ineq", "fun": cons}],
                       options={"ftol": 1e-12, "maxiter": 300})
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    r1, r2, t = unpack(np.clip(res.x, lo, hi))
    cand = dec.with_(rho1=float(r1), rho2=float(r2), t=float(t))
    if not check_constraints(scheme, regime, cand, cfg, ues).feasible:
        return dec
    if total_energy(scheme, regime, cand, cfg, ues).total > e0:
        return dec
    return cand
