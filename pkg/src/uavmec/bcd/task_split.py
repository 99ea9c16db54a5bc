"""Task-split step: optimal offloaded portions for a fixed window and UAV position."""

from __future__ import annotations

import itertools
import logging
import warnings

import numpy as np
from scipy.optimize import minimize

from ..config import Regime, Scheme, SystemConfig, UePair, as_regime, as_scheme, rho_floor
from ..energy import constraint_scales, constraint_slacks, energy_terms, feasible_mask
from ..errors import DomainError, InfeasibleError
from .surrogates import MU_GUARD, TaskSplitSurrogate

log = logging.getLogger(__name__)

INNER_TOL = 1e-4
INNER_MAX = 50
# smallest portion on the smooth (offloading) branch of the threshold
RHO_EPS = 1e-6


def _true(scheme, regime, rho, t, d, cfg, ues):
    return float(energy_terms(scheme, regime, rho[0], rho[1], t, d, cfg, ues)["total"])


def _feasible(scheme, regime, rho, t, d, cfg, ues) -> bool:
    s = constraint_slacks(scheme, regime, rho[0], rho[1], t, d, cfg, ues)
    return bool(feasible_mask(s, constraint_scales(scheme, regime, cfg, ues)))


def _binding(scheme, regime, rho, t, d, cfg, ues) -> str:
    s = constraint_slacks(scheme, regime, rho[0], rho[1], t, d, cfg, ues)
    return min(s, key=lambda k: float(s[k]) / (constraint_scales(scheme, regime, cfg, ues)[k] or 1.0))


def _power_bound(sur: TaskSplitSurrogate, k: int) -> float:
    # the SIC-success part alone must fit the cap, which bounds rho_k from above
    a, b = sur.a[k], sur.b[k]
    if a <= 0:
        return 1.0
    c = sur.hbar[k] * sur.ues[k].P_max / (sur.scale[k] * sur.mix[0]) if sur.scale[k] > 0 else np.inf
    top = (np.log1p(c) - b) / a
    return float(np.clip(top, 0.0, 1.0))


def _surrogate_step(sur: TaskSplitSurrogate, lower, upper) -> np.ndarray:
    x0 = sur.rho0.copy()
    free = [k for k in range(2) if sur.active[k]]
    f0 = float(sur.value(x0)) or 1.0

    def full(y):
        x = x0.copy()
        x[free] = y
        return x

    def fun(y):
        return float(sur.value(full(y))) / f0

    def jac(y):
        return sur.grad(full(y))[free] / f0

    cons = [{"type": "ineq",
             "fun": lambda y: np.array([sur.cpu_slack(full(y)) / sur.cfg.f_U_max]),
             "jac": lambda y: -(sur.cycles / sur.windows)[free].reshape(1, -1) / sur.cfg.f_U_max}]
    for k in range(2):
        if not sur.active[k] and sur.scheme is not Scheme.NOMA:
            continue
        cons.append({"type": "ineq",
                     "fun": lambda y, k=k: np.array([1.0 - float(sur.powers(full(y))[k]) / sur.p_max[k]]),
                     "jac": lambda y, k=k: -sur.power_jac(full(y))[k][free].reshape(1, -1) / sur.p_max[k]})
    if sur.scheme is Scheme.NOMA and sur.regime is Regime.FINITE and all(sur.active):
        for k in range(2):
            cons.append({"type": "ineq",
                         "fun": lambda y, k=k: np.array([float(sur.mu_lower(full(y))[k]) - MU_GUARD]),
                         "jac": lambda y, k=k: sur.mu_jac(full(y))[k][free].reshape(1, -1)})
    bounds = [(lower[k], upper[k]) for k in free]
    with warnings.catch_warnings():
        # SLSQP may probe slightly outside the box; the result is clipped below
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(fun, x0[free], jac=jac, bounds=bounds, constraints=cons, method="SLSQP",
                       options={"ftol": 1e-12, "maxiter": 200})
    return full(np.clip(res.x, [lower[k] for k in free], [upper[k] for k in free]))


def _accept(scheme, regime, x0, x1, e0, t, d, cfg, ues):
    """Backtrack from ``x1`` toward ``x0`` until the true energy does not increase."""
    step = 1.0
    for _ in range(40):
        x = x0 + step * (x1 - x0)
        if _feasible(scheme, regime, x, t, d, cfg, ues):
            e = _true(scheme, regime, x, t, d, cfg, ues)
            if e <= e0:
                return x, e
        step *= 0.5
    return x0, e0


def _sca(scheme, regime, t, d, cfg, ues, x0, active, lower, upper, trace):
    e = _true(scheme, regime, x0, t, d, cfg, ues)
    trace.append(e)
    x = x0
    for _ in range(INNER_MAX):
        sur = TaskSplitSurrogate(scheme, regime, t, d, cfg, ues, x, active)
        up = [min(upper[k], max(_power_bound(sur, k), lower[k])) if active[k] else 0.0 for k in range(2)]
        up = [max(up[k], x[k]) for k in range(2)]
        try:
            cand = _surrogate_step(sur, lower, up)
        except (ValueError, FloatingPointError) as exc:  # pragma: no cover - defensive
            log.debug("surrogate solve failed: %s", exc)
            break
        x_new, e_new = _accept(scheme, regime, x, cand, e, t, d, cfg, ues)
        trace.append(e_new)
        change = abs(e - e_new) / max(abs(e), 1e-300)
        x, e = x_new, e_new
        if change <= INNER_TOL:
            break
    return x, e


def solve_task_split(scheme, regime, t: float, d: float, cfg: SystemConfig, ues: UePair, init_rho,
                     trace: list | None = None):
    """Minimize energy over ``(rho1, rho2)`` with ``t`` and ``d`` frozen.

    Runs the SCA loop from ``init_rho`` on the smooth offloading branch and
    also tries pinning each UE at ``rho_k = 0`` when that is admissible; the
    best point not worse than ``init_rho`` is returned.
    """
    scheme, regime = as_scheme(scheme), as_regime(regime)
    init = np.asarray(init_rho, dtype=float)
    if not np.all((init >= 0) & (init <= 1)):
        raise DomainError(f"init_rho={tuple(init)} outside [0, 1]^2")
    if t <= 0:
        # no transmission window: nothing can be offloaded
        x = np.zeros(2)
        if not _feasible(scheme, regime, x, t, d, cfg, ues):
            raise InfeasibleError("nothing can be offloaded with t = 0", _binding(scheme, regime, x, t, d, cfg, ues))
        return 0.0, 0.0
    if not _feasible(scheme, regime, init, t, d, cfg, ues):
        raise InfeasibleError(f"initial split {tuple(init)} is infeasible",
                              _binding(scheme, regime, init, t, d, cfg, ues))
    trace = [] if trace is None else trace
    floors = [rho_floor(cfg, ues[k]) for k in range(2)]
    best_x = init
    best_e = _true(scheme, regime, init, t, d, cfg, ues)

    patterns = []
    for act in itertools.product((True, False), repeat=2):
        if any(not a and floors[k] > 0 for k, a in enumerate(act)):
            continue
        if any(a and ues[k].L == 0 for k, a in enumerate(act)):
            continue
        patterns.append(act)
    for act in patterns:
        lower = [max(floors[k], RHO_EPS) if act[k] else 0.0 for k in range(2)]
        upper = [1.0 if act[k] else 0.0 for k in range(2)]
        x0 = np.array([np.clip(init[k], lower[k], upper[k]) for k in range(2)])
        if not any(act):
            e0 = _true(scheme, regime, x0, t, d, cfg, ues)
            if _feasible(scheme, regime, x0, t, d, cfg, ues) and e0 < best_e:
                best_x, best_e = x0, e0
            continue
        if not _feasible(scheme, regime, x0, t, d, cfg, ues):
            continue
        inner = []
        x, e = _sca(scheme, regime, t, d, cfg, ues, x0, act, lower, upper, inner)
        if e < best_e:
            best_x, best_e = x, e
            trace[:] = inner
    return float(best_x[0]), float(best_x[1])
