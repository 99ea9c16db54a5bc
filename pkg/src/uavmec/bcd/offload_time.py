"""Offloading-time step: optimal window ``t`` for a fixed split and UAV position."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from ..config import Scheme, SystemConfig, UePair, as_regime, as_scheme
from ..energy import constraint_scales, constraint_slacks, energy_terms, feasible_mask
from ..errors import InfeasibleError
from ..model import remote_windows
from .location import golden_section
from .surrogates import OffloadTimeSurrogate

INNER_TOL = 1e-4
INNER_MAX = 50
T_FLOOR = 1e-9  # fraction of T_max; the window must stay strictly positive
BISECT_STEPS = 60


def cpu_time_bound(scheme: Scheme, rho, cfg: SystemConfig, ues: UePair) -> float:
    """Largest ``t`` at which the UAV can still finish both offloaded portions.

    This is the UAV CPU cap rewritten as an upper bound on the window.
    """
    scheme = as_scheme(scheme)
    loads = [rho[k] * ues[k].cycles for k in range(2)]
    if scheme is not Scheme.TDMA:
        return cfg.T_max - sum(loads) / cfg.f_U_max

    def slack(t):
        w1, w2 = remote_windows(scheme, t, cfg)
        return cfg.f_U_max - loads[0] / w1 - loads[1] / w2

    if slack(0.0) < 0:
        return -np.inf
    hi = cfg.T_max * (1 - 1e-15)
    if slack(hi) >= 0:
        return cfg.T_max
    return float(brentq(slack, 0.0, hi, xtol=1e-18, rtol=1e-15))


def _true(scheme, regime, rho, t, d, cfg, ues):
    return float(energy_terms(scheme, regime, rho[0], rho[1], t, d, cfg, ues)["total"])


def _feasible(scheme, regime, rho, t, d, cfg, ues) -> bool:
    s = constraint_slacks(scheme, regime, rho[0], rho[1], t, d, cfg, ues)
    return bool(feasible_mask(s, constraint_scales(scheme, regime, cfg, ues)))


def _edge(pred, inside: float, outside: float) -> float:
    """Bisection for the last point where ``pred`` holds between ``inside`` and ``outside``."""
    if pred(outside):
        return outside
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (inside + outside)
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return inside


def feasible_window(scheme, regime, rho, d, cfg, ues, t0):
    """Interval of feasible windows around ``t0`` (true constraints)."""
    top = min(cfg.t_cap, cpu_time_bound(scheme, rho, cfg, ues))
    lo_box = T_FLOOR * cfg.T_max

    def pred(t):
        return _feasible(scheme, regime, rho, t, d, cfg, ues)

    return _edge(pred, t0, lo_box), _edge(pred, t0, top)


def _step(sur: OffloadTimeSurrogate, tol: float) -> float:
    lo = _edge(lambda t: bool(sur.feasible(t)), sur.t0, sur.t_lo)
    hi = _edge(lambda t: bool(sur.feasible(t)), sur.t0, sur.t_hi)
    if hi - lo <= tol:
        return sur.t0
    return golden_section(lambda t: sur.value(t), lo, hi, tol)


def _accept(scheme, regime, rho, t0, t1, e0, d, cfg, ues):
    step = 1.0
    for _ in range(40):
        t = t0 + step * (t1 - t0)
        if _feasible(scheme, regime, rho, t, d, cfg, ues):
            e = _true(scheme, regime, rho, t, d, cfg, ues)
            if e <= e0:
                return t, e
        step *= 0.5
    return t0, e0


def solve_offload_time(scheme, regime, rho, d: float, cfg: SystemConfig, ues: UePair, init_t: float,
                       trace: list | None = None) -> float:
    """Minimize energy over the offloading window with ``rho`` and ``d`` frozen.

    With nothing offloaded the energy does not depend on ``t`` and the
    smallest admissible window, ``0``, is returned.
    """
    scheme, regime = as_scheme(scheme), as_regime(regime)
    rho = np.asarray(rho, dtype=float)
    trace = [] if trace is None else trace
    if not any(rho[k] * ues[k].L > 0 for k in range(2)):
        if not _feasible(scheme, regime, rho, 0.0, d, cfg, ues):
            raise InfeasibleError("pure local computing violates a cap", "local_cpu_cap")
        trace.append(_true(scheme, regime, rho, 0.0, d, cfg, ues))
        return 0.0
    if cpu_time_bound(scheme, rho, cfg, ues) <= 0:
        raise InfeasibleError("UAV CPU cap cannot be met at any window", "uav_cpu_cap")
    if not (init_t > 0 and _feasible(scheme, regime, rho, init_t, d, cfg, ues)):
        s = constraint_slacks(scheme, regime, rho[0], rho[1], init_t, d, cfg, ues)
        raise InfeasibleError(f"initial window t={init_t} is infeasible", min(s, key=lambda k: float(s[k])))

    t_lo, t_hi = feasible_window(scheme, regime, rho, d, cfg, ues, init_t)
    tol = 1e-9 * cfg.T_max
    t, e = float(init_t), _true(scheme, regime, rho, init_t, d, cfg, ues)
    trace.append(e)
    for _ in range(INNER_MAX):
        sur = OffloadTimeSurrogate(scheme, regime, rho, d, cfg, ues, t, t_lo, t_hi)
        cand = _step(sur, tol)
        t_new, e_new = _accept(scheme, regime, rho, t, cand, e, d, cfg, ues)
        trace.append(e_new)
        change = abs(e - e_new) / max(abs(e), 1e-300)
        t, e = t_new, e_new
        if change <= INNER_TOL:
            break
    return t
