"""UAV placement for fixed task split and offloading window.

With ``rho`` and ``t`` frozen, each UE's power is ``a_k / hbar_k`` for a
location-independent coefficient ``a_k``, and ``1 / hbar_k`` is quadratic in
``d``.  NOMA-F uses the closed-form weighted midpoint; the other five problems
run golden-section search on the same sum-power objective.  Both paths work
on arrays so the grid oracle can place the UAV for every grid point at once.
"""

from __future__ import annotations

import math

import numpy as np

from ..config import Regime, Scheme, SystemConfig, UePair, as_regime, as_scheme
from ..energy import FEAS_RTOL
from ..errors import InfeasibleError
from ..power import SIC_GUARD, energy_weights, power_terms

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
D_TOL = 1e-4


def golden_section(f, lo, hi, tol: float = D_TOL):
    """Minimize a unimodal ``f`` on ``[lo, hi]`` (scalars or equal-shape arrays).

    ``f`` must accept arrays when the bounds are arrays.  Returns the midpoint
    of the final bracket, whose width is at most ``tol``.
    """
    lo = np.asarray(lo, dtype=float).copy()
    hi = np.asarray(hi, dtype=float).copy()
    width = float(np.max(hi - lo)) if lo.size else 0.0
    n = 0 if width <= tol else int(math.ceil(math.log(tol / width) / math.log(INV_PHI)))
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(n):
        # ties move left, so a flat objective keeps the left end of the bracket
        left = f1 <= f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = np.where(left, hi - INV_PHI * (hi - lo), x2)
        nx2 = np.where(left, x1, lo + INV_PHI * (hi - lo))
        fn = f(np.where(left, nx1, nx2))
        f1, f2 = np.where(left, fn, f2), np.where(left, f1, fn)
        x1, x2 = nx1, nx2
    mid = 0.5 * (lo + hi)
    return float(mid) if mid.ndim == 0 else mid


def location_coefficients(scheme: Scheme, regime: Regime, rho1, rho2, t, cfg: SystemConfig, ues: UePair,
                          success_only: bool = False):
    """``(a1, a2)`` with ``p_k = a_k (H^2 + d_k^2) B N0 / beta0`` at every ``d``.

    Here ``d_1 = d`` and ``d_2 = D - d``.  NOMA-F coefficients are the average
    (SIC success/failure) powers; ``inf`` marks a lost SIC margin unless
    ``success_only`` substitutes the SIC-success powers there.
    """
    terms = power_terms(scheme, regime, rho1, rho2, t, 0.0, cfg, ues)
    p1, p2 = terms["p1"], terms["p2"]
    if success_only and "margin" in terms:
        lost = ~(terms["margin"] > SIC_GUARD)
        p1 = np.where(lost, terms["p_hat1"], p1)
        p2 = np.where(lost, terms["p_hat2"], p2)
    # at d = 0 the path losses are H^2 and H^2 + D^2
    scale = cfg.noise_power / cfg.beta0
    a1 = p1 / (scale * cfg.H**2)
    a2 = p2 / (scale * (cfg.H**2 + cfg.D**2))
    return a1, a2


def _distance_bound(a, p_max: float, cfg: SystemConfig):
    """Largest horizontal distance at which power ``a * (H^2 + x^2) * BN0/beta0`` fits ``p_max``."""
    scale = cfg.noise_power / cfg.beta0
    # same tolerance as the constraint report, so both agree on the boundary
    p_max = p_max * (1.0 + FEAS_RTOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(a > 0, p_max / (a * scale) - cfg.H**2, np.inf)
    r2 = np.where(np.isnan(r2), -1.0, r2)
    return np.where(r2 >= 0, np.sqrt(np.maximum(r2, 0.0)), -np.inf)


def feasible_interval(scheme: Scheme, a1, a2, cfg: SystemConfig, ues: UePair):
    """``[d_min, d_max]`` allowed by the power caps, ``[0, D]`` and the NOMA order bound."""
    scheme = as_scheme(scheme)
    top = cfg.D / 2 if scheme is Scheme.NOMA else cfg.D
    r1 = _distance_bound(a1, ues[0].P_max, cfg)
    r2 = _distance_bound(a2, ues[1].P_max, cfg)
    d_max = np.minimum(top, r1)
    d_min = np.maximum(0.0, cfg.D - r2)
    return d_min, d_max


def phi_psi(rho1, rho2, t, cfg: SystemConfig, ues: UePair):
    """Weights of UE 1 and UE 2 in the NOMA-F sum power (``Phi``, ``Psi``)."""
    return location_coefficients(Scheme.NOMA, Regime.FINITE, rho1, rho2, t, cfg, ues)


def locate(scheme, regime, rho1, rho2, t, cfg: SystemConfig, ues: UePair, tol: float = D_TOL,
           success_only: bool = False):
    """Array kernel: optimal ``d`` and a mask of points with a nonempty interval.

    Infeasible entries get ``d = nan``.
    """
    scheme, regime = as_scheme(scheme), as_regime(regime)
    a1, a2 = location_coefficients(scheme, regime, rho1, rho2, t, cfg, ues, success_only)
    a1, a2 = np.broadcast_arrays(np.asarray(a1, float), np.asarray(a2, float))
    d_min, d_max = feasible_interval(scheme, a1, a2, cfg, ues)
    ok = np.isfinite(a1) & np.isfinite(a2) & (d_min <= d_max)
    lo = np.where(ok, d_min, 0.0)
    hi = np.where(ok, d_max, 0.0)
    if scheme is Scheme.NOMA and regime is Regime.FINITE:
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.where(a1 + a2 > 0, a2 / (a1 + a2), 0.0)
        d = np.clip(ratio * cfg.D, lo, hi)
    else:
        w1, w2 = energy_weights(scheme, cfg)
        c1 = np.where(ok, w1 * a1, 0.0)
        c2 = np.where(ok, w2 * a2, 0.0)
        H2, D = cfg.H**2, cfg.D

        def f(x):
            return c1 * (H2 + x**2) + c2 * (H2 + (D - x) ** 2)

        d = np.asarray(golden_section(f, lo, hi, tol))
        # a flat objective (nothing offloaded) keeps the smallest admissible d
        d = np.where((c1 + c2) > 0, d, lo)
    d = np.where(ok, d, np.nan)
    return d, ok


def solve_uav_location(scheme, regime, rho, t: float, cfg: SystemConfig, ues: UePair) -> float:
    """Energy-minimizing horizontal UAV offset for fixed ``rho`` and ``t``."""
    rho1, rho2 = rho
    d, ok = locate(scheme, regime, rho1, rho2, t, cfg, ues)
    if not bool(ok):
        scheme, regime = as_scheme(scheme), as_regime(regime)
        a1, a2 = location_coefficients(scheme, regime, rho1, rho2, t, cfg, ues)
        if not (np.isfinite(a1) and np.isfinite(a2)):
            name = "sic_margin" if scheme is Scheme.NOMA and regime is Regime.FINITE else "power_cap"
            raise InfeasibleError("required powers are unbounded at every UAV position", name)
        r1 = float(_distance_bound(a1, ues[0].P_max, cfg))
        name = "power_cap_1" if r1 < 0 else "power_cap_2"
        raise InfeasibleError("no UAV position satisfies both power caps", name)
    return float(d)
