"""Minimum transmit powers that meet each UE's information-causality constraint.

All six scheme/regime combinations share one kernel, :func:`power_terms`,
which works on broadcast arrays so the grid oracles can call it directly.
NOMA always uses decoding order (i): UE 1 is decoded first, which requires the
UAV to sit no further than ``D/2`` from UE 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import Decision, EvalMode, Regime, Scheme, SystemConfig, UePair, as_eval_mode, as_regime, as_scheme
from .errors import DomainError, SicInfeasibleError
from .model import _normalized_gains, _threshold

# Failure-branch denominators below this are treated as lost SIC.
SIC_GUARD = 1e-9


@dataclass(frozen=True)
class NomaBranches:
    p_hat1: float
    p_hat2: float
    p_check1: float
    p_check2: float
    margin: float


@dataclass(frozen=True)
class PowerSolution:
    p1: float
    p2: float
    sinr1: float
    sinr2: float
    noma_branches: NomaBranches | None = None
    success_only: bool = False


def blocklength_shares(scheme: Scheme, cfg: SystemConfig) -> tuple[float, float]:
    """Fraction of the ``B*t`` resource block each UE transmits over."""
    scheme = as_scheme(scheme)
    if scheme is Scheme.FDMA:
        return cfg.eta, 1.0 - cfg.eta
    if scheme is Scheme.TDMA:
        return cfg.delta, 1.0 - cfg.delta
    return 1.0, 1.0


def energy_weights(scheme: Scheme, cfg: SystemConfig) -> tuple[float, float]:
    """Fraction of the window ``t`` each UE spends transmitting."""
    scheme = as_scheme(scheme)
    if scheme is Scheme.TDMA:
        return cfg.delta, 1.0 - cfg.delta
    return 1.0, 1.0


def power_scales(scheme: Scheme, cfg: SystemConfig) -> tuple[float, float]:
    """Noise-bandwidth factor multiplying ``Y_k / hbar_k`` (FDMA sub-bands only)."""
    scheme = as_scheme(scheme)
    if scheme is Scheme.FDMA:
        return cfg.eta, 1.0 - cfg.eta
    return 1.0, 1.0


def thresholds(scheme: Scheme, regime: Regime, rho1, rho2, t, cfg: SystemConfig, ues: UePair, zero_override: bool = True):
    """Required SINR/SNR of each UE at its own blocklength."""
    scheme, regime = as_scheme(scheme), as_regime(regime)
    n = cfg.B * np.asarray(t, dtype=float)
    s1, s2 = blocklength_shares(scheme, cfg)
    y1 = _threshold(regime, np.asarray(rho1, float) * ues[0].L, s1 * n, ues[0].eps, cfg.dispersion, zero_override)
    y2 = _threshold(regime, np.asarray(rho2, float) * ues[1].L, s2 * n, ues[1].eps, cfg.dispersion, zero_override)
    return y1, y2


def _scaled(scale: float, ups):
    # a zero-width sub-band with data to send needs unbounded power
    if scale == 0.0:
        return np.where(ups > 0, np.inf, 0.0)
    return scale * ups


def power_terms(scheme: Scheme, regime: Regime, rho1, rho2, t, d, cfg: SystemConfig, ues: UePair) -> dict:
    """Array kernel returning every power quantity of one scheme/regime.

    Keys: ``p1, p2`` (regime-appropriate; NOMA-F averages, ``inf`` where the
    SIC margin is lost), ``sinr1, sinr2`` and, for NOMA-F only, ``p_hat1,
    p_hat2, p_check1, p_check2, margin``.
    """
    scheme, regime = as_scheme(scheme), as_regime(regime)
    y1, y2 = thresholds(scheme, regime, rho1, rho2, t, cfg, ues)
    hb1, hb2 = _normalized_gains(d, cfg)
    out = {"sinr1": y1, "sinr2": y2}
    with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
        if scheme is Scheme.NOMA:
            p_hat1 = y1 * (y2 + 1.0) / hb1
            p_hat2 = y2 / hb2
            p_hat1 = np.where(y1 > 0, p_hat1, 0.0)
            if regime is Regime.INFINITE:
                out.update(p1=p_hat1, p2=p_hat2)
                return out
            margin = 1.0 - y1 * y2
            margin = np.where(np.isnan(margin), -np.inf, margin)
            ok = margin > SIC_GUARD
            safe = np.where(ok, margin, 1.0)
            p_check1 = np.where(ok, y1 * (y2 + 1.0) / (safe * hb1), np.inf)
            p_check2 = np.where(ok, y2 * (y1 + 1.0) / (safe * hb2), np.inf)
            p_check1 = np.where(y1 > 0, p_check1, np.where(ok, 0.0, np.inf))
            p_check2 = np.where(y2 > 0, p_check2, np.where(ok, 0.0, np.inf))
            e1 = ues[0].eps
            p1 = np.where(ok, (1 - e1) * p_hat1 + e1 * p_check1, np.inf)
            p2 = np.where(ok, (1 - e1) * p_hat2 + e1 * p_check2, np.inf)
            out.update(p1=p1, p2=p2, p_hat1=p_hat1, p_hat2=p_hat2, p_check1=p_check1, p_check2=p_check2, margin=margin)
            return out
        a1, a2 = power_scales(scheme, cfg)
        out.update(p1=_scaled(a1, y1) / hb1, p2=_scaled(a2, y2) / hb2)
    return out


def _validate(scheme: Scheme, decision: Decision, cfg: SystemConfig) -> None:
    for name in ("rho1", "rho2"):
        v = getattr(decision, name)
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{name}={v} outside [0, 1]")
    if not 0.0 <= decision.t <= cfg.T_max:
        raise DomainError(f"t={decision.t} outside [0, T_max]")
    if not 0.0 <= decision.d <= cfg.D:
        raise DomainError(f"d={decision.d} outside [0, D]")
    if scheme is Scheme.NOMA and decision.d > cfg.D / 2:
        raise DomainError(f"NOMA decoding order (i) needs d <= D/2, got d={decision.d}")


def min_powers(scheme, regime, decision: Decision, cfg: SystemConfig, ues: UePair, eval_mode=EvalMode.STRICT) -> PowerSolution:
    """Smallest transmit powers meeting the offloading rate constraints with equality."""
    scheme, regime, eval_mode = as_scheme(scheme), as_regime(regime), as_eval_mode(eval_mode)
    _validate(scheme, decision, cfg)
    terms = power_terms(scheme, regime, decision.rho1, decision.rho2, decision.t, decision.d, cfg, ues)
    s1, s2 = float(terms["sinr1"]), float(terms["sinr2"])
    if "margin" not in terms:
        return PowerSolution(float(terms["p1"]), float(terms["p2"]), s1, s2)

    margin = float(terms["margin"])
    if margin > SIC_GUARD:
        branches = NomaBranches(*(float(terms[k]) for k in ("p_hat1", "p_hat2", "p_check1", "p_check2")), margin)
        return PowerSolution(float(terms["p1"]), float(terms["p2"]), s1, s2, branches)
    if eval_mode is EvalMode.STRICT:
        raise SicInfeasibleError(f"SIC margin 1 - Y1*Y2 = {margin:.6g} is not positive", margin)
    p_hat1, p_hat2 = float(terms["p_hat1"]), float(terms["p_hat2"])
    branches = NomaBranches(p_hat1, p_hat2, float("nan"), float("nan"), margin)
    return PowerSolution(p_hat1, p_hat2, s1, s2, branches, success_only=True)


def sic_margin(rho1: float, rho2: float, t: float, cfg: SystemConfig, ues: UePair) -> float:
    """``1 - Y1*Y2`` at blocklength ``B*t``; positive iff SIC-failure powers exist."""
    if t <= 0:
        raise DomainError(f"offloading window must be > 0, got t={t}")
    y1, y2 = thresholds(Scheme.NOMA, Regime.FINITE, rho1, rho2, t, cfg, ues)
    return float(1.0 - y1 * y2)
