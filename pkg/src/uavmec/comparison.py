"""Analytical comparison of the access schemes.

``ab_fields`` gives the SIC-feasibility field ``A`` and the NOMA-advantage
field ``B`` over offloaded data sizes; ``noma_fdma_finite_delta`` evaluates
the finite-blocklength NOMA-FDMA gap bound at a given point;
``scheme_gaps`` runs the optimizer for several schemes and tabulates the gaps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bcd.solver import bcd_solve
from .config import Decision, EvalMode, Regime, Scheme, SystemConfig, UePair, as_eval_mode, as_regime, as_scheme
from .energy import check_constraints, total_energy
from .errors import DomainError, InfeasibleError, UavMecError
from .model import _normalized_gains, _threshold, remote_windows


def _ups(bits, n, eps, zero_override, dispersion=1.0):
    return _threshold(Regime.FINITE, bits, n, eps, dispersion, zero_override)


def ab_fields(rho1L1, rho2L2, N, eps1: float, eps2: float, zero_override: bool = True, dispersion: float = 1.0):
    """``A = 1 - Y1 Y2`` and ``B = (Y1+1)(Y2+1) - ((Y1+1) + (Y2+1))/2``.

    ``A`` and the product in ``B`` use blocklength ``N``; the halved sum uses
    ``N/2``.  Inputs broadcast, so whole meshes can be evaluated at once.
    """
    b1 = np.asarray(rho1L1, dtype=float)
    b2 = np.asarray(rho2L2, dtype=float)
    n = np.asarray(N, dtype=float)
    if np.any(n < 2):
        raise DomainError(f"N must be >= 2 (N/2 >= 1), got {N}")
    if np.any(b1 < 0) or np.any(b2 < 0):
        raise DomainError("offloaded bits must be >= 0")
    for e in (eps1, eps2):
        if not 0 < e < 0.5:
            raise DomainError(f"eps must lie in (0, 0.5), got {e}")
    y1 = _ups(b1, n, eps1, zero_override, dispersion)
    y2 = _ups(b2, n, eps2, zero_override, dispersion)
    h1 = _ups(b1, n / 2, eps1, zero_override, dispersion)
    h2 = _ups(b2, n / 2, eps2, zero_override, dispersion)
    A = 1.0 - y1 * y2
    B = (y1 + 1.0) * (y2 + 1.0) - 0.5 * ((h1 + 1.0) + (h2 + 1.0))
    if A.ndim == 0:
        return float(A), float(B)
    return A, B


def symmetric_delta(rhoL: float, N: float, eps: float, hbar: float, B: float, dispersion: float = 1.0) -> float:
    """Gap bound for equal channels, loads and error probabilities.

    ``N / (hbar B) * (Ybar(N)^2 - Ybar(N/2))`` with ``Ybar = Y + 1``.
    """
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    full = float(_ups(rhoL, N, eps, True, dispersion)) + 1.0
    half = float(_ups(rhoL, N / 2, eps, True, dispersion)) + 1.0
    return N / (hbar * B) * (full * full - half)


@dataclass(frozen=True)
class DeltaReport:
    """Gap bound and exact NOMA-F minus FDMA-F energy at ``point``."""

    delta: float
    exact_difference: float
    point: Decision
    a_field: float
    b_field: float
    simplified_delta: float


def noma_fdma_finite_delta(decision: Decision, cfg: SystemConfig, ues: UePair,
                           eval_mode=EvalMode.STRICT) -> DeltaReport:
    """Finite-blocklength NOMA-FDMA gap bound at ``decision`` with ``eta = 1/2``.

    ``delta`` is the SIC-success NOMA offloading energy minus the FDMA
    offloading energy; the exact NOMA-F minus FDMA-F total is returned
    alongside it.  ``simplified_delta`` is the rearranged closed form
    ``[Yb1 Yb2/h1 - sum Yb_k(N/2)/(2 h_k) + (1/h2 - 1/h1)(Yb2 - 1/2)] N/B``.
    """
    eval_mode = as_eval_mode(eval_mode)
    cfg = cfg.with_(eta=0.5)
    report = check_constraints(Scheme.NOMA, Regime.FINITE, decision, cfg, ues)
    bad = [c for c in report.violations() if not (eval_mode is EvalMode.SUCCESS_ONLY and c.name in ("sic_margin", "power_cap_1", "power_cap_2"))]
    if bad:
        raise InfeasibleError(f"NOMA-F is infeasible at this point ({bad[0].name})", bad[0].name)
    N = cfg.B * decision.t
    if N < 2:
        raise DomainError(f"blocklength B*t must be >= 2, got {N}")
    hb1, hb2 = (float(h) for h in _normalized_gains(decision.d, cfg))
    b1, b2 = decision.rho1 * ues[0].L, decision.rho2 * ues[1].L
    e1, e2 = ues[0].eps, ues[1].eps
    y1, y2 = float(_ups(b1, N, e1, True)), float(_ups(b2, N, e2, True))
    h1, h2 = float(_ups(b1, N / 2, e1, True)), float(_ups(b2, N / 2, e2, True))
    noma = y1 * (y2 + 1.0) / hb1 + y2 / hb2
    fdma = h1 / (2 * hb1) + h2 / (2 * hb2)
    delta = (noma - fdma) * N / cfg.B
    simplified = ((y1 + 1) * (y2 + 1) / hb1 - (h1 + 1) / (2 * hb1) - (h2 + 1) / (2 * hb2)
                  + (1 / hb2 - 1 / hb1) * (y2 + 1 - 0.5)) * N / cfg.B
    exact = (total_energy(Scheme.NOMA, Regime.FINITE, decision, cfg, ues, eval_mode).total
             - total_energy(Scheme.FDMA, Regime.FINITE, decision, cfg, ues).total)
    A, B = ab_fields(b1, b2, N, e1, e2)
    return DeltaReport(delta, exact, decision, A, B, simplified)


def fdma_tdma_gap(regime, decision: Decision, cfg: SystemConfig, ues: UePair) -> tuple[float, float]:
    """Exact ``E_FDMA - E_TDMA`` at one point and its remote-computing closed form.

    The closed form ``kappa_U (rho1 c1 L1)^3 [1/(T-t)^2 - 1/(T-delta t)^2]``
    holds when ``eta = delta``.
    """
    regime = as_regime(regime)
    diff = (total_energy(Scheme.FDMA, regime, decision, cfg, ues).total
            - total_energy(Scheme.TDMA, regime, decision, cfg, ues).total)
    w_tdma, w_fdma = remote_windows(Scheme.TDMA, decision.t, cfg)
    load = decision.rho1 * ues[0].cycles
    closed = 0.0 if load == 0 else cfg.kappa_U * load**3 * (1.0 / float(w_fdma) ** 2 - 1.0 / float(w_tdma) ** 2)
    return diff, closed


@dataclass
class ComparisonReport:
    """Optimal energies per ``(scheme, regime)`` cell and the gaps between them."""

    energies: dict = field(default_factory=dict)
    status: dict = field(default_factory=dict)
    decisions: dict = field(default_factory=dict)
    gaps: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    delta: DeltaReport | None = None

    def energy(self, scheme, regime) -> float | None:
        return self.energies.get((as_scheme(scheme), as_regime(regime)))


# (name, lhs scheme, rhs scheme, regime filter): gap = E*_lhs - E*_rhs
_GAPS = (
    ("fdma_minus_tdma", Scheme.FDMA, Scheme.TDMA, None),
    ("noma_minus_fdma", Scheme.NOMA, Scheme.FDMA, None),
)


def scheme_gaps(cfg: SystemConfig, ues: UePair, regimes=("inf", "fin"), schemes=("noma", "fdma", "tdma"),
                tol: float = 0.01) -> ComparisonReport:
    """Optimize every requested cell and tabulate pairwise gaps.

    Flags: ``tdma_le_fdma[regime]`` and, in the infinite regime,
    ``noma_le_fdma`` use the relative tolerance ``tol``; in the finite
    regime ``noma_gt_fdma`` records the strict ordering.  The NOMA-F gap
    bound is evaluated at the solver's NOMA-F point, which is labelled in
    the report.
    """
    regimes = [as_regime(r) for r in regimes]
    schemes = [as_scheme(s) for s in schemes]
    rep = ComparisonReport()
    for reg in regimes:
        for sch in schemes:
            key = (sch, reg)
            try:
                res = bcd_solve(sch, reg, cfg, ues)
            except UavMecError as exc:
                rep.status[key] = f"error: {exc}"
                continue
            rep.energies[key] = res.total
            rep.decisions[key] = res.decision
            rep.status[key] = "ok"
    for reg in regimes:
        for name, lhs, rhs, _ in _GAPS:
            a, b = rep.energies.get((lhs, reg)), rep.energies.get((rhs, reg))
            if a is None or b is None:
                continue
            rep.gaps[(name, reg)] = a - b
            if name == "fdma_minus_tdma":
                rep.flags[("tdma_le_fdma", reg)] = b <= a * (1 + tol)
            elif reg is Regime.INFINITE:
                rep.flags[("noma_le_fdma", reg)] = a <= b * (1 + tol)
            else:
                rep.flags[("noma_gt_fdma", reg)] = a > b
    point = rep.decisions.get((Scheme.NOMA, Regime.FINITE))
    if point is not None and math.isclose(cfg.eta, 0.5) and cfg.B * point.t >= 2:
        try:
            rep.delta = noma_fdma_finite_delta(point, cfg, ues)
        except UavMecError:
            rep.delta = None
    return rep
