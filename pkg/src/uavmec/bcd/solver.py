"""Block coordinate descent over task split, offloading window and UAV position."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..config import Decision, Regime, Scheme, SystemConfig, UePair, as_regime, as_scheme, rho_floor
from ..energy import ConstraintReport, EnergyBreakdown, check_constraints, total_energy
from ..errors import InfeasibleError, SolverError
from .joint import solve_joint_split_time
from .location import locate, solve_uav_location
from .offload_time import solve_offload_time
from .task_split import solve_task_split

log = logging.getLogger(__name__)

MAX_OUTER = 30
ALL_BLOCKS = ("rho", "t", "d")


@dataclass
class OptResult:
    decision: Decision
    energy: EnergyBreakdown
    trace: list[float]
    iterations: int
    converged: bool
    scheme: Scheme | None = None
    regime: Regime | None = None
    report: ConstraintReport | None = field(default=None, repr=False)

    @property
    def total(self) -> float:
        return self.energy.total


def _energy(scheme, regime, dec: Decision, cfg, ues) -> float:
    return total_energy(scheme, regime, dec, cfg, ues).total


def _placed(scheme, regime, rho, t, d0, cfg, ues) -> Decision | None:
    """A feasible decision with the given split and window, moving the UAV if needed."""
    cand = Decision(rho[0], rho[1], t, d0)
    if check_constraints(scheme, regime, cand, cfg, ues).feasible:
        return cand
    d, ok = locate(scheme, regime, rho[0], rho[1], t, cfg, ues)
    if bool(ok):
        cand = cand.with_(d=float(d))
        if check_constraints(scheme, regime, cand, cfg, ues).feasible:
            return cand
    return None


def default_start(scheme, regime, cfg: SystemConfig, ues: UePair, *, rho=None, t=None) -> Decision:
    """Midpoint start, with fallbacks when it violates a cap.

    Tries ``rho = (0.5, 0.5)``, then each portion raised to its local-CPU
    floor, then the floors themselves, then ``rho = (0, 0)``; for each split
    the window is scanned outward from ``T_max/2`` and the UAV re-placed.
    Passing ``rho`` or ``t`` pins that variable instead of searching it.
    """
    scheme, regime = as_scheme(scheme), as_regime(regime)
    floors = [rho_floor(cfg, ues[k]) for k in range(2)]
    if rho is not None:
        splits = [tuple(float(r) for r in rho)]
    else:
        splits = [(0.5, 0.5), (max(0.5, floors[0]), max(0.5, floors[1])), tuple(floors), (0.0, 0.0)]
    if t is not None:
        times = [float(t)]
    else:
        fractions = [0.5, 0.6, 0.4, 0.7, 0.3, 0.8, 0.2, 0.9, 0.1, 0.95, 0.05, 0.99, 0.01]
        times = [min(f * cfg.T_max, cfg.t_cap) for f in fractions]
    d0 = 0.25 * cfg.D
    seen = set()
    for split in splits:
        if split in seen:
            continue
        seen.add(split)
        for tt in times:
            dec = _placed(scheme, regime, split, tt, d0, cfg, ues)
            if dec is not None:
                return dec
    if rho is not None or t is not None:
        pinned = ", ".join(f"{n}={v}" for n, v in (("rho", rho), ("t", t)) if v is not None)
        # name a constraint of the most promising candidate: local CPU caps met first, then fewest violations
        bad, best_key = None, None
        for split in seen:
            d, ok = locate(scheme, regime, split[0], split[1], times[0], cfg, ues)
            probe = Decision(split[0], split[1], times[0], float(d) if bool(ok) else d0)
            v = check_constraints(scheme, regime, probe, cfg, ues).violations()
            key = (any(c.name.startswith("local_cpu_cap") for c in v), len(v))
            if best_key is None or key < best_key:
                bad, best_key = v, key
        raise InfeasibleError(f"no feasible point with {pinned}", bad[0].name if bad else None)
    raise InfeasibleError("no feasible starting point found", "local_cpu_cap")


def bcd_solve(scheme, regime, cfg: SystemConfig, ues: UePair, init: Decision | None = None, *,
              blocks=ALL_BLOCKS, max_outer: int = MAX_OUTER, joint: bool = True) -> OptResult:
    """Alternate the task-split, window and location steps until the energy settles.

    ``blocks`` selects which variables are optimized; the partial-optimization
    benchmarks keep the others at their ``init`` values.  With ``joint`` and
    both ``rho`` and ``t`` free, each pass also takes a joint ``(rho, t)``
    step (see :mod:`uavmec.bcd.joint`).  Stops when the relative energy
    change of one outer pass is at most ``cfg.sigma_conv``.
    """
    scheme, regime = as_scheme(scheme), as_regime(regime)
    blocks = tuple(blocks)
    unknown = set(blocks) - set(ALL_BLOCKS)
    if unknown:
        raise ValueError(f"unknown blocks {sorted(unknown)}")
    if init is None:
        init = default_start(scheme, regime, cfg, ues)
    report = check_constraints(scheme, regime, init, cfg, ues)
    if not report.feasible:
        bad = report.violations()[0]
        raise InfeasibleError(f"initial point violates {bad.name} (slack {bad.slack:.3g})", bad.name)

    dec = init
    e = _energy(scheme, regime, dec, cfg, ues)
    trace = [e]
    converged = False
    it = 0
    for it in range(1, max_outer + 1):
        try:
            if "rho" in blocks:
                r1, r2 = solve_task_split(scheme, regime, dec.t, dec.d, cfg, ues, dec.rho)
                dec = dec.with_(rho1=r1, rho2=r2)
            if "t" in blocks:
                dec = dec.with_(t=solve_offload_time(scheme, regime, dec.rho, dec.d, cfg, ues, dec.t))
            if joint and "rho" in blocks and "t" in blocks:
                dec = solve_joint_split_time(scheme, regime, dec, cfg, ues)
            if "d" in blocks:
                d_new = solve_uav_location(scheme, regime, dec.rho, dec.t, cfg, ues)
                cand = dec.with_(d=d_new)
                # keep the old position if rounding made the new one worse
                if _energy(scheme, regime, cand, cfg, ues) <= _energy(scheme, regime, dec, cfg, ues):
                    dec = cand
        except InfeasibleError:
            raise
        except (ArithmeticError, ValueError) as exc:
            raise SolverError(f"inner step failed at outer iteration {it}: {exc}") from exc
        e_new = _energy(scheme, regime, dec, cfg, ues)
        trace.append(e_new)
        change = abs(trace[-2] - e_new) / max(abs(trace[-2]), 1e-300)
        log.debug("outer %d: E=%.6g change=%.3g", it, e_new, change)
        if change <= cfg.sigma_conv:
            converged = True
            break

    final = check_constraints(scheme, regime, dec, cfg, ues)
    if not final.feasible:
        raise SolverError(f"solver left the feasible set: {[c.name for c in final.violations()]}")
    energy = total_energy(scheme, regime, dec, cfg, ues)
    return OptResult(dec, energy, trace, it, converged, scheme, regime, final)
