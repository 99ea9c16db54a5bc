"""Convex first-order surrogates used by the SCA inner loops.

Both subproblems write each SINR threshold as ``X_k - 1`` with ``X_k`` an
exponential of an affine (task split) or convex (offloading time) function.
Minimized terms are replaced by convex majorants and the SIC-margin terms by
concave minorants, each tight at the expansion point, so every surrogate
step is a descent step on the true energy.

NOMA-F failure powers use ``P_check_k * hbar_k = 1/mu_k - 1`` with
``mu_1 = 1 - X_2 + X_2/X_1`` and ``mu_2 = 1 - X_1 + X_1/X_2``; the ratio
terms are the ones linearized.  The slack ``mu_tilde_k <= mu_k`` is always
tight at the optimum, so it is eliminated and only reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import Regime, Scheme, SystemConfig, UePair, as_regime, as_scheme
from ..energy import energy_terms
from ..model import LN2, _normalized_gains, inverse_q, remote_windows
from ..power import blocklength_shares, energy_weights, power_scales

MU_GUARD = 1e-8


@dataclass(frozen=True)
class SubproblemCoefficients:
    """Cubic-energy and exponent coefficients of both SCA subproblems.

    ``zeta_k, xi_k`` weigh ``rho_k^3`` and ``(1 - rho_k)^3``; ``omega_k, v_k``
    give ``X_k = exp(omega_k rho_k + v_k)`` at fixed ``t``; ``z_k, s_k`` give
    ``X_k = exp(z_k / t + s_k / sqrt(t))`` at fixed ``rho``.
    """

    zeta: tuple[float, float]
    xi: tuple[float, float]
    omega: tuple[float, float]
    v: tuple[float, float]
    z: tuple[float, float]
    s: tuple[float, float]


@dataclass(frozen=True)
class SlackState:
    """Slack values at a solution, reported for diagnostics.

    ``lambda_tilde_k`` is the (majorized) SIC-success power times ``hbar_k``,
    ``mu_tilde_k`` the SIC-margin ratio in the task-split step,
    ``p_breve_k`` the transmit-power epigraph, ``varsigma_breve_k`` the margin
    ratio in the time step and ``e_breve_k`` the offloading-energy epigraph.
    """

    lambda_tilde: tuple[float, float] = (0.0, 0.0)
    mu_tilde: tuple[float, float] = (1.0, 1.0)
    p_breve: tuple[float, float] = (0.0, 0.0)
    varsigma_breve: tuple[float, float] = (1.0, 1.0)
    e_breve: tuple[float, float] = (0.0, 0.0)


def coefficients(scheme: Scheme, regime: Regime, rho, t: float, cfg: SystemConfig, ues: UePair) -> SubproblemCoefficients:
    scheme, regime = as_scheme(scheme), as_regime(regime)
    shares = blocklength_shares(scheme, cfg)
    windows = [float(w) for w in remote_windows(scheme, t, cfg)]
    zeta, xi, omega, v, z, s = [], [], [], [], [], []
    for k in range(2):
        ue, share, rho_k = ues[k], shares[k], rho[k]
        load3 = ue.cycles**3
        xi.append(ue.kappa * load3 / cfg.T_max**2)
        zeta.append(cfg.kappa_U * load3 / windows[k] ** 2 if windows[k] > 0 else math.inf)
        if share <= 0 or ue.L == 0:
            omega.append(0.0 if ue.L == 0 else math.inf)
            v.append(0.0)
            z.append(0.0 if ue.L == 0 else math.inf)
            s.append(0.0)
            continue
        n = share * cfg.B * t
        loss = (1.0 - ue.eps) if regime is Regime.FINITE else 1.0
        q = math.sqrt(cfg.dispersion) * inverse_q(ue.eps) if regime is Regime.FINITE else 0.0
        omega.append(LN2 * ue.L / (n * loss) if n > 0 else math.inf)
        v.append(q / math.sqrt(n) if n > 0 else math.inf)
        z.append(LN2 * rho_k * ue.L / (share * cfg.B * loss))
        s.append(q / math.sqrt(share * cfg.B))
    return SubproblemCoefficients(tuple(zeta), tuple(xi), tuple(omega), tuple(v), tuple(z), tuple(s))


def _mix(scheme: Scheme, regime: Regime, cfg: SystemConfig, ues: UePair):
    if scheme is Scheme.NOMA and regime is Regime.FINITE:
        e1 = ues[0].eps
        return 1.0 - e1, e1
    return 1.0, 0.0


class TaskSplitSurrogate:
    """Surrogate of the task-split problem expanded at ``rho0`` for fixed ``(t, d)``.

    ``active[k]`` is False for a UE pinned at ``rho_k = 0``; its threshold is
    then exactly zero (``X_k = 1``).
    """

    def __init__(self, scheme: Scheme, regime: Regime, t: float, d: float, cfg: SystemConfig, ues: UePair,
                 rho0, active=(True, True)):
        self.scheme, self.regime, self.t, self.d = as_scheme(scheme), as_regime(regime), t, d
        self.cfg, self.ues = cfg, ues
        self.rho0 = np.asarray(rho0, dtype=float)
        self.active = tuple(bool(a) for a in active)
        co = coefficients(scheme, regime, self.rho0, t, cfg, ues)
        self.coef = co
        self.a = np.array([co.omega[k] if self.active[k] else 0.0 for k in range(2)])
        self.b = np.array([co.v[k] if self.active[k] else 0.0 for k in range(2)])
        self.zeta = np.array(co.zeta)
        self.xi = np.array(co.xi)
        hb = _normalized_gains(d, cfg)
        self.hbar = np.array([float(hb[0]), float(hb[1])])
        self.w = np.array(energy_weights(scheme, cfg))
        self.scale = np.array(power_scales(scheme, cfg))
        self.mix = _mix(scheme, regime, cfg, ues)
        self.windows = np.array([float(x) for x in remote_windows(scheme, t, cfg)])
        self.cycles = np.array([ues[0].cycles, ues[1].cycles])
        self.p_max = np.array([ues[0].P_max, ues[1].P_max])
        self.X0 = self._X(self.rho0)
        self.R0 = np.array([self.X0[1] / self.X0[0], self.X0[0] / self.X0[1]])

    # exact pieces --------------------------------------------------------
    def _X(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.exp(self.a.reshape((2,) + (1,) * (rho.ndim - 1)) * rho + self.b.reshape((2,) + (1,) * (rho.ndim - 1)))

    def p_hat1(self, rho):
        X1, X2 = self._X(rho)
        return X1 * X2 - X2

    def p_hat1_majorant(self, rho):
        X1, X2 = self._X(rho)
        r2 = np.asarray(rho, dtype=float)[1]
        a2, X20 = self.a[1], self.X0[1]
        return X1 * X2 - X20 - a2 * X20 * (r2 - self.rho0[1])

    def mu(self, rho):
        X1, X2 = self._X(rho)
        return np.stack([1.0 - X2 + X2 / X1, 1.0 - X1 + X1 / X2])

    def mu_lower(self, rho):
        rho = np.asarray(rho, dtype=float)
        X1, X2 = self._X(rho)
        dr1 = rho[0] - self.rho0[0]
        dr2 = rho[1] - self.rho0[1]
        a1, a2 = self.a
        m1 = 1.0 - X2 + self.R0[0] * (1.0 + a2 * dr2 - a1 * dr1)
        m2 = 1.0 - X1 + self.R0[1] * (1.0 + a1 * dr1 - a2 * dr2)
        return np.stack([m1, m2])

    # surrogate -----------------------------------------------------------
    def powers(self, rho, exact: bool = False):
        """Per-UE transmit powers (majorized unless ``exact``)."""
        X1, X2 = self._X(rho)
        if self.scheme is not Scheme.NOMA:
            return np.stack([self.scale[0] * (X1 - 1.0) / self.hbar[0], self.scale[1] * (X2 - 1.0) / self.hbar[1]])
        q1 = self.p_hat1(rho) if exact else self.p_hat1_majorant(rho)
        q2 = X2 - 1.0
        if self.regime is Regime.INFINITE:
            return np.stack([q1 / self.hbar[0], q2 / self.hbar[1]])
        m = self.mu(rho) if exact else self.mu_lower(rho)
        with np.errstate(divide="ignore"):
            inv = np.where(m > 0, 1.0 / np.where(m > 0, m, 1.0), np.inf)
        c_hat, c_chk = self.mix
        return np.stack([(c_hat * q1 + c_chk * (inv[0] - 1.0)) / self.hbar[0],
                         (c_hat * q2 + c_chk * (inv[1] - 1.0)) / self.hbar[1]])

    def value(self, rho, exact: bool = False):
        rho = np.asarray(rho, dtype=float)
        shp = (2,) + (1,) * (rho.ndim - 1)
        cubic = np.sum(self.xi.reshape(shp) * (1.0 - rho) ** 3 + self.zeta.reshape(shp) * rho**3, axis=0)
        p = self.powers(rho, exact)
        return cubic + self.t * np.sum(self.w.reshape(shp) * p, axis=0)

    def grad(self, rho):
        rho = np.asarray(rho, dtype=float)
        X1, X2 = self._X(rho)
        a1, a2 = self.a
        g = -3.0 * self.xi * (1.0 - rho) ** 2 + 3.0 * self.zeta * rho**2
        tw = self.t * self.w
        if self.scheme is not Scheme.NOMA:
            g = g + tw * self.scale * self.a * np.array([X1, X2]) / self.hbar
            return g
        c_hat, c_chk = self.mix
        dq1 = np.array([a1 * X1 * X2, a2 * X1 * X2 - a2 * self.X0[1]])
        dq2 = np.array([0.0, a2 * X2])
        g = g + tw[0] * c_hat * dq1 / self.hbar[0] + tw[1] * c_hat * dq2 / self.hbar[1]
        if self.regime is Regime.FINITE:
            m = self.mu_lower(rho)
            dm1 = np.array([-a1 * self.R0[0], -a2 * X2 + a2 * self.R0[0]])
            dm2 = np.array([-a1 * X1 + a1 * self.R0[1], -a2 * self.R0[1]])
            g = g - tw[0] * c_chk * dm1 / (m[0] ** 2 * self.hbar[0]) - tw[1] * c_chk * dm2 / (m[1] ** 2 * self.hbar[1])
        return g

    def power_jac(self, rho):
        rho = np.asarray(rho, dtype=float)
        X1, X2 = self._X(rho)
        a1, a2 = self.a
        if self.scheme is not Scheme.NOMA:
            return np.array([[self.scale[0] * a1 * X1 / self.hbar[0], 0.0],
                             [0.0, self.scale[1] * a2 * X2 / self.hbar[1]]])
        c_hat, c_chk = self.mix
        j1 = c_hat * np.array([a1 * X1 * X2, a2 * X1 * X2 - a2 * self.X0[1]])
        j2 = c_hat * np.array([0.0, a2 * X2])
        if self.regime is Regime.FINITE:
            m = self.mu_lower(rho)
            j1 = j1 - c_chk * np.array([-a1 * self.R0[0], -a2 * X2 + a2 * self.R0[0]]) / m[0] ** 2
            j2 = j2 - c_chk * np.array([-a1 * X1 + a1 * self.R0[1], -a2 * self.R0[1]]) / m[1] ** 2
        return np.array([j1 / self.hbar[0], j2 / self.hbar[1]])

    def mu_jac(self, rho):
        X1, X2 = self._X(rho)
        a1, a2 = self.a
        return np.array([[-a1 * self.R0[0], -a2 * X2 + a2 * self.R0[0]],
                         [-a1 * X1 + a1 * self.R0[1], -a2 * self.R0[1]]])

    def cpu_slack(self, rho):
        return self.cfg.f_U_max - float(np.sum(np.asarray(rho) * self.cycles / self.windows))

    def slack_state(self, rho) -> SlackState:
        lam = (float(self.p_hat1_majorant(rho)), float(self._X(rho)[1] - 1.0))
        if self.scheme is Scheme.NOMA and self.regime is Regime.FINITE:
            m = self.mu_lower(rho)
            return SlackState(lambda_tilde=lam, mu_tilde=(float(min(m[0], 1.0)), float(min(m[1], 1.0))))
        return SlackState(lambda_tilde=lam)

    def true_energy(self, rho):
        """Exact objective from the shared energy kernel (override included)."""
        return energy_terms(self.scheme, self.regime, rho[0], rho[1], self.t, self.d, self.cfg, self.ues)["total"]


def _u(alpha, beta, t):
    return alpha / t + beta / np.sqrt(t)


def _du(alpha, beta, t):
    return -alpha / t**2 - 0.5 * beta / t**1.5


def _d2u(alpha, beta, t):
    return 2.0 * alpha / t**3 + 0.75 * beta / t**2.5


class OffloadTimeSurrogate:
    """Surrogate of the offloading-time problem expanded at ``t0`` for fixed ``(rho, d)``.

    The ratio terms of the SIC margin, ``exp(u_other - u_k)``, need not be
    convex in ``t``, so their tangent is corrected by ``-M/2 (t - t0)^2`` with
    ``M`` bounding the negative curvature on ``[t_lo, t_hi]``; outside that
    interval the surrogate is not used.  Each bilinear ``p_k t`` term is
    bounded by ``p0 t0 ((p/p0 + t/t0)/2)^2``.
    """

    def __init__(self, scheme: Scheme, regime: Regime, rho, d: float, cfg: SystemConfig, ues: UePair,
                 t0: float, t_lo: float, t_hi: float):
        self.scheme, self.regime, self.d = as_scheme(scheme), as_regime(regime), d
        self.cfg, self.ues = cfg, ues
        self.rho = np.asarray(rho, dtype=float)
        self.t0, self.t_lo, self.t_hi = float(t0), float(t_lo), float(t_hi)
        co = coefficients(scheme, regime, self.rho, t0, cfg, ues)
        self.coef = co
        self.active = np.array([self.rho[k] * ues[k].L > 0 for k in range(2)])
        self.alpha = np.where(self.active, co.z, 0.0)
        self.beta = np.where(self.active, co.s, 0.0)
        hb = _normalized_gains(d, cfg)
        self.hbar = np.array([float(hb[0]), float(hb[1])])
        self.w = np.array(energy_weights(scheme, cfg))
        self.scale = np.array(power_scales(scheme, cfg))
        self.mix = _mix(scheme, regime, cfg, ues)
        self.loads3 = np.array([(self.rho[k] * ues[k].cycles) ** 3 for k in range(2)])
        self.X0 = self._X(t0)
        self.dX0 = self.X0 * np.array([_du(self.alpha[k], self.beta[k], t0) for k in range(2)])
        # ratio R_1 = X_2/X_1, R_2 = X_1/X_2 and their tangents
        self.gamma = np.array([self.alpha[1] - self.alpha[0], self.alpha[0] - self.alpha[1]])
        self.theta = np.array([self.beta[1] - self.beta[0], self.beta[0] - self.beta[1]])
        self.R0 = np.exp(_u(self.gamma, self.theta, t0))
        self.dR0 = self.R0 * _du(self.gamma, self.theta, t0)
        self.M = self._curvature_bound()
        self.p0 = np.array([float(v) for v in self.powers(t0, exact=True)])

    def _X(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.exp(_u(self.alpha[k], self.beta[k], t)) for k in range(2)])

    def _curvature_bound(self):
        if not (self.scheme is Scheme.NOMA and self.regime is Regime.FINITE):
            return np.zeros(2)
        grid = np.linspace(self.t_lo, self.t_hi, 4001)
        out = []
        for k in range(2):
            u = _u(self.gamma[k], self.theta[k], grid)
            r2 = np.exp(u) * (_du(self.gamma[k], self.theta[k], grid) ** 2 + _d2u(self.gamma[k], self.theta[k], grid))
            neg = float(np.max(np.maximum(0.0, -r2)))
            out.append(1.25 * neg)
        return np.array(out)

    def mu(self, t):
        X1, X2 = self._X(t)
        return np.stack([1.0 - X2 + X2 / X1, 1.0 - X1 + X1 / X2])

    def mu_lower(self, t):
        t = np.asarray(t, dtype=float)
        X1, X2 = self._X(t)
        dt = t - self.t0
        tan = [self.R0[k] + self.dR0[k] * dt - 0.5 * self.M[k] * dt**2 for k in range(2)]
        return np.stack([1.0 - X2 + tan[0], 1.0 - X1 + tan[1]])

    def p_hat1(self, t):
        X1, X2 = self._X(t)
        return X1 * X2 - X2

    def p_hat1_majorant(self, t):
        t = np.asarray(t, dtype=float)
        X1, X2 = self._X(t)
        return X1 * X2 - self.X0[1] - self.dX0[1] * (t - self.t0)

    def powers(self, t, exact: bool = False):
        X1, X2 = self._X(t)
        act = self.active.reshape((2,) + (1,) * np.ndim(t))
        if self.scheme is not Scheme.NOMA:
            p = np.stack([self.scale[0] * (X1 - 1.0) / self.hbar[0], self.scale[1] * (X2 - 1.0) / self.hbar[1]])
            return np.where(act, p, 0.0)
        q1 = self.p_hat1(t) if exact else self.p_hat1_majorant(t)
        q2 = X2 - 1.0
        if self.regime is Regime.FINITE:
            m = self.mu(t) if exact else self.mu_lower(t)
            with np.errstate(divide="ignore"):
                inv = np.where(m > 0, 1.0 / np.where(m > 0, m, 1.0), np.inf)
            c_hat, c_chk = self.mix
            q1 = c_hat * q1 + c_chk * (inv[0] - 1.0)
            q2 = c_hat * q2 + c_chk * (inv[1] - 1.0)
        p = np.stack([q1 / self.hbar[0], q2 / self.hbar[1]])
        return np.where(act, p, 0.0)

    def remote(self, t):
        t = np.asarray(t, dtype=float)
        W1, W2 = remote_windows(self.scheme, t, self.cfg)
        return self.cfg.kappa_U * (self.loads3[0] / W1**2 + self.loads3[1] / W2**2)

    def value(self, t):
        """Surrogate objective without the ``t``-independent local energy."""
        t = np.asarray(t, dtype=float)
        G = self.powers(t)
        total = self.remote(t)
        for k in range(2):
            if self.p0[k] > 0:
                total = total + self.w[k] * self.p0[k] * self.t0 * 0.25 * (G[k] / self.p0[k] + t / self.t0) ** 2
        return total

    def bilinear_bound(self, p, t, k: int):
        """Convex upper bound of ``p * t`` tight at ``(p0_k, t0)``."""
        return self.p0[k] * self.t0 * 0.25 * (p / self.p0[k] + t / self.t0) ** 2

    def feasible(self, t):
        """Surrogate constraints: majorized power caps and SIC-margin ratios."""
        G = self.powers(t)
        ok = (G[0] <= self.ues[0].P_max) & (G[1] <= self.ues[1].P_max)
        if self.scheme is Scheme.NOMA and self.regime is Regime.FINITE and self.active.all():
            m = self.mu_lower(t)
            ok = ok & (m[0] >= MU_GUARD) & (m[1] >= MU_GUARD)
        return ok

    def slack_state(self, t) -> SlackState:
        G = self.powers(t)
        e = tuple(float(self.w[k] * G[k] * t) for k in range(2))
        if self.scheme is Scheme.NOMA and self.regime is Regime.FINITE:
            m = self.mu_lower(t)
            vs = (float(min(m[0], 1.0)), float(min(m[1], 1.0)))
            return SlackState(p_breve=(float(G[0]), float(G[1])), varsigma_breve=vs, e_breve=e)
        return SlackState(p_breve=(float(G[0]), float(G[1])), e_breve=e)

    def true_energy(self, t):
        return energy_terms(self.scheme, self.regime, self.rho[0], self.rho[1], t, self.d, self.cfg, self.ues)["total"]
