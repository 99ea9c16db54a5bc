"""Physical model: air-to-ground channels, DVFS CPU frequencies, computation
energy and the SINR thresholds implied by the offloading rate laws.

The public functions validate their arguments and return scalars or small
records.  The underscore helpers are the numpy-broadcasting kernels that the
optimizers and grid oracles call on whole arrays of candidate points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .config import Regime, Scheme, SystemConfig, UePair, as_regime, as_scheme
from .errors import DomainError, InfeasibleTimeError

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ChannelState:
    h1: float
    h2: float
    hbar1: float
    hbar2: float


def _gains(d, cfg: SystemConfig):
    d = np.asarray(d, dtype=float)
    h1 = cfg.beta0 / (cfg.H**2 + d**2)
    h2 = cfg.beta0 / (cfg.H**2 + (cfg.D - d) ** 2)
    return h1, h2


def _normalized_gains(d, cfg: SystemConfig):
    h1, h2 = _gains(d, cfg)
    return h1 / cfg.noise_power, h2 / cfg.noise_power


def channel_gains(d: float, cfg: SystemConfig) -> ChannelState:
    """Free-space power gains from each UE to a UAV hovering at horizontal offset ``d``."""
    if not 0.0 <= d <= cfg.D:
        raise DomainError(f"UAV position d={d} outside [0, {cfg.D}]")
    h1, h2 = _gains(d, cfg)
    bn0 = cfg.noise_power
    return ChannelState(float(h1), float(h2), float(h1 / bn0), float(h2 / bn0))


def remote_windows(scheme: Scheme, t, cfg: SystemConfig):
    """Time left for remote computing of each UE's offloaded bits.

    Under TDMA UE 1 finishes uploading after ``delta * t`` and the UAV can start
    on its bits while UE 2 is still transmitting.
    """
    scheme = as_scheme(scheme)
    t = np.asarray(t, dtype=float)
    first = cfg.T_max - (cfg.delta * t if scheme is Scheme.TDMA else t)
    return first, cfg.T_max - t


def _frequencies(scheme: Scheme, rho1, rho2, t, cfg: SystemConfig, ues: UePair):
    scheme = as_scheme(scheme)
    w1, w2 = remote_windows(scheme, t, cfg)
    out = []
    for rho, ue, w in ((rho1, ues[0], w1), (rho2, ues[1], w2)):
        rho = np.asarray(rho, dtype=float)
        f_loc = (1.0 - rho) * ue.cycles / cfg.T_max
        load = rho * ue.cycles
        with np.errstate(divide="ignore", invalid="ignore"):
            f_rem = np.where(load > 0, load / np.where(w > 0, w, 0.0), 0.0)
        f_rem = np.where((load > 0) & (w <= 0), np.inf, f_rem)
        out.append((f_loc, f_rem))
    return out


def _check_windows(scheme: Scheme, rho1, rho2, t, cfg: SystemConfig) -> None:
    w1, w2 = remote_windows(scheme, t, cfg)
    for k, (rho, w) in enumerate(((rho1, w1), (rho2, w2)), start=1):
        if rho > 0 and w <= 0:
            raise InfeasibleTimeError(
                f"UE {k} offloads rho={rho} but has no remote-computing time left (t={t})",
                constraint="time_window",
            )


def cpu_frequencies(scheme, rho1: float, rho2: float, t: float, cfg: SystemConfig, ues: UePair):
    """Per-UE ``(f_loc, f_rem)`` pairs in Hz that finish exactly at the deadline."""
    scheme = as_scheme(scheme)
    _check_windows(scheme, rho1, rho2, t, cfg)
    return tuple((float(a), float(b)) for a, b in _frequencies(scheme, rho1, rho2, t, cfg, ues))


def _computation(scheme: Scheme, rho1, rho2, t, cfg: SystemConfig, ues: UePair):
    scheme = as_scheme(scheme)
    windows = remote_windows(scheme, t, cfg)
    out = []
    for (f_loc, f_rem), ue, w in zip(_frequencies(scheme, rho1, rho2, t, cfg, ues), ues, windows):
        e_loc = ue.kappa * cfg.T_max * f_loc**3
        with np.errstate(invalid="ignore"):
            e_rem = np.where(f_rem > 0, cfg.kappa_U * w * f_rem**3, 0.0)
        out.append((e_loc, e_rem))
    return out


def computation_energies(scheme, rho1: float, rho2: float, t: float, cfg: SystemConfig, ues: UePair):
    """Per-UE ``(E_loc, E_rem)`` in joules for cubic-in-frequency CPUs."""
    scheme = as_scheme(scheme)
    _check_windows(scheme, rho1, rho2, t, cfg)
    return tuple((float(a), float(b)) for a, b in _computation(scheme, rho1, rho2, t, cfg, ues))


def inverse_q(eps):
    """Inverse Gaussian tail function: ``x`` with ``Q(x) = eps``."""
    arr = np.asarray(eps, dtype=float)
    if np.any(~((arr > 0) & (arr < 1))):
        raise DomainError(f"inverse_q needs eps in (0, 1), got {eps}")
    x = -ndtri(arr)
    return float(x) if x.ndim == 0 else x


def _threshold(regime: Regime, bits, n, eps, dispersion: float = 1.0, zero_override: bool = True):
    """Array kernel of :func:`snr_threshold`; returns ``inf`` instead of raising."""
    bits = np.asarray(bits, dtype=float)
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        npos = np.where(n > 0, n, np.nan)
        if regime is Regime.INFINITE:
            expo = LN2 * bits / npos
        else:
            eps = np.asarray(eps, dtype=float)
            expo = LN2 * bits / (npos * (1.0 - eps)) + math.sqrt(dispersion) * (-ndtri(eps)) / np.sqrt(npos)
        ups = np.expm1(expo)
    ups = np.where(np.isnan(ups), np.inf, ups)
    if zero_override:
        ups = np.where(bits > 0, ups, 0.0)
    return ups


def snr_threshold(regime, bits, n, eps=None, *, dispersion: float = 1.0, zero_override: bool = True):
    """Minimum SINR/SNR that carries ``bits`` over ``n`` channel uses.

    ``n`` is the blocklength ``B*t`` (for the infinite regime the same product
    enters the Shannon rate).  With ``zero_override`` a transmission carrying no
    bits needs no SNR, even though the literal finite-blocklength expression is
    positive at zero load.
    """
    regime = as_regime(regime)
    b = np.asarray(bits, dtype=float)
    nn = np.asarray(n, dtype=float)
    if np.any(b < 0):
        raise DomainError("offloaded bits must be >= 0")
    mask = (b > 0) | (not zero_override)
    if np.any(np.broadcast_to(mask, np.broadcast(b, nn).shape) & (np.broadcast_to(nn, np.broadcast(b, nn).shape) <= 0)):
        raise DomainError(f"blocklength must be > 0, got {n}")
    if regime is Regime.FINITE:
        if eps is None:
            raise DomainError("finite regime needs a decoding error probability")
        e = np.asarray(eps, dtype=float)
        if np.any(~((e > 0) & (e < 0.5))):
            raise DomainError(f"eps must lie in (0, 0.5), got {eps}")
    out = _threshold(regime, b, nn, eps, dispersion, zero_override)
    return float(out) if out.ndim == 0 else out
