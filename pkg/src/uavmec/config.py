"""System constants, per-UE profiles and decision variables.

Everything is stored in SI units (m, W, W/Hz, Hz, s, bits).  Conversions from
dB/dBm happen once, in :mod:`uavmec.harness.scenario`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields, replace

from .errors import ValidationError


class Scheme(str, enum.Enum):
    NOMA = "noma"
    FDMA = "fdma"
    TDMA = "tdma"


class Regime(str, enum.Enum):
    INFINITE = "inf"
    FINITE = "fin"


class EvalMode(str, enum.Enum):
    """How NOMA finite-blocklength energy is evaluated when the SIC margin is lost.

    ``STRICT`` raises :class:`~uavmec.errors.SicInfeasibleError`;
    ``SUCCESS_ONLY`` falls back to the SIC-success powers and flags the result.
    """

    STRICT = "strict"
    SUCCESS_ONLY = "success-only"


def _check(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise ValidationError(name, msg)


@dataclass(frozen=True)
class SystemConfig:
    D: float = 100.0
    H: float = 50.0
    beta0: float = 1e-6
    N0: float = 10 ** (-169 / 10) * 1e-3
    B: float = 3e6
    T_max: float = 1e-3
    f_U_max: float = 9e9
    kappa_U: float = 1e-28
    eta: float = 0.5
    delta: float = 0.5
    sigma_conv: float = 1e-3
    t_guard: float = 1e-3
    dispersion: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            _check(isinstance(v, (int, float)) and math.isfinite(v), f.name, "must be a finite number")
        for name in ("D", "H", "beta0", "N0", "B", "T_max", "f_U_max"):
            _check(getattr(self, name) > 0, name, "must be > 0")
        _check(self.kappa_U >= 0, "kappa_U", "must be >= 0")
        _check(0 <= self.eta <= 1, "eta", "must lie in [0, 1]")
        _check(0 <= self.delta <= 1, "delta", "must lie in [0, 1]")
        _check(0 < self.sigma_conv < 1, "sigma_conv", "must lie in (0, 1)")
        _check(0 < self.t_guard < 1, "t_guard", "must lie in (0, 1)")
        _check(self.dispersion > 0, "dispersion", "must be > 0")

    @property
    def noise_power(self) -> float:
        """Total receiver noise power ``B * N0`` in watts."""
        return self.B * self.N0

    @property
    def t_cap(self) -> float:
        """Largest admissible offloading window once anything is offloaded."""
        return (1.0 - self.t_guard) * self.T_max

    def with_(self, **changes) -> SystemConfig:
        return replace(self, **changes)


@dataclass(frozen=True)
class UeProfile:
    L: float = 1200.0
    c: float = 1000.0
    kappa: float = 1e-28
    f_max: float = 1e9
    P_max: float = 0.1
    eps: float = 1e-5

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            _check(isinstance(v, (int, float)) and math.isfinite(v), f.name, "must be a finite number")
        _check(self.L >= 0, "L", "must be >= 0")
        _check(self.c > 0, "c", "must be > 0")
        _check(self.kappa >= 0, "kappa", "must be >= 0")
        _check(self.f_max > 0, "f_max", "must be > 0")
        _check(self.P_max > 0, "P_max", "must be > 0")
        _check(0 < self.eps < 0.5, "eps", "must lie in (0, 0.5)")

    @property
    def cycles(self) -> float:
        """Total CPU cycles of the task, ``c * L``."""
        return self.c * self.L

    def with_(self, **changes) -> UeProfile:
        return replace(self, **changes)


UePair = tuple[UeProfile, UeProfile]


def default_ues() -> UePair:
    return UeProfile(), UeProfile()


@dataclass(frozen=True)
class Decision:
    """Offloaded portions, offloading window (s) and UAV horizontal position (m)."""

    rho1: float
    rho2: float
    t: float
    d: float

    @property
    def rho(self) -> tuple[float, float]:
        return self.rho1, self.rho2

    def blocklength(self, cfg: SystemConfig) -> float:
        return cfg.B * self.t

    def offloads(self) -> bool:
        return self.rho1 > 0 or self.rho2 > 0

    def with_(self, **changes) -> Decision:
        return replace(self, **changes)


def default_decision(cfg: SystemConfig) -> Decision:
    """Midpoint start: half of each task offloaded, half the deadline, UAV at D/4."""
    return Decision(0.5, 0.5, 0.5 * cfg.T_max, 0.25 * cfg.D)


def rho_floor(cfg: SystemConfig, ue: UeProfile) -> float:
    """Smallest offloaded portion that keeps local computing under ``f_max``."""
    if ue.L == 0:
        return 0.0
    return max(0.0, 1.0 - ue.f_max * cfg.T_max / ue.cycles)


def as_scheme(value) -> Scheme:
    return value if isinstance(value, Scheme) else Scheme(str(value).lower())


def as_regime(value) -> Regime:
    if isinstance(value, Regime):
        return value
    v = str(value).lower()
    aliases = {"infinite": "inf", "finite": "fin", "i": "inf", "f": "fin"}
    return Regime(aliases.get(v, v))


def as_eval_mode(value) -> EvalMode:
    if isinstance(value, EvalMode):
        return value
    return EvalMode(str(value).lower().replace("_", "-"))
