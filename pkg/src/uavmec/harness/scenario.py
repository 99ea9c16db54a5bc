"""Scenario files: ``[section]`` headers and ``key = number [unit]`` lines.

Sections are ``[system]``, ``[ue1]``, ``[ue2]``, ``[ues]`` (applies to both
UEs before the per-UE sections) and ``[solver]``.  Every value is converted
to SI on input.  Keys missing from a file keep the values of the bundled
default scenario.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from ..config import SystemConfig, UeProfile, UePair
from ..errors import ScenarioError

DEFAULT_SCENARIO = "default.scenario"


def _db(x: float) -> float:
    return 10.0 ** (x / 10.0)


# unit -> converter to SI, grouped by physical quantity
_UNITS = {
    "length": {"": 1.0, "m": 1.0, "km": 1e3},
    "gain": {"": 1.0, "dB": _db},
    "psd": {"": 1.0, "W/Hz": 1.0, "dBmHz": lambda x: _db(x) * 1e-3, "dBm/Hz": lambda x: _db(x) * 1e-3},
    "freq": {"": 1.0, "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9},
    "time": {"": 1.0, "s": 1.0, "ms": 1e-3, "us": 1e-6},
    "size": {"": 1.0, "bit": 1.0, "bits": 1.0, "kbit": 1e3},
    "power": {"": 1.0, "W": 1.0, "mW": 1e-3, "dBm": lambda x: _db(x) * 1e-3},
    "cycles": {"": 1.0, "cycles/bit": 1.0},
    "unitless": {"": 1.0},
}

_SYSTEM_KEYS = {
    "D": "length", "H": "length", "beta0": "gain", "N0": "psd", "B": "freq", "T_max": "time",
    "f_U_max": "freq", "kappa_U": "unitless", "eta": "unitless", "delta": "unitless",
}
_SOLVER_KEYS = {"sigma_conv": "unitless", "t_guard": "unitless", "dispersion": "unitless"}
_UE_KEYS = {"L": "size", "c": "cycles", "kappa": "unitless", "f_max": "freq", "P_max": "power", "eps": "unitless"}
_SECTIONS = {"system": _SYSTEM_KEYS, "solver": _SOLVER_KEYS, "ue1": _UE_KEYS, "ue2": _UE_KEYS, "ues": _UE_KEYS}

_LINE = re.compile(r"^(?P<key>[A-Za-z_][A-Za-z0-9_]*)\s*=\s*(?P<value>\S+)(?:\s+(?P<unit>\S+))?\s*$")
_HEADER = re.compile(r"^\[(?P<name>[^\]]+)\]$")


@dataclass(frozen=True)
class Scenario:
    cfg: SystemConfig
    ues: UePair
    source: str = "<default>"

    def as_dict(self) -> dict:
        out = {"system": {f.name: getattr(self.cfg, f.name) for f in fields(self.cfg)}}
        for k, ue in enumerate(self.ues, start=1):
            out[f"ue{k}"] = {f.name: getattr(ue, f.name) for f in fields(ue)}
        return out


def _convert(raw: str, unit: str, kind: str, lineno: int) -> float:
    try:
        x = float(raw)
    except ValueError:
        raise ScenarioError(f"not a number: {raw!r}", lineno) from None
    table = _UNITS[kind]
    if unit not in table:
        allowed = ", ".join(repr(u) for u in table if u) or "none"
        raise ScenarioError(f"unit {unit!r} not allowed here (allowed: {allowed})", lineno)
    conv = table[unit]
    return conv(x) if callable(conv) else x * conv


def parse_text(text: str) -> dict[str, dict[str, float]]:
    """Raw SI values per section; raises :class:`ScenarioError` with a line number."""
    values: dict[str, dict[str, float]] = {name: {} for name in _SECTIONS}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = re.split(r"[#;]", line, maxsplit=1)[0].strip()
        if not line:
            continue
        head = _HEADER.match(line)
        if head:
            section = head.group("name").strip().lower()
            if section not in _SECTIONS:
                raise ScenarioError(f"unknown section [{section}]", lineno)
            continue
        m = _LINE.match(line)
        if not m:
            raise ScenarioError(f"expected 'key = value [unit]', got {line!r}", lineno)
        if section is None:
            raise ScenarioError("key outside of any section", lineno)
        key = m.group("key")
        keys = _SECTIONS[section]
        if key not in keys:
            raise ScenarioError(f"unknown key {key!r} in [{section}]", lineno)
        if key in values[section]:
            raise ScenarioError(f"duplicate key {key!r} in [{section}]", lineno)
        values[section][key] = _convert(m.group("value"), m.group("unit") or "", keys[key], lineno)
    return values


def _default_text() -> str:
    return resources.files("uavmec.harness").joinpath(DEFAULT_SCENARIO).read_text()


def _build(values: dict[str, dict[str, float]], base: dict[str, dict[str, float]] | None, source: str) -> Scenario:
    merged = {name: dict(base.get(name, {})) if base else {} for name in _SECTIONS}
    for name, kv in values.items():
        merged[name].update(kv)
    # a shared [ues] section overrides the defaults but not the per-UE sections of the same file
    ue_kv = []
    for k in ("ue1", "ue2"):
        kv = dict(merged[k])
        kv.update(values.get("ues", {}))
        kv.update(values.get(k, {}))
        ue_kv.append(kv)
    cfg = SystemConfig(**merged["system"], **merged["solver"])
    return Scenario(cfg, (UeProfile(**ue_kv[0]), UeProfile(**ue_kv[1])), source)


def default_scenario() -> Scenario:
    return _build(parse_text(_default_text()), None, "<default>")


def load_scenario(path: str | Path | None = None) -> Scenario:
    """Full scenario from ``path`` layered over the bundled defaults."""
    base = parse_text(_default_text())
    if path is None:
        return _build(base, None, "<default>")
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return _build(parse_text(text), base, str(path))


def parse_scenario(path: str | Path) -> tuple[SystemConfig, UePair]:
    """``(SystemConfig, (ue1, ue2))`` in SI units from a scenario file."""
    sc = load_scenario(path)
    return sc.cfg, sc.ues
