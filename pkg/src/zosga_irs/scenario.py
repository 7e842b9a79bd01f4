"""Scenario files: flat ``key = value`` text with optional dB units.

Example::

    # one IRS next to the users
    antennas = 4
    users = 4
    ap.position = 0, 0
    irs.1.nh = 4
    irs.1.nv = 4
    irs.1.position = 50, 2
    user.position = 50, -2
    rician.beta_ai = 10 dB
    power_dbm = 5
    noise_dbm = -80

Numbers may carry a ``dB`` suffix (power ratio, converted with
``10**(x/10)``) or a ``dBm`` suffix (converted to watts). Lists are comma
separated. Unknown keys are rejected so typos surface early.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .channel import ADJUSTABLE, AMPLITUDE_MODES, IrsPanel, NetworkConfig
from .errors import ConfigError, ParameterError
from .zosga import ScheduleParams

METHODS = ("zosga_aa", "zosga_ua", "random_irs", "no_irs")

_GLOBAL_KEYS = {
    "antennas", "users", "ap.position", "user.position", "d_au",
    "rician.beta_iu", "rician.beta_ai", "rician.beta_au",
    "corr.r_r", "corr.r_d", "corr.r_rk",
    "pathloss.c0_db", "pathloss.c0", "pathloss.ai.alpha", "pathloss.iu.alpha", "pathloss.au.alpha",
    "power_dbm", "power", "noise_dbm", "noise", "weights", "amplitude_mode",
    "iterations", "mu", "wmmse.iters", "wmmse.warm_start", "phase_wrap", "final_window", "thin",
    "schedule.mode", "schedule.eta_phase", "schedule.eta_amplitude", "schedule.gamma",
    "schedule.t_cut", "schedule.delta_phi", "schedule.rho", "schedule.b_f", "schedule.l_h0",
    "schedule.l_h1", "schedule.delta_k", "schedule.horizon",
}
_IRS_FIELDS = {"nh", "nv", "position", "d_ai", "d_iu", "optimize"}
_IRS_KEY = re.compile(r"^irs\.(\d+)\.(\w+)$")
_USER_KEY = re.compile(r"^user\.(\d+)\.position$")
_WMMSE_METHOD_KEY = re.compile(r"^wmmse\.iters\.(\w+)$")

DEFAULTS = {
    "antennas": "4",
    "users": "4",
    "ap.position": "0, 0",
    "rician.beta_iu": "10 dB",
    "rician.beta_ai": "10 dB",
    "rician.beta_au": "0",
    "corr.r_r": "0",
    "corr.r_d": "0",
    "corr.r_rk": "0",
    "pathloss.c0_db": "-30",
    "pathloss.ai.alpha": "2.2",
    "pathloss.iu.alpha": "2.8",
    "pathloss.au.alpha": "3.5",
    "power_dbm": "5",
    "noise_dbm": "-80",
    "amplitude_mode": ADJUSTABLE,
    "iterations": "300",
    "mu": "1e-6",
    "wmmse.iters": "20",
    "wmmse.warm_start": "false",
    "phase_wrap": "false",
    "final_window": "50",
    "thin": "100",
    "schedule.mode": "geometric_decay",
    "schedule.eta_phase": "0.4",
    "schedule.eta_amplitude": "0.01",
    "schedule.gamma": "0.9972",
    "schedule.t_cut": "1000",
}


# ---------------------------------------------------------------------------
# value parsing
# ---------------------------------------------------------------------------

def parse_number(text: str) -> float:
    """Parse ``'5'``, ``'10 dB'``, ``'-80 dBm'`` or ``'inf'`` to a linear float."""
    s = text.strip()
    m = re.fullmatch(r"([-+0-9.eE]+|[-+]?inf)\s*(dBm|dB)?", s, flags=re.IGNORECASE)
    if not m:
        raise ConfigError(f"cannot parse number {text!r}")
    try:
        value = float(m.group(1))
    except ValueError as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc
    unit = (m.group(2) or "").lower()
    if unit == "db":
        return 10 ** (value / 10)
    if unit == "dbm":
        return 10 ** (value / 10) * 1e-3
    return value


def parse_list(text: str) -> list[float]:
    return [parse_number(part) for part in text.split(",") if part.strip()]


def parse_bool(text: str) -> bool:
    s = text.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def parse_int(text: str) -> int:
    value = parse_number(text)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(value)


def _db_value(text: str, unit: str) -> float:
    """Value given in dB (or dBm) without suffix."""
    s = text.strip()
    if re.search(r"[a-zA-Z]$", s) and not s.lower().endswith("inf"):
        return parse_number(s)
    return parse_number(f"{s} {unit}")


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """A network plus the knobs of one experiment."""

    network: NetworkConfig
    entries: Mapping[str, str]
    iterations: int = 300
    mu: float = 1e-6
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    wmmse_iters: int = 20
    wmmse_iters_by_method: Mapping[str, int] = field(default_factory=dict)
    warm_start: bool = False
    phase_wrap: bool = False
    final_window: int = 50
    thin: int = 100

    @property
    def hash(self) -> str:
        blob = json.dumps(dict(sorted(self.entries.items())), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def snapshot(self) -> dict[str, str]:
        return dict(sorted(self.entries.items()))

    def inner_iterations(self, method: str) -> int:
        return self.wmmse_iters_by_method.get(method, self.wmmse_iters)

    def with_overrides(self, overrides: Mapping[str, str]) -> "Scenario":
        merged = dict(self.entries)
        merged.update({k: str(v) for k, v in overrides.items()})
        return scenario_from_entries(merged)


def parse_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    return parse_scenario(text)


def builtin_scenario(name: str) -> Scenario:
    """Load one of the scenario files shipped with the package."""
    ref = resources.files("zosga_irs") / "scenarios" / f"{name}.cfg"
    if not ref.is_file():
        raise ConfigError(f"no built-in scenario named {name!r}")
    return parse_scenario(ref.read_text())


def parse_scenario(text: str) -> Scenario:
    return scenario_from_entries(parse_text(text))


def _position(text: str) -> np.ndarray:
    coords = parse_list(text)
    if not 1 <= len(coords) <= 3:
        raise ConfigError(f"position needs 1-3 coordinates, got {text!r}")
    return np.pad(np.asarray(coords, dtype=float), (0, 3 - len(coords)))


def _check_keys(entries: Mapping[str, str]) -> None:
    for key in entries:
        if key in _GLOBAL_KEYS or _USER_KEY.match(key) or _WMMSE_METHOD_KEY.match(key):
            continue
        m = _IRS_KEY.match(key)
        if m and m.group(2) in _IRS_FIELDS:
            continue
        raise ConfigError(f"unknown scenario key {key!r}")


def _per_user(values: list[float], K: int, what: str) -> tuple[float, ...]:
    if len(values) == 1:
        return (values[0],) * K
    if len(values) != K:
        raise ConfigError(f"{what}: expected 1 or {K} values, got {len(values)}")
    return tuple(values)


def scenario_from_entries(raw: Mapping[str, str]) -> Scenario:
    """Build a :class:`Scenario` from raw key/value strings (defaults filled in)."""
    _check_keys(raw)
    entries = dict(DEFAULTS)
    entries.update(raw)
    get = entries.get
    try:
        M = parse_int(entries["antennas"])
        K = parse_int(entries["users"])
        if M < 1 or K < 1:
            raise ConfigError("antennas and users must be >= 1")

        ap = _position(entries["ap.position"])
        users = []
        for k in range(1, K + 1):
            text = get(f"user.{k}.position", get("user.position"))
            users.append(None if text is None else _position(text))

        def distances_from(origin, explicit_key, what):
            if explicit_key in entries:
                return _per_user(parse_list(entries[explicit_key]), K, explicit_key)
            if origin is None or any(u is None for u in users):
                raise ConfigError(f"{what}: give {explicit_key} or positions for all users")
            return tuple(float(np.linalg.norm(u - origin)) for u in users)

        irs_ids = sorted({int(m.group(1)) for key in entries if (m := _IRS_KEY.match(key))})
        if irs_ids and irs_ids != list(range(1, len(irs_ids) + 1)):
            raise ConfigError(f"IRS numbering must be 1..n, got {irs_ids}")
        panels = []
        for i in irs_ids:
            pre = f"irs.{i}."
            if pre + "nh" not in entries or pre + "nv" not in entries:
                raise ConfigError(f"IRS {i} needs nh and nv")
            pos = _position(entries[pre + "position"]) if pre + "position" in entries else None
            if pre + "d_ai" in entries:
                d_ai = parse_number(entries[pre + "d_ai"])
            elif pos is not None:
                d_ai = float(np.linalg.norm(pos - ap))
            else:
                raise ConfigError(f"IRS {i}: give d_ai or a position")
            panels.append(IrsPanel(
                nh=parse_int(entries[pre + "nh"]),
                nv=parse_int(entries[pre + "nv"]),
                distance_ai=d_ai,
                distance_iu=distances_from(pos, pre + "d_iu", f"IRS {i}"),
                optimize=parse_bool(get(pre + "optimize", "true")),
            ))

        c0 = parse_number(entries["pathloss.c0"]) if "pathloss.c0" in entries \
            else _db_value(entries["pathloss.c0_db"], "dB")
        power = parse_number(entries["power"]) if "power" in entries \
            else _db_value(entries["power_dbm"], "dBm")
        if "noise" in entries:
            noise = parse_list(entries["noise"])
        else:
            noise = [_db_value(v, "dBm") for v in entries["noise_dbm"].split(",")]
        weights = parse_list(get("weights", "1"))
        mode = entries["amplitude_mode"].strip()
        if mode not in AMPLITUDE_MODES:
            raise ConfigError(f"amplitude_mode must be one of {AMPLITUDE_MODES}")

        network = NetworkConfig(
            num_antennas=M,
            num_users=K,
            irs=tuple(panels),
            distance_au=distances_from(ap, "d_au", "direct link"),
            beta_iu=parse_number(entries["rician.beta_iu"]),
            beta_ai=parse_number(entries["rician.beta_ai"]),
            beta_au=parse_number(entries["rician.beta_au"]),
            r_rk=parse_number(entries["corr.r_rk"]),
            r_r=parse_number(entries["corr.r_r"]),
            r_d=parse_number(entries["corr.r_d"]),
            c0=c0,
            alpha_ai=parse_number(entries["pathloss.ai.alpha"]),
            alpha_iu=parse_number(entries["pathloss.iu.alpha"]),
            alpha_au=parse_number(entries["pathloss.au.alpha"]),
            power=power,
            noise=_per_user(noise, K, "noise"),
            weights=_per_user(weights, K, "weights"),
            amplitude_mode=mode,
        )

        horizon = get("schedule.horizon")
        iterations = parse_int(entries["iterations"])
        schedule = ScheduleParams(
            mode=entries["schedule.mode"].strip(),
            delta_phi=parse_number(get("schedule.delta_phi", "1")),
            rho=parse_number(get("schedule.rho", "1")),
            b_f=parse_number(get("schedule.b_f", "1")),
            l_h0=parse_number(get("schedule.l_h0", "1")),
            l_h1=parse_number(get("schedule.l_h1", "1")),
            delta_k=parse_number(get("schedule.delta_k", "1")),
            horizon=parse_int(horizon) if horizon is not None else iterations - 1,
            eta_phase=parse_number(entries["schedule.eta_phase"]),
            eta_amplitude=parse_number(entries["schedule.eta_amplitude"]),
            gamma=parse_number(entries["schedule.gamma"]),
            t_cut=parse_int(entries["schedule.t_cut"]),
        )
        by_method = {}
        for key, value in entries.items():
            m = _WMMSE_METHOD_KEY.match(key)
            if m:
                by_method[m.group(1)] = parse_int(value)
        scenario = Scenario(
            network=network,
            entries=entries,
            iterations=iterations,
            mu=parse_number(entries["mu"]),
            schedule=schedule,
            wmmse_iters=parse_int(entries["wmmse.iters"]),
            wmmse_iters_by_method=by_method,
            warm_start=parse_bool(entries["wmmse.warm_start"]),
            phase_wrap=parse_bool(entries["phase_wrap"]),
            final_window=parse_int(entries["final_window"]),
            thin=parse_int(entries["thin"]),
        )
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    if scenario.iterations < 1 or scenario.wmmse_iters < 1 or scenario.final_window < 1 or scenario.thin < 1:
        raise ConfigError("iterations, wmmse.iters, final_window and thin must be >= 1")
    if not scenario.mu > 0 or not math.isfinite(scenario.mu):
        raise ConfigError("mu must be a positive finite number")
    return scenario
