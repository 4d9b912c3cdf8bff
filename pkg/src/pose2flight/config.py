"""Flat key-value configuration.

The file format is one ``key = value`` pair per line with ``#`` comments.
The POSE2FLIGHT_CONFIG environment variable names the default file. All
keys are optional; unset keys keep their defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from typing import Optional

ENV_VAR = "POSE2FLIGHT_CONFIG"


@dataclass(frozen=True)
class Config:
    view_gamma: float = 0.5
    gestures_n_frames: int = 3
    gestures_cooldown_ms: int = 625
    gestures_beta: float = 0.2
    distance_model_path: Optional[str] = None
    pid_yaw_kp: float = 0.30
    pid_yaw_ki: float = 0.01
    pid_yaw_kd: float = 0.08
    pid_vertical_kp: float = 0.35
    pid_vertical_ki: float = 0.01
    pid_vertical_kd: float = 0.10
    pid_longitudinal_kp: float = 1.0
    pid_longitudinal_ki: float = 0.05
    pid_longitudinal_kd: float = 0.30
    pid_altitude_kp: float = 2.5
    pid_altitude_ki: float = 0.02
    pid_altitude_kd: float = 0.6
    pid_target_distance_cm: float = 150.0
    sim_port: int = 8889
    sim_telemetry_port: int = 8890
    bus_queue_cap: int = 64
    bridge_port: int = 8765
    http_port: int = 8080
    control_tick_ms: int = 50
    source_fps: float = 30.0


# dotted config keys to Config attributes
KEYMAP = {
    "view.gamma": "view_gamma",
    "gestures.n_frames": "gestures_n_frames",
    "gestures.cooldown_ms": "gestures_cooldown_ms",
    "gestures.beta": "gestures_beta",
    "distance.model_path": "distance_model_path",
    "pid.yaw.kp": "pid_yaw_kp",
    "pid.yaw.ki": "pid_yaw_ki",
    "pid.yaw.kd": "pid_yaw_kd",
    "pid.vertical.kp": "pid_vertical_kp",
    "pid.vertical.ki": "pid_vertical_ki",
    "pid.vertical.kd": "pid_vertical_kd",
    "pid.longitudinal.kp": "pid_longitudinal_kp",
    "pid.longitudinal.ki": "pid_longitudinal_ki",
    "pid.longitudinal.kd": "pid_longitudinal_kd",
    "pid.altitude.kp": "pid_altitude_kp",
    "pid.altitude.ki": "pid_altitude_ki",
    "pid.altitude.kd": "pid_altitude_kd",
    "pid.target_distance_cm": "pid_target_distance_cm",
    "sim.port": "sim_port",
    "sim.telemetry_port": "sim_telemetry_port",
    "bus.queue_cap": "bus_queue_cap",
    "bridge.port": "bridge_port",
    "http.port": "http_port",
    "control.tick_ms": "control_tick_ms",
    "source.fps": "source_fps",
}


def _coerce(attr: str, raw: str, cfg_fields: dict):
    target = cfg_fields[attr].type
    raw = raw.strip()
    if raw.lower() in ("none", "null", ""):
        return None
    if target in ("int", int):
        return int(raw)
    if target in ("float", float):
        return float(raw)
    return raw


def parse_config_text(text: str, base: Optional[Config] = None) -> Config:
    cfg = base or Config()
    cfg_fields = {f.name: f for f in fields(Config)}
    overrides = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"config line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if key not in KEYMAP:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        attr = KEYMAP[key]
        try:
            overrides[attr] = _coerce(attr, value, cfg_fields)
        except ValueError as exc:
            raise ValueError(f"config line {lineno}: bad value for {key}: {exc}") from None
    return replace(cfg, **overrides)


def load_config(path: Optional[str] = None) -> Config:
    """Load from an explicit path, the env-var path, or defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return Config()
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())
