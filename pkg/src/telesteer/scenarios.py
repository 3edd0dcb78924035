"""Scenario configuration: everything one closed-loop run needs.

Scenarios live in versioned YAML files with explicit units in the key
names (meters, seconds, degrees at the file boundary; SI and radians in
memory).  A canonical JSON form with sorted keys and full effective
defaults gives every scenario a stable content hash, which run traces
embed so a trace can always be matched to the exact configuration that
produced it.
"""

from __future__ import annotations

import hashlib
import importlib.resources
import json
import math
from dataclasses import dataclass

import yaml

from .field import FieldSpec, RectObstacle, bound_rectangle
from .mpc import MpcConfig
from .teleop import DesiredPath, TeleopGains
from .vehicle import VehicleParams, VehiclePose

__all__ = [
    "Scenario",
    "load_scenario",
    "load_scenario_file",
    "builtin_scenario",
    "builtin_names",
]

SCHEMA_VERSION = 1
_DEG = math.pi / 180.0


@dataclass(frozen=True)
class Scenario:
    name: str
    vehicle: VehicleParams
    obstacles: tuple[RectObstacle, ...]
    order: int
    alpha: float
    slope_exp: float
    path_points: tuple[tuple[float, float], ...]
    speed: float
    gains: TeleopGains
    mpc: MpcConfig
    start: VehiclePose
    duration: float

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")
        if self.speed < 0.0:
            raise ValueError("speed must be nonnegative")
        DesiredPath(self.path_points)  # validates waypoints

    def field_spec(self) -> FieldSpec:
        bounds = tuple(bound_rectangle(o, self.order) for o in self.obstacles)
        return FieldSpec(bounds=bounds, alpha=self.alpha, slope_exp=self.slope_exp)

    def desired_path(self) -> DesiredPath:
        return DesiredPath(self.path_points)

    @property
    def n_ticks(self) -> int:
        return int(round(self.duration / self.mpc.t_s))

    # -- canonical form ------------------------------------------------

    def to_canonical_dict(self) -> dict:
        m = self.mpc
        return {
            "version": SCHEMA_VERSION,
            "name": self.name,
            "duration": self.duration,
            "speed": self.speed,
            "start": {"x": self.start.x, "y": self.start.y, "heading": self.start.heading},
            "vehicle": {
                "l_f": self.vehicle.l_f,
                "l_r": self.vehicle.l_r,
                "l_f_bumper": self.vehicle.l_f_bumper,
                "width": self.vehicle.width,
            },
            "gains": {
                "gamma1": self.gains.gamma1,
                "gamma2": self.gains.gamma2,
                "gamma3": self.gains.gamma3,
            },
            "field": {"order": self.order, "alpha": self.alpha, "slope_exp": self.slope_exp},
            "path": [list(p) for p in self.path_points],
            "obstacles": [
                {
                    "x": o.x,
                    "y": o.y,
                    "heading": o.heading,
                    "length": o.length,
                    "width": o.width,
                }
                for o in self.obstacles
            ],
            "mpc": {
                "horizon": m.horizon,
                "t_d": m.t_d,
                "t_s": m.t_s,
                "w_ref": m.w_ref,
                "w_field": m.w_field,
                "w_rate": m.w_rate,
                "delta_min": m.delta_min,
                "delta_max": m.delta_max,
                "rate_min": m.rate_min,
                "rate_max": m.rate_max,
                "alpha_cap": m.alpha_cap,
                "sqp_max_iter": m.sqp_max_iter,
                "sqp_tol": m.sqp_tol,
                "slack_lin": m.slack_lin,
                "slack_quad": m.slack_quad,
            },
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_canonical_dict(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ValueError(f"scenario {where} is missing '{key}'")
    return mapping[key]


def _mpc_from(section: dict | None) -> MpcConfig:
    base = MpcConfig()
    if not section:
        return base
    known = {
        "horizon",
        "prediction_dt_s",
        "control_dt_s",
        "w_ref",
        "w_field",
        "w_rate",
        "delta_limit_deg",
        "rate_limit_deg",
        "alpha_cap",
        "sqp_max_iter",
        "sqp_tol",
        "slack_lin",
        "slack_quad",
    }
    unknown = set(section) - known
    if unknown:
        raise ValueError(f"unknown mpc keys: {sorted(unknown)}")
    kw: dict = {}
    if "horizon" in section:
        kw["horizon"] = int(section["horizon"])
    if "prediction_dt_s" in section:
        kw["t_d"] = float(section["prediction_dt_s"])
    if "control_dt_s" in section:
        kw["t_s"] = float(section["control_dt_s"])
    for name in ("w_ref", "w_field", "w_rate", "sqp_tol", "slack_lin", "slack_quad"):
        if name in section:
            kw[name] = float(section[name])
    if "delta_limit_deg" in section:
        lim = float(section["delta_limit_deg"]) * _DEG
        kw["delta_min"], kw["delta_max"] = -lim, lim
    if "rate_limit_deg" in section:
        lim = float(section["rate_limit_deg"]) * _DEG
        kw["rate_min"], kw["rate_max"] = -lim, lim
    if "alpha_cap" in section:
        cap = section["alpha_cap"]
        kw["alpha_cap"] = None if cap is None else float(cap)
    if "sqp_max_iter" in section:
        kw["sqp_max_iter"] = int(section["sqp_max_iter"])
    return MpcConfig(
        horizon=kw.get("horizon", base.horizon),
        t_d=kw.get("t_d", base.t_d),
        t_s=kw.get("t_s", base.t_s),
        w_ref=kw.get("w_ref", base.w_ref),
        w_field=kw.get("w_field", base.w_field),
        w_rate=kw.get("w_rate", base.w_rate),
        delta_min=kw.get("delta_min", base.delta_min),
        delta_max=kw.get("delta_max", base.delta_max),
        rate_min=kw.get("rate_min", base.rate_min),
        rate_max=kw.get("rate_max", base.rate_max),
        alpha_cap=kw.get("alpha_cap", base.alpha_cap),
        sqp_max_iter=kw.get("sqp_max_iter", base.sqp_max_iter),
        sqp_tol=kw.get("sqp_tol", base.sqp_tol),
        slack_lin=kw.get("slack_lin", base.slack_lin),
        slack_quad=kw.get("slack_quad", base.slack_quad),
    )


def scenario_from_dict(raw: dict) -> Scenario:
    """Build a scenario from a parsed configuration mapping."""
    if not isinstance(raw, dict):
        raise ValueError("scenario file must contain a mapping")
    version = _require(raw, "version", "file")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported scenario schema version {version!r}")

    veh = _require(raw, "vehicle", "file")
    vehicle = VehicleParams(
        l_f=float(_require(veh, "l_f_m", "vehicle")),
        l_r=float(_require(veh, "l_r_m", "vehicle")),
        l_f_bumper=float(_require(veh, "l_f_bumper_m", "vehicle")),
        width=float(_require(veh, "width_m", "vehicle")),
    )
    gn = _require(raw, "gains", "file")
    gains = TeleopGains(
        gamma1=float(_require(gn, "gamma1", "gains")),
        gamma2=float(_require(gn, "gamma2", "gains")),
        gamma3=float(_require(gn, "gamma3", "gains")),
    )
    fl = _require(raw, "field", "file")
    st = _require(raw, "start", "file")
    start = VehiclePose(
        x=float(_require(st, "x_m", "start")),
        y=float(_require(st, "y_m", "start")),
        heading=float(_require(st, "heading_deg", "start")) * _DEG,
    )
    obstacles = tuple(
        RectObstacle(
            x=float(_require(o, "x_m", "obstacle")),
            y=float(_require(o, "y_m", "obstacle")),
            heading=float(_require(o, "heading_deg", "obstacle")) * _DEG,
            length=float(_require(o, "length_m", "obstacle")),
            width=float(_require(o, "width_m", "obstacle")),
        )
        for o in raw.get("obstacles", [])
    )
    path = tuple(
        (float(p[0]), float(p[1])) for p in _require(raw, "path_m", "file")
    )
    return Scenario(
        name=str(_require(raw, "name", "file")),
        vehicle=vehicle,
        obstacles=obstacles,
        order=int(_require(fl, "order", "field")),
        alpha=float(_require(fl, "alpha", "field")),
        slope_exp=float(_require(fl, "slope_exp", "field")),
        path_points=path,
        speed=float(_require(raw, "speed_mps", "file")),
        gains=gains,
        mpc=_mpc_from(raw.get("mpc")),
        start=start,
        duration=float(_require(raw, "duration_s", "file")),
    )


def load_scenario_file(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_dict(yaml.safe_load(fh))


def builtin_names() -> tuple[str, ...]:
    root = importlib.resources.files("telesteer") / "data"
    names = sorted(
        p.name[: -len(".yaml")] for p in root.iterdir() if p.name.endswith(".yaml")
    )
    return tuple(names)


def builtin_scenario(name: str) -> Scenario:
    res = importlib.resources.files("telesteer") / "data" / f"{name}.yaml"
    if not res.is_file():
        raise ValueError(f"unknown scenario {name!r}; bundled: {', '.join(builtin_names())}")
    return scenario_from_dict(yaml.safe_load(res.read_text(encoding="utf-8")))


def load_scenario(name_or_path: str) -> Scenario:
    """Bundled scenario name, or a path to a scenario YAML file."""
    if name_or_path.endswith((".yaml", ".yml")):
        return load_scenario_file(name_or_path)
    return builtin_scenario(name_or_path)
