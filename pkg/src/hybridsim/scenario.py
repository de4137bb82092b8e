"""Simulated indoor world: floor plan, access points and user equipment."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import config as cfg
from .energy import BatteryModel
from .geometry import LinkGeometry, Point, link_geometry as _link_geometry

REFERENCE_WIFI_APS = 6
REFERENCE_VLC_APS = 4
DEFAULT_SCENARIO = "campus_floor3"


class ApKind(str, Enum):
    VLC = "Vlc"
    WIFI = "WiFi"


@dataclass(frozen=True)
class Room:
    label: str
    x0: float
    y0: float
    x1: float
    y1: float
    external: bool = True

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise cfg.ConfigError(f"room {self.label!r} has non-positive extent")

    def overlaps(self, other: "Room") -> bool:
        return self.x0 < other.x1 and other.x0 < self.x1 and self.y0 < other.y1 and other.y0 < self.y1


@dataclass(frozen=True)
class FloorPlan:
    width: float = 40.0
    depth: float = 30.0
    height: float = 3.0
    rooms: tuple[Room, ...] = ()
    corridors: tuple[tuple[tuple[float, float], ...], ...] = ()

    def __post_init__(self):
        if min(self.width, self.depth, self.height) <= 0:
            raise cfg.ConfigError("floor dimensions must be positive")
        for r in self.rooms:
            if r.x0 < 0 or r.y0 < 0 or r.x1 > self.width or r.y1 > self.depth:
                raise cfg.ConfigError(f"room {r.label!r} extends outside the floor")
        for a in range(len(self.rooms)):
            for b in range(a + 1, len(self.rooms)):
                if self.rooms[a].overlaps(self.rooms[b]):
                    raise cfg.ConfigError(
                        f"rooms {self.rooms[a].label!r} and {self.rooms[b].label!r} overlap")
        for line in self.corridors:
            for p in line:
                self._check_xy(p, "corridor point")

    def _check_xy(self, p, what):
        if not (0 <= p[0] <= self.width and 0 <= p[1] <= self.depth):
            raise cfg.ConfigError(f"{what} {tuple(p)} outside the floor")

    def contains(self, pos) -> bool:
        x, y, z = pos
        return 0 <= x <= self.width and 0 <= y <= self.depth and 0 <= z <= self.height


def default_floor_plan() -> FloorPlan:
    """Six rooms on the outer walls, two in the core between two corridors."""
    rooms = (
        Room("R301", 0.0, 0.0, 13.0, 10.0), Room("R302", 13.5, 0.0, 26.5, 10.0),
        Room("R303", 27.0, 0.0, 40.0, 10.0), Room("R304", 0.0, 20.0, 13.0, 30.0),
        Room("R305", 13.5, 20.0, 26.5, 30.0), Room("R306", 27.0, 20.0, 40.0, 30.0),
        Room("R307", 2.0, 12.0, 19.0, 18.0, external=False),
        Room("R308", 21.0, 12.0, 38.0, 18.0, external=False),
    )
    corridors = (((0.0, 11.0), (40.0, 11.0)), ((0.0, 19.0), (40.0, 19.0)))
    return FloorPlan(40.0, 30.0, 3.0, rooms, corridors)


@dataclass(frozen=True)
class AccessPoint:
    id: str
    kind: ApKind
    position: Point
    p_on: float
    p_data_max: float

    def __post_init__(self):
        if self.p_on <= 0:
            raise cfg.ConfigError(f"AP {self.id}: p_on must be positive")
        if self.p_data_max < 0:
            raise cfg.ConfigError(f"AP {self.id}: p_data_max must be non-negative")


@dataclass(frozen=True)
class UserEquipment:
    id: str
    trajectory: tuple[tuple[float, Point], ...]
    battery: BatteryModel = field(default_factory=BatteryModel)
    demand: float = 10e6  # [bit/s]

    def __post_init__(self):
        if not self.trajectory:
            raise cfg.ConfigError(f"UE {self.id}: empty trajectory")
        times = [t for t, _ in self.trajectory]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise cfg.ConfigError(f"UE {self.id}: waypoint times must be strictly increasing")
        if self.demand < 0:
            raise cfg.ConfigError(f"UE {self.id}: negative demand")


@dataclass(frozen=True)
class Scenario:
    floor_plan: FloorPlan
    aps: tuple[AccessPoint, ...]
    ues: tuple[UserEquipment, ...] = ()
    seed: int = 0
    model: cfg.ModelConfig = field(default_factory=cfg.ModelConfig)

    def __post_init__(self):
        ids = [a.id for a in self.aps] + [u.id for u in self.ues]
        dup = sorted({i for i in ids if ids.count(i) > 1})
        if dup:
            raise cfg.ConfigError(f"duplicate ids: {', '.join(dup)}")
        for ap in self.aps:
            if not self.floor_plan.contains(ap.position):
                raise cfg.ConfigError(f"AP {ap.id} at {ap.position} is outside the floor")
        for ue in self.ues:
            for _, p in ue.trajectory:
                if not self.floor_plan.contains(p):
                    raise cfg.ConfigError(f"UE {ue.id} waypoint {p} is outside the floor")
        if not 0 <= self.seed < 2 ** 64:
            raise cfg.ConfigError("seed must be an unsigned 64-bit integer")

    def aps_of(self, kind: ApKind) -> list[AccessPoint]:
        return [a for a in self.aps if a.kind == kind]

    def check_reference_counts(self):
        nw, nv = len(self.aps_of(ApKind.WIFI)), len(self.aps_of(ApKind.VLC))
        if (nw, nv) != (REFERENCE_WIFI_APS, REFERENCE_VLC_APS):
            raise cfg.ConfigError(f"strict-paper mode expects {REFERENCE_WIFI_APS} Wi-Fi and "
                                  f"{REFERENCE_VLC_APS} VLC APs, found {nw} and {nv}")

    def digest(self) -> str:
        blob = json.dumps(scenario_to_dict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def ue_position_at(ue: UserEquipment, t: float) -> Point:
    """Piecewise-linear position along the waypoint list."""
    times = np.array([w[0] for w in ue.trajectory])
    if not times[0] <= t <= times[-1]:
        raise ValueError(f"t={t} outside [{times[0]}, {times[-1]}] for UE {ue.id}")
    k = int(np.searchsorted(times, t, side="right")) - 1
    if k >= len(times) - 1:
        return tuple(ue.trajectory[-1][1])
    (t0, p0), (t1, p1) = ue.trajectory[k], ue.trajectory[k + 1]
    a = (t - t0) / (t1 - t0)
    return tuple(float(u + a * (v - u)) for u, v in zip(p0, p1))


def link_geometry(ap: AccessPoint, pos: Point) -> LinkGeometry:
    return _link_geometry(ap.position, pos)


def random_ues(floor: FloorPlan, n: int, rng: np.random.Generator, height: float = 1.0,
               demand: float = 10e6, speed: float = 1.0, duration: float = 60.0
               ) -> tuple[UserEquipment, ...]:
    """UEs dropped uniformly on the floor, each walking a straight line."""
    out = []
    for k in range(n):
        a = (float(rng.uniform(0, floor.width)), float(rng.uniform(0, floor.depth)), height)
        heading = float(rng.uniform(0, 2 * np.pi))
        b = (float(np.clip(a[0] + speed * duration * np.cos(heading), 0, floor.width)),
             float(np.clip(a[1] + speed * duration * np.sin(heading), 0, floor.depth)), height)
        out.append(UserEquipment(f"ue-{k}", ((0.0, a), (duration, b)), demand=demand))
    return tuple(out)


# serialization

def _num(v, where) -> float:
    try:
        return float(v)
    except (TypeError, ValueError) as exc:
        raise cfg.ConfigError(f"{where}: expected a number, got {v!r}") from exc


def _point(v, where) -> Point:
    if not isinstance(v, (list, tuple)) or len(v) != 3:
        raise cfg.ConfigError(f"{where}: position must be [x, y, z]")
    return tuple(_num(c, where) for c in v)


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise cfg.ConfigError(f"{where}: missing key {key!r}")
    return d[key]


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise cfg.ConfigError("scenario file must hold a mapping")
    unknown = set(data) - {"floor", "aps", "ues", "seed", "model"}
    if unknown:
        raise cfg.ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    fl = data.get("floor") or {}
    try:
        rooms = tuple(Room(str(_need(r, "label", "room")), *map(float, _need(r, "rect", "room")),
                           external=bool(r.get("external", True))) for r in fl.get("rooms", []))
    except TypeError as exc:
        raise cfg.ConfigError(f"floor.rooms: {exc}") from exc
    corridors = tuple(tuple((float(p[0]), float(p[1])) for p in line)
                      for line in fl.get("corridors", []))
    floor = FloorPlan(float(fl.get("width", 40.0)), float(fl.get("depth", 30.0)),
                      float(fl.get("height", 3.0)), rooms, corridors)
    model = cfg.from_dict(cfg.ModelConfig, data.get("model"), "model")
    aps = []
    for k, a in enumerate(data.get("aps") or []):
        where = f"aps[{k}]"
        try:
            kind = ApKind(_need(a, "kind", where))
        except ValueError as exc:
            raise cfg.ConfigError(f"{where}: {exc}") from exc
        bundle = model.vlc_ap if kind == ApKind.VLC else model.wifi_ap
        aps.append(AccessPoint(str(_need(a, "id", where)), kind,
                               _point(_need(a, "position", where), where),
                               _num(a.get("p_on", bundle.p_on), where),
                               _num(a.get("p_data_max", bundle.p_data_max), where)))
    ues = []
    for k, u in enumerate(data.get("ues") or []):
        where = f"ues[{k}]"
        traj = tuple((_num(w[0], where), _point(w[1], where)) for w in _need(u, "trajectory", where))
        battery = cfg.from_dict(BatteryModel, u.get("battery"), f"{where}.battery")
        ues.append(UserEquipment(str(_need(u, "id", where)), traj, battery,
                                 _num(u.get("demand", 10e6), where)))
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise cfg.ConfigError("seed must be an integer")
    return Scenario(floor, tuple(aps), tuple(ues), seed, model)


def scenario_to_dict(sc: Scenario) -> dict:
    fp = sc.floor_plan
    return {
        "seed": sc.seed,
        "floor": {
            "width": fp.width, "depth": fp.depth, "height": fp.height,
            "rooms": [{"label": r.label, "rect": [r.x0, r.y0, r.x1, r.y1], "external": r.external}
                      for r in fp.rooms],
            "corridors": [[list(p) for p in line] for line in fp.corridors],
        },
        "aps": [{"id": a.id, "kind": a.kind.value, "position": list(a.position),
                 "p_on": a.p_on, "p_data_max": a.p_data_max} for a in sc.aps],
        "ues": [{"id": u.id, "trajectory": [[t, list(p)] for t, p in u.trajectory],
                 "battery": cfg.to_dict(u.battery), "demand": u.demand} for u in sc.ues],
        "model": cfg.to_dict(sc.model),
    }


def load_scenario(path, strict: bool = False) -> Scenario:
    """Read a scenario file; a bare name selects a bundled scenario."""
    p = Path(path)
    if not p.exists() and not p.suffix:
        p = Path(str(resources.files("hybridsim") / "scenarios" / f"{path}.yaml"))
    try:
        text = p.read_text()
    except OSError as exc:
        raise cfg.ConfigError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise cfg.ConfigError(f"malformed scenario file {p}: {exc}") from exc
    sc = scenario_from_dict(data)
    if strict:
        sc.check_reference_counts()
    return sc


def dump_scenario(sc: Scenario, path) -> None:
    Path(path).write_text(yaml.safe_dump(scenario_to_dict(sc), sort_keys=False))


def default_scenario() -> Scenario:
    return load_scenario(DEFAULT_SCENARIO)


def with_model(sc: Scenario, **changes) -> Scenario:
    return replace(sc, model=replace(sc.model, **changes))
