"""Model configuration: parameter bundles, shipped calibration and dict/YAML mapping.

Angles are stored in radians; in config files any angle key may be given
in degrees with a ``_deg`` suffix (``phi_half_deg: 30``).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import typing
from dataclasses import dataclass, field

from .energy import BatteryModel, ComplexityModel, DevicePowerModel, ModePower
from .exposure import TissueLayer, TissueModel, default_layers
from .link_manager import HandoverPolicy, TimeFractionCase
from .mac import Superframe
from .rf import WifiApParams
from .vlc import VlcApParams, VlcReceiverParams


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


ANGLE_FIELDS = {"phi_half", "theta_fov"}


@dataclass(frozen=True)
class ExposureSettings:
    wifi_p_t: float = 10.0                  # Wi-Fi source input power for depth profiles [W]
    wifi_g_tr: float = 1.0
    profile_distances: tuple[float, ...] = (30.0, 80.0)  # [m]
    profile_depth_max: float = 2.8e-3       # epidermis + dermis span [m]
    profile_depth_step: float = 2e-5        # [m]
    body_distance: float = 0.05             # handset to skin for heating runs [m]
    duration: float = 600.0                 # [s]
    dz: float = 2e-5                        # bioheat grid [m]
    record_every: float = 10.0              # [s]
    hybrid_vlc_fraction: float = 0.67
    sar_mass: float = 1e-3                  # [kg]


@dataclass(frozen=True)
class Calibration:
    """Fitted values; regenerate with ``hybridsim calibrate``."""
    application_demand_bps: float = 56056337.92698378
    vlc_power_ratio: float = 0.43530850271884053
    optical_attenuation_scale: float = 0.7865242249777015
    mode_power_w: dict = field(default_factory=lambda: {
        "ActiveMode": 3.3209508013753894,
        "TrMode": 2.466992023878861,
        "Hybrid": 1.3731140917161873,
        "PureVlc": 0.5983731993875661,
    })
    complexity: ComplexityModel = field(default_factory=ComplexityModel)


@dataclass(frozen=True)
class ModelConfig:
    vlc_ap: VlcApParams = field(default_factory=VlcApParams)
    receiver: VlcReceiverParams = field(default_factory=VlcReceiverParams)
    wifi_ap: WifiApParams = field(default_factory=WifiApParams)
    policy: HandoverPolicy = field(default_factory=HandoverPolicy)
    time_fraction: TimeFractionCase = field(default_factory=lambda: TimeFractionCase(0.67, 0.33))
    device: DevicePowerModel = field(default_factory=DevicePowerModel)
    battery: BatteryModel = field(default_factory=BatteryModel)
    tissue: TissueModel = field(default_factory=lambda: TissueModel(default_layers()))
    exposure: ExposureSettings = field(default_factory=ExposureSettings)
    superframe: Superframe = field(default_factory=Superframe)
    calibration: Calibration = field(default_factory=Calibration)

    @property
    def calibrated(self) -> bool:
        return self.calibration == Calibration()

    def tissue_for_sources(self) -> TissueModel:
        """Tissue with the calibrated optical attenuation scale applied."""
        return dataclasses.replace(self.tissue,
                                   optical_scale=self.calibration.optical_attenuation_scale)

    def digest(self) -> str:
        blob = json.dumps(to_dict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def to_dict(obj):
    """Plain-data view of a config dataclass (angles in radians)."""
    if dataclasses.is_dataclass(obj):
        return {f.name: to_dict(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_dict(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_dict(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ConfigError("non-finite value in config")
    return obj


def _build(tp, value, where: str):
    origin = typing.get_origin(tp)
    if dataclasses.is_dataclass(tp):
        return from_dict(tp, value, where)
    if origin is tuple:
        args = typing.get_args(tp)
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list")
        inner = args[0]
        return tuple(_build(inner, v, where) for v in value)
    if tp is float:
        if isinstance(value, str):
            # YAML 1.1 reads "1.0e6" (no exponent sign) as a string
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    return value


def _special(cls, name: str, value, where: str):
    """Fields whose declared type does not say how to build them."""
    if cls is TissueModel and name == "layers":
        return tuple(from_dict(TissueLayer, v, f"{where}[{k}]") for k, v in enumerate(value))
    if cls is ComplexityModel and name == "modes":
        return {str(m): from_dict(ModePower, v, f"{where}.{m}") for m, v in value.items()}
    if cls is Calibration and name == "mode_power_w":
        return {str(m): float(v) for m, v in value.items()}
    return dataclasses.MISSING


def from_dict(cls, data, where: str = "config"):
    """Build a (possibly nested) dataclass; missing keys keep their defaults."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        name = key
        if key.endswith("_deg") and key[:-4] in ANGLE_FIELDS:
            name, value = key[:-4], math.radians(float(value))
        if name not in names:
            raise ConfigError(f"{where}: unknown key {key!r}")
        if name in kwargs:
            raise ConfigError(f"{where}: {name!r} given twice")
        built = _special(cls, name, value, f"{where}.{name}")
        kwargs[name] = built if built is not dataclasses.MISSING else \
            _build(hints[name], value, f"{where}.{name}")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
