"""Energy efficiency, battery lifetime and complexity metrics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MODES = ("ActiveMode", "TrMode", "Hybrid", "PureVlc", "WiFi", "Vlc")


@dataclass(frozen=True)
class BatteryModel:
    capacity_mah: float = 5000.0
    energy_wh: float = 5.45  # kept as printed; not derived from capacity
    derating: float = 0.70

    def __post_init__(self):
        if self.capacity_mah <= 0:
            raise ValueError("battery capacity must be positive")
        if not 0.0 < self.derating <= 1.0:
            raise ValueError("derating must lie in (0, 1]")


@dataclass(frozen=True)
class PowerBreakdown:
    p_on: float
    p_data: float
    mode: str = "Vlc"

    def __post_init__(self):
        if self.p_on < 0 or self.p_data < 0:
            raise ValueError("power terms must be non-negative")

    @property
    def total(self) -> float:
        return self.p_on + self.p_data


def energy_efficiency(data_rate, pb: PowerBreakdown):
    """Delivered bits per joule."""
    if pb.total <= 0:
        raise ValueError("total power must be positive")
    return data_rate / pb.total


def transfer_energy(battery: BatteryModel, t: float) -> float:
    """Energy [Wh] drawn to move a file taking t seconds."""
    if t < 0:
        raise ValueError("transfer time must be non-negative")
    return battery.energy_wh * t / 3600.0


def battery_lifetime(battery: BatteryModel, i_load_ma) -> float:
    """Hours until empty at a constant load current [mA]."""
    i = np.asarray(i_load_ma, dtype=float)
    if np.any(i <= 0):
        raise ValueError("load current must be positive")
    life = battery.capacity_mah / i * battery.derating
    return float(life) if life.ndim == 0 else life


def duty_cycle(demand, rate):
    """Fraction of airtime needed to carry the demand; saturates at 1."""
    rate = np.asarray(rate, dtype=float)
    with np.errstate(divide="ignore"):
        d = np.where(rate > 0, np.asarray(demand, dtype=float) / np.where(rate > 0, rate, 1.0), 1.0)
    d = np.minimum(d, 1.0)
    return float(d) if d.ndim == 0 else d


def ap_power(p_on: float, p_data_max: float, duty, mode: str) -> PowerBreakdown:
    return PowerBreakdown(p_on=p_on, p_data=p_data_max * float(duty), mode=mode)


@dataclass(frozen=True)
class DevicePowerModel:
    idle_w: float = 0.6      # platform draw with the radio idle [W]
    radio_w: float = 1.4     # extra draw while the link is active [W]
    voltage: float = 3.7     # nominal cell voltage [V]

    def breakdown(self, duty, mode: str = "Vlc") -> PowerBreakdown:
        return PowerBreakdown(p_on=self.idle_w, p_data=self.radio_w * float(duty), mode=mode)

    def load_current_ma(self, pb: PowerBreakdown) -> float:
        return pb.total / self.voltage * 1000.0


def lifetime_vs_rate(battery: BatteryModel, device: DevicePowerModel, demand, rate, mode="Vlc"):
    """Battery hours for a UE pulling `demand` over a link of capacity `rate`."""
    duty = np.atleast_1d(duty_cycle(demand, rate))
    out = np.array([battery_lifetime(battery, device.load_current_ma(device.breakdown(u, mode)))
                    for u in duty])
    return float(out[0]) if np.ndim(rate) == 0 else out


@dataclass(frozen=True)
class ModePower:
    circuit_w: float  # distance-independent processing power [W]
    link_w: float     # uplink+downlink radiated power at the sweep edge [W]


@dataclass(frozen=True)
class ComplexityModel:
    modes: dict = field(default_factory=lambda: {
        "ActiveMode": ModePower(1.24, 1.00),
        "TrMode": ModePower(1.10, 0.75),
        "Hybrid": ModePower(0.98, 0.50),
        "PureVlc": ModePower(0.8784, 0.25),
    })
    exponent: float = 2.0      # power-control growth with distance
    d_max: float = 150.0       # sweep edge where ActiveMode peaks [m]

    def power(self, mode: str, distance):
        mp = self.modes[mode]
        d = np.asarray(distance, dtype=float)
        return mp.circuit_w + mp.link_w * (d / self.d_max) ** self.exponent


def complexity_percent(mode: str, distance, model: ComplexityModel):
    """Consumed power as a percentage of the ActiveMode maximum over the sweep."""
    d = np.asarray(distance, dtype=float)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    ref = float(model.power("ActiveMode", model.d_max))
    pct = 100.0 * model.power(mode, np.minimum(d, model.d_max)) / ref
    return float(pct) if pct.ndim == 0 else pct
