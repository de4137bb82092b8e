"""Wideband Wi-Fi channel: log-distance loss, Rayleigh fading, SINR and rates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 3e8


@dataclass(frozen=True)
class WifiApParams:
    p_on: float = 10.0             # power to keep the AP on [W]
    p_rf: float = 10.0             # total transmit power [W]
    b_rf: float = 2e6              # channel bandwidth [Hz]
    carrier: float = 2.4e9         # [Hz]
    p_max: float = 14.0            # max AP consumption [W]
    noise_floor_dbm: float = -90.0  # N0 * b_rf
    efficiency: float = 0.1        # data power as a fraction of p_on
    path_loss_exponent: float = 3.0

    def __post_init__(self):
        if self.b_rf <= 0:
            raise ValueError("b_rf must be positive")
        if self.p_on > self.p_max:
            raise ValueError("p_on must not exceed p_max")
        if self.p_on + self.p_data_max > self.p_max + 1e-12:
            raise ValueError("p_on + data power exceeds p_max")

    @property
    def n0(self) -> float:
        """Noise PSD [W/Hz] implied by the noise floor over b_rf."""
        return 10 ** ((self.noise_floor_dbm - 30) / 10) / self.b_rf

    @property
    def p_data_max(self) -> float:
        return self.efficiency * self.p_on


@dataclass(frozen=True)
class SubchannelAllocation:
    indices: frozenset = field(default_factory=frozenset)
    delta_b: float = 0.0  # per sub-channel bandwidth [Hz]
    delta_p: float = 0.0  # per sub-channel power [W]

    def validate(self, b_rf: float, p_rf: float):
        if len(self.indices) * self.delta_b > b_rf * (1 + 1e-12):
            raise ValueError("allocation exceeds total bandwidth")
        if len(self.indices) * self.delta_p > p_rf * (1 + 1e-12):
            raise ValueError("allocation exceeds total power")


@dataclass(frozen=True)
class RfLinkSample:
    h: float
    loss_db: float
    fading: float
    interference: float = 0.0


def fspl_1m_db(carrier: float) -> float:
    return 20 * math.log10(4 * math.pi * carrier / SPEED_OF_LIGHT)


def path_loss_db(d, carrier: float, exponent: float = 3.0):
    """Log-distance loss with a free-space intercept at 1 m."""
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr < 0.1):
        raise ValueError("distance must be >= 0.1 m")
    loss = fspl_1m_db(carrier) + 10 * exponent * np.log10(d_arr)
    return float(loss) if np.ndim(d) == 0 else loss


def rf_channel_gain(d, fading_sample, carrier: float, exponent: float = 3.0):
    fading = np.asarray(fading_sample, dtype=float)
    if np.any(fading < 0):
        raise ValueError("fading sample must be non-negative")
    h = np.sqrt(10 ** (-np.asarray(path_loss_db(d, carrier, exponent)) / 10)) * fading
    return float(h) if h.ndim == 0 else h


def rayleigh_fading(rng: np.random.Generator, size=None):
    """Unit mean-power Rayleigh magnitudes, |h|^2 ~ Exp(1)."""
    re = rng.standard_normal(size)
    im = rng.standard_normal(size)
    return np.sqrt((re ** 2 + im ** 2) / 2)


def rf_sinr(h, delta_p: float, delta_b: float, n0: float, interference: float = 0.0):
    if delta_b <= 0:
        raise ValueError("delta_b must be positive")
    return np.abs(h) ** 2 * delta_p / (n0 * delta_b + interference)


def rf_rate_subchannels(alloc: SubchannelAllocation, h_per_sub: Sequence[complex] | dict,
                        n0: float) -> float:
    """Sum of per sub-channel Shannon rates over the user's set."""
    if not alloc.indices:
        return 0.0
    total = 0.0
    for q in sorted(alloc.indices):
        snr = abs(h_per_sub[q]) ** 2 * alloc.delta_p / (n0 * alloc.delta_b)
        total += alloc.delta_b * math.log2(1 + snr)
    return total


def rf_rate_shared(b_rf: float, h, p_rf: float, n0: float, users: int):
    if users < 1:
        raise ValueError("users must be >= 1")
    snr = np.abs(h) ** 2 * p_rf / (n0 * b_rf)
    rate = b_rf / users * np.log2(1 + snr)
    return float(rate) if np.ndim(rate) == 0 else rate


def wifi_sinr_at(d, ap: WifiApParams, fading=1.0, interference: float = 0.0):
    """Full-band SINR at distance d for a single serving AP."""
    h = rf_channel_gain(d, fading, ap.carrier, ap.path_loss_exponent)
    return rf_sinr(h, ap.p_rf, ap.b_rf, ap.n0, interference)


def wifi_rate_at(d, ap: WifiApParams, fading=1.0, users: int = 1):
    h = rf_channel_gain(d, fading, ap.carrier, ap.path_loss_exponent)
    return rf_rate_shared(ap.b_rf, h, ap.p_rf, ap.n0, users)
