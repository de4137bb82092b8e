"""Line-of-sight Lambertian optical channel, VLC SINR and achievable rate."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import LinkGeometry


@dataclass(frozen=True)
class VlcApParams:
    p_op: float = 15.0                    # optical transmit power [W]
    phi_half: float = math.radians(30.0)  # semi-angle at half power [rad]
    p_on: float = 15.0                    # electrical power to keep the lamp on [W]
    bandwidth: float = 100e6              # modulation bandwidth [Hz]
    luminosity_efficacy: float = 150.0    # [lm/W]
    dc_efficiency: float = 0.1            # data power as a fraction of p_on

    def __post_init__(self):
        if not 0.0 < self.phi_half < math.pi / 2:
            raise ValueError(f"phi_half must lie in (0, pi/2), got {self.phi_half}")
        if self.p_op <= 0:
            raise ValueError("p_op must be positive")
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")

    @property
    def p_data_max(self) -> float:
        return self.dc_efficiency * self.p_on


@dataclass(frozen=True)
class VlcReceiverParams:
    a_pd: float = 1.0e-4                   # photodiode area [m^2]
    theta_fov: float = math.radians(90.0)  # field-of-view half angle [rad]
    t_of: float = 1.0                      # optical filter gain
    n_rf: float = 1.5                      # concentrator refractive index
    gamma: float = 0.54                    # O/E conversion [A/W]
    noise_variance: float = 4.7e-14        # N0 * B over the full channel [A^2]
    bandwidth: float = 100e6               # bandwidth the noise variance refers to [Hz]
    path_loss_exponent: float = 2.0

    def __post_init__(self):
        for name in ("a_pd", "theta_fov", "t_of", "n_rf", "gamma", "noise_variance",
                     "bandwidth", "path_loss_exponent"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.theta_fov > math.pi / 2 + 1e-12:
            raise ValueError("theta_fov must not exceed pi/2")

    @property
    def n0(self) -> float:
        """Noise power spectral density [A^2/Hz]."""
        return self.noise_variance / self.bandwidth


@dataclass(frozen=True)
class VlcLinkSample:
    h: float
    sinr: float
    geometry: LinkGeometry | None = None


def lambertian_order(phi_half: float) -> float:
    if not 0.0 < phi_half < math.pi / 2:
        raise ValueError(f"phi_half must lie in (0, pi/2), got {phi_half}")
    return -1.0 / math.log2(math.cos(phi_half))


def concentrator_gain(theta: float, n_rf: float, theta_fov: float) -> float:
    if theta < 0:
        raise ValueError("theta must be non-negative")
    if theta > theta_fov:
        return 0.0
    return n_rf ** 2 / math.sin(theta_fov) ** 2


def channel_gain(geom: LinkGeometry, ap: VlcApParams, rx: VlcReceiverParams) -> float:
    """DC gain H(0) of the LOS link; zero outside the receiver FoV."""
    if geom.distance <= 0:
        raise ValueError("distance must be positive")
    theta, phi = geom.incidence, geom.irradiance
    if theta > rx.theta_fov or phi >= math.pi / 2:
        return 0.0
    n = lambertian_order(ap.phi_half)
    g = concentrator_gain(theta, rx.n_rf, rx.theta_fov)
    return ((n + 1) * rx.a_pd / (2 * math.pi * geom.distance ** rx.path_loss_exponent)
            * rx.t_of * g * math.cos(phi) ** n * math.cos(theta))


def boresight_gain(distance, ap: VlcApParams, rx: VlcReceiverParams):
    """Vectorised H(0) for a receiver on the AP axis (phi = theta = 0)."""
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    n = lambertian_order(ap.phi_half)
    g = concentrator_gain(0.0, rx.n_rf, rx.theta_fov)
    return (n + 1) * rx.a_pd / (2 * np.pi * d ** rx.path_loss_exponent) * rx.t_of * g


def vlc_sinr(serving: VlcLinkSample | float, interferers: Sequence[VlcLinkSample | float],
             per_user_bandwidth: float, rx: VlcReceiverParams, ap: VlcApParams) -> float:
    """Electrical SINR with each co-channel interferer's power summed separately."""
    if per_user_bandwidth <= 0:
        raise ValueError("per_user_bandwidth must be positive")
    h_s = serving.h if isinstance(serving, VlcLinkSample) else float(serving)
    signal = (rx.gamma * ap.p_op * h_s) ** 2
    interference = sum((rx.gamma * ap.p_op * (x.h if isinstance(x, VlcLinkSample) else float(x))) ** 2
                       for x in interferers)
    return signal / (rx.n0 * per_user_bandwidth + interference)


def boresight_sinr(distance, ap: VlcApParams, rx: VlcReceiverParams, users: int = 1):
    """Interference-free SINR along the AP axis, B_j = B / users."""
    h = boresight_gain(distance, ap, rx)
    return (rx.gamma * ap.p_op * h) ** 2 / (rx.n0 * ap.bandwidth / users)


def vlc_rate(bandwidth: float, sinr):
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    if np.ndim(sinr) == 0:
        return bandwidth / 2 * math.log2(1 + sinr)
    return bandwidth / 2 * np.log2(1 + np.asarray(sinr, dtype=float))


def vlc_rate_shared(bandwidth: float, sinr, users: int):
    if users < 1:
        raise ValueError("users must be >= 1")
    return vlc_rate(bandwidth, sinr) / users
