"""Electromagnetic exposure: power density, SAR depth profiles and Pennes bioheat.

Absorption is modelled as exponential power decay through a layered skin
slab. RF-like sources use each layer's ``attenuation``; optical sources use
the same coefficients scaled by ``TissueModel.optical_scale``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

RF_KIND = "rf"
OPTICAL_KIND = "optical"


@dataclass(frozen=True)
class TissueLayer:
    name: str
    thickness: float       # [m]
    conductivity: float    # k [W/(m K)]
    density: float         # rho [kg/m^3]
    specific_heat: float   # c [J/(kg K)]
    perfusion: float       # w_b [1/s]
    water_fraction: float
    attenuation: float     # RF power absorption coefficient [1/m]

    def __post_init__(self):
        for name in ("thickness", "conductivity", "density", "specific_heat", "perfusion",
                     "attenuation"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{self.name}: {name} must be positive")
        if not 0.0 <= self.water_fraction <= 1.0:
            raise ValueError(f"{self.name}: water_fraction must lie in [0, 1]")


def default_layers() -> tuple[TissueLayer, ...]:
    return (
        TissueLayer("epidermis", 0.06e-3, 0.24, 1200.0, 3600.0, 2.0e-4, 0.30, 2000.0),
        TissueLayer("dermis", 2.74e-3, 0.45, 1200.0, 3300.0, 1.25e-3, 0.75, 800.0),
        TissueLayer("subcutaneous", 10.0e-3, 0.19, 1000.0, 2675.0, 5.0e-4, 0.20, 300.0),
    )


@dataclass(frozen=True)
class TissueModel:
    layers: tuple[TissueLayer, ...] = field(default_factory=default_layers)
    blood_temperature: float = 37.0   # [C]
    blood_density: float = 1060.0     # [kg/m^3]
    blood_specific_heat: float = 3770.0  # [J/(kg K)]
    surface_h: float = 10.0           # convective coefficient [W/(m^2 K)]
    optical_scale: float = 1.0        # optical / RF attenuation ratio

    def __post_init__(self):
        if not self.layers:
            raise ValueError("tissue needs at least one layer")
        if self.surface_h < 0 or self.optical_scale <= 0:
            raise ValueError("surface_h must be >= 0 and optical_scale > 0")

    @property
    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([l.thickness for l in self.layers])])

    @property
    def total_thickness(self) -> float:
        return float(self.boundaries[-1])

    def layer_index(self, depths) -> np.ndarray:
        z = np.asarray(depths, dtype=float)
        if np.any(z < 0) or np.any(z > self.total_thickness * (1 + 1e-12)):
            raise ValueError("depth outside the tissue model")
        idx = np.searchsorted(self.boundaries, z, side="right") - 1
        return np.clip(idx, 0, len(self.layers) - 1)

    def alphas(self, kind: str) -> np.ndarray:
        base = np.array([l.attenuation for l in self.layers])
        if kind == RF_KIND:
            return base
        if kind == OPTICAL_KIND:
            return base * self.optical_scale
        raise ValueError(f"unknown absorption kind {kind!r}")

    def optical_depth(self, depths, kind: str) -> np.ndarray:
        """Integral of alpha from the surface down to each depth."""
        z = np.asarray(depths, dtype=float)
        b = self.boundaries
        overlap = np.clip(z[..., None] - b[:-1], 0.0, b[1:] - b[:-1])
        return overlap @ self.alphas(kind)


@dataclass(frozen=True)
class ExposureSource:
    mode: str
    g_tr: float = 1.0
    p_t: float = 1.0         # [W]
    distance: float = 1.0    # [m]
    duration: float = 600.0  # [s]
    vlc_fraction: float = 0.67  # optical share of the Hybrid mode

    def __post_init__(self):
        if self.p_t < 0:
            raise ValueError("p_t must be non-negative")
        if self.distance <= 0:
            raise ValueError("distance must be positive")

    @property
    def spectrum(self) -> dict[str, float]:
        if self.mode in ("Vlc", "PureVlc"):
            return {OPTICAL_KIND: 1.0}
        if self.mode == "Hybrid":
            return {OPTICAL_KIND: self.vlc_fraction, RF_KIND: 1.0 - self.vlc_fraction}
        if self.mode in ("ActiveMode", "TrMode", "WiFi"):
            return {RF_KIND: 1.0}
        raise ValueError(f"unknown exposure mode {self.mode!r}")

    @property
    def incident_pd(self) -> float:
        return power_density_incident(self.g_tr, self.p_t, self.distance)


def power_density_incident(g_tr, p_t, d):
    if np.any(np.asarray(d) <= 0):
        raise ValueError("distance must be positive")
    if np.ndim(d) == 0:
        return g_tr * p_t / (4 * math.pi * d ** 2)
    return g_tr * p_t / (4 * math.pi * np.asarray(d, dtype=float) ** 2)


def sar(p_exposed: float, mass: float = 1e-3) -> float:
    if mass <= 0:
        raise ValueError("mass must be positive")
    return p_exposed / mass


def _check_depths(depths) -> np.ndarray:
    z = np.asarray(depths, dtype=float)
    if z.ndim != 1:
        raise ValueError("depths must be one-dimensional")
    if np.any(np.diff(z) < 0):
        raise ValueError("depths must be sorted ascending")
    return z


def absorbed_power_density_profile(source: ExposureSource, tissue: TissueModel,
                                   depths: Sequence[float]) -> np.ndarray:
    """Power density still travelling inward at each depth [W/m^2]."""
    z = _check_depths(depths)
    tissue.layer_index(z)
    pd = source.incident_pd
    out = np.zeros_like(z)
    for kind, w in source.spectrum.items():
        out += w * np.exp(-tissue.optical_depth(z, kind))
    return pd * out


def sar_depth_profile(source: ExposureSource, tissue: TissueModel,
                      depths: Sequence[float]) -> np.ndarray:
    """Local SAR [W/kg]: absorbed power per unit volume over tissue density."""
    z = _check_depths(depths)
    idx = tissue.layer_index(z)
    rho = np.array([l.density for l in tissue.layers])[idx]
    pd = source.incident_pd
    out = np.zeros_like(z)
    for kind, w in source.spectrum.items():
        alpha = tissue.alphas(kind)[idx]
        out += w * alpha * np.exp(-tissue.optical_depth(z, kind))
    return pd * out / rho


def absorbed_power(source: ExposureSource, tissue: TissueModel, depth: float,
                   area: float = 1.0) -> float:
    """Power deposited between the surface and `depth` over `area` [W]."""
    apd = absorbed_power_density_profile(source, tissue, [0.0, depth])
    return float((apd[0] - apd[1]) * area)


def heating_profile(source: ExposureSource, tissue: TissueModel, dz: float) -> np.ndarray:
    """Cell-averaged volumetric heating [W/m^3] on the solver grid."""
    n = _n_cells(tissue, dz)
    faces = np.linspace(0.0, tissue.total_thickness, n + 1)
    apd = absorbed_power_density_profile(source, tissue, faces)
    return (apd[:-1] - apd[1:]) / dz


class StabilityError(ValueError):
    pass


@dataclass
class BioheatResult:
    depths: np.ndarray   # cell centres [m]
    times: np.ndarray    # [s]
    delta_t: np.ndarray  # shape (len(times), len(depths)) [C]

    @property
    def peak(self) -> float:
        return float(self.delta_t.max())

    def peak_location(self) -> tuple[float, float]:
        it, iz = np.unravel_index(np.argmax(self.delta_t), self.delta_t.shape)
        return float(self.times[it]), float(self.depths[iz])


def _n_cells(tissue: TissueModel, dz: float) -> int:
    if dz <= 0:
        raise ValueError("grid step must be positive")
    n = int(round(tissue.total_thickness / dz))
    if n < 2 or abs(n * dz - tissue.total_thickness) > 1e-9 * tissue.total_thickness + 1e-15:
        raise ValueError("tissue thickness must be an integer multiple of dz (>= 2 cells)")
    return n


def max_stable_dt(tissue: TissueModel, dz: float, perfusion: bool = True,
                  surface: str = "convective") -> float:
    coeffs = _coefficients(tissue, dz, perfusion, surface, "fixed")
    rho_c, g_left, g_right, sink = coeffs
    return float(np.min(rho_c * dz / (g_left + g_right + sink * dz)))


def _coefficients(tissue, dz, perfusion, surface, core):
    n = _n_cells(tissue, dz)
    centres = (np.arange(n) + 0.5) * dz
    idx = tissue.layer_index(centres)
    k = np.array([l.conductivity for l in tissue.layers])[idx]
    rho_c = np.array([l.density * l.specific_heat for l in tissue.layers])[idx]
    w_b = np.array([l.perfusion for l in tissue.layers])[idx]
    sink = tissue.blood_density * tissue.blood_specific_heat * w_b if perfusion else np.zeros(n)

    g_inner = 1.0 / (dz / (2 * k[:-1]) + dz / (2 * k[1:]))
    g_left = np.concatenate([[0.0], g_inner])
    g_right = np.concatenate([g_inner, [0.0]])
    if surface == "convective":
        if tissue.surface_h > 0:
            g_left[0] = 1.0 / (1.0 / tissue.surface_h + dz / (2 * k[0]))
    elif surface != "insulated":
        raise ValueError(f"unknown surface boundary {surface!r}")
    if core == "fixed":
        g_right[-1] = 2 * k[-1] / dz
    elif core != "insulated":
        raise ValueError(f"unknown core boundary {core!r}")
    return rho_c, g_left, g_right, sink


def solve_bioheat(tissue: TissueModel, heating: np.ndarray, dz: float, dt: float,
                  duration: float, surface: str = "convective", core: str = "fixed",
                  perfusion: bool = True, record_every: float = 10.0) -> BioheatResult:
    """Explicit finite-volume Pennes solver for the temperature elevation.

    The equation is linear, so the elevation over the zero-source steady
    state obeys the same PDE with homogeneous boundary data and a zero
    initial field; that is what is integrated here.
    """
    if dt <= 0 or duration <= 0:
        raise ValueError("dt and duration must be positive")
    rho_c, g_left, g_right, sink = _coefficients(tissue, dz, perfusion, surface, core)
    q = np.asarray(heating, dtype=float)
    if q.shape != rho_c.shape:
        raise ValueError(f"heating has {q.size} cells, grid has {rho_c.size}")

    for layer in tissue.layers:
        if dt > layer.density * layer.specific_heat * dz ** 2 / (2 * layer.conductivity):
            raise StabilityError(f"dt={dt:g} s violates the diffusion limit in {layer.name}")
    if np.any(dt * (g_left + g_right + sink * dz) > rho_c * dz):
        raise StabilityError(f"dt={dt:g} s exceeds the explicit stability limit")

    n_steps = int(round(duration / dt))
    stride = max(1, int(round(record_every / dt)))
    scale = dt / (rho_c * dz)
    a = scale * g_left
    c = scale * g_right
    b = 1.0 - a - c - scale * sink * dz
    src = scale * q * dz

    t_field = np.zeros_like(rho_c)
    frames, times = [t_field.copy()], [0.0]
    nxt = np.empty_like(t_field)
    for step in range(1, n_steps + 1):
        nxt[:] = b * t_field + src
        nxt[1:] += a[1:] * t_field[:-1]
        nxt[:-1] += c[:-1] * t_field[1:]
        t_field, nxt = nxt, t_field
        if step % stride == 0 or step == n_steps:
            frames.append(t_field.copy())
            times.append(round(step * dt, 9))
    depths = (np.arange(rho_c.size) + 0.5) * dz
    return BioheatResult(depths=depths, times=np.array(times), delta_t=np.array(frames))


def bioheat_solve(tissue: TissueModel, source: ExposureSource, dz: float = 2e-5,
                  dt: float | None = None, duration: float | None = None,
                  record_every: float = 10.0) -> BioheatResult:
    """Temperature elevation field for a source irradiating the skin surface."""
    if dt is None:
        # largest stable step that lands exactly on the recording times
        dt = record_every / math.ceil(record_every / (0.9 * max_stable_dt(tissue, dz)))
    duration = source.duration if duration is None else duration
    q = heating_profile(source, tissue, dz)
    return solve_bioheat(tissue, q, dz, dt, duration, record_every=record_every)


def with_optical_scale(tissue: TissueModel, scale: float) -> TissueModel:
    return replace(tissue, optical_scale=scale)
