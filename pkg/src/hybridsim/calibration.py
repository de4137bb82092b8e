"""Fit the free model knobs to the published anchor values.

Every target here is a reported outcome, not an input; the fitted values
ship as the defaults of :class:`hybridsim.config.Calibration`.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.optimize import brentq

from . import energy, exposure
from .config import Calibration, ModelConfig
from .energy import ComplexityModel, ModePower
from .link_manager import distance_axis_trace

SAR_REDUCTION = 0.596
APD_REDUCTION = 0.48
EE_IMPROVEMENT = 0.37
# centres of the reported temperature-elevation bands [C]
PEAK_DT = {"ActiveMode": 1.75, "TrMode": 1.3, "Hybrid": 0.7, "PureVlc": 0.3}
COMPLEXITY_AT_60M = {"ActiveMode": 62.5, "PureVlc": 41.0}
EE_SWEEP = np.arange(1.0, 151.0, 1.0)


def profile_depths(model: ModelConfig) -> np.ndarray:
    ex = model.exposure
    n = int(round(ex.profile_depth_max / ex.profile_depth_step))
    return np.arange(n + 1) * ex.profile_depth_step


def wifi_source(model: ModelConfig, distance: float) -> exposure.ExposureSource:
    ex = model.exposure
    return exposure.ExposureSource("WiFi", ex.wifi_g_tr, ex.wifi_p_t, distance, ex.duration)


def vlc_source(model: ModelConfig, distance: float, ratio: float | None = None
               ) -> exposure.ExposureSource:
    ex = model.exposure
    k = model.calibration.vlc_power_ratio if ratio is None else ratio
    return exposure.ExposureSource("Vlc", ex.wifi_g_tr, k * ex.wifi_p_t, distance, ex.duration)


def thermal_source(model: ModelConfig, mode: str, p_t: float | None = None
                ) -> exposure.ExposureSource:
    ex = model.exposure
    p = model.calibration.mode_power_w[mode] if p_t is None else p_t
    return exposure.ExposureSource(mode, 1.0, p, ex.body_distance, ex.duration,
                                   ex.hybrid_vlc_fraction)


def pooled_reductions(model: ModelConfig, tissue: exposure.TissueModel,
                      baseline, target) -> tuple[float, float]:
    """(SAR, absorbed PD) reductions, 1 - sum(target) / sum(baseline), pooled over distances.

    ``baseline`` and ``target`` map a distance to an ExposureSource.
    """
    z = profile_depths(model)
    sums = np.zeros((2, 2))
    for d in model.exposure.profile_distances:
        for k, src in enumerate((baseline(d), target(d))):
            sums[0, k] += exposure.sar_depth_profile(src, tissue, z).sum()
            sums[1, k] += exposure.absorbed_power_density_profile(src, tissue, z).sum()
    return float(1 - sums[0, 1] / sums[0, 0]), float(1 - sums[1, 1] / sums[1, 0])


def fit_exposure(model: ModelConfig) -> tuple[float, float]:
    """Solve (VLC power ratio, optical attenuation scale) for the two reductions.

    The SAR/APD reduction ratio depends only on the attenuation scale, so it
    is found first by root bracketing; the power ratio then follows in
    closed form.
    """
    def reductions(scale, ratio=1.0):
        tissue = dataclasses.replace(model.tissue, optical_scale=scale)
        return pooled_reductions(model, tissue, lambda d: wifi_source(model, d),
                                 lambda d: vlc_source(model, d, ratio))

    want = (1 - SAR_REDUCTION) / (1 - APD_REDUCTION)

    def gap(scale):
        r_sar, r_apd = reductions(scale)
        return (1 - r_sar) / (1 - r_apd) - want

    scale = brentq(gap, 0.05, 1.0, xtol=1e-14)
    _, r_apd = reductions(scale)
    ratio = float((1 - APD_REDUCTION) / (1 - r_apd))
    return ratio, scale


def fit_mode_powers(model: ModelConfig, tissue: exposure.TissueModel) -> dict:
    """Per-mode source power placing each peak at its band centre (peak is linear in power)."""
    ex = model.exposure
    out = {}
    for mode, target in PEAK_DT.items():
        unit = exposure.bioheat_solve(tissue, thermal_source(model, mode, 1.0), dz=ex.dz,
                                      record_every=ex.record_every)
        out[mode] = target / unit.peak
    return out


def hybrid_gain(model: ModelConfig, demand: float, distances=EE_SWEEP) -> float:
    """Mean delivered-throughput EE of Hybrid over pure Wi-Fi, minus one."""
    tr = distance_axis_trace(distances, model.vlc_ap, model.receiver, model.wifi_ap, model.policy)
    ee = delivered_ee(model, tr.rate_vlc_ho, tr.rate_wifi, demand)
    return float(ee["Hybrid"].mean() / ee["WiFi"].mean() - 1)


def mode_powers(model: ModelConfig, rate_vlc, rate_wifi, demand) -> dict:
    """AP-side power per mode at each point; Hybrid splits time by the session fractions."""
    v, w, tf = model.vlc_ap, model.wifi_ap, model.time_fraction
    p_vlc = v.p_on + v.p_data_max * energy.duty_cycle(demand, rate_vlc)
    p_wifi = w.p_on + w.p_data_max * energy.duty_cycle(demand, rate_wifi)
    return {"Vlc": p_vlc, "WiFi": p_wifi, "Hybrid": tf.p * p_vlc + tf.q * p_wifi}


def delivered_ee(model: ModelConfig, rate_vlc, rate_wifi, demand) -> dict:
    tf = model.time_fraction
    p = mode_powers(model, rate_vlc, rate_wifi, demand)
    t_vlc, t_wifi = np.minimum(demand, rate_vlc), np.minimum(demand, rate_wifi)
    return {"Vlc": t_vlc / p["Vlc"], "WiFi": t_wifi / p["WiFi"],
            "Hybrid": (tf.p * t_vlc + tf.q * t_wifi) / p["Hybrid"]}


def fit_demand(model: ModelConfig) -> float:
    return brentq(lambda dm: hybrid_gain(model, dm) - EE_IMPROVEMENT, 20e6, 100e6, xtol=1.0)


def fit_complexity(base: ComplexityModel) -> ComplexityModel:
    """Solve the distance-independent power of the anchored modes for their 60 m values."""
    modes = dict(base.modes)
    frac = (60.0 / base.d_max) ** base.exponent
    am = modes["ActiveMode"]
    a = COMPLEXITY_AT_60M["ActiveMode"] / 100
    c_am = am.link_w * (a - frac) / (1 - a)
    modes["ActiveMode"] = ModePower(c_am, am.link_w)
    ref = c_am + am.link_w
    pv = modes["PureVlc"]
    modes["PureVlc"] = ModePower(COMPLEXITY_AT_60M["PureVlc"] / 100 * ref - pv.link_w * frac, pv.link_w)
    return dataclasses.replace(base, modes=modes)


def calibrate(model: ModelConfig) -> Calibration:
    ratio, scale = fit_exposure(model)
    tissue = dataclasses.replace(model.tissue, optical_scale=scale)
    return Calibration(
        application_demand_bps=fit_demand(model),
        vlc_power_ratio=ratio,
        optical_attenuation_scale=scale,
        mode_power_w=fit_mode_powers(model, tissue),
        complexity=fit_complexity(model.calibration.complexity),
    )
