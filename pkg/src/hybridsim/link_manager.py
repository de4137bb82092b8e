"""Serving-technology selection, handovers and time-fraction rate composition."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from . import rf, vlc


class Serving(str, Enum):
    VLC = "Vlc"
    WIFI = "WiFi"
    HYBRID_OVERLAP = "HybridOverlap"


@dataclass(frozen=True)
class HandoverPolicy:
    vlc_min_sinr_db: float = 2.0
    intra_handover_distance: float = 80.0      # [m]
    vertical_handover_distance: float = 120.0  # [m]
    hysteresis_db: float = 1.0

    def __post_init__(self):
        if not self.intra_handover_distance < self.vertical_handover_distance:
            raise ValueError("intra handover distance must be below the vertical one")
        if self.hysteresis_db < 0:
            raise ValueError("hysteresis must be non-negative")

    @property
    def neighbor_offset(self) -> float:
        """Axis position of the neighbouring VLC AP in distance-axis sweeps."""
        return self.vertical_handover_distance - self.intra_handover_distance


@dataclass(frozen=True)
class LinkState:
    serving: Serving
    ap_id: str | None
    since: float = 0.0


@dataclass(frozen=True)
class SinrSnapshot:
    vlc: Mapping[str, float] = field(default_factory=dict)   # ap id -> SINR [dB]
    wifi: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.vlc and not self.wifi:
            raise ValueError("snapshot is empty")


@dataclass(frozen=True)
class HandoverEvent:
    time_s: float
    ue_id: str
    src: str
    dst: str
    reason: str
    sinr_before_db: float
    sinr_after_db: float

    CSV_HEADER = ("time_s", "ue_id", "from", "to", "reason", "sinr_before_db", "sinr_after_db")

    def row(self) -> tuple:
        return (self.time_s, self.ue_id, self.src, self.dst, self.reason,
                self.sinr_before_db, self.sinr_after_db)


def id_key(ap_id: str):
    """Natural sort key so 'vlc-2' precedes 'vlc-10'."""
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", ap_id)]


def best_ap(sinrs: Mapping[str, float]) -> str | None:
    if not sinrs:
        return None
    top = max(sinrs.values())
    return min((k for k, v in sinrs.items() if v == top), key=id_key)


def select_link(snapshot: SinrSnapshot, policy: HandoverPolicy,
                previous: LinkState | None = None, time: float = 0.0) -> LinkState:
    """SINR-driven choice between VLC and Wi-Fi with hysteresis on the way back."""
    on_wifi = previous is not None and previous.serving == Serving.WIFI
    if (previous is not None and previous.serving == Serving.VLC
            and snapshot.vlc.get(previous.ap_id, -np.inf) >= policy.vlc_min_sinr_db):
        return previous

    def keep_or_new(kind, ap):
        if previous is not None and previous.serving == kind and previous.ap_id == ap:
            return previous
        return LinkState(kind, ap, time)

    vlc_ap = best_ap(snapshot.vlc)
    threshold = policy.vlc_min_sinr_db + (policy.hysteresis_db if on_wifi else 0.0)
    if vlc_ap is not None and snapshot.vlc[vlc_ap] >= threshold:
        return keep_or_new(Serving.VLC, vlc_ap)
    if snapshot.wifi:
        if on_wifi and previous.ap_id in snapshot.wifi:
            return previous
        return keep_or_new(Serving.WIFI, best_ap(snapshot.wifi))
    return keep_or_new(Serving.VLC, vlc_ap)


@dataclass(frozen=True)
class HandoverDecision:
    ap_id: str
    vertical_recommended: bool
    event: HandoverEvent | None


def intra_vlc_handover(current: str, candidates: Mapping[str, float], policy: HandoverPolicy,
                       time: float = 0.0, ue_id: str = "ue", current_sinr_db: float | None = None
                       ) -> HandoverDecision:
    """Pick the strongest VLC candidate; flag Wi-Fi if none clears the threshold."""
    if not candidates:
        raise ValueError("no VLC candidates")
    chosen = best_ap(candidates)
    before = candidates.get(current, current_sinr_db)
    if before is not None and chosen != current and before == candidates[chosen]:
        chosen = current
    vertical = candidates[chosen] < policy.vlc_min_sinr_db
    event = None
    if chosen != current:
        event = HandoverEvent(time, ue_id, current, chosen, "intra_vlc",
                              float("nan") if before is None else float(before),
                              float(candidates[chosen]))
    return HandoverDecision(chosen, vertical, event)


class FractionCase(str, Enum):
    VLC_DOMINANT = "VlcDominant"
    RF_DOMINANT = "RfDominant"
    EQUAL = "Equal"


@dataclass(frozen=True)
class TimeFractionCase:
    p: float  # share of the session on VLC
    q: float  # share on RF

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ValueError("time fractions must lie in [0, 1]")
        if abs(self.p + self.q - 1.0) > 1e-12:
            raise ValueError("p + q must equal 1")

    @classmethod
    def from_vlc_share(cls, p: float) -> "TimeFractionCase":
        return cls(p, 1.0 - p)

    @property
    def label(self) -> FractionCase:
        if self.p > self.q:
            return FractionCase.VLC_DOMINANT
        if self.q > self.p:
            return FractionCase.RF_DOMINANT
        return FractionCase.EQUAL


CASE_VLC_DOMINANT = TimeFractionCase(0.67, 0.33)
CASE_RF_DOMINANT = TimeFractionCase(0.33, 0.67)
CASE_EQUAL = TimeFractionCase(0.5, 0.5)


@dataclass(frozen=True)
class HybridRate:
    r_vlc: float
    r_rf: float

    @property
    def r_total(self) -> float:
        """Time-weighted sum; a convenience figure, not a per-mode rate."""
        return self.r_vlc + self.r_rf


def compose_hybrid_rate(tf: TimeFractionCase, r_vlc_full: float, r_rf_full: float) -> HybridRate:
    return HybridRate(r_vlc=r_vlc_full * tf.p, r_rf=r_rf_full * tf.q)


def to_db(x):
    with np.errstate(divide="ignore"):
        return 10 * np.log10(x)


@dataclass
class AxisTrace:
    """Per-distance link picture for a UE moving away from a VLC AP at the origin."""
    distance: np.ndarray
    sinr_vlc_db: np.ndarray      # origin AP only
    sinr_vlc_ho_db: np.ndarray   # serving VLC AP with intra-VLC handover
    sinr_wifi_db: np.ndarray
    rate_vlc: np.ndarray
    rate_vlc_ho: np.ndarray
    rate_wifi: np.ndarray
    serving: list[LinkState]
    events: list[HandoverEvent]

    @property
    def rate_hybrid(self) -> np.ndarray:
        on_wifi = np.array([s.serving == Serving.WIFI for s in self.serving])
        return np.where(on_wifi, self.rate_wifi, self.rate_vlc_ho)

    @property
    def on_wifi(self) -> np.ndarray:
        return np.array([s.serving == Serving.WIFI for s in self.serving])


def distance_axis_trace(distances, vlc_ap: vlc.VlcApParams, rx: vlc.VlcReceiverParams,
                        wifi_ap: rf.WifiApParams, policy: HandoverPolicy, fading=1.0,
                        speed: float = 1.0, ue_id: str = "ue-axis") -> AxisTrace:
    """Walk a UE radially outward and record SINRs, serving states and handovers.

    The origin VLC AP and the Wi-Fi AP sit at d = 0; a second VLC AP on an
    orthogonal optical band sits at ``policy.neighbor_offset``, so it adds no
    co-channel interference. Time is distance / speed.
    """
    d = np.asarray(distances, dtype=float)
    if np.any(np.diff(d) <= 0):
        raise ValueError("distances must be strictly increasing")
    offset = policy.neighbor_offset
    s0 = to_db(vlc.boresight_sinr(d, vlc_ap, rx))
    d1 = np.abs(d - offset)
    s1 = np.full_like(d, np.inf)
    s1[d1 > 0] = to_db(vlc.boresight_sinr(d1[d1 > 0], vlc_ap, rx))
    sw = to_db(rf.wifi_sinr_at(np.maximum(d, 0.1), wifi_ap, fading))
    sw = np.broadcast_to(sw, d.shape)

    states, events = [], []
    prev = None
    ho_sinr = np.empty_like(d)
    for k, x in enumerate(d):
        snap = SinrSnapshot(vlc={"vlc-0": s0[k], "vlc-1": s1[k]}, wifi={"wifi-0": sw[k]})
        t = float(x / speed)
        state = select_link(snap, policy, prev, t)
        if prev is None:
            state = LinkState(Serving.VLC, "vlc-0", t) if s0[k] >= policy.vlc_min_sinr_db else state
        elif state != prev:
            reason = ("intra_vlc" if state.serving == prev.serving == Serving.VLC else
                      "vertical_to_wifi" if state.serving == Serving.WIFI else "vertical_to_vlc")
            before = snapshot_sinr(snap, prev)
            events.append(HandoverEvent(t, ue_id, prev.ap_id, state.ap_id, reason,
                                        float(before), float(snapshot_sinr(snap, state))))
        if state.serving == Serving.VLC:
            vlc_serving = state.ap_id
        else:
            vlc_serving = _last_vlc(states) or "vlc-0"
        ho_sinr[k] = snap.vlc[vlc_serving]
        states.append(state)
        prev = state

    rate0 = vlc.vlc_rate(vlc_ap.bandwidth, 10 ** (s0 / 10))
    rate_ho = vlc.vlc_rate(vlc_ap.bandwidth, 10 ** (ho_sinr / 10))
    rate_w = rf.wifi_rate_at(np.maximum(d, 0.1), wifi_ap, fading)
    return AxisTrace(d, s0, ho_sinr, np.array(sw, dtype=float), rate0, rate_ho,
                     np.broadcast_to(rate_w, d.shape).astype(float), states, events)


def _last_vlc(states: list[LinkState]) -> str | None:
    for s in reversed(states):
        if s.serving == Serving.VLC:
            return s.ap_id
    return None


def snapshot_sinr(snap: SinrSnapshot, state: LinkState) -> float:
    table = snap.vlc if state.serving == Serving.VLC else snap.wifi
    return table.get(state.ap_id, float("nan"))
