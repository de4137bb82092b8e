import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridsim import link_manager as lm, vlc
from hybridsim.link_manager import (HandoverPolicy, LinkState, Serving, SinrSnapshot,
                                    TimeFractionCase)

POLICY = HandoverPolicy()


def test_select_link_examples():
    s = lm.select_link(SinrSnapshot({"vlc-0": 10.0}, {"wifi-0": 5.0}), POLICY)
    assert s.serving == Serving.VLC
    s = lm.select_link(SinrSnapshot({"vlc-0": 1.0}, {"wifi-0": 8.0}), POLICY)
    assert (s.serving, s.ap_id) == (Serving.WIFI, "wifi-0")
    s = lm.select_link(SinrSnapshot({"vlc-10": 6.0, "vlc-2": 6.0}), POLICY)
    assert s.ap_id == "vlc-2"
    with pytest.raises(ValueError):
        SinrSnapshot()


def test_hysteresis_on_return_to_vlc():
    on_wifi = LinkState(Serving.WIFI, "wifi-0")
    snap = SinrSnapshot({"vlc-0": 2.5}, {"wifi-0": 0.0})
    assert lm.select_link(snap, POLICY, on_wifi) is on_wifi
    snap = SinrSnapshot({"vlc-0": 3.5}, {"wifi-0": 0.0})
    assert lm.select_link(snap, POLICY, on_wifi).serving == Serving.VLC


def test_intra_handover_examples(model):
    d = lm.intra_vlc_handover("vlc-0", {"vlc-0": 5.0}, POLICY)
    assert d.ap_id == "vlc-0" and d.event is None
    s_cur = 10 * math.log10(vlc.boresight_sinr(90.0, model.vlc_ap, model.receiver))
    s_nb = 10 * math.log10(vlc.boresight_sinr(10.0, model.vlc_ap, model.receiver))
    d = lm.intra_vlc_handover("vlc-0", {"vlc-0": s_cur, "vlc-1": s_nb}, POLICY)
    assert d.ap_id == "vlc-1" and not d.vertical_recommended
    assert d.event.reason == "intra_vlc"
    d = lm.intra_vlc_handover("vlc-0", {"vlc-0": -3.0, "vlc-1": -1.0}, POLICY)
    assert d.ap_id == "vlc-1" and d.vertical_recommended
    with pytest.raises(ValueError):
        lm.intra_vlc_handover("vlc-0", {}, POLICY)


def test_hybrid_rate_examples():
    r = lm.compose_hybrid_rate(TimeFractionCase(0.67, 0.33), 100e6, 10e6)
    assert r.r_vlc == pytest.approx(67e6) and r.r_rf == pytest.approx(3.3e6)
    r = lm.compose_hybrid_rate(lm.CASE_EQUAL, 100e6, 10e6)
    assert (r.r_vlc, r.r_rf) == (50e6, 5e6)
    r = lm.compose_hybrid_rate(TimeFractionCase(1.0, 0.0), 100e6, 10e6)
    assert r.r_rf == 0 and r.r_total == 100e6
    with pytest.raises(ValueError):
        TimeFractionCase(0.7, 0.7)


def test_fraction_labels():
    assert lm.CASE_VLC_DOMINANT.label == lm.FractionCase.VLC_DOMINANT
    assert lm.CASE_RF_DOMINANT.label == lm.FractionCase.RF_DOMINANT
    assert lm.CASE_EQUAL.label == lm.FractionCase.EQUAL


def test_axis_trace_handovers(model):
    d = np.arange(1.0, 151.0)
    tr = lm.distance_axis_trace(d, model.vlc_ap, model.receiver, model.wifi_ap, model.policy)
    kinds = [(e.time_s, e.reason) for e in tr.events]
    assert kinds == [(79.0, "intra_vlc"), (119.0, "vertical_to_wifi")]
    assert np.all(np.diff(tr.sinr_vlc_db) < 0)
    assert np.all(tr.on_wifi[d >= 119]) and not tr.on_wifi[d < 119].any()
    with pytest.raises(ValueError):
        lm.distance_axis_trace(d[::-1], model.vlc_ap, model.receiver, model.wifi_ap, POLICY)


def test_natural_id_order():
    assert sorted(["vlc-10", "vlc-2", "vlc-1"], key=lm.id_key) == ["vlc-1", "vlc-2", "vlc-10"]


sinrs = st.dictionaries(st.sampled_from([f"vlc-{k}" for k in range(6)]),
                        st.floats(-20, 40), min_size=1)


@given(sinrs, st.floats(-20, 40))
def test_selection_only_picks_threshold_vlc(v, w):
    s = lm.select_link(SinrSnapshot(v, {"wifi-0": w}), POLICY)
    if s.serving == Serving.VLC:
        assert v[s.ap_id] >= POLICY.vlc_min_sinr_db
    else:
        assert max(v.values()) < POLICY.vlc_min_sinr_db


@given(sinrs)
def test_selection_deterministic_and_best(v):
    a = lm.select_link(SinrSnapshot(v), POLICY)
    b = lm.select_link(SinrSnapshot(dict(reversed(list(v.items())))), POLICY)
    assert a == b
    assert v[a.ap_id] == max(v.values())


@given(st.floats(0, 1), st.floats(0, 1e9), st.floats(0, 1e9))
def test_hybrid_rate_between_components(p, rv, rr):
    tf = TimeFractionCase.from_vlc_share(p)
    r = lm.compose_hybrid_rate(tf, rv, rr)
    assert min(rv, rr) - 1e-6 <= r.r_total <= max(rv, rr) + 1e-6
