import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybridsim import rf

FSPL_1M = 20 * math.log10(4 * math.pi * 2.4e9 / 3e8)


def test_path_loss_examples():
    assert rf.path_loss_db(1.0, 2.4e9) == pytest.approx(FSPL_1M, rel=1e-9)
    assert rf.path_loss_db(1.0, 2.4e9) == pytest.approx(40.05, abs=0.01)
    assert rf.path_loss_db(10.0, 2.4e9, 3.0) == pytest.approx(FSPL_1M + 30.0, rel=1e-12)
    with pytest.raises(ValueError):
        rf.path_loss_db(0.01, 2.4e9)


def test_channel_gain_examples():
    assert rf.rf_channel_gain(10.0, 0.0, 2.4e9) == 0.0
    h = rf.rf_channel_gain(10.0, 1.0, 2.4e9)
    assert h == pytest.approx(math.sqrt(10 ** (-(FSPL_1M + 30) / 10)), rel=1e-9)
    assert h == pytest.approx(3.14e-4, rel=2e-3)
    with pytest.raises(ValueError):
        rf.rf_channel_gain(10.0, -1.0, 2.4e9)


def test_sinr_examples():
    assert rf.rf_sinr(0.0, 1.0, 1e6, 1e-20) == 0.0
    n0, db = 1e-20, 1e6
    h = math.sqrt(n0 * db)
    assert rf.rf_sinr(h, 1.0, db, n0) == pytest.approx(1.0, rel=1e-12)
    assert rf.rf_sinr(h, 1.0, db, n0, n0 * db) == pytest.approx(0.5, rel=1e-12)


def test_subchannel_rates():
    n0, db = 1e-20, 1e5
    h = math.sqrt(n0 * db)
    empty = rf.SubchannelAllocation(frozenset(), db, 1.0)
    assert rf.rf_rate_subchannels(empty, {}, n0) == 0.0
    one = rf.SubchannelAllocation(frozenset({0}), db, 1.0)
    assert rf.rf_rate_subchannels(one, {0: h}, n0) == pytest.approx(db, rel=1e-12)
    four = rf.SubchannelAllocation(frozenset(range(4)), db, 1.0)
    assert rf.rf_rate_subchannels(four, {q: h for q in range(4)}, n0) == pytest.approx(4 * db)


def test_subchannel_allocation_limits():
    bad = rf.SubchannelAllocation(frozenset(range(30)), 1e5, 0.1)
    with pytest.raises(ValueError):
        bad.validate(2e6, 10.0)


def test_shared_rate_examples():
    n0, b = 1e-20, 2e6
    h = math.sqrt(n0 * b / 10.0)
    assert rf.rf_rate_shared(b, h, 10.0, n0, 1) == pytest.approx(2e6, rel=1e-9)
    assert rf.rf_rate_shared(b, h, 10.0, n0, 2) == pytest.approx(1e6, rel=1e-9)
    assert rf.rf_rate_shared(b, 0.0, 10.0, n0, 1) == 0.0
    with pytest.raises(ValueError):
        rf.rf_rate_shared(b, h, 10.0, n0, 0)


def test_noise_interpretation():
    ap = rf.WifiApParams()
    # -90 dBm over 2 MHz -> about -153 dBm/Hz
    assert 10 * math.log10(ap.n0 * 1e3) == pytest.approx(-90 - 10 * math.log10(2e6), rel=1e-12)
    assert ap.p_on <= ap.p_max


def test_fading_unit_power_and_determinism():
    a = rf.rayleigh_fading(np.random.default_rng(7), 100_000)
    b = rf.rayleigh_fading(np.random.default_rng(7), 100_000)
    assert np.array_equal(a, b)
    assert np.mean(a ** 2) == pytest.approx(1.0, abs=0.01)
    assert np.all(a >= 0)


@given(st.floats(0.1, 200.0), st.floats(1.0, 3.0))
def test_path_loss_monotone(d, k):
    assert rf.path_loss_db(d * k + 1e-6, 2.4e9) > rf.path_loss_db(d, 2.4e9)


@given(st.floats(1e-3, 10.0), st.floats(1.01, 4.0))
def test_rates_increase_with_power(p, k):
    n0 = rf.WifiApParams().n0
    h = rf.rf_channel_gain(20.0, 1.0, 2.4e9)
    assert rf.rf_rate_shared(2e6, h, p * k, n0, 1) > rf.rf_rate_shared(2e6, h, p, n0, 1) >= 0
    alloc_lo = rf.SubchannelAllocation(frozenset(range(4)), 5e5, p / 4)
    alloc_hi = rf.SubchannelAllocation(frozenset(range(4)), 5e5, p * k / 4)
    hs = {q: h for q in range(4)}
    assert rf.rf_rate_subchannels(alloc_hi, hs, n0) > rf.rf_rate_subchannels(alloc_lo, hs, n0) >= 0
