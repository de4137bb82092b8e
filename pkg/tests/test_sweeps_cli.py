import json

import numpy as np
import pytest

from hybridsim import cli, sweeps
from hybridsim.sweeps import SweepError, SweepSpec

FAST = ("SinrVsDistance", "EeVsDistance", "BatteryVsDistance", "SarVsDepth", "PdVsDepth",
        "ComplexityVsDistance", "MacTrace")


@pytest.fixture(scope="module")
def suite(tmp_path_factory, scenario):
    out = tmp_path_factory.mktemp("suite")
    return out, sweeps.run_suite(scenario, out, kinds=FAST)


def test_sinr_columns(suite):
    _, res = suite
    assert res["SinrVsDistance"].header == ("d_m", "sinr_vlc_db", "sinr_vlc_ho_db", "sinr_wifi_db")


def test_temp_field_columns(scenario):
    spec = SweepSpec("TempField", ("Hybrid", "PureVlc"), (0.0, 20.0, 10.0))
    res = sweeps.run_sweep(scenario, spec)
    assert res.header == ("depth_mm", "time_s", "dt_hybrid_c", "dt_purevlc_c")
    assert len(res.rows) == 3 * 140  # skin cells down to 2.8 mm
    assert res.rows[0][:2] == (1e-2, 0.0)


@pytest.mark.parametrize("rng", [(0.0, 10.0, 0.0), (5.0, 1.0, 1.0), (0.0, float("nan"), 1.0)])
def test_bad_ranges(rng):
    with pytest.raises(SweepError):
        SweepSpec("SinrVsDistance", x_range=rng).validate()


def test_bad_modes_and_distance(scenario):
    with pytest.raises(SweepError):
        SweepSpec("SarVsDepth", ("Laser",)).validate()
    with pytest.raises(SweepError):
        SweepSpec("NoSuchKind").validate()
    with pytest.raises(SweepError):
        sweeps.run_sweep(scenario, SweepSpec("SinrVsDistance", x_range=(0.0, 10.0, 1.0)))


def test_axis_includes_stop():
    ax = SweepSpec("SarVsDepth").resolved().axis()
    assert len(ax) == 141 and ax[-1] == pytest.approx(2.8)


def test_files_carry_hashes_and_verify(suite, scenario):
    out, _ = suite
    for kind in FAST:
        path = out / sweeps.FILE_NAMES[kind]
        meta = sweeps.read_csv(path).metadata
        assert meta["config_sha256"] == scenario.digest()
        assert meta["calibrated"] == "true"
        assert sweeps.verify_csv(path, scenario.digest()) == []
    assert sweeps.verify_csv(out / "handover_log.csv") == []


def test_verify_catches_tampering(tmp_path, suite):
    out, _ = suite
    src = (out / "sar_vs_depth.csv").read_text()
    bad = tmp_path / "bad.csv"
    bad.write_text(src.replace("0.0,", "0.5,", 1))
    assert any("data hash" in p for p in sweeps.verify_csv(bad))
    assert sweeps.verify_csv(out / "sar_vs_depth.csv", "0" * 64)


def test_report_definitions(suite):
    _, res = suite
    s = sweeps.report_summary(list(res.values()))
    sar, pd = res["SarVsDepth"], res["PdVsDepth"]
    v = sar.column("sar_vlc_30m_w_per_kg").sum() + sar.column("sar_vlc_80m_w_per_kg").sum()
    w = sar.column("sar_wifi_30m_w_per_kg").sum() + sar.column("sar_wifi_80m_w_per_kg").sum()
    assert s["sar_reduction_pct"] == pytest.approx(100 * (1 - v / w), rel=1e-12)
    assert s["status"] == "calibrated"
    same = sweeps.report_summary([sar, pd], "WiFi", "WiFi")
    assert same["sar_reduction_pct"] == 0.0 and same["absorbed_pd_reduction_pct"] == 0.0


def test_report_missing_sweep(suite):
    _, res = suite
    with pytest.raises(SweepError, match="SarVsDepth"):
        sweeps.report_summary([res["PdVsDepth"]])


def test_point_rng_independent_of_order():
    a = [sweeps.point_rng(7, i).random() for i in range(5)]
    b = [sweeps.point_rng(7, i).random() for i in reversed(range(5))][::-1]
    assert a == b


def test_random_fading_differs_by_seed(scenario):
    r1 = sweeps.run_sweep(scenario, SweepSpec("SinrVsDistance", seed=1, deterministic_fading=False))
    r2 = sweeps.run_sweep(scenario, SweepSpec("SinrVsDistance", seed=2, deterministic_fading=False))
    r1b = sweeps.run_sweep(scenario, SweepSpec("SinrVsDistance", seed=1, deterministic_fading=False))
    assert r1.data_text() == r1b.data_text() != r2.data_text()
    assert np.array_equal(r1.column("sinr_vlc_db"), r2.column("sinr_vlc_db"))


def test_floor_handover_trace(scenario):
    events = sweeps.floor_handover_trace(scenario, dt=1.0)
    assert events == sweeps.floor_handover_trace(scenario, dt=1.0)
    for e in events:
        assert e.reason in ("intra_vlc", "intra_wifi", "vertical_to_wifi", "vertical_to_vlc")


# CLI

def test_cli_validate(capsys):
    assert cli.main(["validate", "--strict-paper"]) == 0
    assert "6 Wi-Fi APs, 4 VLC APs" in capsys.readouterr().out


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["run", "SinrVsDistance", "--range", "1:10:0", "--out", str(tmp_path)]) == 2
    assert cli.main(["validate", str(tmp_path / "nope.yaml")]) == 2
    bad = tmp_path / "x.csv"
    bad.write_text("# kind: Sar\nd,x\n1,2\n")
    assert cli.main(["verify", str(bad)]) == 3
    with pytest.raises(SystemExit):
        cli.main(["run", "SinrVsDistance", "--seed", "-1"])


def test_cli_run_report_verify(tmp_path, capsys):
    for kind in ("SarVsDepth", "PdVsDepth", "EeVsDistance"):
        assert cli.main(["run", kind, "--out", str(tmp_path)]) == 0
    assert cli.main(["report", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "calibrated"
    assert cli.main(["verify", str(tmp_path), "--scenario", "campus_floor3"]) == 0
    assert summary["ee_fading"] == "rayleigh"
    # a seed override is part of the hashed configuration
    other = tmp_path / "seeded"
    assert cli.main(["run", "SinrVsDistance", "--out", str(other), "--seed", "5"]) == 0
    assert cli.main(["verify", str(other)]) == 0
    assert cli.main(["verify", str(other), "--scenario", "campus_floor3"]) == 3


def test_cli_mac_sim(tmp_path, capsys):
    assert cli.main(["mac-sim", "--out", str(tmp_path), "--range", "0:500:50"]) == 0
    res = sweeps.read_csv(tmp_path / "mac_trace.csv")
    assert res.header[:2] == ("time_ms", "cell_i")
