import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridsim import mac
from hybridsim.mac import (CellId, CommandKind, Coordinator, EventKind, Mobility,
                           MobilityObservation, MobilityType, Superframe)


def _cell(bands=3, data_slots=2):
    c = Coordinator(CellId(0, 0), Superframe(data_slots=data_slots, bands=bands))
    return c


def test_first_grant_band0_slot0():
    c = _cell()
    c.associate("a")
    g = mac.request_access("a", c, 0.0)
    assert (g.band, g.slot) == (0, 0)


def test_spill_to_band1_with_multi_info():
    c = _cell()
    for d in "abc":
        c.associate(d)
        c.request_access(d, 0.0)
    assert (c.assignments["c"].band, c.assignments["c"].slot) == (1, 0)
    kinds = [cmd.kind for cmd in c.commands]
    assert kinds == [CommandKind.SRC_MULTI_INFO, CommandKind.DES_MULTI_INFO]
    log = [e.event_kind for e in c.log if e.device == "c"]
    assert log == [EventKind.SRC_MULTI_INFO, EventKind.DES_MULTI_INFO, EventKind.GRANT]


def test_full_cell_rejects():
    c = _cell(bands=1, data_slots=1)
    c.associate("a")
    c.associate("b")
    c.request_access("a", 0.0)
    assert c.request_access("b", 0.0) is None
    assert c.log[-1].event_kind == EventKind.REJECT
    with pytest.raises(ValueError):
        c.request_access("stranger", 0.0)


def test_detect_mobility():
    c = _cell()
    c.associate("a")
    c.request_access("a", 0.0)
    assert mac.detect_mobility(c, "a", True, 100.0) == Mobility.STATIONARY
    assert mac.detect_mobility(c, "a", False, 200.0) == Mobility.MOVED_CANDIDATE
    with pytest.raises(ValueError):
        c.detect_mobility("nobody", True, 0.0)


def test_neighbor_reassociate_cases():
    cells = mac.line_of_cells(3)
    src = CellId(1, 0)
    assert mac.neighbor_reassociate("d", src, cells, (8.0, 0.0)) == CellId(2, 0)
    assert mac.neighbor_reassociate("d", src, cells, (0.0, 0.0)) == CellId(0, 0)
    assert mac.neighbor_reassociate("d", src, cells, (4.5, 0.0)) == src
    assert mac.neighbor_reassociate("d", src, cells, (4.0, 100.0)) is None


def test_classify_mobility():
    p = MobilityObservation
    crossing = [p(0, (0.0, 0.0), CellId(0, 0), 0), p(1, (4.0, 0.0), CellId(1, 0), 0)]
    assert mac.classify_mobility(crossing) == MobilityType.PHYSICAL
    switch = [p(0, (0.0, 0.0), CellId(0, 0), 0), p(1, (0.0, 0.0), CellId(0, 0), 1, "interference")]
    assert mac.classify_mobility(switch) == MobilityType.LOGICAL
    with pytest.raises(ValueError):
        mac.classify_mobility([])


def test_command_payload_rule():
    with pytest.raises(ValueError):
        mac.MacCommand(CommandKind.SRC_MULTI_INFO, "a")
    with pytest.raises(ValueError):
        CellId(-1, 0)
    with pytest.raises(ValueError):
        mac.MacSimulator(probe_delay_ms=100.0)


def test_band_switch_on_interference():
    c = _cell()
    c.associate("a")
    c.request_access("a", 0.0)
    new = c.switch_band("a", 5.0)
    assert new.band == 1
    assert c.log[-1].event_kind == EventKind.BAND_SWITCH


def test_simulated_false_alarm_keeps_cell():
    sim = mac.MacSimulator(n_cells=3, seed=1)
    sched = mac.Schedule(arrivals=[(0.0, "d", CellId(1, 0), (4.0, 0.0))],
                         ack_loss=[(450.0, "d")])
    log = sim.run(sched, 1000.0)
    assert any(e.event_kind == EventKind.MOVED_CANDIDATE for e in log)
    assert sim.cells[CellId(1, 0)].assignments.get("d") is not None
    assert not any(e.event_kind == EventKind.REASSOCIATE for e in log)


def test_simulated_move_reassociates():
    sim = mac.MacSimulator(n_cells=3, seed=2)
    sched = mac.Schedule(arrivals=[(0.0, "d", CellId(1, 0), (4.0, 0.0))],
                         moves=[(350.0, "d", (8.2, 0.0))])
    log = sim.run(sched, 1000.0)
    re = [e for e in log if e.event_kind == EventKind.REASSOCIATE]
    assert [(e.cell_i, e.time_ms) for e in re] == [(2, 410.0)]
    assert "d" in sim.cells[CellId(2, 0)].assignments


@given(st.lists(st.text("abcdefgh", min_size=1, max_size=3), unique=True, max_size=20),
       st.integers(0, 2 ** 32))
def test_random_access_resolves_everyone(devices, seed):
    out = mac.slotted_random_access(devices, np.random.default_rng(seed), 8)
    won = [d for d, _ in out.winners]
    assert sorted(won + out.failed) == sorted(devices)
    slots = [s for _, s in out.winners]
    assert len(set(slots)) == len(slots) and slots == sorted(slots)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_trace_time_ordered_and_assignments_unique(seed):
    sim = mac.MacSimulator(seed=seed)
    log = sim.run(mac.random_schedule(seed), 2000.0)
    times = [e.time_ms for e in log]
    assert times == sorted(times)
    for cell in sim.cells.values():
        pairs = [(a.band, a.slot) for a in cell.assignments.values()]
        assert len(pairs) == len(set(pairs))


def test_trace_csv_header():
    text = mac.trace_to_csv([mac.TraceEvent(0.0, 0, 0, "a", EventKind.GRANT, 0, 0)])
    assert text.splitlines() == [",".join(mac.TraceEvent.CSV_HEADER), "0.0,0,0,a,grant,0,0"]
