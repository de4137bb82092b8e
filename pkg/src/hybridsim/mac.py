"""Discrete-event model of OWC cell coordination and mobility management.

Each optical element ``CellId(i, j)`` has a coordinator that runs beacon
superframes, grants (band, slot) pairs after slotted random access in the
contention access period, spills onto extra optical bands when band 0 is
full, and tracks devices through their uplink acknowledgements.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

import numpy as np


@dataclass(frozen=True, order=True)
class CellId:
    i: int
    j: int

    def __post_init__(self):
        if self.i < 0 or self.j < 0:
            raise ValueError("cell indices must be non-negative")

    def probe_order(self) -> list["CellId"]:
        """Neighbours searched for a lost device: (i+1, j) then (i-1, j)."""
        out = [CellId(self.i + 1, self.j)]
        if self.i > 0:
            out.append(CellId(self.i - 1, self.j))
        return out


@dataclass(frozen=True)
class Superframe:
    beacon_interval_ms: float = 100.0
    cap_slots: int = 8
    data_slots: int = 16
    bands: int = 3

    def __post_init__(self):
        if self.cap_slots < 1 or self.bands < 1 or self.data_slots < 1:
            raise ValueError("cap_slots, data_slots and bands must be >= 1")

    @property
    def slot_ms(self) -> float:
        return self.beacon_interval_ms / (self.cap_slots + self.data_slots)


@dataclass(frozen=True)
class BandAssignment:
    device: str
    band: int
    slot: int
    granted_at: float


class CommandKind(str, Enum):
    SRC_MULTI_INFO = "SrcMultiInfo"
    DES_MULTI_INFO = "DesMultiInfo"
    DATA_REQUEST = "DataRequest"
    ACK = "Ack"
    BEACON = "Beacon"


@dataclass(frozen=True)
class MacCommand:
    kind: CommandKind
    device: str
    payload: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind in (CommandKind.SRC_MULTI_INFO, CommandKind.DES_MULTI_INFO) and not self.payload:
            raise ValueError(f"{self.kind.value} must carry a band list")


class Mobility(str, Enum):
    STATIONARY = "Stationary"
    MOVED_CANDIDATE = "MovedCandidate"


class MobilityType(str, Enum):
    PHYSICAL = "Physical"
    LOGICAL = "Logical"


class EventKind(str, Enum):
    ARRIVAL = "arrival"
    COLLISION = "collision"
    ACCESS_FAILED = "access_failed"
    SRC_MULTI_INFO = "src_multi_info"
    DES_MULTI_INFO = "des_multi_info"
    GRANT = "grant"
    REJECT = "reject"
    RELEASE = "release"
    ACK = "ack"
    MOVED_CANDIDATE = "moved_candidate"
    REASSOCIATE = "reassociate"
    NOT_FOUND = "not_found"
    BAND_SWITCH = "band_switch"
    MOVE = "move"


@dataclass(frozen=True)
class TraceEvent:
    time_ms: float
    cell_i: int
    cell_j: int
    device: str
    event_kind: EventKind
    band: int = -1
    slot: int = -1

    CSV_HEADER = ("time_ms", "cell_i", "cell_j", "device", "event_kind", "band", "slot")

    def row(self) -> tuple:
        return (self.time_ms, self.cell_i, self.cell_j, self.device, self.event_kind.value,
                self.band, self.slot)


class Coordinator:
    def __init__(self, cell_id: CellId, superframe: Superframe = Superframe(),
                 center: tuple[float, float] = (0.0, 0.0), radius: float = 2.0,
                 log: list[TraceEvent] | None = None):
        self.cell_id = cell_id
        self.superframe = superframe
        self.center = center
        self.radius = radius
        self.log = log if log is not None else []
        self.associated: set[str] = set()
        self.assignments: dict[str, BandAssignment] = {}
        self._occupied: dict[tuple[int, int], str] = {}
        self.commands: list[MacCommand] = []

    def _emit(self, time, device, kind, band=-1, slot=-1):
        self.log.append(TraceEvent(time, self.cell_id.i, self.cell_id.j, device, kind, band, slot))

    def associate(self, device: str):
        self.associated.add(device)

    def hears(self, position, scale: float = 1.0) -> bool:
        return math.dist(self.center, position[:2]) <= self.radius * scale

    def _free(self, bands: Iterable[int]):
        for band in bands:
            for slot in range(self.superframe.data_slots):
                if (band, slot) not in self._occupied:
                    return band, slot
        return None

    def _grant(self, device, band, slot, time) -> BandAssignment:
        a = BandAssignment(device, band, slot, time)
        self.assignments[device] = a
        self._occupied[(band, slot)] = device
        self._emit(time, device, EventKind.GRANT, band, slot)
        return a

    def request_access(self, device: str, time: float,
                       avoid_bands: Iterable[int] = ()) -> BandAssignment | None:
        """Grant a data slot; extra bands need the multi-band command exchange.

        Returns None, after logging a rejection, when every pair is taken.
        """
        if device not in self.associated:
            raise ValueError(f"{device} is not associated with cell {self.cell_id}")
        if device in self.assignments:
            return self.assignments[device]
        avoid = set(avoid_bands)
        if 0 not in avoid:
            pair = self._free([0])
            if pair is not None:
                return self._grant(device, *pair, time)
        extra = [b for b in range(1, self.superframe.bands) if b not in avoid]
        pair = self._free(extra)
        if pair is None:
            self._emit(time, device, EventKind.REJECT)
            return None
        bands = tuple(extra)
        self.commands.append(MacCommand(CommandKind.SRC_MULTI_INFO, device, bands))
        self._emit(time, device, EventKind.SRC_MULTI_INFO, pair[0])
        self.commands.append(MacCommand(CommandKind.DES_MULTI_INFO, device, bands))
        self._emit(time, device, EventKind.DES_MULTI_INFO, pair[0])
        return self._grant(device, *pair, time)

    def release(self, device: str, time: float):
        a = self.assignments.pop(device, None)
        if a is not None:
            del self._occupied[(a.band, a.slot)]
            self._emit(time, device, EventKind.RELEASE, a.band, a.slot)
        self.associated.discard(device)

    def switch_band(self, device: str, time: float) -> BandAssignment | None:
        """Move a device off its current band, e.g. after interference."""
        old = self.assignments[device]
        del self.assignments[device]
        del self._occupied[(old.band, old.slot)]
        self._emit(time, device, EventKind.RELEASE, old.band, old.slot)
        new = self.request_access(device, time, avoid_bands=[old.band])
        if new is not None:
            self._emit(time, device, EventKind.BAND_SWITCH, new.band, new.slot)
        return new

    def detect_mobility(self, device: str, ack_received: bool, time: float) -> Mobility:
        if device not in self.assignments:
            raise ValueError(f"{device} holds no assignment in cell {self.cell_id}")
        if ack_received:
            self._emit(time, device, EventKind.ACK)
            return Mobility.STATIONARY
        self._emit(time, device, EventKind.MOVED_CANDIDATE)
        return Mobility.MOVED_CANDIDATE

    def active_pairs(self) -> dict[tuple[int, int], str]:
        return dict(self._occupied)


def request_access(device: str, cell: Coordinator, time: float) -> BandAssignment | None:
    return cell.request_access(device, time)


def detect_mobility(cell: Coordinator, device: str, ack_received: bool, time: float) -> Mobility:
    return cell.detect_mobility(device, ack_received, time)


COVERAGE_SCALES = (1.0, 1.25, 1.5, 1.75, 2.0)


def neighbor_reassociate(device: str, src: CellId, cells: Mapping[CellId, Coordinator],
                         position, scales: Iterable[float] = COVERAGE_SCALES) -> CellId | None:
    """Find the cell now hearing a device flagged as moved.

    The source cell is re-probed first so a missed acknowledgement from a
    device that never left keeps its cell. Coverage grows in steps up to
    2x before giving up; None means not found.
    """
    order = [src] + src.probe_order()
    for scale in scales:
        for cid in order:
            cell = cells.get(cid)
            if cell is not None and cell.hears(position, scale):
                return cid
    return None


@dataclass(frozen=True)
class MobilityObservation:
    time: float
    position: tuple[float, ...]
    cell: CellId
    band: int
    cause: str = ""  # e.g. "interference"


def classify_mobility(trace: list[MobilityObservation]) -> MobilityType:
    """Physical if the link changed while the device moved, else Logical."""
    if not trace:
        raise ValueError("empty mobility trace")
    for a, b in zip(trace, trace[1:]):
        link_changed = a.cell != b.cell or a.band != b.band
        moved = not np.allclose(a.position, b.position)
        if link_changed and moved:
            return MobilityType.PHYSICAL
    if any(not np.allclose(trace[0].position, o.position) for o in trace[1:]) and \
            trace[0].cell != trace[-1].cell:
        return MobilityType.PHYSICAL
    return MobilityType.LOGICAL


@dataclass
class AccessOutcome:
    winners: list[tuple[str, int]]               # (device, slot) in slot order
    failed: list[str]                            # hit the retry limit
    collisions: list[tuple[int, list[str]]]      # (slot, colliding devices)


def slotted_random_access(devices: list[str], rng: np.random.Generator, cap_slots: int,
                          retry_limit: int = 8) -> AccessOutcome:
    """Resolve contention over CAP slots.

    Every contender picks a slot uniformly; a lone transmitter succeeds and
    a collision sends each party into a fresh uniform backoff. Slot indices
    run on past the first CAP.
    """
    next_slot = {d: int(rng.integers(cap_slots)) for d in devices}
    attempts = {d: 0 for d in devices}
    out = AccessOutcome([], [], [])
    while next_slot:
        s = min(next_slot.values())
        tx = sorted(d for d, k in next_slot.items() if k == s)
        if len(tx) == 1:
            out.winners.append((tx[0], s))
            del next_slot[tx[0]]
            continue
        out.collisions.append((s, tx))
        for d in tx:
            attempts[d] += 1
            if attempts[d] > retry_limit:
                out.failed.append(d)
                del next_slot[d]
            else:
                next_slot[d] = s + 1 + int(rng.integers(cap_slots))
    return out


@dataclass
class Schedule:
    arrivals: list[tuple[float, str, CellId, tuple[float, float]]] = field(default_factory=list)
    moves: list[tuple[float, str, tuple[float, float]]] = field(default_factory=list)
    interference: list[tuple[float, CellId, int]] = field(default_factory=list)
    ack_loss: list[tuple[float, str]] = field(default_factory=list)


def line_of_cells(n: int, superframe: Superframe = Superframe(), spacing: float = 4.0,
                  radius: float = 2.0, log: list[TraceEvent] | None = None
                  ) -> dict[CellId, Coordinator]:
    log = [] if log is None else log
    return {CellId(i, 0): Coordinator(CellId(i, 0), superframe, (i * spacing, 0.0), radius, log)
            for i in range(n)}


class MacSimulator:
    """Event loop over beacons, arrivals, moves, interference and CAP outcomes.

    Contention is resolved at each beacon; the resulting collisions and
    grants are queued at their slot times so the trace stays time-ordered.
    Devices that do not win within the CAP contend again next superframe.
    """

    _PRIORITY = {"move": 0, "ack_loss": 1, "interference": 2, "arrival": 3, "beacon": 4,
                 "collision": 5, "grant": 6, "reassociate": 7}

    def __init__(self, n_cells: int = 5, superframe: Superframe = Superframe(), seed: int = 0,
                 spacing: float = 4.0, radius: float = 2.0, probe_delay_ms: float = 10.0):
        if not 0 < probe_delay_ms < superframe.beacon_interval_ms:
            raise ValueError("probe delay must be shorter than the beacon interval")
        self.superframe = superframe
        self.log: list[TraceEvent] = []
        self.cells = line_of_cells(n_cells, superframe, spacing, radius, self.log)
        self.rng = np.random.default_rng(seed)
        self.probe_delay_ms = probe_delay_ms
        self.position: dict[str, tuple[float, float]] = {}
        self.pending: dict[CellId, list[str]] = {c: [] for c in self.cells}
        # (time, device, source cell, position at detection)
        self.detections: list[tuple[float, str, CellId, tuple]] = []
        self._lost_acks: set[str] = set()
        self._queue: list = []
        self._seq = 0

    def _push(self, time, kind, payload):
        heapq.heappush(self._queue, (time, self._PRIORITY[kind], self._seq, kind, payload))
        self._seq += 1

    def run(self, schedule: Schedule, horizon_ms: float) -> list[TraceEvent]:
        for t, dev, cid, pos in schedule.arrivals:
            if cid not in self.cells:
                raise ValueError(f"arrival into unknown cell {cid}")
            self._push(t, "arrival", (dev, cid, pos))
        for t, dev, pos in schedule.moves:
            self._push(t, "move", (dev, pos))
        for t, cid, band in schedule.interference:
            self._push(t, "interference", (cid, band))
        for t, dev in schedule.ack_loss:
            self._push(t, "ack_loss", dev)
        bi = self.superframe.beacon_interval_ms
        for k in range(int(horizon_ms // bi) + 1):
            self._push(k * bi, "beacon", None)
        while self._queue:
            t, _, _, kind, payload = heapq.heappop(self._queue)
            if t > horizon_ms:
                break
            getattr(self, f"_on_{kind}")(t, payload)
        return self.log

    def _cell_log(self, t, cid, dev, kind, band=-1, slot=-1):
        self.log.append(TraceEvent(t, cid.i, cid.j, dev, kind, band, slot))

    def _on_arrival(self, t, payload):
        dev, cid, pos = payload
        self.position[dev] = pos
        self.cells[cid].associate(dev)
        self.pending[cid].append(dev)
        self._cell_log(t, cid, dev, EventKind.ARRIVAL)

    def _on_move(self, t, payload):
        dev, pos = payload
        self.position[dev] = pos
        self._lost_acks.discard(dev)

    def _on_ack_loss(self, t, dev):
        self._lost_acks.add(dev)

    def _on_interference(self, t, payload):
        cid, band = payload
        cell = self.cells[cid]
        for dev in sorted(d for d, a in cell.assignments.items() if a.band == band):
            cell.switch_band(dev, t)

    def _on_beacon(self, t, _):
        sf = self.superframe
        for cid in sorted(self.cells):
            cell = self.cells[cid]
            for dev in sorted(cell.assignments):
                heard = cell.hears(self.position[dev]) and dev not in self._lost_acks
                self._lost_acks.discard(dev)
                if cell.detect_mobility(dev, heard, t) == Mobility.MOVED_CANDIDATE:
                    self.detections.append((t, dev, cid, self.position[dev]))
                    self._push(t + self.probe_delay_ms, "reassociate", (dev, cid))
            contenders = sorted(self.pending[cid])
            self.pending[cid] = []
            if not contenders:
                continue
            out = slotted_random_access(contenders, self.rng, sf.cap_slots)
            for s, tx in out.collisions:
                if s < sf.cap_slots:
                    self._push(t + (s + 1) * sf.slot_ms, "collision", (cid, tx))
            for dev, s in out.winners:
                if s < sf.cap_slots:
                    self._push(t + (s + 1) * sf.slot_ms, "grant", (cid, dev))
                else:
                    self.pending[cid].append(dev)
            for dev in out.failed:
                self._cell_log(t, cid, dev, EventKind.ACCESS_FAILED)
                self.pending[cid].append(dev)

    def _on_collision(self, t, payload):
        cid, devices = payload
        for dev in devices:
            self._cell_log(t, cid, dev, EventKind.COLLISION)

    def _on_grant(self, t, payload):
        cid, dev = payload
        cell = self.cells[cid]
        if dev in cell.associated:
            cell.request_access(dev, t)

    def _on_reassociate(self, t, payload):
        dev, src = payload
        cell = self.cells[src]
        if dev not in cell.assignments:
            return
        found = neighbor_reassociate(dev, src, self.cells, self.position[dev])
        if found == src:
            return
        cell.release(dev, t)
        if found is None:
            self._cell_log(t, src, dev, EventKind.NOT_FOUND)
            return
        new = self.cells[found]
        new.associate(dev)
        self._cell_log(t, found, dev, EventKind.REASSOCIATE)
        new.request_access(dev, t)


def trace_to_csv(events: Iterable[TraceEvent]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TraceEvent.CSV_HEADER)
    for e in events:
        w.writerow(e.row())
    return buf.getvalue()


def random_schedule(seed: int, n_cells: int = 5, n_devices: int = 12, horizon_ms: float = 2000.0,
                    superframe: Superframe = Superframe(), spacing: float = 4.0,
                    radius: float = 2.0) -> Schedule:
    """Arrivals, moves (in-cell, to a neighbour, or out of range) and interference."""
    rng = np.random.default_rng(seed)
    sched = Schedule()
    bi = superframe.beacon_interval_ms
    for k in range(n_devices):
        dev = f"dev-{k}"
        i = int(rng.integers(n_cells))
        t0 = float(rng.uniform(0, horizon_ms / 2))
        pos = (i * spacing + float(rng.uniform(-0.8, 0.8)) * radius, 0.0)
        sched.arrivals.append((t0, dev, CellId(i, 0), pos))
        if rng.random() < 0.7:
            tm = t0 + bi * float(rng.integers(2, 6)) + float(rng.uniform(1, bi - 1))
            r = rng.random()
            if r < 0.5:
                step = 1 if (rng.random() < 0.5 and i + 1 < n_cells) or i == 0 else -1
                dest = ((i + step) * spacing + float(rng.uniform(-0.5, 0.5)) * radius, 0.0)
            elif r < 0.8:
                dest = (i * spacing + float(rng.uniform(-0.8, 0.8)) * radius, 0.0)
            else:
                dest = (i * spacing, 50.0 * radius)
            sched.moves.append((tm, dev, dest))
        if rng.random() < 0.1:
            sched.ack_loss.append((t0 + bi * float(rng.integers(3, 8)) + 1.0, dev))
    for _ in range(int(rng.integers(0, 3))):
        sched.interference.append((float(rng.uniform(0, horizon_ms)),
                                   CellId(int(rng.integers(n_cells)), 0),
                                   int(rng.integers(superframe.bands))))
    return sched
