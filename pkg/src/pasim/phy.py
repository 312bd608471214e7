"""Physical-layer model: timing parameters, frames, topology, and the
shared medium.

The channel registers each transmission over a half-open interval
[start, start + airtime) and resolves three things:

* carrier sense: every station that can sense the transmitter gets busy
  start/end callbacks (a station never senses its own transmission);
* collisions: two overlapping transmissions corrupt each other at any
  receiver that could have decoded both; energy that is sensed but not
  decodable does not corrupt a reception;
* half-duplex: a station transmitting during a frame addressed to it
  cannot receive that frame.

Frames are delivered at their end time, after all busy-end callbacks for
that instant have run. Every frame also reaches third parties that can
decode it (as an overheard frame), so virtual carrier sense works.

When a frame is corrupted, stations that would have decoded it get an
on_collision_residue callback at its end: the medium just carried
something unintelligible, so they hold off for the ack-wait duration
before contending again. Without that hold, the shorter frame's sender
would recover from every collision earlier than the longer frame's
sender (whose timeout runs after its own, longer transmission) and win
the next contention almost surely, skewing packet counts between rates.
Sense-only energy never triggers the hold; it stays plain busy time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import Engine, US


def _div_round(num: int, den: int) -> int:
    """num/den rounded half-up, exact in integers."""
    return (2 * num + den) // (2 * den)


@dataclass
class PhyParams:
    """Timing and framing constants of the modeled PHY/MAC (802.11b DSSS)."""

    slot_ns: int = 20 * US
    sifs_ns: int = 10 * US
    difs_ns: int = 50 * US
    cw_min: int = 31
    cw_max: int = 1023
    retry_limit: int = 7
    plcp_ns: int = 192 * US
    control_rate_bps: int = 1_000_000
    ack_bytes: int = 14
    rts_bytes: int = 20
    cts_bytes: int = 14
    mac_overhead_bytes: int = 48
    rates: tuple[int, ...] = (1_000_000, 2_000_000, 5_500_000, 11_000_000)

    def __post_init__(self):
        for name in ("slot_ns", "sifs_ns", "difs_ns", "plcp_ns",
                     "control_rate_bps", "ack_bytes", "rts_bytes",
                     "cts_bytes", "mac_overhead_bytes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (0 < self.cw_min < self.cw_max):
            raise ValueError("need 0 < cw_min < cw_max")
        for cw in (self.cw_min, self.cw_max):
            if (cw + 1) & cw:
                raise ValueError(f"cw value {cw} is not a power of two minus 1")
        if self.retry_limit < 0:
            raise ValueError("retry_limit must be >= 0")
        if self.sifs_ns >= self.difs_ns:
            raise ValueError("SIFS must be shorter than DIFS")
        if not self.rates or any(r <= 0 for r in self.rates):
            raise ValueError("rates must be positive")

    def data_airtime_ns(self, payload_bytes: int, rate_bps: int) -> int:
        """On-air time of a data frame: preamble plus MAC frame at rate_bps."""
        if payload_bytes < 0:
            raise ValueError("payload_bytes must be >= 0")
        if rate_bps not in self.rates:
            raise ValueError(f"rate {rate_bps} bps is not a configured rate")
        bits = 8 * (payload_bytes + self.mac_overhead_bytes)
        return self.plcp_ns + _div_round(bits * 1_000_000_000, rate_bps)

    def airtime_ns(self, kind: str, payload_bytes: int, rate_bps: int) -> int:
        """Airtime of any frame kind; control frames ignore payload/rate."""
        if kind == "data":
            return self.data_airtime_ns(payload_bytes, rate_bps)
        if kind == "ack":
            return self.ack_airtime_ns
        if kind == "rts":
            return self.rts_airtime_ns
        if kind == "cts":
            return self.cts_airtime_ns
        raise ValueError(f"unknown frame kind {kind!r}")

    def control_airtime_ns(self, nbytes: int) -> int:
        bits = 8 * nbytes
        return self.plcp_ns + _div_round(bits * 1_000_000_000, self.control_rate_bps)

    @property
    def ack_airtime_ns(self) -> int:
        return self.control_airtime_ns(self.ack_bytes)

    @property
    def rts_airtime_ns(self) -> int:
        return self.control_airtime_ns(self.rts_bytes)

    @property
    def cts_airtime_ns(self) -> int:
        return self.control_airtime_ns(self.cts_bytes)

    @property
    def ack_timeout_ns(self) -> int:
        """Wait after a data frame ends before declaring the ACK lost."""
        return self.sifs_ns + self.plcp_ns + self.ack_airtime_ns + self.slot_ns

    @property
    def cts_timeout_ns(self) -> int:
        return self.sifs_ns + self.plcp_ns + self.cts_airtime_ns + self.slot_ns


@dataclass
class Frame:
    kind: str                 # "data" | "ack" | "rts" | "cts"
    src: int
    dst: int
    duration_ns: int          # on-air time
    duration_field_ns: int    # medium-reservation value carried in the header
    payload_bytes: int = 0
    rate_bps: int = 0
    packet_id: int = -1
    chained: bool = False     # data frame sent as a burst continuation


class Topology:
    """Who can decode whom, and who can at least sense whom.

    Decodability implies sensing. Extra sense-only pairs model stations
    close enough to defer to but too far to understand.
    """

    def __init__(self, n: int,
                 decode: list[tuple[int, int]] | None = None,
                 extra_sense: list[tuple[int, int]] | None = None):
        if n < 2:
            raise ValueError("need at least two stations")
        self.n = n
        if decode is None:
            decode = [(i, j) for i in range(n) for j in range(n) if i != j]
        dec = set()
        for i, j in decode:
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"bad decode pair ({i}, {j})")
            dec.add((i, j))
        sense = set(dec)
        for i, j in extra_sense or ():
            if not (0 <= i < n and 0 <= j < n) or i == j:
                raise ValueError(f"bad sense pair ({i}, {j})")
            sense.add((i, j))
        self._decode = dec
        self._sense = sense
        self.sensors_of = tuple(
            tuple(j for j in range(n) if (i, j) in sense) for i in range(n))
        self.decoders_of = tuple(
            tuple(j for j in range(n) if (i, j) in dec) for i in range(n))

    @classmethod
    def full(cls, n: int) -> "Topology":
        return cls(n)

    def decodes(self, src: int, dst: int) -> bool:
        return (src, dst) in self._decode

    def senses(self, src: int, dst: int) -> bool:
        return (src, dst) in self._sense


@dataclass
class Transmission:
    __slots__ = ("frame", "start", "end", "voided")
    frame: Frame
    start: int
    end: int
    voided: bool


class Channel:
    """The shared medium. Stations attach once and then only transmit."""

    def __init__(self, engine: Engine, topo: Topology):
        self.engine = engine
        self.topo = topo
        self.stations: list = [None] * topo.n
        self._busy = [0] * topo.n
        self._active: list[Transmission] = []
        # Optional per-link quality model: called as (frame, now_ns) for
        # data frames; returning True voids the frame (rate unsustainable).
        self.link_filter = None
        # Optional sink whose tx_done(tx) sees every finished transmission.
        self.sink = None

    def attach(self, station) -> None:
        sid = station.sid
        if self.stations[sid] is not None:
            raise ValueError(f"station {sid} already attached")
        self.stations[sid] = station

    def busy(self, sid: int) -> bool:
        return self._busy[sid] > 0

    def transmit(self, frame: Frame) -> Transmission:
        eng = self.engine
        now = eng.now
        tx = Transmission(frame, now, now + frame.duration_ns, False)
        src, dst = frame.src, frame.dst
        if (frame.kind == "data" and self.link_filter is not None
                and self.link_filter(frame, now)):
            tx.voided = True
        decodes = self.topo.decodes
        alive = []
        for other in self._active:
            if other.end <= now:
                continue
            if other.frame.src == src:
                raise RuntimeError(f"station {src} is already transmitting")
            alive.append(other)
            of = other.frame
            # The new signal corrupts an ongoing reception it reaches,
            # and a receiver that starts transmitting goes deaf.
            if of.dst == src or decodes(src, of.dst):
                other.voided = True
            # Symmetrically for the new frame's receiver.
            if of.src == dst or decodes(of.src, dst):
                tx.voided = True
        alive.append(tx)
        self._active = alive
        eng.schedule(now, self._begin, tx, kind="phy_start", target=f"ch{src}")
        eng.schedule(tx.end, self._finish, tx, kind="phy_end", target=f"ch{src}")
        return tx

    def _begin(self, tx: Transmission) -> None:
        busy = self._busy
        stations = self.stations
        for j in self.topo.sensors_of[tx.frame.src]:
            busy[j] += 1
            if busy[j] == 1:
                stations[j].on_busy_start()

    def _finish(self, tx: Transmission) -> None:
        try:
            self._active.remove(tx)
        except ValueError:
            pass
        busy = self._busy
        stations = self.stations
        frame = tx.frame
        src = frame.src
        if tx.voided:
            for j in self.topo.decoders_of[src]:
                stations[j].on_collision_residue()
        for j in self.topo.sensors_of[src]:
            busy[j] -= 1
            if busy[j] == 0:
                stations[j].on_busy_end()
        if self.sink is not None:
            self.sink.tx_done(tx)
        if tx.voided:
            return
        dst = frame.dst
        if self.topo.decodes(src, dst):
            stations[dst].on_receive(frame)
        for j in self.topo.decoders_of[src]:
            if j != dst:
                stations[j].on_overhear(frame)
