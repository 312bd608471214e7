"""Distributed coordination function: CSMA/CA with binary exponential
backoff, optional RTS/CTS, NAV-based virtual carrier sense, and ACK
retry/drop handling.

Access rules implemented here:

* A station with a fresh head-of-line packet and an idle medium transmits
  after one DIFS. If the medium is busy at access time, or becomes busy
  during that DIFS, it draws a backoff from [0, cw] instead.
* Backoff counts down in whole slots while the medium stays idle after a
  DIFS. A busy transition freezes the counter (partially elapsed slots do
  not count); the countdown resumes after a fresh DIFS once the medium is
  idle again, so a station frozen with k slots left transmits at
  idle_start + DIFS + k*slot.
* Success resets cw and the retry count and always runs a post-transmit
  backoff drawn from [0, cw_min], whether or not the queue is empty.
* A missing ACK doubles the window (cw := min(2*(cw+1)-1, cw_max)) and
  retransmits; once the retry count exceeds the limit the packet is
  dropped and the window resets, again with a post-backoff.
* ACK and CTS responses go out one SIFS after the triggering frame with
  no carrier sense; a CTS is only sent when the responder's NAV is clear.
* Decoded frames addressed elsewhere set the NAV from their duration
  field; NAV time freezes the countdown exactly like physical busy time.
* A corrupted frame that would have been decodable holds the station off
  for one ack-wait after it ends, so all parties to a collision re-enter
  contention together regardless of how long their own frames were.

Subclass hooks (`_classify`, `_continue_burst`, timeout/emission resets,
busy-interval callbacks) exist so aggregation variants can change when a
frame may follow the previous one without re-entering contention.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .engine import Engine
from .phy import Channel, Frame, PhyParams

CLASSICAL = "classical"
CHAINED = "chained"


@dataclass
class Packet:
    pid: int
    size: int  # payload bytes


class NullSink:
    """Default event sink; metrics provide a recording implementation."""

    def data_tx(self, t_start, t_end, sid, frame, classification, retry):
        pass

    def tx_done(self, tx):
        pass

    def delivered(self, t, frame):
        pass

    def dropped(self, t, sid, pid):
        pass

    def rate_change(self, t, sid, rate_bps):
        pass

    def burst_open(self, t, sid, budget_ns):
        pass


class DcfStation:
    """One MAC entity. Sends data to a fixed peer, answers RTS and data."""

    def __init__(self, sid: int, engine: Engine, channel: Channel,
                 params: PhyParams, dst: int = -1, source=None,
                 rate_bps: int = 11_000_000, rts_threshold: int | None = None,
                 rate_ctl=None, sink: NullSink | None = None):
        self.sid = sid
        self.engine = engine
        self.channel = channel
        self.params = params
        self.dst = dst
        self.source = source
        self._fixed_rate = rate_bps
        self.rts_threshold = rts_threshold
        self.rate_ctl = rate_ctl
        self.sink = sink or NullSink()
        self.rng = engine.stream(f"backoff/{sid}")

        self.txq: deque[Packet] = deque()
        self.cw = params.cw_min
        self.retry = 0
        self._counter: int | None = None   # remaining backoff slots
        self._count_start = 0              # when the countdown began (DIFS end)
        self._attempt_ev: int | None = None
        self._timeout_ev: int | None = None
        self._in_tx = False                # between data/RTS start and outcome
        self._awaiting = None              # "ack" | "cts"
        self._nav_until = 0
        self._nav_ev: int | None = None
        self._own_tx_until = 0
        self._last_chained = False
        channel.attach(self)

    # -- rate ------------------------------------------------------------

    @property
    def rate_bps(self) -> int:
        if self.rate_ctl is not None:
            return self.rate_ctl.rate_bps
        return self._fixed_rate

    # -- queue / access --------------------------------------------------

    def start(self) -> None:
        """Pull the first packet and begin contending (called at t=0)."""
        self._refill()
        if self.txq:
            self._access_fresh()

    def _refill(self) -> None:
        if not self.txq and self.source is not None:
            pkt = self.source.next_packet()
            if pkt is not None:
                self.txq.append(pkt)

    def enqueue(self, pkt: Packet) -> None:
        self.txq.append(pkt)
        if (self._counter is None and self._attempt_ev is None
                and not self._in_tx and len(self.txq) == 1):
            self._access_fresh()

    def _medium_busy(self) -> bool:
        now = self.engine.now
        return (self.channel.busy(self.sid) or now < self._nav_until
                or now < self._own_tx_until)

    def _access_fresh(self) -> None:
        if self._medium_busy():
            self._draw_backoff()
        else:
            now = self.engine.now
            self._count_start = now + self.params.difs_ns
            self._attempt_ev = self.engine.schedule(
                self._count_start, self._attempt,
                kind="attempt", target=f"st{self.sid}")

    def effective_cw(self, cw: int) -> int:
        """Window actually drawn from; adaptive variants rescale it."""
        return cw

    def _draw_backoff(self, cw: int | None = None) -> None:
        eff = self.effective_cw(self.cw if cw is None else cw)
        self._counter = self.rng.uniform_int(0, eff)
        self._try_arm()

    def _try_arm(self) -> None:
        if self._medium_busy():
            return  # stay frozen; an idle transition will re-arm
        now = self.engine.now
        self._count_start = now + self.params.difs_ns
        fire = self._count_start + self._counter * self.params.slot_ns
        self._attempt_ev = self.engine.schedule(
            fire, self._attempt, kind="attempt", target=f"st{self.sid}")

    def _pause_countdown(self) -> None:
        if self._attempt_ev is None:
            return
        self.engine.cancel(self._attempt_ev)
        self._attempt_ev = None
        if self._counter is None:
            # The no-backoff DIFS access was interrupted: fall back to a
            # real backoff, frozen until the medium clears.
            self._draw_backoff()
        else:
            elapsed = self.engine.now - self._count_start
            if elapsed > 0:
                self._counter -= min(self._counter,
                                     elapsed // self.params.slot_ns)

    def _medium_became_idle(self) -> None:
        if self._in_tx:
            return
        if self._counter is not None and self._attempt_ev is None:
            self._try_arm()

    # -- channel callbacks -------------------------------------------------

    def on_busy_start(self) -> None:
        self._pause_countdown()

    def on_busy_end(self) -> None:
        now = self.engine.now
        if now < self._nav_until or now < self._own_tx_until:
            return  # still virtually busy; the matching expiry will resume
        self._medium_became_idle()

    def _set_nav(self, until: int) -> None:
        if until <= self._nav_until:
            return
        self._nav_until = until
        self._pause_countdown()
        if self._nav_ev is not None:
            self.engine.cancel(self._nav_ev)
        self._nav_ev = self.engine.schedule(
            until, self._nav_expired, kind="nav", target=f"st{self.sid}")

    def _nav_expired(self) -> None:
        self._nav_ev = None
        if not self._medium_busy():
            self._medium_became_idle()

    def on_overhear(self, frame: Frame) -> None:
        if frame.duration_field_ns > 0:
            self._set_nav(self.engine.now + frame.duration_field_ns)

    def on_collision_residue(self) -> None:
        """A decodable frame ended corrupted: hold off for the ack wait.

        This puts all of a collision's bystanders and both colliders back
        into contention at the same instant (the longest collided frame's
        end plus the ACK timeout), whatever their own frame lengths were.
        """
        self._set_nav(self.engine.now + self.params.ack_timeout_ns)

    # -- transmission ------------------------------------------------------

    def _attempt(self) -> None:
        self._attempt_ev = None
        self._counter = None
        self._refill()
        if not self.txq:
            return  # post-backoff ran out with nothing queued
        self._start_exchange(self.txq[0])

    def _start_exchange(self, pkt: Packet) -> None:
        self._in_tx = True
        self._classify(pkt)
        if self.rts_threshold is not None and pkt.size >= self.rts_threshold:
            self._send_rts(pkt)
        else:
            self._send_data(pkt, chained=False)

    def _classify(self, pkt: Packet) -> None:
        """Aggregation hook, run once contention is won (medium view fresh)."""

    def _send_rts(self, pkt: Packet) -> None:
        p = self.params
        data_air = p.data_airtime_ns(pkt.size, self.rate_bps)
        dur = 3 * p.sifs_ns + p.cts_airtime_ns + data_air + p.ack_airtime_ns
        frame = Frame("rts", self.sid, self.dst, p.rts_airtime_ns, dur)
        tx = self.channel.transmit(frame)
        self._own_tx_until = tx.end
        self._awaiting = "cts"
        self._timeout_ev = self.engine.schedule(
            tx.end + p.cts_timeout_ns, self._on_cts_timeout,
            kind="cts_timeout", target=f"st{self.sid}")

    def _send_data(self, pkt: Packet, chained: bool) -> None:
        p = self.params
        air = p.data_airtime_ns(pkt.size, self.rate_bps)
        frame = Frame("data", self.sid, self.dst, air,
                      p.sifs_ns + p.ack_airtime_ns, pkt.size, self.rate_bps,
                      pkt.pid, chained)
        tx = self.channel.transmit(frame)
        self._own_tx_until = tx.end
        self._awaiting = "ack"
        self._last_chained = chained
        self.sink.data_tx(tx.start, tx.end, self.sid, frame,
                          CHAINED if chained else CLASSICAL, self.retry)
        self._timeout_ev = self.engine.schedule(
            tx.end + p.ack_timeout_ns, self._on_ack_timeout,
            kind="ack_timeout", target=f"st{self.sid}")

    # -- responses ---------------------------------------------------------

    def on_receive(self, frame: Frame) -> None:
        kind = frame.kind
        if kind == "data":
            self.sink.delivered(self.engine.now, frame)
            self.engine.schedule(
                self.engine.now + self.params.sifs_ns, self._send_ack, frame,
                kind="ack_tx", target=f"st{self.sid}")
        elif kind == "rts":
            if self.engine.now >= self._nav_until:
                self.engine.schedule(
                    self.engine.now + self.params.sifs_ns, self._send_cts,
                    frame, kind="cts_tx", target=f"st{self.sid}")
        elif kind == "ack" and self._awaiting == "ack":
            self._on_ack()
        elif kind == "cts" and self._awaiting == "cts":
            self._on_cts()

    def _respond(self, frame: Frame) -> None:
        tx = self.channel.transmit(frame)
        self._pause_countdown()
        self._own_tx_until = max(self._own_tx_until, tx.end)
        self.engine.schedule(tx.end, self._own_tx_done,
                             kind="own_tx_done", target=f"st{self.sid}")

    def _own_tx_done(self) -> None:
        if not self._medium_busy():
            self._medium_became_idle()

    def _send_ack(self, data_frame: Frame) -> None:
        self._respond(Frame("ack", self.sid, data_frame.src,
                            self.params.ack_airtime_ns, 0))

    def _send_cts(self, rts_frame: Frame) -> None:
        p = self.params
        dur = max(0, rts_frame.duration_field_ns - p.sifs_ns - p.cts_airtime_ns)
        self._respond(Frame("cts", self.sid, rts_frame.src,
                            p.cts_airtime_ns, dur))

    # -- outcomes ------------------------------------------------------------

    def _cancel_timeout(self) -> None:
        if self._timeout_ev is not None:
            self.engine.cancel(self._timeout_ev)
            self._timeout_ev = None
        self._awaiting = None

    def _on_cts(self) -> None:
        self._cancel_timeout()
        pkt = self.txq[0]
        self.engine.schedule(self.engine.now + self.params.sifs_ns,
                             self._send_data, pkt, False,
                             kind="data_tx", target=f"st{self.sid}")

    def _on_ack(self) -> None:
        self._cancel_timeout()
        self.txq.popleft()
        if self.rate_ctl is not None:
            self.rate_ctl.on_success(self.engine.now, self.sink, self.sid)
        self.cw = self.params.cw_min
        self.retry = 0
        if self._continue_burst():
            return  # subclass scheduled the next frame itself
        self._in_tx = False
        self._refill()
        self._draw_backoff()  # post-transmit backoff, queue may be empty

    def _continue_burst(self) -> bool:
        """Aggregation hook, run on each ACK; base MAC never chains."""
        return False

    def _bump_cw(self) -> None:
        self.cw = min(2 * (self.cw + 1) - 1, self.params.cw_max)

    def _fail_step(self) -> None:
        """Shared handling for a lost ACK or CTS."""
        self._timeout_ev = None
        self._awaiting = None
        if self.rate_ctl is not None:
            self.rate_ctl.on_failure(self.engine.now, self.sink, self.sid)
        self._retry_or_drop()

    def _retry_or_drop(self) -> None:
        self.retry += 1
        if self.retry > self.params.retry_limit:
            pkt = self.txq.popleft()
            self.sink.dropped(self.engine.now, self.sid, pkt.pid)
            self.retry = 0
            self.cw = self.params.cw_min
        else:
            self._bump_cw()
        self._in_tx = False
        self._after_timeout()
        self._refill()
        self._draw_backoff()

    def _after_timeout(self) -> None:
        """Aggregation hook: reset any burst state before re-contending."""

    def _on_ack_timeout(self) -> None:
        self._fail_step()

    def _on_cts_timeout(self) -> None:
        self._fail_step()
