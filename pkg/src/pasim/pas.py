"""Dynamic packet aggregation on top of the DCF MAC.

A station continuously senses the medium and keeps a running maximum of
the length of continuous busy periods caused by other stations
(`t_p_max`). Duration fields of overheard RTS/CTS frames also raise it.
Receiving an ACK for the station's own data resets the maximum, so it
always reflects what other stations have done since our last success.

When the station wins a contention it arms a transmission budget equal
to the sensed maximum and may then send several data frames back to
back, each one SIFS after the previous ACK, until the budget is spent.
Every frame subtracts its own on-air cost from the budget. The final,
partially fitting frame is admitted through a compensation term equal to
the shortfall between the budget and a whole number of frames; with that
term disabled only fully fitting frames chain.

For payloads so small that the fixed per-frame overhead (preamble, MAC
header, SIFS, ACK) exceeds the payload time, the budget charge is scaled
up by the overhead-to-payload ratio; this stops tiny frames from turning
one sensed slow frame into a long train of mostly-header transmissions.
That scaling can be disabled independently.

A lost chained frame is retried one SIFS after its timeout as long as
the budget still admits it (the retry is charged to the budget again);
otherwise the burst is abandoned and the packet re-enters ordinary
contention with the usual window doubling. The constant-budget variant
(`budget_mode="fixed"`) skips sensing entirely and arms the same
configured budget at every access.
"""

from __future__ import annotations

from .dcf import DcfStation, Packet
from .phy import _div_round


def alpha(t_my_left_ns: int, t_my_packet_ns: int) -> int:
    """Shortfall between the remaining budget and the next whole number of
    packet times: (ceil(left/p) - left/p) * p, always in [0, p)."""
    if t_my_packet_ns <= 0:
        raise ValueError("t_my_packet must be positive")
    return (-t_my_left_ns) % t_my_packet_ns


class PasStation(DcfStation):
    def __init__(self, *args, alpha_on: bool = True, t_rate_on: bool = True,
                 budget_mode: str = "sensed", fixed_budget_ns: int = 0,
                 **kwargs):
        super().__init__(*args, **kwargs)
        if budget_mode not in ("sensed", "fixed"):
            raise ValueError(f"unknown budget_mode {budget_mode!r}")
        if budget_mode == "fixed" and fixed_budget_ns <= 0:
            raise ValueError("fixed budget_mode needs a positive budget")
        self.alpha_on = alpha_on
        self.t_rate_on = t_rate_on
        self.budget_mode = budget_mode
        self.fixed_budget_ns = fixed_budget_ns
        self.t_p_max = 0
        self._busy_from: int | None = None
        self.sending = False
        self.t_my_left = 0

    # -- sensing ---------------------------------------------------------

    def on_busy_start(self) -> None:
        if self.budget_mode == "sensed":
            self._busy_from = self.engine.now
        super().on_busy_start()

    def on_busy_end(self) -> None:
        if self.budget_mode == "sensed" and self._busy_from is not None:
            span = self.engine.now - self._busy_from
            self._busy_from = None
            if span > self.t_p_max:
                self.t_p_max = span
        super().on_busy_end()

    def on_overhear(self, frame) -> None:
        if (self.budget_mode == "sensed"
                and frame.duration_field_ns > self.t_p_max):
            self.t_p_max = frame.duration_field_ns
        super().on_overhear(frame)

    def on_receive(self, frame) -> None:
        if (frame.kind == "ack" and self._awaiting == "ack"
                and self.budget_mode == "sensed"):
            self.t_p_max = 0
        super().on_receive(frame)

    # -- budget ------------------------------------------------------------

    def _budget(self) -> int:
        if self.budget_mode == "fixed":
            return self.fixed_budget_ns
        return self.t_p_max

    def _charge(self, pkt: Packet) -> int:
        """Budget cost of sending pkt now."""
        p = self.params
        air = p.data_airtime_ns(pkt.size, self.rate_bps)
        if self.t_rate_on:
            payload_t = _div_round(8 * pkt.size * 1_000_000_000, self.rate_bps)
            header_t = (p.plcp_ns
                        + _div_round(8 * p.mac_overhead_bytes * 1_000_000_000,
                                     self.rate_bps)
                        + p.sifs_ns + p.ack_airtime_ns)
            if payload_t < header_t:
                return _div_round(air * header_t, payload_t)
        return air

    def _admits(self, after: int, charge: int, left_before: int) -> bool:
        if self.alpha_on:
            return after + alpha(left_before, charge) >= 0
        return after > 0

    # -- decision points -----------------------------------------------------

    def _classify(self, pkt: Packet) -> None:
        # Contention won; arm a fresh budget unless a burst was already open
        # (it never is here: timeouts and burst ends clear the flag).
        if not self.sending:
            self.t_my_left = self._budget()
        if self.t_my_left <= 0:
            self.sending = False
            self.t_my_left = 0
            return
        charge = self._charge(pkt)
        after = self.t_my_left - charge
        if self._admits(after, charge, self.t_my_left):
            self.sink.burst_open(self.engine.now, self.sid, self.t_my_left)
            self.sending = True
            self.t_my_left = after
        else:
            self.sending = False
            self.t_my_left = 0

    def _decide_continue(self, pkt: Packet) -> bool:
        if not self.sending:
            return False
        if self.t_my_left <= 0:
            self.sending = False
            self.t_my_left = 0
            return False
        charge = self._charge(pkt)
        after = self.t_my_left - charge
        if self._admits(after, charge, self.t_my_left):
            self.t_my_left = after
            return True
        self.sending = False
        self.t_my_left = 0
        return False

    def _continue_burst(self) -> bool:
        self._refill()
        if not self.txq:
            self.sending = False
            self.t_my_left = 0
            return False
        pkt = self.txq[0]
        if not self._decide_continue(pkt):
            return False
        self.engine.schedule(self.engine.now + self.params.sifs_ns,
                             self._send_data, pkt, True,
                             kind="chain_tx", target=f"st{self.sid}")
        return True

    # -- failure paths ---------------------------------------------------------

    def _after_timeout(self) -> None:
        self.sending = False
        self.t_my_left = 0

    def _on_ack_timeout(self) -> None:
        if not self._last_chained:
            self._fail_step()
            return
        # A chained frame died mid-burst. Its airtime was spent, so charge
        # the budget again and retry in place while it still fits.
        self._timeout_ev = None
        self._awaiting = None
        if self.rate_ctl is not None:
            self.rate_ctl.on_failure(self.engine.now, self.sink, self.sid)
        pkt = self.txq[0]
        if self._decide_continue(pkt):
            self.engine.schedule(self.engine.now + self.params.sifs_ns,
                                 self._send_data, pkt, True,
                                 kind="chain_retx", target=f"st{self.sid}")
            return
        # Budget gone: fall back to ordinary contention for this packet.
        self._retry_or_drop()
