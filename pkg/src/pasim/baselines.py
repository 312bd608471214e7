"""Alternative remedies for the slow-station throughput anomaly, used as
comparison points for the aggregation MAC.

* ``CwAdaptStation``: contention windows scaled inversely with the data
  rate, so slower stations draw from proportionally larger windows and
  win the medium less often.
* packet division: plain DCF, but slow senders split every upper-layer
  packet into fragments sized so one fragment's on-air time matches a
  full-size packet at the reference rate.
* fixed TXOP: the aggregation MAC with a constant transmission budget
  instead of a sensed one (see ``pas.PasStation`` with
  ``budget_mode="fixed"``).
"""

from __future__ import annotations

from collections import deque

from .dcf import DcfStation, Packet
from .phy import _div_round


class CwAdaptStation(DcfStation):
    """DCF with rate-proportional contention windows.

    Every window in the backoff ladder, post-backoff included, is scaled
    by reference_rate / own_rate at draw time; a station at the reference
    rate behaves exactly like plain DCF.
    """

    def __init__(self, *args, reference_rate_bps: int = 11_000_000, **kwargs):
        super().__init__(*args, **kwargs)
        self.reference_rate_bps = reference_rate_bps

    def effective_cw(self, cw: int) -> int:
        return _div_round(cw * self.reference_rate_bps, self.rate_bps)


def fragment_size(mtu_bytes: int, rate_bps: int, reference_rate_bps: int,
                  mac_overhead_bytes: int = 48) -> int:
    """Largest fragment whose MAC frame at rate_bps is no longer on air
    than a full MTU frame at the reference rate."""
    if mtu_bytes <= 0 or rate_bps <= 0 or reference_rate_bps <= 0:
        raise ValueError("sizes and rates must be positive")
    f = ((mtu_bytes + mac_overhead_bytes) * rate_bps) // reference_rate_bps
    f -= mac_overhead_bytes
    return max(1, min(f, mtu_bytes))


class SplittingSource:
    """Wraps a traffic source, re-emitting each packet as fragments of at
    most fragment_bytes (full fragments first, remainder last)."""

    def __init__(self, inner, fragment_bytes: int):
        if fragment_bytes <= 0:
            raise ValueError("fragment_bytes must be positive")
        self.inner = inner
        self.fragment_bytes = fragment_bytes
        self._pending: deque[int] = deque()
        self._pid = 0

    def next_packet(self) -> Packet | None:
        if not self._pending:
            pkt = self.inner.next_packet()
            if pkt is None:
                return None
            left = pkt.size
            while left > self.fragment_bytes:
                self._pending.append(self.fragment_bytes)
                left -= self.fragment_bytes
            self._pending.append(left)
        self._pid += 1
        return Packet(self._pid, self._pending.popleft())
