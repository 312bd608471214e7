"""Traffic generation, automatic rate fallback, link-quality traces, and
a catalog of ready-made scenarios.

Catalog conventions: senders are stations 0..k-1 and their common
receiver is the last node, except for the pair grid (disjoint
sender/receiver pairs) and the hidden-sender setups, whose topologies
are restricted explicitly. All sources are saturated: a fresh packet is
available whenever the MAC can take one.
"""

from __future__ import annotations

from .config import SimConfig, StationCfg
from .dcf import Packet
from .engine import RngStream


class SaturatedSource:
    """Always-backlogged source with fixed or uniformly drawn payloads."""

    def __init__(self, packet_bytes: int = 1000,
                 size_min: int | None = None, size_max: int | None = None,
                 rng: RngStream | None = None):
        if (size_min is None) != (size_max is None):
            raise ValueError("size_min and size_max go together")
        if size_min is not None:
            if not (0 < size_min <= size_max):
                raise ValueError("need 0 < size_min <= size_max")
            if rng is None:
                raise ValueError("uniform sizes need an rng stream")
        elif packet_bytes <= 0:
            raise ValueError("packet_bytes must be positive")
        self.packet_bytes = packet_bytes
        self.size_min = size_min
        self.size_max = size_max
        self.rng = rng
        self._pid = 0

    def next_packet(self) -> Packet:
        self._pid += 1
        if self.size_min is not None:
            size = self.rng.uniform_int(self.size_min, self.size_max)
        else:
            size = self.packet_bytes
        return Packet(self._pid, size)


ARF_LADDER_BPS = (1_000_000, 2_000_000, 5_500_000, 11_000_000)


class ArfController:
    """Automatic rate fallback: step down after two consecutive failed
    transmissions, step up after ten consecutive successes."""

    def __init__(self, ladder_bps: tuple[int, ...] = ARF_LADDER_BPS,
                 start_bps: int | None = None,
                 up_after: int = 10, down_after: int = 2):
        if not ladder_bps or sorted(ladder_bps) != list(ladder_bps):
            raise ValueError("ladder must be ascending and non-empty")
        self.ladder = ladder_bps
        self._idx = (len(ladder_bps) - 1 if start_bps is None
                     else ladder_bps.index(start_bps))
        self.up_after = up_after
        self.down_after = down_after
        self._succ = 0
        self._fail = 0

    @property
    def rate_bps(self) -> int:
        return self.ladder[self._idx]

    def on_success(self, now: int, sink, sid: int) -> None:
        self._fail = 0
        self._succ += 1
        if self._succ >= self.up_after and self._idx < len(self.ladder) - 1:
            self._idx += 1
            self._succ = 0
            sink.rate_change(now, sid, self.rate_bps)

    def on_failure(self, now: int, sink, sid: int) -> None:
        self._succ = 0
        self._fail += 1
        if self._fail >= self.down_after and self._idx > 0:
            self._idx -= 1
            self._fail = 0
            sink.rate_change(now, sid, self.rate_bps)


def make_link_filter(traces: dict[int, tuple[tuple[float, float], ...]]):
    """Channel filter from per-sender (time_s, max_rate_mbps) step traces.

    A data frame is lost when its rate exceeds what the sender's link
    sustains at transmission start. Deterministic by construction.
    """
    steps = {}
    for sid, trace in traces.items():
        steps[sid] = [(round(t * 1e9), round(r * 1e6)) for t, r in trace]

    def link_filter(frame, now: int) -> bool:
        trace = steps.get(frame.src)
        if trace is None:
            return False
        allowed = None
        for t_start, rate in trace:
            if t_start <= now:
                allowed = rate
            else:
                break
        return allowed is not None and frame.rate_bps > allowed

    return link_filter


# -- catalog -----------------------------------------------------------------


def _to_ap(name: str, rates, sizes=None, **kw) -> SimConfig:
    """k senders with the given rates, all sending to one receiver node."""
    k = len(rates)
    stations = []
    for i, rate in enumerate(rates):
        st = StationCfg(sid=i, dst=k, rate_mbps=rate)
        if sizes is not None:
            spec = sizes[i]
            if isinstance(spec, tuple):
                st.size_min, st.size_max = spec
            else:
                st.packet_bytes = spec
        stations.append(st)
    return SimConfig(name=name, n_nodes=k + 1, stations=stations, **kw)


def _hidden(name: str, slow_rate, sizes, rts_threshold: int) -> SimConfig:
    cfg = _to_ap(name, (slow_rate, 11), sizes, rts_threshold=rts_threshold)
    # Senders 0 and 1 are out of range of each other; only the receiver
    # hears both.
    cfg.topology_decode = ((0, 2), (2, 0), (1, 2), (2, 1))
    return cfg


def _three_pairs(name: str) -> SimConfig:
    # Two outer pairs that cannot hear one another, and a central pair
    # whose nodes sense (but cannot decode) everything the outer pairs
    # emit. The outer pairs do not notice the central pair at all, so
    # they run completely undisturbed. Senders 0, 2, 4; receivers 1, 3, 5.
    decode = ((0, 1), (1, 0), (2, 3), (3, 2), (4, 5), (5, 4))
    sense = tuple((outer, central)
                  for outer in (0, 1, 4, 5) for central in (2, 3))
    return SimConfig(
        name=name, n_nodes=6, topology_decode=decode, topology_sense=sense,
        stations=[StationCfg(sid=0, dst=1, rate_mbps=2),
                  StationCfg(sid=2, dst=3, rate_mbps=11),
                  StationCfg(sid=4, dst=5, rate_mbps=2)])


def _arf_walkaway(name: str) -> SimConfig:
    # Station 0 walks away: its link sustains one ladder step less every
    # ten seconds and ARF follows. Station 1 stays put at the top rate.
    trace = ((0.0, 11.0), (10.0, 5.5), (20.0, 2.0), (30.0, 1.0))
    return SimConfig(
        name=name, n_nodes=3, duration_s=40.0, warmup_s=0.0,
        stations=[StationCfg(sid=0, dst=2, rate_mbps="arf",
                             link_trace=trace),
                  StationCfg(sid=1, dst=2, rate_mbps=11)])


_BUILDERS = {
    "validation_11_11": lambda n: _to_ap(n, (11, 11)),
    "two_station_1_11": lambda n: _to_ap(n, (1, 11)),
    "two_station_2_11": lambda n: _to_ap(n, (2, 11)),
    "two_station_5.5_11": lambda n: _to_ap(n, (5.5, 11)),
    "four_station_1_2_5.5_11": lambda n: _to_ap(n, (1, 2, 5.5, 11)),
    "four_station_1_1_1_11": lambda n: _to_ap(n, (1, 1, 1, 11)),
    "four_station_1_1_5.5_11": lambda n: _to_ap(n, (1, 1, 5.5, 11)),
    "uniform_5.5_11": lambda n: _to_ap(n, (5.5, 11),
                                       ((550, 1450), (550, 1450))),
    "t_rate_100_1000": lambda n: _to_ap(n, (5.5, 11), (1000, 100)),
    "packet_division_5.5_11": lambda n: _to_ap(n, (5.5, 11), (1500, 1500)),
    "three_pairs": _three_pairs,
    "arf_walkaway": _arf_walkaway,
    "hidden_11_11": lambda n: _hidden(n, 11, (1000, 1000), 200),
    "hidden_5.5_11": lambda n: _hidden(n, 5.5, (1000, 1000), 200),
    "hidden_2_11": lambda n: _hidden(n, 2, (1000, 1000), 200),
    "hidden_1_11": lambda n: _hidden(n, 1, (1000, 1000), 200),
    "hidden_uniform_1_11": lambda n: _hidden(n, 1, ((550, 1450), (550, 1450)),
                                             1000),
}


def scenario_names() -> list[str]:
    return list(_BUILDERS)


def build_scenario(name: str) -> SimConfig:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; see scenario_names()")
    return builder(name).validate()
