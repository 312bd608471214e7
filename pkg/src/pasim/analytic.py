"""Closed-form steady-state model of a saturated multi-rate cell.

Stations take turns in a collision-free rotation. With aggregation on,
each access carries as many back-to-back packets as it takes to cover
the slowest station's single-packet airtime (whole packets, rounded
up, which is what the admission rule with the shortfall allowance
produces); with aggregation off every access carries exactly one.
From the per-access burst times the model yields each class's share
of medium time, packet rate and throughput, plus a fairness index
referenced against equal-rate cells.

Two denominators differ on purpose: medium occupancy charges each
station one inter-frame space of dead time, while the throughput cycle
also charges the average backoff. Packet airtimes exclude the PHY
preamble by default; `include_plcp` adds it to both the per-packet
time and the budget.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .metrics import jain_index
from .phy import PhyParams

__all__ = [
    "RateClass", "CellModel", "ClassResult", "CellResult",
    "airtime_packets", "exchange_packets", "burst_time_ns",
    "packet_airtime_ns", "ack_exchange_ns", "solve", "referenced_index",
]


@dataclass(frozen=True)
class RateClass:
    """`count` stations all transmitting at `rate_bps`."""
    rate_bps: int
    count: int = 1


@dataclass
class CellModel:
    classes: Sequence[RateClass]
    packet_bytes: int = 1000
    aggregate: bool = True             # False: one packet per access
    include_plcp: bool = False
    params: PhyParams = field(default_factory=PhyParams)
    budget_ns: int | None = None       # default: slowest single packet
    avg_backoff_ns: int | None = None  # default: half the minimum window

    def validate(self) -> None:
        if not self.classes:
            raise ValueError("model needs at least one rate class")
        for c in self.classes:
            if c.rate_bps <= 0:
                raise ValueError(f"rate must be positive, got {c.rate_bps}")
            if c.count < 1:
                raise ValueError(f"class count must be >= 1, got {c.count}")
        if self.packet_bytes <= 0:
            raise ValueError("packet_bytes must be positive")
        if self.budget_ns is not None and self.budget_ns <= 0:
            raise ValueError("budget_ns must be positive")


@dataclass(frozen=True)
class ClassResult:
    rate_bps: int
    count: int
    packet_airtime_ns: float
    packets_per_access: int
    burst_ns: float        # data + acks + gaps for one access
    occupancy: float       # per-station share of medium time
    pkts_per_s: float
    kbps: float


@dataclass(frozen=True)
class CellResult:
    classes: tuple[ClassResult, ...]
    free_fraction: float   # medium time left idle by the rotation

    def by_rate(self, rate_bps: int) -> ClassResult:
        for c in self.classes:
            if c.rate_bps == rate_bps:
                return c
        raise KeyError(rate_bps)


def airtime_packets(slowest_ns: float, mine_ns: float) -> float:
    """How many of my packets fit in the slowest station's packet time.

    Continuous ratio; the cell model rounds it up to whole packets.
    """
    if mine_ns <= 0:
        raise ValueError("packet airtime must be positive")
    return slowest_ns / mine_ns


def exchange_packets(slowest_ns: float, mine_ns: float,
                     ack_ns: float) -> float:
    """Same ratio measured over whole exchanges (packet + ack wait).

    Never exceeds airtime_packets when my packet is no longer than the
    slowest one: the ack overhead dilutes the advantage.
    """
    if mine_ns <= 0 or ack_ns < 0:
        raise ValueError("durations must be positive")
    return (slowest_ns + ack_ns) / (mine_ns + ack_ns)


def burst_time_ns(packets: float, packet_ns: float, ack_ns: float,
                  sifs_ns: float) -> float:
    """Medium time for one access: each packet with its ack exchange,
    consecutive packets separated by one short inter-frame space."""
    if packets < 1:
        raise ValueError("a burst carries at least one packet")
    return packets * (packet_ns + ack_ns) + (packets - 1) * sifs_ns


def packet_airtime_ns(rate_bps: int, payload_bytes: int, params: PhyParams,
                      include_plcp: bool = False) -> float:
    return float(_airtime_frac(rate_bps, payload_bytes, params,
                               include_plcp))


def ack_exchange_ns(params: PhyParams) -> int:
    """Dead time appended to every data packet: the short inter-frame
    space plus the full ack frame."""
    return params.sifs_ns + params.ack_airtime_ns


def _airtime_frac(rate_bps: int, payload_bytes: int, params: PhyParams,
                  include_plcp: bool) -> Fraction:
    bits = 8 * (payload_bytes + params.mac_overhead_bytes)
    t = Fraction(bits * 10**9, rate_bps)
    if include_plcp:
        t += params.plcp_ns
    return t


def solve(model: CellModel) -> CellResult:
    """Steady-state shares for one rotation of all stations."""
    model.validate()
    p = model.params
    ack = Fraction(ack_exchange_ns(p))
    sifs = Fraction(p.sifs_ns)
    airtimes = [_airtime_frac(c.rate_bps, model.packet_bytes, p,
                              model.include_plcp) for c in model.classes]
    budget = (Fraction(model.budget_ns) if model.budget_ns is not None
              else max(airtimes))
    backoff = (Fraction(model.avg_backoff_ns)
               if model.avg_backoff_ns is not None
               else Fraction(p.cw_min * p.slot_ns, 2))

    packets = []
    for t in airtimes:
        packets.append(math.ceil(budget / t) if model.aggregate else 1)
    bursts = [n * (t + ack) + (n - 1) * sifs
              for n, t in zip(packets, airtimes)]

    n_total = sum(c.count for c in model.classes)
    rotation = sum(b * c.count for b, c in zip(bursts, model.classes))
    occ_denom = rotation + n_total * p.difs_ns
    cycle = rotation + n_total * (p.difs_ns + backoff)

    out = []
    for c, t, n, b in zip(model.classes, airtimes, packets, bursts):
        occ = b / occ_denom
        pkts_s = n * Fraction(10**9) / cycle
        kbps = pkts_s * model.packet_bytes * 8 / 1000
        out.append(ClassResult(c.rate_bps, c.count, float(t), n, float(b),
                               float(occ), float(pkts_s), float(kbps)))
    free = 1 - sum(b * c.count for b, c in zip(bursts, model.classes)) \
        / occ_denom
    return CellResult(tuple(out), float(free))


def referenced_index(model: CellModel) -> float:
    """Fairness index over per-station throughput ratios, each station
    referenced against a cell where everyone runs at its rate."""
    model.validate()
    main = solve(model)
    n_total = sum(c.count for c in model.classes)
    ratios = []
    for c, res in zip(model.classes, main.classes):
        ref_model = CellModel(
            classes=[RateClass(c.rate_bps, n_total)],
            packet_bytes=model.packet_bytes, aggregate=model.aggregate,
            include_plcp=model.include_plcp, params=model.params,
            budget_ns=model.budget_ns,
            avg_backoff_ns=model.avg_backoff_ns)
        ref = solve(ref_model).classes[0].kbps
        if ref <= 0:
            raise ValueError("reference throughput is zero")
        ratios.extend([res.kbps / ref] * c.count)
    return jain_index(ratios)
