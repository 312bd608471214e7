"""Measurement: per-flow accounting, burst reconstruction, medium
occupancy, inter-burst histograms, confidence intervals, and the Jain
fairness index.

A Collector is attached to one run as both the stations' event sink and
the channel's transmission sink. After the run, ``finalize`` reduces the
raw logs to a plain-data RunStats over the measurement window (warm-up
excluded). Aggregation across replications (means, Student-t intervals)
lives in free functions so it stays order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as sstats

from .dcf import NullSink


def jain_index(values) -> float:
    """(sum x)^2 / (n * sum x^2); 0.0 for an all-zero vector."""
    vals = list(values)
    if not vals:
        raise ValueError("jain_index of nothing")
    total = float(sum(vals))
    sq = float(sum(v * v for v in vals))
    if sq == 0.0:
        return 0.0
    return total * total / (len(vals) * sq)


@dataclass
class ConfidenceInterval:
    mean: float
    half_width: float | None   # None when only one replication
    n: int

    @property
    def lo(self) -> float:
        return self.mean - (self.half_width or 0.0)

    @property
    def hi(self) -> float:
        return self.mean + (self.half_width or 0.0)

    def overlaps(self, other: "ConfidenceInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def t_interval(values) -> ConfidenceInterval:
    """Student-t interval at level 0.05 across replications."""
    arr = np.asarray(list(values), dtype=float)
    n = len(arr)
    if n == 0:
        raise ValueError("t_interval of nothing")
    mean = float(arr.mean())
    if n < 2:
        return ConfidenceInterval(mean, None, n)
    sd = float(arr.std(ddof=1))
    t = float(sstats.t.ppf(0.975, n - 1))
    return ConfidenceInterval(mean, t * sd / n ** 0.5, n)


@dataclass
class FlowStats:
    src: int
    dst: int
    delivered_bytes: int
    delivered_packets: int
    window_s: float

    @property
    def throughput_kbps(self) -> float:
        return 8.0 * self.delivered_bytes / self.window_s / 1000.0

    @property
    def packets_per_s(self) -> float:
        return self.delivered_packets / self.window_s


@dataclass
class BurstSummary:
    count: int
    mean_frames: float
    frame_counts: list[int]
    interburst_ns: list[int]

    @property
    def mean_interburst_us(self) -> float | None:
        if not self.interburst_ns:
            return None
        return sum(self.interburst_ns) / len(self.interburst_ns) / 1000.0


@dataclass
class RunStats:
    """Plain-data result of one replication (picklable)."""
    window_ns: tuple[int, int]
    flows: dict
    bursts: dict                       # sid -> BurstSummary
    burst_records: dict                # sid -> list[(start, end, frames)]
    burst_budgets: dict                # sid -> list[budget at burst open]
    occupancy: dict                    # sid -> airtime share
    free_share: float
    drops: dict                        # sid -> count
    rate_changes: list
    tx_counts: dict                    # sid -> [classical, chained]
    deliveries: list                   # (t, src, dst, size) deduplicated

    @property
    def aggregate_kbps(self) -> float:
        return sum(f.throughput_kbps for f in self.flows.values())


def interburst_histogram(intervals_ns, bin_width_ns: int):
    """Counts per bin of inter-burst times; returns (bins, mean_ns, n).

    bins maps bin start (ns) to count; bin width as given.
    """
    intervals = list(intervals_ns)
    if not intervals:
        raise ValueError("no inter-burst intervals to histogram")
    if bin_width_ns <= 0:
        raise ValueError("bin width must be positive")
    bins: dict[int, int] = {}
    for iv in intervals:
        start = (iv // bin_width_ns) * bin_width_ns
        bins[start] = bins.get(start, 0) + 1
    return bins, sum(intervals) / len(intervals), len(intervals)


class Collector(NullSink):
    """Event sink for one run; also serves as the channel's tx sink."""

    def __init__(self):
        self.tx_log = []          # (t0, t1, sid, pid, size, class, retry)
        self.phy_log = []         # (t0, t1, src, dst, kind, bytes, voided)
        self.rx_log = []          # (t, src, dst, pid, size)
        self.drop_log = []        # (t, sid, pid)
        self.rate_log = []        # (t, sid, rate_bps)
        self.burst_log = []       # (t, sid, budget_ns)

    def data_tx(self, t_start, t_end, sid, frame, classification, retry):
        self.tx_log.append((t_start, t_end, sid, frame.packet_id,
                            frame.payload_bytes, classification, retry))

    def tx_done(self, tx):
        f = tx.frame
        self.phy_log.append((tx.start, tx.end, f.src, f.dst, f.kind,
                             f.payload_bytes, tx.voided))

    def delivered(self, t, frame):
        self.rx_log.append((t, frame.src, frame.dst, frame.packet_id,
                            frame.payload_bytes))

    def dropped(self, t, sid, pid):
        self.drop_log.append((t, sid, pid))

    def rate_change(self, t, sid, rate_bps):
        self.rate_log.append((t, sid, rate_bps))

    def burst_open(self, t, sid, budget_ns):
        self.burst_log.append((t, sid, budget_ns))

    # -- reduction ---------------------------------------------------------

    def finalize(self, warmup_ns: int, end_ns: int) -> RunStats:
        if not 0 <= warmup_ns < end_ns:
            raise ValueError("need 0 <= warmup < end")
        window_s = (end_ns - warmup_ns) / 1e9

        # Receiver-side delivery accounting. Duplicate decodes of the
        # head-of-line packet (its ACK was lost) are dropped via the
        # per-flow last-seen packet id; ids are strictly increasing.
        flows: dict[tuple[int, int], FlowStats] = {}
        last_pid: dict[tuple[int, int], int] = {}
        deliveries = []
        for t, src, dst, pid, size in self.rx_log:
            flow = (src, dst)
            if last_pid.get(flow) == pid:
                continue
            last_pid[flow] = pid
            if not warmup_ns <= t <= end_ns:
                continue
            st = flows.get(flow)
            if st is None:
                st = flows[flow] = FlowStats(src, dst, 0, 0, window_s)
            st.delivered_bytes += size
            st.delivered_packets += 1
            deliveries.append((t, src, dst, size))

        bursts, burst_records, budgets = self._reduce_bursts(warmup_ns, end_ns)
        occupancy, free_share = self._reduce_occupancy(warmup_ns, end_ns)

        drops: dict[int, int] = {}
        for t, sid, _pid in self.drop_log:
            if warmup_ns <= t <= end_ns:
                drops[sid] = drops.get(sid, 0) + 1

        tx_counts: dict[int, list[int]] = {}
        for t0, _t1, sid, _pid, _size, cls, _retry in self.tx_log:
            if not warmup_ns <= t0 <= end_ns:
                continue
            cnt = tx_counts.setdefault(sid, [0, 0])
            cnt[0 if cls == "classical" else 1] += 1

        return RunStats(
            window_ns=(warmup_ns, end_ns), flows=flows, bursts=bursts,
            burst_records=burst_records, burst_budgets=budgets,
            occupancy=occupancy, free_share=free_share, drops=drops,
            rate_changes=list(self.rate_log), tx_counts=tx_counts,
            deliveries=deliveries)

    def _reduce_bursts(self, warmup_ns, end_ns):
        """Group data transmissions into bursts: a classical frame opens
        one, every chained frame joins its station's current burst."""
        raw: dict[int, list] = {}
        armed: dict[int, list] = {}
        for t, sid, budget in self.burst_log:
            armed.setdefault(sid, []).append((t, budget))
        for t0, t1, sid, _pid, _size, cls, _retry in self.tx_log:
            per = raw.setdefault(sid, [])
            if cls == "classical" or not per:
                per.append([t0, t1, 1])
            else:
                per[-1][1] = t1
                per[-1][2] += 1

        bursts: dict[int, BurstSummary] = {}
        burst_records: dict[int, list] = {}
        budgets: dict[int, list] = {}
        for sid, per in raw.items():
            arm_iter = iter(armed.get(sid, []))
            arm = next(arm_iter, None)
            kept, kept_budgets = [], []
            for start, end, frames in per:
                budget = None
                while arm is not None and arm[0] <= start:
                    budget = arm[1]
                    arm = next(arm_iter, None)
                if warmup_ns <= start and end <= end_ns:
                    kept.append((start, end, frames))
                    kept_budgets.append(budget)
            inter = [kept[i + 1][0] - kept[i][1] for i in range(len(kept) - 1)]
            frame_counts = [k[2] for k in kept]
            mean_frames = (sum(frame_counts) / len(frame_counts)
                           if frame_counts else 0.0)
            bursts[sid] = BurstSummary(len(kept), mean_frames,
                                       frame_counts, inter)
            burst_records[sid] = kept
            budgets[sid] = kept_budgets
        return bursts, burst_records, budgets

    def _reduce_occupancy(self, warmup_ns, end_ns):
        """Transmitter-attributed airtime shares. Overlapping airtime is
        split proportionally so the shares plus free time sum to one."""
        window = end_ns - warmup_ns
        per_station: dict[int, int] = {}
        intervals = []
        for start, end, src, _dst, _kind, _bytes, _voided in self.phy_log:
            lo = max(start, warmup_ns)
            hi = min(end, end_ns)
            if hi <= lo:
                continue
            per_station[src] = per_station.get(src, 0) + (hi - lo)
            intervals.append((lo, hi))
        intervals.sort()
        union = 0
        cur_lo = cur_hi = None
        for lo, hi in intervals:
            if cur_hi is None or lo > cur_hi:
                if cur_hi is not None:
                    union += cur_hi - cur_lo
                cur_lo, cur_hi = lo, hi
            else:
                cur_hi = max(cur_hi, hi)
        if cur_hi is not None:
            union += cur_hi - cur_lo
        total_raw = sum(per_station.values())
        shares = {}
        for sid, raw_time in per_station.items():
            shares[sid] = (raw_time * union / total_raw / window
                           if total_raw else 0.0)
        return shares, 1.0 - union / window


# -- CSV emission --------------------------------------------------------


def write_csv(path, header, rows) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
