"""Build live simulations from configs and run replication sets.

One replication: seed the engine with "<seed>:<rep>", wire topology,
channel, stations and a Collector, run for the configured duration, and
reduce to RunStats. A scenario report aggregates replications with
Student-t intervals and, when asked, adds the measured fairness index,
which needs auxiliary reference runs (same seeds, every sender forced to
one rate class) per rate class present.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .baselines import CwAdaptStation, SplittingSource, fragment_size
from .config import SimConfig, config_hash
from .dcf import DcfStation
from .engine import Engine
from .metrics import (Collector, ConfidenceInterval, RunStats, jain_index,
                      t_interval)
from .pas import PasStation
from .phy import Channel, Topology
from .scenarios import ArfController, SaturatedSource, make_link_filter


@dataclass
class LiveSim:
    engine: Engine
    channel: Channel
    stations: dict          # sid -> station (senders and receivers)
    senders: list           # sids that transmit
    collector: Collector
    config: SimConfig


def build_simulation(cfg: SimConfig, rep: int) -> LiveSim:
    cfg.validate()
    params = cfg.build_phy()
    n = cfg.node_count()
    if cfg.topology_decode is None:
        topo = Topology.full(n)
    else:
        topo = Topology(n, decode=list(cfg.topology_decode),
                        extra_sense=list(cfg.topology_sense))
    engine = Engine(seed=f"{cfg.seed}:{rep}")
    channel = Channel(engine, topo)
    collector = Collector()
    channel.sink = collector

    traces = {st.sid: st.link_trace for st in cfg.stations if st.link_trace}
    if traces:
        channel.link_filter = make_link_filter(traces)

    ref_bps = round(cfg.reference_rate_mbps * 1e6)
    stations: dict[int, object] = {}
    senders: list[int] = []
    for st in cfg.stations:
        rate_ctl = None
        rate_bps = params.rates[-1]
        if st.rate_mbps == "arf":
            rate_ctl = ArfController(ladder_bps=params.rates)
        else:
            rate_bps = st.rate_bps

        source = SaturatedSource(
            packet_bytes=st.packet_bytes, size_min=st.size_min,
            size_max=st.size_max, rng=engine.stream(f"traffic/{st.sid}"))

        kw = dict(dst=st.dst, source=source, rate_bps=rate_bps,
                  rts_threshold=cfg.rts_threshold, rate_ctl=rate_ctl,
                  sink=collector)
        if cfg.mac == "dcf":
            node = DcfStation(st.sid, engine, channel, params, **kw)
        elif cfg.mac == "pas":
            node = PasStation(st.sid, engine, channel, params,
                              alpha_on=cfg.pas_alpha,
                              t_rate_on=cfg.pas_t_rate, **kw)
        elif cfg.mac == "cw_adapt":
            node = CwAdaptStation(st.sid, engine, channel, params,
                                  reference_rate_bps=ref_bps, **kw)
        elif cfg.mac == "packet_division":
            frag = fragment_size(cfg.division_mtu, rate_bps, ref_bps,
                                 params.mac_overhead_bytes)
            kw["source"] = SplittingSource(source, frag)
            node = DcfStation(st.sid, engine, channel, params, **kw)
        elif cfg.mac == "fixed_txop":
            node = PasStation(st.sid, engine, channel, params,
                              alpha_on=cfg.pas_alpha,
                              t_rate_on=cfg.pas_t_rate,
                              budget_mode="fixed",
                              fixed_budget_ns=round(cfg.txop_budget_us * 1000),
                              **kw)
        else:
            raise ValueError(f"unknown mac {cfg.mac!r}")
        stations[st.sid] = node
        senders.append(st.sid)

    for sid in range(n):
        if sid not in stations:
            stations[sid] = DcfStation(sid, engine, channel, params,
                                       sink=collector)

    return LiveSim(engine, channel, stations, senders, collector, cfg)


def run_once(cfg: SimConfig, rep: int) -> tuple[RunStats, LiveSim]:
    sim = build_simulation(cfg, rep)
    for sid in sim.senders:
        sim.stations[sid].start()
    end_ns = round(cfg.duration_s * 1e9)
    sim.engine.run_until(end_ns)
    stats = sim.collector.finalize(round(cfg.warmup_s * 1e9), end_ns)
    return stats, sim


@dataclass
class FlowReport:
    src: int
    dst: int
    rate_label: str
    kbps: ConfidenceInterval
    pkts_s: ConfidenceInterval


@dataclass
class ScenarioReport:
    config: SimConfig
    config_hash: str
    flows: list                        # FlowReport, by src
    aggregate_kbps: ConfidenceInterval
    jain: float | None                 # measured index over rep means
    jain_reps: ConfidenceInterval | None  # same index per replication
    runs: list                         # RunStats per replication

    def flow(self, src: int) -> FlowReport:
        for f in self.flows:
            if f.src == src:
                return f
        raise KeyError(src)


def _rate_label(st) -> str:
    if st.rate_mbps == "arf":
        return "arf"
    return f"{st.rate_mbps:g}"


def run_scenario(cfg: SimConfig, jain: bool = False) -> ScenarioReport:
    """Run all replications of a config; optionally measure fairness.

    The fairness index is taken over per-station throughput ratios: each
    station's throughput divided by what it gets when every sender runs
    at that station's rate (same seeds, same sizes). Senders with
    identical traffic parameters are exchangeable inside a reference
    run, so their reference flows are averaged before the ratio. The
    headline index pools replication means; the per-replication spread
    is kept alongside it. In a uniform-rate run the reference scale is
    common to every station and cancels, so the index reduces to the
    plain Jain index over the mean flows.
    """
    cfg.validate()
    runs = [run_once(cfg, rep)[0] for rep in range(cfg.reps)]

    refs: dict[str, list[RunStats]] = {}
    if jain:
        for label, ref_cfg in _reference_configs(cfg).items():
            if ref_cfg is None:
                refs[label] = runs
            else:
                refs[label] = [run_once(ref_cfg, rep)[0]
                               for rep in range(cfg.reps)]

    flows = []
    for st in sorted(cfg.stations, key=lambda s: s.sid):
        kbps = [_flow_kbps(r, st.sid, st.dst) for r in runs]
        pkts = [_flow_pkts(r, st.sid, st.dst) for r in runs]
        flows.append(FlowReport(st.sid, st.dst, _rate_label(st),
                                t_interval(kbps), t_interval(pkts)))
    aggregate = t_interval([r.aggregate_kbps for r in runs])

    jain_val = None
    jain_ci = None
    if jain:
        peers: dict[tuple, list] = {}
        for st in cfg.stations:
            peers.setdefault(_traffic_key(st), []).append(st)

        def ref_val(run: RunStats, st) -> float:
            group = peers[_traffic_key(st)]
            return sum(_flow_kbps(run, p.sid, p.dst)
                       for p in group) / len(group)

        ratios = []
        for st in cfg.stations:
            got = sum(_flow_kbps(r, st.sid, st.dst) for r in runs)
            ref = sum(ref_val(r, st) for r in refs[_rate_label(st)])
            ratios.append(got / ref if ref > 0 else 0.0)
        jain_val = jain_index(ratios)

        per_rep = []
        for rep in range(cfg.reps):
            ratios = []
            for st in cfg.stations:
                got = _flow_kbps(runs[rep], st.sid, st.dst)
                ref = ref_val(refs[_rate_label(st)][rep], st)
                ratios.append(got / ref if ref > 0 else 0.0)
            per_rep.append(jain_index(ratios))
        jain_ci = t_interval(per_rep)

    return ScenarioReport(cfg, config_hash(cfg), flows, aggregate,
                          jain_val, jain_ci, runs)


def _flow_kbps(run: RunStats, src: int, dst: int) -> float:
    st = run.flows.get((src, dst))
    return st.throughput_kbps if st else 0.0


def _flow_pkts(run: RunStats, src: int, dst: int) -> float:
    st = run.flows.get((src, dst))
    return st.packets_per_s if st else 0.0


def _traffic_key(st) -> tuple:
    return (st.packet_bytes, st.size_min, st.size_max)


def _reference_configs(cfg: SimConfig):
    """One config per sender rate class with every sender at that rate.

    Returns label -> config, or label -> None when the scenario already
    runs every sender at that class (the main runs serve as reference).
    """
    labels = {_rate_label(st) for st in cfg.stations}
    out = {}
    for label in labels:
        if len(labels) == 1:
            out[label] = None
            continue
        if label == "arf":
            raise ValueError("fairness reference undefined for arf senders")
        rate = float(label)
        stations = tuple(replace(st, rate_mbps=rate) for st in cfg.stations)
        out[label] = replace(cfg, name=f"{cfg.name}__ref_{label}",
                             stations=stations)
    return out
