"""Run configuration: dataclasses, a fail-closed text format, canonical
serialization, and config hashing.

The file format is flat ``key = value`` lines plus ``[station N]``
sections for each sending node. Unknown keys, malformed values, and
inconsistent station definitions are errors that name the offending
line; nothing is silently ignored.

Example::

    name = pair_1_11
    mac = pas
    duration_s = 60
    seed = 1

    [station 0]
    dst = 2
    rate_mbps = 1
    packet_bytes = 1000

    [station 1]
    dst = 2
    rate_mbps = 11
    packet_bytes = 1000
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

MACS = ("dcf", "pas", "cw_adapt", "packet_division", "fixed_txop")
# Aliases select the aggregation MAC with one feature disabled.
MAC_ALIASES = {"pas_no_alpha": ("pas", "alpha"),
               "pas_no_t_rate": ("pas", "t_rate")}


class ConfigError(ValueError):
    pass


# Config key -> (PhyParams field, from-config-value converter). Durations
# are microseconds in files, nanoseconds internally.
PHY_KEYS = {
    "phy.slot_us": ("slot_ns", lambda v: round(v * 1000)),
    "phy.sifs_us": ("sifs_ns", lambda v: round(v * 1000)),
    "phy.difs_us": ("difs_ns", lambda v: round(v * 1000)),
    "phy.plcp_us": ("plcp_ns", lambda v: round(v * 1000)),
    "phy.control_rate_mbps": ("control_rate_bps", lambda v: round(v * 1e6)),
    "phy.cw_min": ("cw_min", int),
    "phy.cw_max": ("cw_max", int),
    "phy.retry_limit": ("retry_limit", int),
    "phy.ack_bytes": ("ack_bytes", int),
    "phy.rts_bytes": ("rts_bytes", int),
    "phy.cts_bytes": ("cts_bytes", int),
    "phy.mac_overhead_bytes": ("mac_overhead_bytes", int),
}


@dataclass
class StationCfg:
    sid: int
    dst: int = -1
    rate_mbps: float | str = 11.0      # number, or "arf"
    packet_bytes: int = 1000
    size_min: int | None = None        # uniform payload draw when set
    size_max: int | None = None
    link_trace: tuple[tuple[float, float], ...] | None = None

    @property
    def rate_bps(self) -> int:
        if self.rate_mbps == "arf":
            raise ValueError("station uses automatic rate control")
        return round(float(self.rate_mbps) * 1_000_000)


@dataclass
class SimConfig:
    name: str = "unnamed"
    mac: str = "dcf"
    duration_s: float = 60.0
    warmup_s: float = 5.0
    reps: int = 10
    seed: int = 1
    n_nodes: int = 0                   # 0: derived from station ids
    pas_alpha: bool = True
    pas_t_rate: bool = True
    rts_threshold: int | None = None
    txop_budget_us: float = 8000.0
    division_mtu: int = 1500
    reference_rate_mbps: float = 11.0
    topology_decode: tuple[tuple[int, int], ...] | None = None  # None: full
    topology_sense: tuple[tuple[int, int], ...] = ()
    phy: dict[str, float] = field(default_factory=dict)  # phy.* overrides
    stations: list[StationCfg] = field(default_factory=list)

    def build_phy(self):
        from .phy import PhyParams
        fields = {}
        for key, raw in self.phy.items():
            name, conv = PHY_KEYS[key]
            fields[name] = conv(raw)
        return PhyParams(**fields)

    def node_count(self) -> int:
        top = 0
        for st in self.stations:
            top = max(top, st.sid, st.dst)
        for pair in (self.topology_decode or ()) + self.topology_sense:
            top = max(top, *pair)
        return max(self.n_nodes, top + 1)

    def validate(self) -> "SimConfig":
        if self.mac not in MACS:
            raise ConfigError(f"unknown mac {self.mac!r}")
        if not self.stations:
            raise ConfigError("no [station N] sections")
        if self.duration_s <= self.warmup_s or self.warmup_s < 0:
            raise ConfigError("need 0 <= warmup_s < duration_s")
        if self.reps < 1:
            raise ConfigError("reps must be >= 1")
        if self.txop_budget_us <= 0:
            raise ConfigError("txop.budget_us must be positive")
        if self.division_mtu <= 0:
            raise ConfigError("division.mtu must be positive")
        if self.reference_rate_mbps <= 0:
            raise ConfigError("reference_rate_mbps must be positive")
        if self.rts_threshold is not None and self.rts_threshold < 0:
            raise ConfigError("pas.rts_threshold must be >= 0 or off")
        for key in self.phy:
            if key not in PHY_KEYS:
                raise ConfigError(f"unknown phy override {key!r}")
        try:
            phy = self.build_phy()
        except ValueError as exc:
            raise ConfigError(f"bad phy overrides: {exc}") from None
        seen = set()
        for st in self.stations:
            where = f"station {st.sid}"
            if st.sid in seen:
                raise ConfigError(f"{where} defined twice")
            seen.add(st.sid)
            if st.sid < 0:
                raise ConfigError(f"{where}: negative id")
            if st.dst < 0:
                raise ConfigError(f"{where}: dst is required")
            if st.dst == st.sid:
                raise ConfigError(f"{where}: dst equals sid")
            if (st.size_min is None) != (st.size_max is None):
                raise ConfigError(f"{where}: size_min and size_max go together")
            if st.size_min is not None:
                if not (0 < st.size_min <= st.size_max):
                    raise ConfigError(f"{where}: need 0 < size_min <= size_max")
            elif st.packet_bytes <= 0:
                raise ConfigError(f"{where}: packet_bytes must be positive")
            if st.rate_mbps != "arf" and float(st.rate_mbps) <= 0:
                raise ConfigError(f"{where}: rate_mbps must be positive")
            if st.rate_mbps != "arf" and st.rate_bps not in phy.rates:
                known = ", ".join(f"{r / 1e6:g}" for r in phy.rates)
                raise ConfigError(
                    f"{where}: rate {st.rate_mbps:g} Mbps not in the "
                    f"modeled set ({known})")
            if st.link_trace is not None:
                last = -1.0
                for t, r in st.link_trace:
                    if t < 0 or r <= 0 or t <= last:
                        raise ConfigError(
                            f"{where}: link_trace must be increasing in time "
                            "with positive rates")
                    last = t
        n = self.node_count()
        for st in self.stations:
            if st.dst >= n:
                raise ConfigError(f"station {st.sid}: dst {st.dst} out of range")
        return self


def apply_mac(cfg: SimConfig, mac: str) -> SimConfig:
    """Set the MAC variant, resolving feature-disabling aliases."""
    if mac in MAC_ALIASES:
        base, feature = MAC_ALIASES[mac]
        out = replace(cfg, mac=base)
        if feature == "alpha":
            out.pas_alpha = False
        else:
            out.pas_t_rate = False
        return out
    if mac not in MACS:
        raise ConfigError(f"unknown mac {mac!r}")
    return replace(cfg, mac=mac)


def _fmt_rate(r) -> str:
    if r == "arf":
        return "arf"
    f = float(r)
    return f"{f:g}"


def _pairs_str(pairs) -> str:
    return " ".join(f"{a}>{b}" for a, b in pairs)


def serialize(cfg: SimConfig) -> str:
    """Canonical text form; parsing it back yields an equal config."""
    out = [f"name = {cfg.name}",
           f"mac = {cfg.mac}",
           f"duration_s = {cfg.duration_s:g}",
           f"warmup_s = {cfg.warmup_s:g}",
           f"reps = {cfg.reps}",
           f"seed = {cfg.seed}",
           f"n_nodes = {cfg.node_count()}",
           f"pas.alpha = {'on' if cfg.pas_alpha else 'off'}",
           f"pas.t_rate = {'on' if cfg.pas_t_rate else 'off'}",
           "pas.rts_threshold = "
           + ("off" if cfg.rts_threshold is None else str(cfg.rts_threshold)),
           f"txop.budget_us = {cfg.txop_budget_us:g}",
           f"division.mtu = {cfg.division_mtu}",
           f"reference_rate_mbps = {cfg.reference_rate_mbps:g}"]
    for key in sorted(cfg.phy):
        out.append(f"{key} = {cfg.phy[key]:g}")
    if cfg.topology_decode is not None:
        out.append(f"topology.decode = {_pairs_str(sorted(cfg.topology_decode))}")
    if cfg.topology_sense:
        out.append(f"topology.sense = {_pairs_str(sorted(cfg.topology_sense))}")
    for st in sorted(cfg.stations, key=lambda s: s.sid):
        out.append("")
        out.append(f"[station {st.sid}]")
        out.append(f"dst = {st.dst}")
        out.append(f"rate_mbps = {_fmt_rate(st.rate_mbps)}")
        if st.size_min is not None:
            out.append(f"size_min = {st.size_min}")
            out.append(f"size_max = {st.size_max}")
        else:
            out.append(f"packet_bytes = {st.packet_bytes}")
        if st.link_trace is not None:
            steps = " ".join(f"{t:g}:{r:g}" for t, r in st.link_trace)
            out.append(f"link_trace = {steps}")
    return "\n".join(out) + "\n"


def config_hash(cfg: SimConfig) -> str:
    return hashlib.sha256(serialize(cfg).encode()).hexdigest()[:12]


def _parse_bool(val: str, where: str) -> bool:
    if val == "on":
        return True
    if val == "off":
        return False
    raise ConfigError(f"{where}: expected on or off, got {val!r}")


def _parse_int(val: str, where: str) -> int:
    try:
        return int(val)
    except ValueError:
        raise ConfigError(f"{where}: expected an integer, got {val!r}") from None


def _parse_float(val: str, where: str) -> float:
    try:
        return float(val)
    except ValueError:
        raise ConfigError(f"{where}: expected a number, got {val!r}") from None


def _parse_pairs(val: str, where: str) -> tuple[tuple[int, int], ...]:
    pairs = []
    for tok in val.split():
        a, sep, b = tok.partition(">")
        if not sep:
            raise ConfigError(f"{where}: pair {tok!r} is not like 0>1")
        pairs.append((_parse_int(a, where), _parse_int(b, where)))
    return tuple(pairs)


def _parse_trace(val: str, where: str) -> tuple[tuple[float, float], ...]:
    steps = []
    for tok in val.split():
        t, sep, r = tok.partition(":")
        if not sep:
            raise ConfigError(f"{where}: step {tok!r} is not like 10:5.5")
        steps.append((_parse_float(t, where), _parse_float(r, where)))
    return tuple(steps)


def parse_config(text: str) -> SimConfig:
    cfg = SimConfig()
    station: StationCfg | None = None
    station_keys_seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"line {lineno}"
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"{where}: unterminated section header")
            head = line[1:-1].split()
            if len(head) != 2 or head[0] != "station":
                raise ConfigError(f"{where}: only [station N] sections exist")
            station = StationCfg(sid=_parse_int(head[1], where))
            cfg.stations.append(station)
            station_keys_seen = set()
            continue
        key, sep, val = (part.strip() for part in line.partition("="))
        if not sep or not key:
            raise ConfigError(f"{where}: expected key = value")
        if station is None:
            _apply_global(cfg, key, val, where)
        else:
            if key in station_keys_seen:
                raise ConfigError(f"{where}: duplicate key {key!r} in section")
            station_keys_seen.add(key)
            _apply_station(station, key, val, where)
    return cfg.validate()


def _apply_global(cfg: SimConfig, key: str, val: str, where: str) -> None:
    if key == "name":
        cfg.name = val
    elif key == "mac":
        if val in MAC_ALIASES:
            base, feature = MAC_ALIASES[val]
            cfg.mac = base
            if feature == "alpha":
                cfg.pas_alpha = False
            else:
                cfg.pas_t_rate = False
        elif val in MACS:
            cfg.mac = val
        else:
            raise ConfigError(f"{where}: unknown mac {val!r}")
    elif key == "duration_s":
        cfg.duration_s = _parse_float(val, where)
    elif key == "warmup_s":
        cfg.warmup_s = _parse_float(val, where)
    elif key == "reps":
        cfg.reps = _parse_int(val, where)
    elif key == "seed":
        cfg.seed = _parse_int(val, where)
    elif key == "n_nodes":
        cfg.n_nodes = _parse_int(val, where)
    elif key == "pas.alpha":
        cfg.pas_alpha = _parse_bool(val, where)
    elif key == "pas.t_rate":
        cfg.pas_t_rate = _parse_bool(val, where)
    elif key == "pas.rts_threshold":
        cfg.rts_threshold = None if val == "off" else _parse_int(val, where)
    elif key == "txop.budget_us":
        cfg.txop_budget_us = _parse_float(val, where)
    elif key == "division.mtu":
        cfg.division_mtu = _parse_int(val, where)
    elif key == "reference_rate_mbps":
        cfg.reference_rate_mbps = _parse_float(val, where)
    elif key == "topology.decode":
        cfg.topology_decode = _parse_pairs(val, where)
    elif key == "topology.sense":
        cfg.topology_sense = _parse_pairs(val, where)
    elif key in PHY_KEYS:
        cfg.phy[key] = _parse_float(val, where)
    else:
        raise ConfigError(f"{where}: unknown key {key!r}")


def _apply_station(st: StationCfg, key: str, val: str, where: str) -> None:
    if key == "dst":
        st.dst = _parse_int(val, where)
    elif key == "rate_mbps":
        st.rate_mbps = "arf" if val == "arf" else _parse_float(val, where)
    elif key == "packet_bytes":
        st.packet_bytes = _parse_int(val, where)
    elif key == "size_min":
        st.size_min = _parse_int(val, where)
    elif key == "size_max":
        st.size_max = _parse_int(val, where)
    elif key == "link_trace":
        st.link_trace = _parse_trace(val, where)
    else:
        raise ConfigError(f"{where}: unknown station key {key!r}")


def load_config(path: str) -> SimConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_config(fh.read())
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None
