"""Command-line front end: scenario listing, runs, parameter sweeps,
and the closed-form model, with plot-ready CSV emission.

Subcommands: list-scenarios, run, sweep, analytic. Every CSV row from a
simulation carries the config hash and master seed, so any number in
any report can be traced back to a bit-reproducible run.
"""
from __future__ import annotations

import argparse
import copy
import hashlib
import os
import re
import sys

from .analytic import CellModel, RateClass, referenced_index, solve
from .config import (ConfigError, MACS, SimConfig, apply_mac, config_hash,
                     load_config, serialize)
from .metrics import interburst_histogram, write_csv
from .runner import ScenarioReport, run_scenario
from .scenarios import build_scenario, scenario_names

HIST_BIN_US = 500

FLOW_HEADER = ["scenario", "mac", "station", "rate", "kbps", "ci_lo",
               "ci_hi", "pkts_s", "jain", "config_hash", "seed"]
BURST_HEADER = ["scenario", "mac", "station", "bursts_per_s", "mean_frames",
                "mean_interburst_us", "config_hash", "seed"]
OCC_HEADER = ["scenario", "mac", "station", "share", "config_hash", "seed"]
HIST_HEADER = ["scenario", "mac", "station", "bin_start_us", "count",
               "config_hash", "seed"]
SWEEP_HEADER = ["scenario", "mac", "axis", "value", "station", "rate",
                "kbps", "ci_lo", "ci_hi", "pkts_s", "aggregate_kbps",
                "jain", "config_hash", "seed"]


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pasim",
        description="Multi-rate 802.11 cell simulator with dynamic "
                    "packet aggregation and anomaly baselines.")
    sub = p.add_subparsers(dest="command", required=True)

    ls = sub.add_parser("list-scenarios", help="show the scenario catalog")
    ls.set_defaults(func=_cmd_list)

    run = sub.add_parser("run", help="run a scenario or config file")
    run.add_argument("target", help="catalog name or config file path")
    run.add_argument("--mac", choices=sorted(MACS) + ["pas_no_alpha",
                     "pas_no_t_rate"], help="override the MAC variant")
    run.add_argument("--seed", type=int, help="override the master seed")
    run.add_argument("--reps", type=int, help="override replication count")
    run.add_argument("--out", metavar="DIR", help="write CSVs here")
    run.set_defaults(func=_cmd_run)

    sw = sub.add_parser("sweep", help="run a config across axis values")
    sw.add_argument("target", help="catalog name or config file path")
    sw.add_argument("--axis", required=True,
                    help="e.g. station1.packet_bytes, rts_threshold")
    sw.add_argument("--values", required=True,
                    help="comma-separated axis values")
    sw.add_argument("--macs", default=None,
                    help="comma-separated MAC variants (default: config's)")
    sw.add_argument("--seed", type=int, help="override the master seed")
    sw.add_argument("--reps", type=int, help="override replication count")
    sw.add_argument("--out", metavar="DIR", help="write sweep.csv here")
    sw.set_defaults(func=_cmd_sweep)

    an = sub.add_parser("analytic", help="closed-form cell model")
    an.add_argument("--rates", default="5.5,11",
                    help="comma-separated rates in Mbps")
    an.add_argument("--counts", default=None,
                    help="stations per rate (default: 1 each)")
    an.add_argument("--bytes", type=int, default=1000, dest="packet_bytes")
    an.add_argument("--plcp", action="store_true",
                    help="include the PHY preamble in packet airtimes")
    an.add_argument("--dcf", action="store_true",
                    help="one packet per access (aggregation off)")
    an.add_argument("--backoff-us", type=float, default=None)
    an.add_argument("--budget-us", type=float, default=None,
                    help="override the per-access airtime budget")
    an.add_argument("--out", metavar="DIR", help="write analytic.csv here")
    an.set_defaults(func=_cmd_analytic)
    return p


def _cmd_list(args) -> int:
    for name in scenario_names():
        cfg = build_scenario(name)
        rates = ",".join(f.rate_mbps if isinstance(f.rate_mbps, str)
                         else f"{f.rate_mbps:g}" for f in cfg.stations)
        topo = "full" if cfg.topology_decode is None else "partial"
        rts = (f" rts<={cfg.rts_threshold}B"
               if cfg.rts_threshold is not None else "")
        print(f"{name:26s} {len(cfg.stations)} senders @ {rates} Mbps, "
              f"{topo} topology{rts}")
    return 0


def _resolve(target: str) -> SimConfig:
    if os.path.exists(target):
        return load_config(target)
    return build_scenario(target)


def _apply_overrides(cfg: SimConfig, args) -> SimConfig:
    if args.mac:
        cfg = apply_mac(cfg, args.mac)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.reps is not None:
        cfg.reps = args.reps
    return cfg.validate()


def _jain_feasible(cfg: SimConfig) -> bool:
    return all(st.rate_mbps != "arf" for st in cfg.stations)


def _cmd_run(args) -> int:
    cfg = _apply_overrides(_resolve(args.target), args)
    label = args.mac or cfg.mac
    rep = run_scenario(cfg, jain=_jain_feasible(cfg))
    _print_summary(rep, label)
    if args.out:
        _write_run_csvs(args.out, rep, label)
        print(f"wrote flows/bursts/occupancy/histogram CSVs to {args.out}")
    return 0


def _print_summary(rep: ScenarioReport, label: str) -> None:
    cfg = rep.config
    print(f"scenario {cfg.name}  mac {label}  seed {cfg.seed}  "
          f"reps {cfg.reps}  ({cfg.duration_s:g} s, warmup "
          f"{cfg.warmup_s:g} s)")
    print(f"{'station':>7} {'rate':>5} {'kbps':>9} {'ci':>7} "
          f"{'pkt/s':>8} {'ci':>6}")
    for f in rep.flows:
        kci = f"+-{f.kbps.half_width:.1f}" if f.kbps.half_width else ""
        pci = f"+-{f.pkts_s.half_width:.1f}" if f.pkts_s.half_width else ""
        print(f"{f.src:>7} {f.rate_label:>5} {f.kbps.mean:>9.2f} {kci:>7} "
              f"{f.pkts_s.mean:>8.2f} {pci:>6}")
    agg = rep.aggregate_kbps
    aci = f" +- {agg.half_width:.1f}" if agg.half_width else ""
    line = f"aggregate {agg.mean:.2f}{aci} kbps"
    if rep.jain is not None:
        line += f"   fairness index {rep.jain:.4f}"
        if rep.jain_reps and rep.jain_reps.half_width is not None:
            line += (f" (per-rep {rep.jain_reps.mean:.4f} "
                     f"+- {rep.jain_reps.half_width:.4f})")
    print(line)


def _ci_cells(ci) -> list:
    if ci.half_width is None:
        return ["", ""]
    return [repr(ci.lo), repr(ci.hi)]


def _flow_rows(rep: ScenarioReport, label: str,
               axis=None, value=None) -> list:
    cfg, rows = rep.config, []
    jain = "" if rep.jain is None else repr(rep.jain)
    for f in rep.flows:
        row = [cfg.name, label, f.src, f.rate_label, repr(f.kbps.mean),
               *_ci_cells(f.kbps), repr(f.pkts_s.mean), jain,
               rep.config_hash, cfg.seed]
        if axis is not None:
            row = ([cfg.name, label, axis, value, f.src, f.rate_label,
                    repr(f.kbps.mean), *_ci_cells(f.kbps),
                    repr(f.pkts_s.mean), repr(rep.aggregate_kbps.mean),
                    jain, rep.config_hash, cfg.seed])
        rows.append(row)
    return rows


def _write_run_csvs(out_dir: str, rep: ScenarioReport,
                    label: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    cfg, runs = rep.config, rep.runs
    tag = [rep.config_hash, cfg.seed]
    write_csv(os.path.join(out_dir, "flows.csv"), FLOW_HEADER,
              _flow_rows(rep, label))

    window_s = cfg.duration_s - cfg.warmup_s
    sids = sorted({sid for r in runs for sid in r.bursts})
    burst_rows, hist_rows = [], []
    for sid in sids:
        count = sum(r.bursts[sid].count for r in runs if sid in r.bursts)
        frames = sum(sum(r.bursts[sid].frame_counts) for r in runs
                     if sid in r.bursts)
        inter = [iv for r in runs if sid in r.bursts
                 for iv in r.bursts[sid].interburst_ns]
        mean_inter = repr(sum(inter) / len(inter) / 1000) if inter else ""
        burst_rows.append([cfg.name, label, sid,
                           repr(count / (window_s * len(runs))),
                           repr(frames / count) if count else "",
                           mean_inter, *tag])
        if inter:
            bins, _mean, _n = interburst_histogram(inter, HIST_BIN_US * 1000)
            for start_ns in sorted(bins):
                hist_rows.append([cfg.name, label, sid, start_ns // 1000,
                                  bins[start_ns], *tag])
    write_csv(os.path.join(out_dir, "bursts.csv"), BURST_HEADER, burst_rows)
    write_csv(os.path.join(out_dir, "histogram.csv"), HIST_HEADER, hist_rows)

    occ_sids = sorted({sid for r in runs for sid in r.occupancy})
    occ_rows = [[cfg.name, label, sid,
                 repr(sum(r.occupancy.get(sid, 0.0) for r in runs)
                      / len(runs)), *tag] for sid in occ_sids]
    occ_rows.append([cfg.name, label, "free",
                     repr(sum(r.free_share for r in runs) / len(runs)),
                     *tag])
    write_csv(os.path.join(out_dir, "occupancy.csv"), OCC_HEADER, occ_rows)

    with open(os.path.join(out_dir, "config.conf"), "w") as fh:
        fh.write(serialize(cfg))


_GLOBAL_AXES = {"duration_s", "warmup_s", "rts_threshold", "txop_budget_us",
                "division_mtu", "reference_rate_mbps", "pas_alpha",
                "pas_t_rate"}
_STATION_AXES = {"rate_mbps", "packet_bytes", "size_min", "size_max"}


def _parse_value(raw: str):
    low = raw.strip().lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw.strip()


def _set_axis(cfg: SimConfig, axis: str, raw: str) -> None:
    val = _parse_value(raw)
    m = re.fullmatch(r"station(\d+)\.(\w+)", axis)
    if m:
        sid, fieldname = int(m.group(1)), m.group(2)
        if fieldname not in _STATION_AXES:
            raise ValueError(f"axis field {fieldname!r} is not sweepable")
        for st in cfg.stations:
            if st.sid == sid:
                setattr(st, fieldname, val)
                return
        raise ValueError(f"no station {sid} in config")
    if axis in _STATION_AXES:
        for st in cfg.stations:
            setattr(st, axis, val)
        return
    if axis.startswith("phy."):
        cfg.phy[axis] = float(raw)
        return
    if axis in _GLOBAL_AXES:
        setattr(cfg, axis, val)
        return
    raise ValueError(f"axis {axis!r} is not sweepable")


def _cmd_sweep(args) -> int:
    base = _resolve(args.target)
    macs = (args.macs.split(",") if args.macs else [base.mac])
    rows = []
    for raw in args.values.split(","):
        for mac in macs:
            cfg = copy.deepcopy(base)
            _set_axis(cfg, args.axis, raw)
            label = mac.strip()
            cfg = apply_mac(cfg, label)
            if args.seed is not None:
                cfg.seed = args.seed
            if args.reps is not None:
                cfg.reps = args.reps
            cfg.validate()
            rep = run_scenario(cfg, jain=_jain_feasible(cfg))
            jain = f" index {rep.jain:.4f}" if rep.jain is not None else ""
            print(f"{args.axis}={raw.strip():>8} mac {label:15s} "
                  f"aggregate {rep.aggregate_kbps.mean:8.2f} kbps{jain}")
            rows.extend(_flow_rows(rep, label, axis=args.axis,
                                   value=raw.strip()))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "sweep.csv")
        write_csv(path, SWEEP_HEADER, rows)
        print(f"wrote {path}")
    return 0


def _cmd_analytic(args) -> int:
    rates = [float(r) for r in args.rates.split(",")]
    counts = ([int(c) for c in args.counts.split(",")]
              if args.counts else [1] * len(rates))
    if len(counts) != len(rates):
        raise ValueError("--counts length must match --rates")
    model = CellModel(
        classes=[RateClass(round(r * 1e6), c)
                 for r, c in zip(rates, counts)],
        packet_bytes=args.packet_bytes, aggregate=not args.dcf,
        include_plcp=args.plcp,
        budget_ns=(round(args.budget_us * 1000)
                   if args.budget_us is not None else None),
        avg_backoff_ns=(round(args.backoff_us * 1000)
                        if args.backoff_us is not None else None))
    result = solve(model)
    index = referenced_index(model)
    mode = "one packet per access" if args.dcf else "aggregating"
    print(f"closed-form cell model ({mode}, {args.packet_bytes} B, "
          f"preamble {'included' if args.plcp else 'excluded'})")
    print(f"{'rate':>6} {'n':>4} {'kbps':>10} {'pkt/s':>8} {'occupancy':>9}")
    for c in result.classes:
        print(f"{c.rate_bps / 1e6:>6g} {c.packets_per_access:>4} "
              f"{c.kbps:>10.2f} {c.pkts_per_s:>8.2f} {c.occupancy:>9.4f}")
    print(f"free medium fraction {result.free_fraction:.4f}   "
          f"fairness index {index:.4f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        tag = hashlib.sha256(repr(model).encode()).hexdigest()[:12]
        rows = [[c.rate_bps / 1e6, repr(c.kbps), repr(c.pkts_per_s),
                 repr(index), tag] for c in result.classes]
        path = os.path.join(args.out, "analytic.csv")
        write_csv(path, ["rate_mbps", "kbps", "pkts_s", "index",
                         "model_hash"], rows)
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
