"""Config text format, canonical serialization, and the command line."""

import contextlib
import csv
import io

import pytest

from pasim.cli import FLOW_HEADER, SWEEP_HEADER, main
from pasim.config import (ConfigError, SimConfig, StationCfg, apply_mac,
                          config_hash, parse_config, serialize)

TINY = """\
name = tiny_pair
mac = dcf
duration_s = 2
warmup_s = 0.5
reps = 2
seed = 7

[station 0]
dst = 2
rate_mbps = 5.5

[station 1]
dst = 2
rate_mbps = 11
"""


def run_cli(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# -- parsing ------------------------------------------------------------------

def test_minimal_config_gets_defaults():
    cfg = parse_config("[station 0]\ndst = 1\n")
    assert (cfg.mac, cfg.duration_s, cfg.warmup_s, cfg.reps, cfg.seed) == \
        ("dcf", 60.0, 5.0, 10, 1)
    st = cfg.stations[0]
    assert (st.rate_mbps, st.packet_bytes, st.dst) == (11.0, 1000, 1)
    assert cfg.node_count() == 2


def test_comments_and_blank_lines():
    cfg = parse_config("# header\nreps = 3  # trailing note\n\n"
                       "[station 0]\ndst = 1\n")
    assert cfg.reps == 3


@pytest.mark.parametrize("text,fragment", [
    ("pas.alhpa = on\n[station 0]\ndst = 1\n", "line 1: unknown key"),
    ("[station 0]\ndst = 1\nspeed = 9\n", "line 3: unknown station key"),
    ("mac = csma\n[station 0]\ndst = 1\n", "unknown mac 'csma'"),
    ("pas.alpha = yes\n[station 0]\ndst = 1\n", "expected on or off"),
    ("reps = ten\n[station 0]\ndst = 1\n", "expected an integer"),
    ("duration_s = soon\n[station 0]\ndst = 1\n", "expected a number"),
    ("topology.decode = 0-1\n[station 0]\ndst = 1\n", "is not like 0>1"),
    ("[station 0]\ndst = 1\nlink_trace = 10\n", "is not like 10:5.5"),
    ("[station 0]\ndst = 1\ndst = 2\n", "duplicate key 'dst'"),
    ("[station 0 extra]\ndst = 1\n", "only [station N] sections"),
    ("just a line\n[station 0]\ndst = 1\n", "expected key = value"),
])
def test_malformed_lines_are_named(text, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert fragment in str(exc.value)


@pytest.mark.parametrize("text,fragment", [
    ("[station 0]\ndst = 1\n[station 0]\ndst = 1\n", "defined twice"),
    ("[station 0]\ndst = 0\n", "dst equals sid"),
    ("[station 0]\n", "dst is required"),
    ("[station 0]\ndst = 1\nsize_min = 100\n", "go together"),
    ("[station 0]\ndst = 1\nsize_min = 500\nsize_max = 100\n",
     "0 < size_min <= size_max"),
    ("[station 0]\ndst = 1\nrate_mbps = 3\n",
     "rate 3 Mbps not in the modeled set (1, 2, 5.5, 11)"),
    ("[station 0]\ndst = 1\nlink_trace = 5:11 5:1\n", "must be increasing"),
    ("[station 0]\ndst = 9\nn_nodes = 2\n", "unknown station key"),
    ("warmup_s = 60\n[station 0]\ndst = 1\n", "warmup_s < duration_s"),
    ("reps = 0\n[station 0]\ndst = 1\n", "reps must be >= 1"),
    ("phy.cw_min = 30\n[station 0]\ndst = 1\n", "bad phy overrides"),
])
def test_inconsistent_configs_are_rejected(text, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert fragment in str(exc.value)


def test_node_count_covers_every_address():
    cfg = parse_config("n_nodes = 2\n[station 0]\ndst = 9\n")
    assert cfg.node_count() == 10


def test_unknown_phy_override_field():
    cfg = SimConfig(phy={"phy.bogus_us": 1.0},
                    stations=[StationCfg(sid=0, dst=1)])
    with pytest.raises(ConfigError, match="unknown phy override"):
        cfg.validate()


def test_mac_alias_in_text_sets_the_toggle():
    cfg = parse_config("mac = pas_no_alpha\n[station 0]\ndst = 1\n")
    assert cfg.mac == "pas" and cfg.pas_alpha is False and cfg.pas_t_rate
    cfg = parse_config("mac = pas_no_t_rate\n[station 0]\ndst = 1\n")
    assert cfg.mac == "pas" and cfg.pas_t_rate is False and cfg.pas_alpha


def test_apply_mac_rejects_unknown():
    cfg = parse_config(TINY)
    with pytest.raises(ConfigError, match="unknown mac"):
        apply_mac(cfg, "tdma")


def test_phy_override_flows_into_params():
    cfg = parse_config("phy.slot_us = 9\nphy.cw_min = 15\n"
                       "[station 0]\ndst = 1\n")
    phy = cfg.build_phy()
    assert phy.slot_ns == 9000 and phy.cw_min == 15


# -- serialization ------------------------------------------------------------

def pinned(cfg):
    """Serialization pins the derived node count; normalize for ==."""
    from dataclasses import replace
    return replace(cfg, n_nodes=cfg.node_count())


def test_serialize_round_trip():
    cfg = parse_config(TINY)
    text = serialize(cfg)
    assert parse_config(text) == pinned(cfg)
    assert serialize(parse_config(text)) == text


def test_serialize_covers_arf_and_traces():
    text = ("mac = pas\npas.rts_threshold = 200\n"
            "topology.decode = 0>2 2>0 1>2 2>1\n"
            "[station 0]\ndst = 2\nrate_mbps = arf\n"
            "link_trace = 0:11 1.5:5.5\n"
            "[station 1]\ndst = 2\nrate_mbps = 11\n"
            "size_min = 550\nsize_max = 1450\n")
    cfg = parse_config(text)
    assert cfg.stations[0].rate_mbps == "arf"
    assert cfg.stations[0].link_trace == ((0.0, 11.0), (1.5, 5.5))
    out = serialize(cfg)
    assert "rate_mbps = arf" in out
    assert "link_trace = 0:11 1.5:5.5" in out
    assert "pas.rts_threshold = 200" in out
    # pairs come back sorted but mean the same thing
    again = parse_config(out)
    assert set(again.topology_decode) == set(cfg.topology_decode)
    assert again.stations == cfg.stations


def test_config_hash_is_stable_and_sensitive():
    cfg = parse_config(TINY)
    h = config_hash(cfg)
    assert len(h) == 12 and int(h, 16) >= 0
    assert config_hash(parse_config(TINY)) == h
    other = parse_config(TINY.replace("seed = 7", "seed = 8"))
    assert config_hash(other) != h


def test_arf_station_has_no_fixed_rate():
    cfg = parse_config("[station 0]\ndst = 1\nrate_mbps = arf\n")
    with pytest.raises(ValueError, match="automatic rate"):
        cfg.stations[0].rate_bps


# -- command line -------------------------------------------------------------

def test_list_scenarios():
    code, out, err = run_cli(["list-scenarios"])
    assert code == 0 and err == ""
    lines = out.strip().splitlines()
    assert len(lines) == 17
    assert any(line.startswith("validation_11_11") for line in lines)
    assert any("rts<=200B" in line for line in lines)


def test_run_writes_the_csv_set(tmp_path):
    conf = tmp_path / "tiny.conf"
    conf.write_text(TINY)
    out_dir = tmp_path / "out"
    code, out, err = run_cli(["run", str(conf), "--out", str(out_dir)])
    assert code == 0, err
    assert "scenario tiny_pair" in out and "aggregate" in out
    for name in ("flows.csv", "bursts.csv", "histogram.csv",
                 "occupancy.csv", "config.conf"):
        assert (out_dir / name).exists(), name

    header, rows = read_csv(out_dir / "flows.csv")
    assert header == FLOW_HEADER
    assert [int(r[2]) for r in rows] == [0, 1]
    for row in rows:
        assert row[1] == "dcf"
        assert float(row[4]) > 0              # kbps
        assert float(row[5]) <= float(row[4]) <= float(row[6])
        assert row[8] != ""                   # jain filled
        assert row[9] == config_hash(parse_config(TINY))
    # the emitted config reproduces the run
    assert parse_config((out_dir / "config.conf").read_text()) == \
        pinned(parse_config(TINY))


def test_run_with_alias_mac_labels_rows(tmp_path):
    conf = tmp_path / "tiny.conf"
    conf.write_text(TINY)
    out_dir = tmp_path / "alias"
    code, out, _err = run_cli(["run", str(conf), "--mac", "pas_no_alpha",
                               "--reps", "1", "--out", str(out_dir)])
    assert code == 0
    assert "mac pas_no_alpha" in out
    _header, rows = read_csv(out_dir / "flows.csv")
    assert {r[1] for r in rows} == {"pas_no_alpha"}


def test_run_with_rate_control_skips_the_index(tmp_path):
    conf = tmp_path / "walk.conf"
    conf.write_text("name = tiny_walk\nduration_s = 2\nwarmup_s = 0\n"
                    "reps = 1\nseed = 3\n"
                    "[station 0]\ndst = 2\nrate_mbps = arf\n"
                    "link_trace = 0:11 0.5:5.5 1:1\n"
                    "[station 1]\ndst = 2\nrate_mbps = 11\n")
    out_dir = tmp_path / "walk"
    code, out, _err = run_cli(["run", str(conf), "--out", str(out_dir)])
    assert code == 0
    assert "fairness index" not in out
    _header, rows = read_csv(out_dir / "flows.csv")
    assert {r[8] for r in rows} == {""}
    assert {r[3] for r in rows} == {"arf", "11"}


def test_run_unknown_target():
    code, _out, err = run_cli(["run", "nosuch_scenario"])
    assert code == 1
    assert err.startswith("error:") and "unknown scenario" in err


def test_run_rejects_unknown_mac_flag():
    with pytest.raises(SystemExit) as exc:
        run_cli(["run", "validation_11_11", "--mac", "bogus"])
    assert exc.value.code == 2


def test_sweep_single_point_matches_run(tmp_path):
    conf = tmp_path / "tiny.conf"
    conf.write_text(TINY)
    run_dir, sweep_dir = tmp_path / "r", tmp_path / "s"
    code, _out, _err = run_cli(["run", str(conf), "--out", str(run_dir)])
    assert code == 0
    code, out, _err = run_cli(["sweep", str(conf), "--axis", "duration_s",
                               "--values", "2", "--out", str(sweep_dir)])
    assert code == 0 and "aggregate" in out
    _h, run_rows = read_csv(run_dir / "flows.csv")
    header, sweep_rows = read_csv(sweep_dir / "sweep.csv")
    assert header == SWEEP_HEADER
    # same config, same seed: identical numbers down to the repr
    assert [r[4] for r in run_rows] == [r[6] for r in sweep_rows]
    assert [(r[2], r[3]) for r in sweep_rows] == [("duration_s", "2")] * 2


def test_sweep_station_axis_across_macs(tmp_path):
    conf = tmp_path / "tiny.conf"
    conf.write_text(TINY)
    out_dir = tmp_path / "sw"
    code, _out, _err = run_cli(["sweep", str(conf), "--axis",
                                "station1.packet_bytes", "--values",
                                "500,1000", "--macs", "dcf,pas",
                                "--reps", "1", "--out", str(out_dir)])
    assert code == 0
    _h, rows = read_csv(out_dir / "sweep.csv")
    assert len(rows) == 8          # 2 values x 2 macs x 2 flows
    assert {r[1] for r in rows} == {"dcf", "pas"}
    assert {r[3] for r in rows} == {"500", "1000"}


def test_sweep_phy_axis(tmp_path):
    conf = tmp_path / "tiny.conf"
    conf.write_text(TINY)
    code, out, err = run_cli(["sweep", str(conf), "--axis", "phy.slot_us",
                              "--values", "20", "--reps", "1"])
    assert code == 0, err
    assert "aggregate" in out


def test_sweep_rejects_bad_axes(tmp_path):
    conf = tmp_path / "tiny.conf"
    conf.write_text(TINY)
    code, _out, err = run_cli(["sweep", str(conf), "--axis", "bogus",
                               "--values", "1"])
    assert code == 1 and "not sweepable" in err
    code, _out, err = run_cli(["sweep", str(conf), "--axis",
                               "station9.packet_bytes", "--values", "1"])
    assert code == 1 and "no station 9" in err


def test_analytic_default_pair(tmp_path):
    out_dir = tmp_path / "an"
    code, out, _err = run_cli(["analytic", "--out", str(out_dir)])
    assert code == 0
    assert "fairness index 0.9826" in out
    header, rows = read_csv(out_dir / "analytic.csv")
    assert header == ["rate_mbps", "kbps", "pkts_s", "index", "model_hash"]
    assert [float(r[0]) for r in rows] == [5.5, 11.0]
    assert float(rows[0][1]) == pytest.approx(1694.6541, abs=0.01)
    assert float(rows[1][1]) == pytest.approx(3389.3083, abs=0.01)


def test_analytic_flag_smoke():
    code, out, _err = run_cli(["analytic", "--rates", "11,11", "--dcf"])
    assert code == 0 and "one packet per access" in out
    code, out, _err = run_cli(["analytic", "--rates", "5.5,11", "--plcp",
                               "--budget-us", "8000"])
    assert code == 0 and "preamble included" in out


def test_analytic_counts_mismatch():
    code, _out, err = run_cli(["analytic", "--counts", "1,2,3"])
    assert code == 1 and "--counts length must match" in err
