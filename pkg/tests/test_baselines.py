"""Window scaling, payload splitting, and the constant-budget variant."""

from dataclasses import replace

import pytest

from pasim.baselines import CwAdaptStation, SplittingSource, fragment_size
from pasim.config import apply_mac
from pasim.dcf import Packet
from pasim.phy import PhyParams
from pasim.runner import run_once
from pasim.scenarios import SaturatedSource, build_scenario

P = PhyParams()
M = 1_000_000


# -- contention window scaling ------------------------------------------------

def test_effective_cw_scales_with_inverse_rate():
    from cellkit import Cell
    cases = {11 * M: 31, int(5.5 * M): 62, 1 * M: 341}
    for rate, expect in cases.items():
        cell = Cell(n=2)
        st = cell.add(0, cls=CwAdaptStation, dst=1, rate_bps=rate,
                      reference_rate_bps=11 * M)
        assert st.effective_cw(31) == expect
    # the doubled window scales the same way
    assert st.effective_cw(63) == round(63 * 11)


def test_cw_adapt_at_reference_rate_matches_plain_dcf():
    base = replace(build_scenario("validation_11_11"), duration_s=10.0,
                   reps=1)
    logs = {}
    for mac in ("dcf", "cw_adapt"):
        _stats, sim = run_once(apply_mac(base, mac), rep=0)
        logs[mac] = sim.collector.tx_log
    assert logs["dcf"] == logs["cw_adapt"]


# -- fragment sizing ----------------------------------------------------------

def test_fragment_size_frozen_values():
    assert fragment_size(1500, int(5.5 * M), 11 * M) == 726
    assert fragment_size(1500, 1 * M, 11 * M) == 92


def test_fragment_size_is_identity_at_the_reference_rate():
    assert fragment_size(1500, 11 * M, 11 * M) == 1500


def test_fragment_airtime_matches_reference_airtime():
    target = P.data_airtime_ns(1500, 11 * M)
    for rate in (1 * M, 2 * M, int(5.5 * M)):
        frag = fragment_size(1500, rate, 11 * M)
        assert P.data_airtime_ns(frag, rate) <= target
        assert P.data_airtime_ns(frag + 1, rate) > target


def test_fragment_size_validation():
    with pytest.raises(ValueError):
        fragment_size(0, 1 * M, 11 * M)
    with pytest.raises(ValueError):
        fragment_size(1500, 0, 11 * M)
    with pytest.raises(ValueError):
        fragment_size(1500, 1 * M, -1)


# -- splitting source ---------------------------------------------------------

class FixedSource:
    def __init__(self, sizes):
        self.sizes = list(sizes)

    def next_packet(self):
        if not self.sizes:
            return None
        return Packet(99, self.sizes.pop(0))


def drain(src):
    out = []
    while True:
        pkt = src.next_packet()
        if pkt is None:
            return out
        out.append(pkt)


def test_splitter_divides_large_payloads():
    src = SplittingSource(FixedSource([1500]), 726)
    assert [p.size for p in drain(src)] == [726, 726, 48]


def test_splitter_passes_small_payloads_through():
    src = SplittingSource(FixedSource([500]), 726)
    assert [p.size for p in drain(src)] == [500]


def test_splitter_exact_multiple_has_no_runt():
    src = SplittingSource(FixedSource([1452]), 726)
    assert [p.size for p in drain(src)] == [726, 726]


def test_splitter_pids_increase():
    src = SplittingSource(FixedSource([1500, 1500]), 726)
    pids = [p.pid for p in drain(src)]
    assert pids == sorted(pids)
    assert len(set(pids)) == len(pids)


def test_splitter_validation():
    with pytest.raises(ValueError):
        SplittingSource(FixedSource([]), 0)


def test_splitter_over_saturated_source_keeps_going():
    from pasim.engine import RngStream
    inner = SaturatedSource(packet_bytes=1500)
    src = SplittingSource(inner, 726)
    sizes = [src.next_packet().size for _ in range(9)]
    assert sizes == [726, 726, 48] * 3


# -- constant budget at run level ----------------------------------------------

def test_fixed_txop_chains_on_both_stations():
    cfg = replace(build_scenario("uniform_5.5_11"), duration_s=5.0,
                  warmup_s=1.0, reps=1)
    stats, _sim = run_once(apply_mac(cfg, "fixed_txop"), rep=0)
    for sid in (0, 1):
        classical, chained = stats.tx_counts[sid]
        assert chained > 0
        assert classical > 0
