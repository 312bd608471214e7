"""The rate anomaly and what aggregation does about it.

One 1 Mbps station sharing a cell with one 11 Mbps station. Plain DCF
gives both the same packet rate, so the slow station eats most of the
medium time and drags the fast one down to its level. Running the same
pair with dynamic aggregation lets the fast station send a burst of
packets whenever it wins the medium, matching airtime instead.
"""
from pasim.config import apply_mac
from pasim.runner import run_scenario
from pasim.scenarios import build_scenario

for mac in ("dcf", "pas"):
    cfg = apply_mac(build_scenario("two_station_1_11"), mac)
    cfg.reps = 5  # keep the demo quick; the defaults use 10
    rep = run_scenario(cfg, jain=True)
    print(f"--- {mac} ---")
    for f in rep.flows:
        print(f"  station {f.src} @ {f.rate_label:>2} Mbps: "
              f"{f.kbps.mean:7.1f} kbps  {f.pkts_s.mean:6.1f} pkt/s")
    print(f"  aggregate {rep.aggregate_kbps.mean:7.1f} kbps, "
          f"fairness index {rep.jain:.3f}")

# Under dcf the two packet rates match (that is the anomaly: per-packet
# fairness on a shared medium). Under pas the fast station sends about
# nine packets per burst and the aggregate more than doubles.
