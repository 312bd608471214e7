"""Looking inside the bursts.

Runs one replication of the 1/11 pair with aggregation and prints the
distribution of burst sizes per station, plus the gaps between a
station's consecutive bursts. The fast station's bursts cover the time
one slow packet needs on air.
"""
from collections import Counter

from pasim.config import apply_mac
from pasim.runner import run_once
from pasim.scenarios import build_scenario

cfg = apply_mac(build_scenario("two_station_1_11"), "pas")
cfg.duration_s, cfg.warmup_s = 20.0, 2.0
stats, sim = run_once(cfg, rep=0)

for sid, summary in sorted(stats.bursts.items()):
    sizes = Counter(summary.frame_counts)
    hist = "  ".join(f"{k}x{v}" for k, v in sorted(sizes.items()))
    mean_gap = summary.mean_interburst_us
    print(f"station {sid}: {summary.count} bursts, "
          f"mean {summary.mean_frames:.2f} frames")
    print(f"  sizes (frames x bursts): {hist}")
    if mean_gap is not None:
        print(f"  mean gap between bursts: {mean_gap:.0f} us")

# Station 1 (11 Mbps) alternates between 9-frame bursts, which cover an
# 8.6 ms slow packet, and singles sent when the budget is empty because
# nothing slow was overheard since its last ack.
