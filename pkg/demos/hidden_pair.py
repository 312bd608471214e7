"""Hidden senders, one receiver, RTS/CTS on.

Two stations that cannot hear each other at all share an access point.
Short reservation frames take the damage instead of the data frames.
At equal rates aggregation changes nothing; with a slow partner it
still buys throughput and fairness, though less than in a connected
cell since reservation collisions cost everyone.
"""
from pasim.config import apply_mac
from pasim.runner import run_scenario
from pasim.scenarios import build_scenario

for name in ("hidden_11_11", "hidden_1_11"):
    print(f"=== {name} ===")
    for mac in ("dcf", "pas"):
        cfg = apply_mac(build_scenario(name), mac)
        cfg.reps = 5
        rep = run_scenario(cfg, jain=True)
        flows = "  ".join(f"{f.src}:{f.kbps.mean:6.1f}" for f in rep.flows)
        print(f"  {mac}: {flows}  aggregate {rep.aggregate_kbps.mean:6.1f} "
              f"kbps  index {rep.jain:.3f}")
