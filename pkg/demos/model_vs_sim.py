"""Closed-form model against the simulator.

The steady-state model assumes a perfect collision-free rotation of
stations, so its totals run hot, and its whole-packet rotation books
the fast station above its equal-rate reference, which keeps the
model's fairness index conservative. The simulator's admission rule
charges bursts only for what they send and re-arms budgets from what
was actually overheard, landing much closer to perfect time fairness.
"""
from pasim.analytic import CellModel, RateClass, referenced_index, solve
from pasim.config import apply_mac
from pasim.runner import run_scenario
from pasim.scenarios import build_scenario

print(f"{'pair':>8} {'model kbps':>11} {'sim kbps':>9} "
      f"{'model idx':>9} {'sim idx':>8}")
for slow in (1.0, 2.0, 5.5):
    model = CellModel([RateClass(round(slow * 1e6)),
                       RateClass(11_000_000)])
    solved = solve(model)
    model_total = sum(c.kbps for c in solved.classes)
    model_idx = referenced_index(model)

    cfg = apply_mac(build_scenario(f"two_station_{slow:g}_11"), "pas")
    cfg.reps = 3
    rep = run_scenario(cfg, jain=True)
    print(f"{slow:>5g}/11 {model_total:>11.1f} "
          f"{rep.aggregate_kbps.mean:>9.1f} {model_idx:>9.3f} "
          f"{rep.jain:>8.3f}")

# The model sits above the simulation on totals (no collisions, no
# real backoff) and below it on fairness: rounding bursts up to whole
# packets systematically favors the fast class in the rotation.
