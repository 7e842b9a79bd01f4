"""Small paired ensemble of the four methods on the toy scenario.

The acceptance suite runs the same comparison with 50 simulations."""

import numpy as np

from zosga_irs import builtin_scenario, paired_gap, run_ensemble

sc = builtin_scenario("toy")
n = 8
records = {m: run_ensemble(sc, m, master_seed=2024, n_sims=n)
           for m in ("zosga_aa", "zosga_ua", "random_irs", "no_irs")}
for m, rec in records.items():
    print(f"{m:11s} final {rec.mean_final:.4f}   ({rec.wall_clock:.1f}s)")

for a, b in [("zosga_aa", "zosga_ua"), ("zosga_ua", "random_irs"), ("random_irs", "no_irs")]:
    gap, se = paired_gap(records[a], records[b])
    print(f"{a} - {b}: {gap:+.4f} +- {se:.4f}")
