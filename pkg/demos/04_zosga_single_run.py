"""One ZoSGA simulation on the toy scenario, next to WMMSE with the IRS
left at its random starting phases."""

import numpy as np

from zosga_irs import builtin_scenario, run_simulation, simulation_seed
from zosga_irs.harness import estimate_constants

sc = builtin_scenario("toy")
seed = simulation_seed(master_seed=1, index=0)

opt = run_simulation(sc, "zosga_aa", seed)
ref = run_simulation(sc, "random_irs", seed)        # same channels, same starting phases
assert opt.channel_checksum == ref.channel_checksum

for lo in range(0, sc.iterations, 50):
    print(f"iter {lo:3d}-{lo + 49:3d}: zosga {opt.sumrates[lo:lo + 50].mean():.4f}  "
          f"random {ref.sumrates[lo:lo + 50].mean():.4f}")
print("channel uses:", opt.channel_uses, "vs", ref.channel_uses)

amps = opt.final_theta[sc.network.irs_sizes[0]:]
print(f"final amplitudes: min {amps.min():.3f} mean {amps.mean():.3f}")

# The fixed step rule needs constants that are unknown in practice; the
# harness offers empirical stand-ins.
print(estimate_constants(sc, seed, samples=20))
