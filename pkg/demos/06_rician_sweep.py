"""Gain of ZoSGA over a random IRS as the line-of-sight share grows."""

from zosga_irs import SweepSpec, builtin_scenario, run_sweep

sc = builtin_scenario("toy").with_overrides({"iterations": "200"})
spec = SweepSpec(keys=("rician.beta_ai", "rician.beta_iu"), values=("0 dB", "10 dB", "20 dB"), n_sims=6)
records = run_sweep(sc, spec, ["zosga_aa", "random_irs"], master_seed=6)
for value, (aa, rand) in zip(spec.values, zip(records[::2], records[1::2])):
    gain = (aa.finals - rand.finals).mean()
    print(f"beta {value:>6s}: zosga {aa.mean_final:.4f}  random {rand.mean_final:.4f}  gain {gain:+.4f}")
