"""Channel model walk-through: correlation, path loss, Rician mixing and the
effective channel seen by the access point."""

import numpy as np

from zosga_irs import (IrsState, builtin_scenario, correlation_matrix, draw_statistical_csi,
                       effective_channel, irs_correlation, path_loss, sample_realization)

np.set_printoptions(precision=4, suppress=True)

# Exponential correlation between neighbouring antennas or elements.
print(correlation_matrix(0.5, 3))
# An IRS panel correlates along both axes; the panel matrix is a Kronecker product.
R = irs_correlation(0.3, 0.7, 2, 2)
print(R.shape, np.linalg.eigvalsh(R).min() > 0)

# Amplitude path loss sqrt(C0 d^-alpha) for the three link types of the toy layout.
for d, alpha in [(50.0, 2.2), (4.0, 2.8), (50.0, 3.5)]:
    print(f"d={d:5.1f} alpha={alpha}: {path_loss(d, alpha, 1e-3):.3e}")

sc = builtin_scenario("toy")
net = sc.network
rng = np.random.default_rng(0)

# Line-of-sight parts are drawn once; each realization adds fresh scattering.
scsi = draw_statistical_csi(net, rng)
omega = sample_realization(net, scsi, rng)
print("G", omega.G[0].shape, "h_r", omega.h_r[0].shape, "h_d", omega.h_d.shape)

# Channel norms with the IRS switched off and at random phases.
off = IrsState([np.zeros(16)], [np.zeros(16)])
rand = IrsState.initial(net.irs_sizes, rng)
np.set_printoptions(precision=3, floatmode="maxprec", suppress=False)
print("per-user |h_k|, IRS off   :", np.linalg.norm(effective_channel(off, omega), axis=0))
print("per-user |h_k|, random IRS:", np.linalg.norm(effective_channel(rand, omega), axis=0))

# A larger Rician factor makes consecutive realizations of the AP-IRS link more alike.
for beta in ("0 dB", "20 dB"):
    net_b = sc.with_overrides({"rician.beta_ai": beta, "rician.beta_iu": beta}).network
    s = draw_statistical_csi(net_b, np.random.default_rng(1))
    r = np.random.default_rng(2)
    H1 = sample_realization(net_b, s, r).G[0]
    H2 = sample_realization(net_b, s, r).G[0]
    print(f"beta {beta}: relative change between realizations {np.linalg.norm(H1 - H2) / np.linalg.norm(H1):.3f}")
