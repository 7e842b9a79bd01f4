"""The channel-space gradient of the sumrate and the two-point estimate of
the IRS gradient, checked against finite differences."""

import numpy as np

from zosga_irs import (IrsState, builtin_scenario, chain_rule_gradient, draw_statistical_csi,
                       effective_channel, effective_channel_jacobian, probe_channel, quasi_gradient,
                       sample_realization, sumrate, wirtinger_factor, wmmse_precoder)

sc = builtin_scenario("toy")
net = sc.network
rng = np.random.default_rng(7)
omega = sample_realization(net, draw_statistical_csi(net, rng), rng)
sizes = net.irs_sizes
theta = IrsState.initial(sizes, rng).flatten()
channel = lambda t, om=omega: effective_channel(IrsState.unflatten(t, sizes), om)

H = channel(theta)
W = wmmse_precoder(H, net.power, net.noise_array, net.weight_array).W
factor = wirtinger_factor(W, H, net.weight_array, net.noise_array)

# dF/dRe(H) = 2 Re(D): check the largest entry by central differences.
# (Columns of users that WMMSE switched off are exactly zero.)
m, k = np.unravel_index(np.argmax(np.abs(factor.D.real)), H.shape)
step = 1e-6 * np.abs(H).max()
E = np.zeros_like(H)
E[m, k] = step
fd = (sumrate(W, H + E, net.weight_array, net.noise_array)
      - sumrate(W, H - E, net.weight_array, net.noise_array)) / (2 * step)
print(f"dF/dRe H[{m},{k}]: analytic {2 * factor.D[m, k].real:.6e}  finite diff {fd:.6e}")

# Exact gradient in theta (the optimizer never sees the Jacobian).
grad = chain_rule_gradient(effective_channel_jacobian(IrsState.unflatten(theta, sizes), omega), factor)

# Averaging two-point estimates approaches it; the noise shrinks like 1/sqrt(n).
for n in (100, 1000, 10000):
    est = np.mean([quasi_gradient(probe_channel(theta, omega, rng.standard_normal(theta.size), 1e-6,
                                                lambda t, om: channel(t)), factor) for _ in range(n)], axis=0)
    cos = est @ grad / np.linalg.norm(est) / np.linalg.norm(grad)
    print(f"n={n:6d}: cosine to exact gradient {cos:.3f}")
