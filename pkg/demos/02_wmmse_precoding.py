"""WMMSE precoding on a single realization, against MRT and zero forcing."""

import numpy as np

from zosga_irs import mrt_init, sumrate, wmmse_precoder

rng = np.random.default_rng(3)
M, K = 4, 4
H = (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) * 1e-4
P, noise, weights = 10 ** 0.5 * 1e-3, np.full(K, 1e-11), np.ones(K)

res = wmmse_precoder(H, P, noise, weights, iters=20)
# history[0] is the MRT starting point, then one value per round
print("sumrate per round:", np.round(res.history, 3))
print(f"power used {res.power:.4e} of {P:.4e}")

zf = H @ np.linalg.inv(H.conj().T @ H)
zf *= np.sqrt(P / K) / np.linalg.norm(zf, axis=0)
print(f"MRT {sumrate(mrt_init(H, P), H, weights, noise):.3f}  "
      f"ZF {sumrate(zf, H, weights, noise):.3f}  WMMSE {res.history[-1]:.3f}")

# Weights steer the rate split between users.
skewed = wmmse_precoder(H, P, noise, [4.0, 1.0, 1.0, 1.0])
print("user power with weight 4 on user 0:", np.round(np.linalg.norm(skewed.W, axis=0) ** 2 / P, 3))
