"""Independent reference computations used by the tests.

Everything here is written with plain loops over scalars so that it shares
no code path with the vectorized package implementation.
"""

import math

import numpy as np


def sumrate_loop(W, H, weights, noise):
    M, K = H.shape
    total = 0.0
    for k in range(K):
        gains = []
        for j in range(K):
            acc = 0j
            for m in range(M):
                acc += np.conj(H[m, k]) * W[m, j]
            gains.append(abs(acc) ** 2)
        interference = sum(g for j, g in enumerate(gains) if j != k) + noise[k]
        total += weights[k] * math.log2(1 + gains[k] / interference)
    return total


def channel_fd_gradient(W, H, weights, noise, h=1e-6):
    """Central differences of the sumrate in Re(H) and Im(H), relative step."""
    scale = np.max(np.abs(H))
    step = h * scale
    g_re = np.zeros(H.shape)
    g_im = np.zeros(H.shape)
    for idx in np.ndindex(H.shape):
        for out, unit in ((g_re, 1.0), (g_im, 1j)):
            Hp = H.copy()
            Hm = H.copy()
            Hp[idx] += unit * step
            Hm[idx] -= unit * step
            out[idx] = (sumrate_loop(W, Hp, weights, noise) - sumrate_loop(W, Hm, weights, noise)) / (2 * step)
    return g_re, g_im


def effective_channel_loop(phases, amps, G_list, hr_list, h_d):
    M, K = h_d.shape
    H = np.array(h_d, dtype=complex)
    for phi, A, G, hr in zip(phases, amps, G_list, hr_list):
        for k in range(K):
            for m in range(M):
                for n in range(len(phi)):
                    H[m, k] += np.conj(G[n, m]) * A[n] * np.exp(-1j * phi[n]) * hr[n, k]
    return H


def theta_fd_jacobian(channel_fn, theta, h=1e-6):
    """Central-difference Jacobian of a complex matrix function, shape (S, M, K)."""
    cols = []
    for s in range(len(theta)):
        e = np.zeros(len(theta))
        e[s] = h
        cols.append((channel_fn(theta + e) - channel_fn(theta - e)) / (2 * h))
    return np.array(cols)


def mrt_single_user(h, power, noise):
    """Optimal single-user precoder and its rate."""
    w = math.sqrt(power) * h / np.linalg.norm(h)
    return w, math.log2(1 + power * np.linalg.norm(h) ** 2 / noise)


def zf_equal_power(H, power):
    """Zero forcing with equal per-user power."""
    V = H @ np.linalg.inv(H.conj().T @ H)
    V = V / np.linalg.norm(V, axis=0)
    return V * math.sqrt(power / H.shape[1])


def mrt_equal_power(H, power):
    return H / np.linalg.norm(H, axis=0) * math.sqrt(power / H.shape[1])


class AffineChannel:
    """``H(theta) = H0 + sum_s theta_s B_s``; its Jacobian is exactly ``B``."""

    def __init__(self, rng, S, M, K):
        c = lambda *shape: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        self.H0 = c(M, K)
        self.B = c(S, M, K) * 0.3

    def __call__(self, theta, omega=None):
        return self.H0 + np.tensordot(theta, self.B, axes=1)


def exp_correlation(r, n):
    R = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            R[i, j] = r ** abs(i - j)
    return R
