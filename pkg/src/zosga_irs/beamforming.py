"""SINR, weighted sumrate and WMMSE precoding for the MISO downlink.

``H`` is always ``(M, K)`` with column ``k`` the channel of user ``k``;
``W`` is ``(M, K)`` with column ``k`` the precoder of user ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DimensionError, ParameterError

WMMSE_ITERATIONS = 20
BISECTION_TOL = 1e-10
BISECTION_MAX_STEPS = 100


@dataclass
class PrecoderMatrix:
    """AP precoder ``W`` plus the solver's per-round sumrate history."""

    W: np.ndarray
    history: list[float] = field(default_factory=list)
    degenerate: bool = False

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.W) ** 2))


@dataclass
class SumrateBreakdown:
    sinr: np.ndarray
    rates: np.ndarray
    total: float


def _check_dims(W: np.ndarray, H: np.ndarray) -> None:
    if W.ndim != 2 or H.ndim != 2 or W.shape != H.shape:
        raise DimensionError(f"W {W.shape} and H {H.shape} must both be (M, K)")


def sinr(W: np.ndarray, h_k: np.ndarray, k: int, noise_k: float) -> float:
    """SINR of user ``k`` with channel ``h_k`` under precoder ``W``."""
    W = np.asarray(W)
    if not 0 <= k < W.shape[1]:
        raise ParameterError(f"user index {k} out of range for K={W.shape[1]}")
    if noise_k <= 0:
        raise ParameterError("noise variance must be positive")
    gains = np.abs(np.conj(h_k) @ W) ** 2
    interference = float(np.sum(np.delete(gains, k)))
    return float(gains[k] / (interference + noise_k))


def _sinr_all(W: np.ndarray, H: np.ndarray, noise: np.ndarray) -> np.ndarray:
    gains = np.abs(H.conj().T @ W) ** 2          # gains[k, j] = |h_k^H w_j|^2
    signal = np.diag(gains)
    interference = _off_diagonal_sum(gains)
    return signal / (interference + noise)


def _off_diagonal_sum(gains: np.ndarray) -> np.ndarray:
    # explicit sum avoids cancellation when the signal dominates
    K = gains.shape[0]
    if K == 1:
        return np.zeros(1)
    return np.sum(gains[_off_mask(K)].reshape(K, K - 1), axis=1)


@lru_cache(maxsize=32)
def _off_mask(K: int) -> np.ndarray:
    return ~np.eye(K, dtype=bool)


def weighted_sumrate(W: np.ndarray, H: np.ndarray, weights, noise) -> SumrateBreakdown:
    """Per-user SINRs and rates and their weighted sum (bits/s/Hz)."""
    W, H = np.asarray(W), np.asarray(H)
    _check_dims(W, H)
    weights = np.broadcast_to(np.asarray(weights, dtype=float), (H.shape[1],))
    noise = np.broadcast_to(np.asarray(noise, dtype=float), (H.shape[1],))
    s = _sinr_all(W, H, noise)
    rates = weights * np.log2(1.0 + s)
    total = 0.0
    for r in rates:
        total += float(r)
    return SumrateBreakdown(s, rates, total)


def sumrate(W: np.ndarray, H: np.ndarray, weights, noise) -> float:
    return weighted_sumrate(W, H, weights, noise).total


def mrt_init(H: np.ndarray, power: float) -> np.ndarray:
    """Scaled maximum-ratio columns ``sqrt(P/K) h_k / ||h_k||``."""
    K = H.shape[1]
    norms = np.linalg.norm(H, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return np.sqrt(power / K) * np.where(norms > 0, 1.0, 0.0) * H / safe


def _solve_multiplier(lam: np.ndarray, c: np.ndarray, budget: float) -> float:
    """Smallest multiplier (within tolerance) keeping the precoder power <= budget.

    The precoder power for multiplier ``x`` is ``sum_m c_m / (lam_m + x)**2``.
    """
    lam_l = np.clip(lam, 0.0, None).tolist()
    c_l = c.tolist()
    top = max(lam_l)
    total = sum(c_l)
    if total <= 0.0:
        return 0.0
    null = [l <= 1e-12 * top for l in lam_l]
    if not any(z and ci > 1e-14 * total for z, ci in zip(null, c_l)):
        p0 = sum(ci / (l * l) for z, l, ci in zip(null, lam_l, c_l) if not z)
        if p0 <= budget:
            return 0.0

    def power(x):
        return sum([ci / ((l + x) * (l + x)) for l, ci in zip(lam_l, c_l)])

    # sum(c) / (lam_max + x)^2 <= power(x) <= sum(c) / (lam_min + x)^2
    root = math.sqrt(total / budget)
    lo, hi = max(0.0, root - top), max(0.0, root - min(lam_l))
    p_hi = power(hi) if hi > 0 else math.inf
    if p_hi > budget:
        hi = root
        p_hi = power(hi)
    steps = 0
    while budget - p_hi > BISECTION_TOL * budget and steps < BISECTION_MAX_STEPS:
        mid = 0.5 * (lo + hi)
        p_mid = power(mid)
        if p_mid <= budget:
            hi, p_hi = mid, p_mid
        else:
            lo = mid
        steps += 1
    return hi


def wmmse_precoder(H: np.ndarray, power: float, noise, weights,
                   iters: int = WMMSE_ITERATIONS, W_init: np.ndarray | None = None) -> PrecoderMatrix:
    """Weighted-MMSE block-coordinate ascent on the weighted sumrate.

    Each round updates the receive scalars, the MSE weights and the
    precoder; the precoder step enforces ``||W||_F^2 <= power`` through a
    bisection on the dual multiplier. ``history`` holds the weighted sumrate
    before the first round followed by the value after every round.
    """
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2:
        raise DimensionError(f"H must be (M, K), got {H.shape}")
    if iters < 1:
        raise ParameterError("iters must be >= 1")
    if power <= 0:
        raise ParameterError("power budget must be positive")
    M, K = H.shape
    noise = np.broadcast_to(np.asarray(noise, dtype=float), (K,))
    weights = np.broadcast_to(np.asarray(weights, dtype=float), (K,))
    if not np.any(H):
        return PrecoderMatrix(np.zeros((M, K), dtype=complex), [0.0], degenerate=True)

    # Work in units where every noise variance and the budget equal one;
    # h_k -> h_k sqrt(P) / sigma_k and W -> W / sqrt(P) keep every SINR fixed.
    Hn = H * (np.sqrt(power / noise))[None, :]
    if W_init is None:
        Wn = mrt_init(Hn, 1.0)
    else:
        Wn = np.asarray(W_init, dtype=complex) / np.sqrt(power)
        if Wn.shape != (M, K):
            raise DimensionError(f"W_init must be {(M, K)}")
        excess = np.sum(np.abs(Wn) ** 2)
        if excess > 1.0:
            Wn = Wn / np.sqrt(excess)
    def rate(R):
        gains = np.abs(R) ** 2
        s = np.diag(gains) / (_off_diagonal_sum(gains) + 1.0)
        total = 0.0
        for r in weights * np.log2(1.0 + s):
            total += float(r)
        return total, gains

    R = Hn.conj().T @ Wn                          # R[k, j] = h_k^H w_j
    value, gains = rate(R)
    history = [value]
    for _ in range(iters):
        d = np.diag(R)
        leak = _off_diagonal_sum(gains) + 1.0
        total_rx = leak + np.abs(d) ** 2
        u = d / total_rx
        mse_weight = total_rx / leak                           # 1 / e_k
        a = weights * mse_weight * np.abs(u) ** 2
        A = (Hn * a[None, :]) @ Hn.conj().T
        B = Hn * (weights * mse_weight * u)[None, :]
        lam, U = np.linalg.eigh(A)
        C = U.conj().T @ B
        c = np.sum(np.abs(C) ** 2, axis=1)
        mult = _solve_multiplier(lam, c, 1.0)
        denom = lam + mult
        inv = np.divide(1.0, denom, out=np.zeros_like(denom), where=denom > 1e-12 * max(lam.max(), 1e-300))
        Wn = U @ (C * inv[:, None])
        R = Hn.conj().T @ Wn
        value, gains = rate(R)
        history.append(value)

    return PrecoderMatrix(Wn * np.sqrt(power), history)

