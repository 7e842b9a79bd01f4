"""Wirtinger factor of the sumrate and zeroth-order probing of the channel.

The outer gradient of ``F(W, H(theta))`` combines two pieces: the
derivative of the weighted sumrate with respect to the (complex) channel
entries, available in closed form, and the Jacobian of the channel with
respect to ``theta``, which is unknown to the optimizer and is estimated
from two channel probes along a random Gaussian direction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, ParameterError

LN2 = np.log(2.0)


@dataclass
class WirtingerFactor:
    """``D[m, k]`` is the derivative of the weighted sumrate w.r.t. ``H[m, k]``.

    The derivative is taken with respect to the unconjugated entry, so
    ``dF/dRe(H) = 2 Re(D)`` and ``dF/dIm(H) = 2 Re(jD)``.
    """

    D: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.D))


@dataclass
class ProbePair:
    u: np.ndarray
    mu: float
    H_plus: np.ndarray
    H_minus: np.ndarray
    theta_plus: np.ndarray
    theta_minus: np.ndarray

    @property
    def delta(self) -> np.ndarray:
        return self.H_plus - self.H_minus


def wirtinger_factor(W: np.ndarray, H: np.ndarray, weights, noise) -> WirtingerFactor:
    """Closed-form channel derivative of ``sum_k a_k log2(1 + SINR_k)``.

    With ``z = h_k``, ``s = |z^H w_k|^2`` and ``I = sum_{j!=k} |z^H w_j|^2 + sigma_k^2``,
    column ``k`` is the transpose of the row vector

        a_k z^H [I w_k w_k^H - s sum_{j!=k} w_j w_j^H] / (ln2 * I * (I + s)).
    """
    W, H = np.asarray(W), np.asarray(H)
    if W.shape != H.shape or H.ndim != 2:
        raise DimensionError(f"W {W.shape} and H {H.shape} must both be (M, K)")
    K = H.shape[1]
    weights = np.broadcast_to(np.asarray(weights, dtype=float), (K,))
    noise = np.broadcast_to(np.asarray(noise, dtype=float), (K,))
    if np.any(noise <= 0):
        raise ParameterError("noise variances must be positive")

    R = H.conj().T @ W                 # R[k, j] = h_k^H w_j
    gains = np.abs(R) ** 2
    signal = np.diag(gains)
    off = ~np.eye(K, dtype=bool)
    interf = np.where(off, gains, 0.0).sum(axis=1) + noise

    # X_k z = I w_k (w_k^H z) - s sum_{j!=k} w_j (w_j^H z); w_j^H z = conj(R[k, j])
    proj = np.conj(R)                  # proj[k, j] = w_j^H h_k
    own = W * (interf * np.diag(proj))[None, :]
    cross = W @ np.where(off, proj, 0.0).T          # column k: sum_{j!=k} w_j (w_j^H h_k)
    numer = own - cross * signal[None, :]
    denom = LN2 * interf * (interf + signal)
    D = np.conj(numer) * (weights / denom)[None, :]
    return WirtingerFactor(D)


def chain_rule_gradient(jacobian: np.ndarray, factor: WirtingerFactor) -> np.ndarray:
    """Gradient in ``theta`` from a channel Jacobian of shape ``(S, M, K)``."""
    D = factor.D
    re = np.tensordot(jacobian.real, D.real, axes=([1, 2], [0, 1]))
    im = np.tensordot(jacobian.imag, (1j * D).real, axes=([1, 2], [0, 1]))
    return 2.0 * (re + im)


def probe_channel(theta: np.ndarray, omega, u: np.ndarray, mu: float,
                  channel_fn: Callable[[np.ndarray, object], np.ndarray]) -> ProbePair:
    """Evaluate the channel at ``theta + mu u`` and ``theta - mu u``.

    The perturbed points are not projected onto the feasible box.
    """
    if not mu > 0:
        raise ParameterError(f"smoothing parameter must be positive, got {mu}")
    theta = np.asarray(theta, dtype=float)
    u = np.asarray(u, dtype=float)
    if u.shape != theta.shape:
        raise DimensionError(f"direction {u.shape} does not match theta {theta.shape}")
    plus, minus = theta + mu * u, theta - mu * u
    return ProbePair(u, mu, channel_fn(plus, omega), channel_fn(minus, omega), plus, minus)


def quasi_gradient(probe: ProbePair, factor: WirtingerFactor) -> np.ndarray:
    """Two-point zeroth-order estimate of the outer gradient."""
    delta, D = probe.delta, factor.D
    if delta.shape != D.shape:
        raise DimensionError(f"probe difference {delta.shape} vs factor {D.shape}")
    pairing = np.sum(delta.real * D.real) + np.sum(delta.imag * (1j * D).real)
    return probe.u * (pairing / probe.mu)
