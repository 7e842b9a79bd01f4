"""Rician-fading channel ensembles for IRS-aided MISO downlinks.

Every link is a mix of a line-of-sight part, drawn once per simulation
(statistical CSI), and a spatially correlated scattered part, drawn fresh
for every realization (instantaneous CSI). The effective channel seen by
the access point is composed from the links and the IRS reflection
coefficients in :func:`effective_channel`.

Array conventions
-----------------
* ``G[i]``      : ``(N_i, M)``  AP -> IRS ``i``
* ``h_r[i]``    : ``(N_i, K)``  IRS ``i`` -> users, column ``k`` is user ``k``
* ``h_d``       : ``(M, K)``    AP -> users
* effective ``H``: ``(M, K)``, column ``k`` is ``h_k``
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError

ADJUSTABLE = "adjustable"
UNIT = "unit"
AMPLITUDE_MODES = (ADJUSTABLE, UNIT)


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IrsPanel:
    """One reflecting surface with ``nh * nv`` elements.

    ``distance_ai`` is the AP-IRS distance and ``distance_iu`` holds one
    IRS-user distance per user (meters). Panels with ``optimize=False`` keep
    their initial configuration during optimization.
    """

    nh: int
    nv: int
    distance_ai: float
    distance_iu: tuple[float, ...]
    optimize: bool = True

    @property
    def size(self) -> int:
        return self.nh * self.nv


@dataclass(frozen=True)
class NetworkConfig:
    """Geometry, fading statistics and budgets of one network.

    All quantities are linear (watts, power gains); the scenario reader
    converts dB inputs. Per-user quantities are tuples of length ``K``.
    """

    num_antennas: int
    num_users: int
    irs: tuple[IrsPanel, ...]
    distance_au: tuple[float, ...]
    beta_iu: float = 10.0
    beta_ai: float = 10.0
    beta_au: float = 0.0
    r_rk: float = 0.0
    r_r: float = 0.0
    r_d: float = 0.0
    c0: float = 1e-3
    alpha_ai: float = 2.2
    alpha_iu: float = 2.8
    alpha_au: float = 3.5
    power: float = 10 ** 0.5 * 1e-3
    noise: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    amplitude_mode: str = ADJUSTABLE

    def __post_init__(self):
        K = self.num_users
        # fill per-user defaults so callers may omit them
        if not self.noise:
            object.__setattr__(self, "noise", (1e-11,) * K)
        if not self.weights:
            object.__setattr__(self, "weights", (1.0,) * K)
        self.validate()

    def validate(self) -> None:
        M, K = self.num_antennas, self.num_users
        if M < 1 or K < 1:
            raise ParameterError(f"need M >= 1 and K >= 1, got M={M}, K={K}")
        for i, panel in enumerate(self.irs):
            if panel.nh < 1 or panel.nv < 1:
                raise ParameterError(f"IRS {i + 1} has no elements ({panel.nh}x{panel.nv})")
            if len(panel.distance_iu) != K:
                raise ParameterError(f"IRS {i + 1}: expected {K} user distances")
            if panel.distance_ai <= 0 or min(panel.distance_iu) <= 0:
                raise ParameterError(f"IRS {i + 1}: distances must be positive")
        if len(self.distance_au) != K or min(self.distance_au) <= 0:
            raise ParameterError("distance_au needs K positive entries")
        for name in ("beta_iu", "beta_ai", "beta_au"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be >= 0")
        for name in ("r_rk", "r_r", "r_d"):
            r = getattr(self, name)
            if not 0 <= r < 1:
                raise ParameterError(f"{name} must lie in [0, 1), got {r}")
        if not self.power > 0:
            raise ParameterError("power budget must be positive")
        if not self.c0 > 0:
            raise ParameterError("c0 must be positive")
        if len(self.noise) != K or min(self.noise) <= 0:
            raise ParameterError("need K positive noise variances")
        if len(self.weights) != K or min(self.weights) < 0 or max(self.weights) <= 0:
            raise ParameterError("weights must be nonnegative with at least one positive")
        if self.amplitude_mode not in AMPLITUDE_MODES:
            raise ParameterError(f"amplitude_mode must be one of {AMPLITUDE_MODES}")

    @property
    def irs_sizes(self) -> tuple[int, ...]:
        return tuple(p.size for p in self.irs)

    @property
    def noise_array(self) -> np.ndarray:
        return np.asarray(self.noise, dtype=float)

    @property
    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


# ---------------------------------------------------------------------------
# IRS state and the flat parameter vector theta
# ---------------------------------------------------------------------------

@dataclass
class IrsState:
    """Phases and amplitudes of every IRS element.

    The flat parameter vector lists, for each IRS in order, its phases
    followed by its amplitudes (adjustable mode) or its phases only (unit
    mode).
    """

    phases: list[np.ndarray]
    amplitudes: list[np.ndarray]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.phases)

    def flatten(self, mode: str = ADJUSTABLE) -> np.ndarray:
        parts = []
        for phi, amp in zip(self.phases, self.amplitudes):
            parts.append(phi)
            if mode == ADJUSTABLE:
                parts.append(amp)
        if not parts:
            return np.zeros(0)
        return np.concatenate(parts).astype(float)

    @classmethod
    def unflatten(cls, theta: np.ndarray, sizes: Sequence[int], mode: str = ADJUSTABLE) -> "IrsState":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (parameter_count(sizes, mode),):
            raise DimensionError(f"theta has shape {theta.shape}, expected ({parameter_count(sizes, mode)},)")
        phases, amplitudes = [], []
        pos = 0
        for n in sizes:
            phases.append(theta[pos:pos + n].copy())
            pos += n
            if mode == ADJUSTABLE:
                amplitudes.append(theta[pos:pos + n].copy())
                pos += n
            else:
                amplitudes.append(np.ones(n))
        return cls(phases, amplitudes)

    @classmethod
    def initial(cls, sizes: Sequence[int], rng: np.random.Generator) -> "IrsState":
        """Uniform random phases on [-pi, pi], unit amplitudes."""
        phases = [rng.uniform(-np.pi, np.pi, size=n) for n in sizes]
        return cls(phases, [np.ones(n) for n in sizes])

    def is_feasible(self, mode: str = ADJUSTABLE) -> bool:
        for phi, amp in zip(self.phases, self.amplitudes):
            if np.any(np.abs(phi) > np.pi) or np.any(amp < 0) or np.any(amp > 1):
                return False
            if mode == UNIT and np.any(amp != 1.0):
                return False
        return True


def parameter_count(sizes: Sequence[int], mode: str = ADJUSTABLE) -> int:
    return (2 if mode == ADJUSTABLE else 1) * int(sum(sizes))


def phase_mask(sizes: Sequence[int], mode: str = ADJUSTABLE) -> np.ndarray:
    """Boolean mask of the phase coordinates in the flat vector."""
    blocks = []
    for n in sizes:
        blocks.append(np.ones(n, dtype=bool))
        if mode == ADJUSTABLE:
            blocks.append(np.zeros(n, dtype=bool))
    return np.concatenate(blocks) if blocks else np.zeros(0, dtype=bool)


def parameter_bounds(sizes: Sequence[int], mode: str = ADJUSTABLE) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bounds of the feasible box for the flat vector."""
    is_phase = phase_mask(sizes, mode)
    lo = np.where(is_phase, -np.pi, 0.0)
    hi = np.where(is_phase, np.pi, 1.0)
    return lo, hi


def irs_index(sizes: Sequence[int], mode: str = ADJUSTABLE) -> np.ndarray:
    """IRS number (0-based) owning each flat coordinate."""
    per = 2 if mode == ADJUSTABLE else 1
    return np.repeat(np.arange(len(sizes)), [per * n for n in sizes])


# ---------------------------------------------------------------------------
# correlation and path loss
# ---------------------------------------------------------------------------

def _check_corr(r: float, n: int) -> None:
    if not 0 <= r < 1:
        raise ParameterError(f"correlation coefficient must lie in [0, 1), got {r}")
    if n < 1:
        raise ParameterError(f"matrix size must be >= 1, got {n}")


def correlation_matrix(r: float, n: int) -> np.ndarray:
    """Exponential correlation matrix with entries ``r**|i-j|``."""
    _check_corr(r, n)
    idx = np.arange(n)
    return float(r) ** np.abs(idx[:, None] - idx[None, :]).astype(float)


def irs_correlation(r_h: float, r_v: float, nh: int, nv: int) -> np.ndarray:
    """Kronecker (horizontal x vertical) correlation of an ``nh x nv`` panel."""
    return np.kron(correlation_matrix(r_h, nh), correlation_matrix(r_v, nv))


def psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Hermitian square root via eigen-decomposition (negative eigenvalues clipped)."""
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


@lru_cache(maxsize=256)
def _sqrt_cached(r_h: float, r_v: float, nh: int, nv: int) -> np.ndarray:
    root = psd_sqrt(irs_correlation(r_h, r_v, nh, nv))
    root.setflags(write=False)
    return root


def correlation_sqrt(r: float, n: int) -> np.ndarray:
    """Cached square-root factor of :func:`correlation_matrix`."""
    _check_corr(r, n)
    return _sqrt_cached(float(r), 0.0, int(n), 1)


def irs_correlation_sqrt(r_h: float, r_v: float, nh: int, nv: int) -> np.ndarray:
    _check_corr(r_h, nh)
    _check_corr(r_v, nv)
    return _sqrt_cached(float(r_h), float(r_v), int(nh), int(nv))


def path_loss(d, alpha: float, c0: float):
    """Amplitude path-loss factor ``sqrt(c0 * d**-alpha)``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ParameterError("distance must be positive")
    if c0 <= 0:
        raise ParameterError("c0 must be positive")
    out = np.sqrt(c0 * d ** (-alpha))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) entries (real and imaginary parts each of variance 1/2)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


@dataclass
class StatisticalCsi:
    """Line-of-sight components, fixed for one simulation."""

    G: list[np.ndarray]
    h_r: list[np.ndarray]
    h_d: np.ndarray


@dataclass
class ChannelRealization:
    """One draw of every link, already mixed, correlated and path-loss scaled."""

    G: list[np.ndarray]
    h_r: list[np.ndarray]
    h_d: np.ndarray
    _digest: str | None = field(default=None, repr=False, compare=False)

    @property
    def num_antennas(self) -> int:
        return self.h_d.shape[0]

    @property
    def num_users(self) -> int:
        return self.h_d.shape[1]

    def checksum(self) -> str:
        if self._digest is None:
            h = hashlib.sha256()
            for arr in (*self.G, *self.h_r, self.h_d):
                h.update(np.ascontiguousarray(arr).tobytes())
            self._digest = h.hexdigest()
        return self._digest


def draw_statistical_csi(config: NetworkConfig, rng: np.random.Generator) -> StatisticalCsi:
    M, K = config.num_antennas, config.num_users
    G, h_r = [], []
    for n in config.irs_sizes:
        G.append(complex_normal(rng, (n, M)))
        h_r.append(complex_normal(rng, (n, K)))
    return StatisticalCsi(G, h_r, complex_normal(rng, (M, K)))


def _mix(beta: float) -> tuple[float, float]:
    if np.isinf(beta):
        return 1.0, 0.0
    return np.sqrt(beta / (1 + beta)), np.sqrt(1 / (1 + beta))


def sample_realization(config: NetworkConfig, scsi: StatisticalCsi,
                       rng: np.random.Generator) -> ChannelRealization:
    """Draw fresh scattered components and compose every link."""
    M, K = config.num_antennas, config.num_users
    if scsi.h_d.shape != (M, K) or len(scsi.G) != len(config.irs):
        raise DimensionError("statistical CSI does not match the network configuration")

    root_d = correlation_sqrt(config.r_d, M)
    los_ai, nlos_ai = _mix(config.beta_ai)
    los_iu, nlos_iu = _mix(config.beta_iu)
    los_au, nlos_au = _mix(config.beta_au)

    G, h_r = [], []
    for i, panel in enumerate(config.irs):
        n = panel.size
        if scsi.G[i].shape != (n, M) or scsi.h_r[i].shape != (n, K):
            raise DimensionError(f"statistical CSI for IRS {i + 1} has wrong shape")
        root_r = irs_correlation_sqrt(config.r_r, config.r_r, panel.nh, panel.nv)
        root_rk = irs_correlation_sqrt(config.r_rk, config.r_rk, panel.nh, panel.nv)
        F = complex_normal(rng, (n, M))
        v = complex_normal(rng, (n, K))
        g = los_ai * scsi.G[i] + nlos_ai * (root_r @ F @ root_d)
        hr = los_iu * scsi.h_r[i] + nlos_iu * (root_rk @ v)
        G.append(g * path_loss(panel.distance_ai, config.alpha_ai, config.c0))
        h_r.append(hr * path_loss(panel.distance_iu, config.alpha_iu, config.c0)[None, :])

    v_d = complex_normal(rng, (M, K))
    h_d = los_au * scsi.h_d + nlos_au * (root_d @ v_d)
    h_d = h_d * path_loss(config.distance_au, config.alpha_au, config.c0)[None, :]
    return ChannelRealization(G, h_r, h_d)


# ---------------------------------------------------------------------------
# effective channel
# ---------------------------------------------------------------------------

def _check_state(state: IrsState, omega: ChannelRealization) -> None:
    if len(state.phases) != len(omega.G):
        raise DimensionError(f"{len(state.phases)} IRS states for {len(omega.G)} IRS links")
    for i, (phi, G) in enumerate(zip(state.phases, omega.G)):
        if phi.shape != (G.shape[0],) or state.amplitudes[i].shape != (G.shape[0],):
            raise DimensionError(f"IRS {i + 1}: state has {phi.shape}, links have {G.shape[0]} elements")


def effective_channel(state: IrsState, omega: ChannelRealization) -> np.ndarray:
    """Composite AP-to-user channel ``H`` of shape ``(M, K)``.

    ``h_k = sum_i G_i^H diag(A_i * exp(-j phi_i)) h_r,k^i + h_d,k``
    """
    _check_state(state, omega)
    H = omega.h_d.copy()
    for phi, amp, G, hr in zip(state.phases, state.amplitudes, omega.G, omega.h_r):
        coeff = amp * np.exp(-1j * phi)
        H += G.conj().T @ (coeff[:, None] * hr)
    return H


def effective_channel_jacobian(state: IrsState, omega: ChannelRealization,
                               mode: str = ADJUSTABLE) -> np.ndarray:
    """Exact derivative of :func:`effective_channel` w.r.t. the flat vector.

    Returns a complex array ``J`` of shape ``(S, M, K)`` with
    ``J[s] = dH / dtheta_s``. Only used to cross-check the zeroth-order
    probes; the optimizer never calls it.
    """
    _check_state(state, omega)
    blocks = []
    for phi, amp, G, hr in zip(state.phases, state.amplitudes, omega.G, omega.h_r):
        rot = np.exp(-1j * phi)
        # d/dA_n of the reflected term: conj(G[n, m]) * rot_n * hr[n, k]
        d_amp = G.conj()[:, :, None] * (rot[:, None] * hr)[:, None, :]
        blocks.append(-1j * amp[:, None, None] * d_amp)
        if mode == ADJUSTABLE:
            blocks.append(d_amp)
    return np.concatenate(blocks, axis=0)
