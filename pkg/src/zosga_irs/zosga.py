"""Projected zeroth-order stochastic gradient ascent over IRS parameters.

One outer iteration solves the precoding problem for a fresh channel
realization, probes the channel twice along a Gaussian direction, and takes
a projected ascent step. The optimizer sees the channel only through
``channel_fn(theta, omega)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .beamforming import PrecoderMatrix, sumrate
from .errors import ParameterError
from .gradients import probe_channel, quasi_gradient, wirtinger_factor

CONSTANT = "constant_theorem1"
GEOMETRIC = "geometric_decay"


@dataclass(frozen=True)
class ScheduleParams:
    """Step-size schedule.

    ``constant_theorem1`` uses the fixed step that balances the
    convergence bound over ``horizon`` iterations; ``geometric_decay``
    multiplies the initial steps by ``gamma**t`` until ``t_cut`` and keeps
    them constant afterwards. ``l_h1`` and ``delta_k`` only enter
    :func:`theorem1_bound`.
    """

    mode: str = GEOMETRIC
    delta_phi: float = 1.0
    rho: float = 1.0
    b_f: float = 1.0
    l_h0: float = 1.0
    l_h1: float = 1.0
    delta_k: float = 1.0
    horizon: int | None = None
    eta_phase: float = 0.4
    eta_amplitude: float = 0.01
    gamma: float = 0.9972
    t_cut: int = 1000

    def __post_init__(self):
        if self.mode not in (CONSTANT, GEOMETRIC):
            raise ParameterError(f"unknown schedule mode {self.mode!r}")
        if not 0 < self.gamma <= 1:
            raise ParameterError("gamma must lie in (0, 1]")
        if self.t_cut < 0:
            raise ParameterError("t_cut must be >= 0")
        for name in ("delta_phi", "rho", "b_f", "l_h0", "l_h1", "delta_k"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if self.eta_phase < 0 or self.eta_amplitude < 0:
            raise ParameterError("initial steps must be nonnegative")


def step_size(t: int, params: ScheduleParams, S: int) -> tuple[float, float]:
    """Phase and amplitude step sizes at iteration ``t``."""
    if t < 0:
        raise ParameterError("iteration index must be >= 0")
    if params.mode == CONSTANT:
        if params.horizon is None:
            raise ParameterError("constant schedule needs the horizon T")
        eta = math.sqrt(params.delta_phi / (4 * params.rho * params.b_f ** 2 * params.l_h0 ** 2
                                            * (S ** 2 + 2 * S) * (params.horizon + 1)))
        return eta, eta
    scale = params.gamma ** min(t, params.t_cut)
    return params.eta_phase * scale, params.eta_amplitude * scale


def theorem1_bound(params: ScheduleParams, S: int, M: int, K: int, mu: float, T: int) -> float:
    """Bound on the expected squared Moreau-envelope gradient at the returned iterate."""
    p = params
    first = math.sqrt(p.delta_phi * p.rho * p.b_f ** 2 * p.l_h0 ** 2 * (S ** 2 + 2 * S) / (T + 1))
    second = mu * p.rho * p.delta_k * p.b_f * p.l_h1 * math.sqrt(S * M * K)
    return 8.0 * (first + second)


def project_box(theta: np.ndarray, lo, hi) -> np.ndarray:
    """Euclidean projection onto the box ``[lo, hi]`` (coordinatewise clamp)."""
    return np.minimum(np.maximum(np.asarray(theta, dtype=float), lo), hi)


def wrap_phases(theta: np.ndarray, is_phase: np.ndarray) -> np.ndarray:
    out = np.array(theta, dtype=float)
    out[is_phase] = (out[is_phase] + np.pi) % (2 * np.pi) - np.pi
    return out


def select_iterate(steps, rng: np.random.Generator) -> int:
    """Index ``t`` drawn with probability proportional to ``steps[t]``."""
    steps = np.asarray(steps, dtype=float)
    if steps.ndim != 1 or steps.size == 0 or np.any(steps < 0) or not np.any(steps > 0):
        raise ParameterError("need nonnegative step sizes with at least one positive entry")
    return int(rng.choice(steps.size, p=steps / steps.sum()))


@dataclass
class StepOutcome:
    theta: np.ndarray
    sumrate: float
    gradient: np.ndarray
    precoder: PrecoderMatrix

    @property
    def degenerate(self) -> bool:
        return self.precoder.degenerate


def zosga_step(theta: np.ndarray, omega, u: np.ndarray, mu: float, eta,
               inner_oracle: Callable[[np.ndarray], PrecoderMatrix],
               channel_fn: Callable[[np.ndarray, object], np.ndarray],
               bounds: tuple[np.ndarray, np.ndarray], weights, noise,
               is_phase: np.ndarray | None = None, wrap: bool = False) -> StepOutcome:
    """One ascent step; ``eta`` is a scalar or one step per coordinate.

    The channel is evaluated three times: once to feed the precoder
    solver and twice for the probe.
    """
    H = channel_fn(theta, omega)
    precoder = inner_oracle(H)
    value = sumrate(precoder.W, H, weights, noise)
    factor = wirtinger_factor(precoder.W, H, weights, noise)
    grad = quasi_gradient(probe_channel(theta, omega, u, mu, channel_fn), factor)
    nxt = np.asarray(theta, dtype=float) + eta * grad
    if wrap and is_phase is not None:
        nxt = wrap_phases(nxt, is_phase)
    return StepOutcome(project_box(nxt, *bounds), value, grad, precoder)


@dataclass
class Trajectory:
    """Per-iteration record of one optimization run.

    ``sumrates[t]`` is the post-precoding sumrate at ``theta^t`` for the
    realization drawn at iteration ``t``. Iterates are stored every
    ``thin`` iterations plus the selected one.
    """

    sumrates: np.ndarray
    steps: np.ndarray
    iterates: dict[int, np.ndarray] = field(default_factory=dict)
    selected: int = 0
    final_theta: np.ndarray | None = None
    channel_evaluations: int = 0
    degenerate_steps: int = 0

    @property
    def selected_theta(self) -> np.ndarray:
        return self.iterates[self.selected]


def run_zosga(theta0: np.ndarray, iterations: int, draw_omega: Callable[[], object],
              draw_direction: Callable[[int], np.ndarray], channel_fn, inner_oracle,
              schedule: ScheduleParams, mu: float, bounds, is_phase: np.ndarray,
              weights, noise, select_rng: np.random.Generator, thin: int = 100,
              wrap: bool = False) -> Trajectory:
    """Run the outer loop for ``iterations`` steps and pick the returned iterate."""
    theta = project_box(theta0, *bounds)
    S = theta.size
    phase_steps = np.empty(iterations)
    etas = np.empty((iterations, S))
    for t in range(iterations):
        eta_phi, eta_amp = step_size(t, schedule, S)
        phase_steps[t] = eta_phi
        etas[t] = np.where(is_phase, eta_phi, eta_amp)
    # the selection only depends on the schedule, so draw it up front
    selected = select_iterate(phase_steps, select_rng)

    calls = 0

    def counted(th, om):
        nonlocal calls
        calls += 1
        return channel_fn(th, om)

    sumrates = np.empty(iterations)
    iterates: dict[int, np.ndarray] = {}
    degenerate = 0
    for t in range(iterations):
        if t % thin == 0 or t == selected:
            iterates[t] = theta.copy()
        omega = draw_omega()
        u = draw_direction(S)
        out = zosga_step(theta, omega, u, mu, etas[t], inner_oracle, counted, bounds,
                         weights, noise, is_phase, wrap)
        sumrates[t] = out.sumrate
        degenerate += out.degenerate
        theta = out.theta
    iterates[iterations] = theta.copy()
    return Trajectory(sumrates, phase_steps, iterates, selected, theta, calls, degenerate)
