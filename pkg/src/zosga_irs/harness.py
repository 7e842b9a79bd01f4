"""Seeded Monte-Carlo experiments: single simulations, ensembles, sweeps.

A simulation draws the statistical CSI once and then one fresh
instantaneous realization per outer iteration. Every simulation owns a
:class:`numpy.random.SeedSequence`; simulation ``i`` of an ensemble uses
``SeedSequence(master_seed, spawn_key=(i,))``, so adding simulations never
changes earlier ones. Inside a simulation, independent child streams are
keyed by the constants below. The channel streams do not depend on the
method, which keeps comparisons between methods paired.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .beamforming import sumrate, wmmse_precoder
from .channel import (ADJUSTABLE, UNIT, IrsState, draw_statistical_csi, effective_channel,
                      effective_channel_jacobian, parameter_bounds, parameter_count, phase_mask,
                      sample_realization)
from .gradients import wirtinger_factor
from .errors import ParameterError
from .scenario import METHODS, Scenario, scenario_from_entries
from .zosga import run_zosga

STREAM_SCSI = 0
STREAM_ICSI = 1
STREAM_INIT = 2
STREAM_DIRECTIONS = 3
STREAM_SELECT = 4

WORKERS_ENV = "ZOSGA_WORKERS"
EXTERNAL_PREFIX = "external:"
CSV_COLUMNS = ("iteration", "mean_sumrate", "std_sumrate", "n_sims", "method", "scenario_hash")


def _stream(seed: np.random.SeedSequence, stream_id: int) -> np.random.Generator:
    child = np.random.SeedSequence(seed.entropy, spawn_key=(*seed.spawn_key, stream_id))
    return np.random.default_rng(child)


def _as_seed_sequence(sim_seed) -> np.random.SeedSequence:
    if isinstance(sim_seed, np.random.SeedSequence):
        return sim_seed
    return np.random.SeedSequence(int(sim_seed))


def simulation_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))


@dataclass
class SimulationResult:
    sumrates: np.ndarray
    final: float
    channel_checksum: str
    channel_uses: int
    selected_theta: np.ndarray | None = None
    final_theta: np.ndarray | None = None


def final_value(series: np.ndarray, window: int) -> float:
    """Mean of the trailing ``window`` iterations."""
    return float(np.mean(series[-min(window, len(series)):]))


def _load_external(path: str, sim_index: int) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            if int(row["sim"]) == sim_index:
                rows.append((int(row["iteration"]), float(row["sumrate"])))
    if not rows:
        raise ParameterError(f"{path} has no series for simulation {sim_index}")
    rows.sort()
    return np.array([v for _, v in rows])


def run_simulation(scenario: Scenario, method: str, sim_seed) -> SimulationResult:
    """Run one simulation and report the sumrate of every outer iteration.

    ``method`` is one of ``zosga_aa``, ``zosga_ua``, ``random_irs``,
    ``no_irs``, or ``external:<csv>`` to replay precomputed series
    (columns ``sim, iteration, sumrate``) from another solver.
    """
    seed = _as_seed_sequence(sim_seed)
    if method.startswith(EXTERNAL_PREFIX):
        index = seed.spawn_key[-1] if seed.spawn_key else int(seed.entropy)
        series = _load_external(method[len(EXTERNAL_PREFIX):], index)
        return SimulationResult(series, final_value(series, scenario.final_window), "", 0)
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; expected one of {METHODS} or external:<file>")

    net = scenario.network
    sizes = net.irs_sizes
    weights, noise = net.weight_array, net.noise_array
    scsi = draw_statistical_csi(net, _stream(seed, STREAM_SCSI))
    icsi_rng = _stream(seed, STREAM_ICSI)
    base = IrsState.initial(sizes, _stream(seed, STREAM_INIT))
    if method == "no_irs":
        base = IrsState([p.copy() for p in base.phases], [np.zeros(n) for n in sizes])

    checksum = hashlib.sha256()

    def draw_omega():
        omega = sample_realization(net, scsi, icsi_rng)
        checksum.update(omega.checksum().encode())
        return omega

    inner_iters = scenario.inner_iterations(method)
    last_w = [None]

    def inner_oracle(H):
        init = last_w[0] if scenario.warm_start else None
        result = wmmse_precoder(H, net.power, noise, weights, inner_iters, init)
        last_w[0] = result.W
        return result

    T = scenario.iterations
    if method in ("random_irs", "no_irs"):
        series = np.empty(T)
        for t in range(T):
            H = effective_channel(base, draw_omega())
            series[t] = sumrate(inner_oracle(H).W, H, weights, noise)
        return SimulationResult(series, final_value(series, scenario.final_window),
                                checksum.hexdigest(), T)

    mode = ADJUSTABLE if method == "zosga_aa" else UNIT
    full = base.flatten(mode)
    owner = np.repeat(np.arange(len(sizes)), [parameter_count([n], mode) for n in sizes])
    active = np.isin(owner, [i for i, p in enumerate(net.irs) if p.optimize])
    lo, hi = parameter_bounds(sizes, mode)
    is_phase = phase_mask(sizes, mode)

    def channel_fn(theta, omega):
        flat = full.copy()
        flat[active] = theta
        return effective_channel(IrsState.unflatten(flat, sizes, mode), omega)

    directions = _stream(seed, STREAM_DIRECTIONS)
    traj = run_zosga(
        theta0=full[active],
        iterations=T,
        draw_omega=draw_omega,
        draw_direction=lambda s: directions.standard_normal(s),
        channel_fn=channel_fn,
        inner_oracle=inner_oracle,
        schedule=scenario.schedule,
        mu=scenario.mu,
        bounds=(lo[active], hi[active]),
        is_phase=is_phase[active],
        weights=weights,
        noise=noise,
        select_rng=_stream(seed, STREAM_SELECT),
        thin=scenario.thin,
        wrap=scenario.phase_wrap,
    )
    return SimulationResult(traj.sumrates, final_value(traj.sumrates, scenario.final_window),
                            checksum.hexdigest(), traj.channel_evaluations,
                            traj.selected_theta, traj.final_theta)


def estimate_constants(scenario: Scenario, seed, samples: int = 200,
                       mode: str = ADJUSTABLE) -> dict[str, float]:
    """Empirical maxima standing in for the constants of the fixed step rule.

    Draws random feasible ``theta`` and fresh realizations and records
    ``b_f``, the largest norm of the sumrate gradient in the real channel
    coordinates at the WMMSE precoder, and ``l_h0``, the largest spectral
    norm of the channel Jacobian in ``theta``. Both are lower estimates of
    the true suprema.
    """
    seed = _as_seed_sequence(seed)
    net = scenario.network
    sizes = net.irs_sizes
    scsi = draw_statistical_csi(net, _stream(seed, STREAM_SCSI))
    icsi, init = _stream(seed, STREAM_ICSI), _stream(seed, STREAM_INIT)
    lo, hi = parameter_bounds(sizes, mode)
    b_f = l_h0 = 0.0
    for _ in range(samples):
        state = IrsState.unflatten(init.uniform(lo, hi), sizes, mode)
        omega = sample_realization(net, scsi, icsi)
        H = effective_channel(state, omega)
        W = wmmse_precoder(H, net.power, net.noise_array, net.weight_array,
                           scenario.wmmse_iters).W
        D = wirtinger_factor(W, H, net.weight_array, net.noise_array).D
        b_f = max(b_f, 2.0 * float(np.linalg.norm(D)))
        J = effective_channel_jacobian(state, omega, mode).reshape(len(lo), -1)
        l_h0 = max(l_h0, float(np.linalg.norm(np.hstack([J.real, J.imag]), 2)))
    return {"b_f": b_f, "l_h0": l_h0}


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------

@dataclass
class RunRecord:
    """Aggregated result of one ensemble."""

    scenario_hash: str
    method: str
    master_seed: int
    n_sims: int
    mean: np.ndarray
    std: np.ndarray
    finals: np.ndarray
    wall_clock: float
    config: dict[str, str]
    channel_uses: int = 0
    series: np.ndarray | None = None
    channel_checksums: list[str] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.mean)

    @property
    def mean_final(self) -> float:
        return float(np.mean(self.finals))


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _simulate_task(args):
    entries, method, master_seed, index = args
    return index, run_simulation(scenario_from_entries(entries), method, simulation_seed(master_seed, index))


def simulate_many(scenario: Scenario, method: str, master_seed: int, indices: Sequence[int],
                  workers: int | None = None) -> dict[int, SimulationResult]:
    """Run the listed simulations, in the given order, possibly in parallel."""
    workers = _worker_count(workers)
    if workers == 1:
        return {i: run_simulation(scenario, method, simulation_seed(master_seed, i)) for i in indices}
    tasks = [(dict(scenario.entries), method, master_seed, i) for i in indices]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return dict(pool.map(_simulate_task, tasks))


def aggregate(scenario: Scenario, method: str, master_seed: int,
              results: Mapping[int, SimulationResult], wall_clock: float = 0.0) -> RunRecord:
    """Reduce simulation results in ascending index order."""
    order = sorted(results)
    series = np.stack([results[i].sumrates for i in order])
    n = len(order)
    mean = np.mean(series, axis=0)
    std = np.std(series, axis=0, ddof=1) if n > 1 else np.zeros(series.shape[1])
    return RunRecord(
        scenario_hash=scenario.hash,
        method=method,
        master_seed=int(master_seed),
        n_sims=n,
        mean=mean,
        std=std,
        finals=np.array([results[i].final for i in order]),
        wall_clock=wall_clock,
        config=scenario.snapshot(),
        channel_uses=results[order[0]].channel_uses,
        series=series,
        channel_checksums=[results[i].channel_checksum for i in order],
    )


def run_ensemble(scenario: Scenario, method: str, master_seed: int, n_sims: int,
                 workers: int | None = None) -> RunRecord:
    if n_sims < 1:
        raise ParameterError("n_sims must be >= 1")
    start = time.perf_counter()
    results = simulate_many(scenario, method, master_seed, range(n_sims), workers)
    return aggregate(scenario, method, master_seed, results, time.perf_counter() - start)


@dataclass(frozen=True)
class SweepSpec:
    """Values assigned, together, to every key in ``keys``."""

    keys: tuple[str, ...]
    values: tuple[str, ...]
    n_sims: int

    def __post_init__(self):
        if not self.keys or not self.values:
            raise ParameterError("a sweep needs at least one key and one value")
        if self.n_sims < 1:
            raise ParameterError("n_sims must be >= 1")


def run_sweep(scenario: Scenario, sweep: SweepSpec, methods: Sequence[str], master_seed: int,
              workers: int | None = None) -> list[RunRecord]:
    """One ensemble per (value, method), all sharing ``master_seed``."""
    records = []
    for value in sweep.values:
        point = scenario.with_overrides({key: value for key in sweep.keys})
        for method in methods:
            records.append(run_ensemble(point, method, master_seed, sweep.n_sims, workers))
    return records


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _array_to_json(arr):
    # json writes floats with repr, which round-trips exactly
    return None if arr is None else np.asarray(arr, dtype=float).tolist()


def record_to_dict(record: RunRecord, include_series: bool = True) -> dict:
    return {
        "scenario_hash": record.scenario_hash,
        "method": record.method,
        "master_seed": record.master_seed,
        "n_sims": record.n_sims,
        "iterations": record.iterations,
        "mean": _array_to_json(record.mean),
        "std": _array_to_json(record.std),
        "finals": _array_to_json(record.finals),
        "wall_clock": float(record.wall_clock),
        "config": dict(record.config),
        "channel_uses": record.channel_uses,
        "channel_checksums": list(record.channel_checksums),
        "series": _array_to_json(record.series) if include_series else None,
    }


def record_from_dict(data: Mapping) -> RunRecord:
    def arr(v):
        return None if v is None else np.array(v, dtype=float)

    return RunRecord(
        scenario_hash=data["scenario_hash"],
        method=data["method"],
        master_seed=int(data["master_seed"]),
        n_sims=int(data["n_sims"]),
        mean=arr(data["mean"]),
        std=arr(data["std"]),
        finals=arr(data["finals"]),
        wall_clock=float(data["wall_clock"]),
        config=dict(data["config"]),
        channel_uses=int(data.get("channel_uses", 0)),
        series=arr(data.get("series")),
        channel_checksums=list(data.get("channel_checksums", [])),
    )


def export_results(records, path, format: str = "csv", include_series: bool = True) -> Path:
    """Write one or more records as CSV (aggregates only) or JSON (full records)."""
    if isinstance(records, RunRecord):
        records = [records]
    path = Path(path)
    if format not in ("csv", "json"):
        raise ParameterError(f"unknown export format {format!r}")
    try:
        with open(path, "w", newline="") as fh:
            if format == "csv":
                writer = csv.writer(fh)
                writer.writerow(CSV_COLUMNS)
                for rec in records:
                    for t, (m, s) in enumerate(zip(rec.mean, rec.std)):
                        writer.writerow([t, _fmt(m), _fmt(s), rec.n_sims, rec.method, rec.scenario_hash])
            else:
                json.dump([record_to_dict(r, include_series) for r in records], fh, indent=1)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def load_results(path, format: str | None = None):
    """Read back :func:`export_results` output.

    JSON gives a list of :class:`RunRecord`; CSV gives a list of blocks, one
    per (method, scenario_hash), each a dict with ``method``,
    ``scenario_hash``, ``n_sims``, ``mean`` and ``std``.
    """
    path = Path(path)
    format = format or path.suffix.lstrip(".").lower()
    if format == "json":
        with open(path) as fh:
            return [record_from_dict(d) for d in json.load(fh)]
    blocks: dict[tuple[str, str], dict] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ParameterError(f"{path}: unexpected CSV header {reader.fieldnames}")
        for row in reader:
            key = (row["method"], row["scenario_hash"])
            block = blocks.setdefault(key, {"method": key[0], "scenario_hash": key[1],
                                            "n_sims": int(row["n_sims"]), "mean": [], "std": []})
            block["mean"].append(float(row["mean_sumrate"]))
            block["std"].append(float(row["std_sumrate"]))
    out = []
    for block in blocks.values():
        block["mean"] = np.array(block["mean"])
        block["std"] = np.array(block["std"])
        out.append(block)
    return out


def paired_gap(a: RunRecord, b: RunRecord) -> tuple[float, float]:
    """Mean and standard error of the per-simulation final gap ``a - b``."""
    diff = a.finals - b.finals
    se = float(np.std(diff, ddof=1) / math.sqrt(len(diff))) if len(diff) > 1 else 0.0
    return float(np.mean(diff)), se
