import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import effective_channel_loop, exp_correlation
from zosga_irs.channel import (ADJUSTABLE, UNIT, ChannelRealization, IrsPanel, IrsState,
                               NetworkConfig, correlation_matrix, correlation_sqrt,
                               draw_statistical_csi, effective_channel, irs_correlation,
                               irs_correlation_sqrt, parameter_bounds, parameter_count,
                               path_loss, phase_mask, sample_realization)
from zosga_irs.errors import DimensionError, ParameterError


def small_config(M=2, K=2, panels=((3, 1),), **kw):
    irs = tuple(IrsPanel(nh, nv, 10.0, (5.0,) * K) for nh, nv in panels)
    return NetworkConfig(num_antennas=M, num_users=K, irs=irs, distance_au=(20.0,) * K, **kw)


# -- correlation ------------------------------------------------------------

def test_zero_correlation_is_identity():
    np.testing.assert_array_equal(correlation_matrix(0, 3), np.eye(3))


def test_half_correlation_2x2():
    np.testing.assert_allclose(correlation_matrix(0.5, 2), [[1, 0.5], [0.5, 1]])


def test_high_correlation_positive_definite():
    assert np.linalg.eigvalsh(correlation_matrix(0.9, 4)).min() > 0


def test_correlation_matches_loop():
    np.testing.assert_allclose(correlation_matrix(0.37, 6), exp_correlation(0.37, 6), rtol=1e-14)


@pytest.mark.parametrize("r, n", [(-0.1, 3), (1.0, 3), (0.5, 0)])
def test_correlation_rejects_bad_input(r, n):
    with pytest.raises(ParameterError):
        correlation_matrix(r, n)


def test_irs_correlation_examples():
    np.testing.assert_array_equal(irs_correlation(0, 0, 2, 2), np.eye(4))
    np.testing.assert_allclose(irs_correlation(0.5, 0, 2, 1), [[1, 0.5], [0.5, 1]])


def test_irs_correlation_kronecker_entrywise():
    R = irs_correlation(0.3, 0.7, 2, 2)
    Rh, Rv = exp_correlation(0.3, 2), exp_correlation(0.7, 2)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                for d in range(2):
                    assert R[2 * a + b, 2 * c + d] == pytest.approx(Rh[a, c] * Rv[b, d], abs=1e-15)


@given(st.floats(0, 0.999), st.integers(1, 12))
def test_correlation_psd_and_root(r, n):
    R = correlation_matrix(r, n)
    assert np.linalg.eigvalsh(R).min() >= -1e-10
    root = correlation_sqrt(r, n)
    assert np.linalg.norm(root @ root.conj().T - R) <= 1e-10 * max(1.0, np.linalg.norm(R)) * 10


def test_irs_root_factor():
    root = irs_correlation_sqrt(0.6, 0.2, 3, 2)
    np.testing.assert_allclose(root @ root.conj().T, irs_correlation(0.6, 0.2, 3, 2), atol=1e-10)


# -- path loss --------------------------------------------------------------

def test_path_loss_examples():
    assert path_loss(1, 3, 1e-3) == pytest.approx(0.0316228, rel=1e-6)
    assert path_loss(1, 0, 1) == 1
    assert path_loss(10, 2, 1e-3) == pytest.approx(3.16228e-3, rel=1e-5)


def test_path_loss_vectorized():
    np.testing.assert_allclose(path_loss([1, 10], 2, 1e-3), [np.sqrt(1e-3), np.sqrt(1e-5)])


@pytest.mark.parametrize("d, c0", [(0, 1), (-1, 1), (1, 0)])
def test_path_loss_rejects(d, c0):
    with pytest.raises(ParameterError):
        path_loss(d, 2, c0)


# -- configuration and state -------------------------------------------------

@pytest.mark.parametrize("kw", [dict(beta_ai=-1), dict(r_r=1.0), dict(power=0),
                                dict(noise=(1.0, -1.0)), dict(weights=(0.0, 0.0))])
def test_config_validation(kw):
    with pytest.raises(ParameterError):
        small_config(**kw)


def test_config_rejects_empty_panel():
    with pytest.raises(ParameterError):
        small_config(panels=((0, 2),))


def test_flatten_round_trip(rng):
    sizes = (3, 5)
    for mode in (ADJUSTABLE, UNIT):
        theta = rng.uniform(*parameter_bounds(sizes, mode))
        assert theta.size == parameter_count(sizes, mode)
        state = IrsState.unflatten(theta, sizes, mode)
        np.testing.assert_array_equal(state.flatten(mode), theta)
        assert state.is_feasible(mode)
    unit = IrsState.unflatten(np.zeros(8), sizes, UNIT)
    assert all(np.all(a == 1.0) for a in unit.amplitudes)


def test_flat_layout():
    mask = phase_mask((2, 1))
    np.testing.assert_array_equal(mask, [True, True, False, False, True, False])
    lo, hi = parameter_bounds((2,))
    np.testing.assert_array_equal(lo, [-np.pi, -np.pi, 0, 0])
    np.testing.assert_array_equal(hi, [np.pi, np.pi, 1, 1])


def test_unflatten_wrong_length():
    with pytest.raises(DimensionError):
        IrsState.unflatten(np.zeros(5), (3,))


def test_initial_state_feasible(rng):
    state = IrsState.initial((4, 2), rng)
    assert state.is_feasible(UNIT)


# -- sampling ---------------------------------------------------------------

def test_statistical_csi_deterministic():
    cfg = small_config()
    a = draw_statistical_csi(cfg, np.random.default_rng(5))
    b = draw_statistical_csi(cfg, np.random.default_rng(5))
    for x, y in zip((*a.G, *a.h_r, a.h_d), (*b.G, *b.h_r, b.h_d)):
        np.testing.assert_array_equal(x, y)


def test_statistical_csi_moments():
    cfg = small_config(M=1, K=1, panels=((1, 1),))
    rng = np.random.default_rng(11)
    n = 100_000
    draws = np.empty((n, 3), dtype=complex)
    for i in range(n):
        s = draw_statistical_csi(cfg, rng)
        draws[i] = (s.G[0][0, 0], s.h_r[0][0, 0], s.h_d[0, 0])
    assert np.all(np.abs(draws.mean(axis=0)) < 0.02)
    assert np.all(np.abs(np.mean(np.abs(draws) ** 2, axis=0) - 1) < 0.02)


def test_realization_deterministic():
    cfg = small_config()
    scsi = draw_statistical_csi(cfg, np.random.default_rng(1))
    a = sample_realization(cfg, scsi, np.random.default_rng(2))
    b = sample_realization(cfg, scsi, np.random.default_rng(2))
    assert a.checksum() == b.checksum()
    c = sample_realization(cfg, scsi, np.random.default_rng(3))
    assert a.checksum() != c.checksum()


def test_los_limit():
    cfg = small_config(beta_ai=1e12, beta_iu=1e12, beta_au=1e12, r_r=0.4, r_d=0.3, r_rk=0.5)
    scsi = draw_statistical_csi(cfg, np.random.default_rng(1))
    omega = sample_realization(cfg, scsi, np.random.default_rng(2))
    panel = cfg.irs[0]
    L_ai = path_loss(panel.distance_ai, cfg.alpha_ai, cfg.c0)
    L_iu = path_loss(np.array(panel.distance_iu), cfg.alpha_iu, cfg.c0)
    L_au = path_loss(np.array(cfg.distance_au), cfg.alpha_au, cfg.c0)
    np.testing.assert_allclose(omega.G[0], L_ai * scsi.G[0], rtol=1e-5)
    np.testing.assert_allclose(omega.h_r[0], scsi.h_r[0] * L_iu, rtol=1e-5)
    np.testing.assert_allclose(omega.h_d, scsi.h_d * L_au, rtol=1e-5)


def test_scattered_covariance():
    M = 3
    cfg = NetworkConfig(num_antennas=M, num_users=1, irs=(), distance_au=(2.0,), beta_au=0,
                        r_d=0.6, c0=1.0, alpha_au=2.0)
    scsi = draw_statistical_csi(cfg, np.random.default_rng(0))
    rng = np.random.default_rng(1)
    n = 100_000
    h = np.empty((n, M), dtype=complex)
    for i in range(n):
        h[i] = sample_realization(cfg, scsi, rng).h_d[:, 0]
    cov = h.T @ h.conj() / n
    expected = path_loss(2.0, 2.0, 1.0) ** 2 * exp_correlation(0.6, M)
    assert np.linalg.norm(cov - expected) <= 0.05 * np.linalg.norm(expected)


@pytest.mark.parametrize("beta", [0.0, 1.0, 100.0])
def test_rician_mixing_preserves_power(beta):
    cfg = NetworkConfig(num_antennas=2, num_users=2, irs=(IrsPanel(2, 2, 1.0, (1.0, 1.0)),),
                        distance_au=(1.0, 1.0), beta_ai=beta, beta_iu=beta, beta_au=beta,
                        c0=1.0, alpha_ai=0, alpha_iu=0, alpha_au=0)
    rng = np.random.default_rng(int(beta) + 3)
    total = np.zeros(3)
    n = 4000
    for _ in range(n):
        # LoS part redrawn as well, so the expectation covers both components
        scsi = draw_statistical_csi(cfg, rng)
        om = sample_realization(cfg, scsi, rng)
        total += [np.sum(np.abs(om.G[0]) ** 2), np.sum(np.abs(om.h_r[0]) ** 2), np.sum(np.abs(om.h_d) ** 2)]
    np.testing.assert_allclose(total / n, [8, 8, 4], rtol=0.03)


def test_realization_dimension_mismatch():
    cfg = small_config()
    scsi = draw_statistical_csi(small_config(M=3), np.random.default_rng(0))
    with pytest.raises(DimensionError):
        sample_realization(cfg, scsi, np.random.default_rng(0))


# -- effective channel --------------------------------------------------------

def _omega(rng, M, K, sizes):
    c = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    return ChannelRealization([c(n, M) for n in sizes], [c(n, K) for n in sizes], c(M, K))


def test_dead_irs_gives_direct_link(rng):
    om = _omega(rng, 3, 2, (4, 2))
    state = IrsState([rng.uniform(-3, 3, 4), rng.uniform(-3, 3, 2)], [np.zeros(4), np.zeros(2)])
    np.testing.assert_array_equal(effective_channel(state, om), om.h_d)


def test_transparent_irs(rng):
    om = _omega(rng, 2, 2, (3,))
    state = IrsState([np.zeros(3)], [np.ones(3)])
    np.testing.assert_allclose(effective_channel(state, om), om.G[0].conj().T @ om.h_r[0] + om.h_d, atol=1e-14)


def test_effective_channel_matches_loop(rng):
    om = _omega(rng, 2, 2, (3, 2))
    phases = [rng.uniform(-np.pi, np.pi, 3), rng.uniform(-np.pi, np.pi, 2)]
    amps = [rng.uniform(0, 1, 3), rng.uniform(0, 1, 2)]
    got = effective_channel(IrsState(phases, amps), om)
    np.testing.assert_allclose(got, effective_channel_loop(phases, amps, om.G, om.h_r, om.h_d), atol=1e-12)


def test_effective_channel_linear_in_coefficients(rng):
    om = _omega(rng, 3, 2, (4,))
    c1 = rng.uniform(0, 0.5, 4) * np.exp(-1j * rng.uniform(-np.pi, np.pi, 4))
    c2 = rng.uniform(0, 0.5, 4) * np.exp(-1j * rng.uniform(-np.pi, np.pi, 4))

    def at(c):
        return effective_channel(IrsState([-np.angle(c)], [np.abs(c)]), om)

    np.testing.assert_allclose(at(c1 + c2) + om.h_d, at(c1) + at(c2), atol=1e-12)


def test_effective_channel_bounded(rng):
    om = _omega(rng, 3, 2, (4,))
    bound = np.linalg.norm(om.G[0]) * np.linalg.norm(om.h_r[0]) + np.linalg.norm(om.h_d)
    for _ in range(50):
        state = IrsState.unflatten(rng.uniform(*parameter_bounds((4,))), (4,))
        H = effective_channel(state, om)
        assert np.all(np.isfinite(H)) and np.linalg.norm(H) <= bound


def test_effective_channel_dimension_mismatch(rng):
    om = _omega(rng, 2, 2, (3,))
    with pytest.raises(DimensionError):
        effective_channel(IrsState([np.zeros(4)], [np.ones(4)]), om)


def test_uncorrelated_link_distribution_independent_of_beta():
    # with r = 0 both parts are CN(0, I), so every realization has the same law for any beta
    stats_by_beta = []
    for beta in (1.0, 100.0):
        cfg = small_config(M=2, K=1, panels=((2, 1),), beta_ai=beta, beta_iu=beta, c0=1.0,
                           alpha_ai=0, alpha_iu=0)
        rng = np.random.default_rng(17)
        vals = []
        for _ in range(20_000):
            om = sample_realization(cfg, draw_statistical_csi(cfg, rng), rng)
            vals.append([om.G[0][0, 0], om.h_r[0][1, 0]])
        vals = np.array(vals)
        stats_by_beta.append([np.mean(np.abs(vals) ** 2, axis=0), np.mean(np.abs(vals) ** 4, axis=0)])
    np.testing.assert_allclose(stats_by_beta[0], stats_by_beta[1], rtol=0.05)
    np.testing.assert_allclose(stats_by_beta[0][1], [2, 2], rtol=0.05)   # E|CN(0,1)|^4 = 2
