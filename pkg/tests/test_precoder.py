import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oamris.channel import ReflectionPattern, assemble_links, effective_channel
from oamris.config import SystemConfig
from oamris.geometry import sample_geometry
from oamris.metrics import per_stream_sinr, sum_rate
from oamris.precoder import (DegenerateScenarioError, RankDeficientWarning,
                             baseline_precoder, compose_precoder, interuser_nullspace,
                             intermode_equalizer, three_layer_precoder, waterfill)

from conftest import crandn


def bisection_waterfill(levels, p_t, iters=400):
    """Independent oracle: bisection on the water level mu."""
    # bisect on the height above the lowest level so huge levels do not
    # swallow a small budget
    rel = np.asarray(levels, dtype=float) - np.min(levels)
    lo, hi = 0.0, p_t
    for _ in range(iters):
        t = 0.5 * (lo + hi)
        if np.clip(t - rel, 0, None).sum() > p_t:
            hi = t
        else:
            lo = t
    return np.clip(0.5 * (lo + hi) - rel, 0, None)


def default_gamma(seed):
    cfg = SystemConfig()
    ch = assemble_links(sample_geometry(cfg, np.random.default_rng(seed)), cfg)
    pattern = ReflectionPattern.random(ch.m_elements, np.random.default_rng(seed + 1000))
    return cfg, effective_channel(ch, pattern)


# -- inter-user null space ---------------------------------------------------

def test_nullspace_explicit():
    s = 3
    gamma = np.zeros((2 * s, 2 * s), dtype=complex)
    gamma[:s] = crandn(np.random.default_rng(0), s, 2 * s)
    gamma[s:, :s] = np.eye(s)
    q = interuser_nullspace(gamma, 0, s)
    np.testing.assert_allclose(q[:s], 0, atol=1e-14)
    # trailing block is a permutation of the standard basis, phases fixed to +1
    tail = q[s:]
    np.testing.assert_allclose(np.abs(tail).sum(axis=0), 1.0, atol=1e-14)
    np.testing.assert_allclose(tail[np.abs(tail) > 0.5], 1.0, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_nullspace_default_scenarios(seed):
    cfg, gamma = default_gamma(seed)
    s = cfg.n_streams
    for k in range(cfg.n_users):
        q = interuser_nullspace(gamma, k, s)
        np.testing.assert_allclose(q.conj().T @ q, np.eye(s), atol=1e-10)
        for i in range(cfg.n_users):
            if i != k:
                gi = gamma[i * s:(i + 1) * s]
                assert np.linalg.norm(gi @ q) <= 1e-9 * np.linalg.norm(gi)


def test_nullspace_phase_convention(rng):
    gamma = crandn(rng, 8, 8)
    q = interuser_nullspace(gamma, 1, 2)
    for c in range(2):
        col = q[:, c]
        first = col[np.argmax(np.abs(col) > 1e-12)]
        assert first.imag == pytest.approx(0, abs=1e-15) and first.real > 0


# -- inter-mode equalizer ------------------------------------------------------

def test_equalizer_diagonal_input():
    d, s = intermode_equalizer(np.diag([3.0, 2.0, 0.5]), np.eye(3))
    np.testing.assert_allclose(d, np.eye(3), atol=1e-14)
    np.testing.assert_allclose(s, [3, 2, 0.5])


def test_equalizer_unitary_input(rng):
    u, _ = np.linalg.qr(crandn(rng, 4, 4))
    d, s = intermode_equalizer(u, np.eye(4))
    np.testing.assert_allclose(s, 1.0)
    np.testing.assert_allclose(d, u.conj().T, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_equalizer_reconstruction(seed):
    a = crandn(np.random.default_rng(seed), 4, 4)
    d, s = intermode_equalizer(a, np.eye(4))
    assert np.linalg.norm(a @ d - np.diag(s)) <= 1e-9 * np.linalg.norm(s)


def test_equalizer_rejects_singular():
    a = np.diag([1.0, 1e-10])
    with pytest.raises(DegenerateScenarioError) as info:
        intermode_equalizer(a, np.eye(2))
    assert info.value.cond == pytest.approx(1e10)


# -- water-filling ---------------------------------------------------------

def test_waterfill_symmetric():
    np.testing.assert_allclose(waterfill([1.0, 1.0], 1.0, 2.0), [1, 1])


def test_waterfill_clamps_weak_stream():
    # noise-to-gain levels (0.1, 100)
    gains = np.sqrt(1.0 / np.array([0.1, 100.0]))
    p = waterfill(gains, 1.0, 0.2)
    oracle = bisection_waterfill([0.1, 100.0], 0.2)
    np.testing.assert_allclose(p, oracle, atol=1e-12)
    np.testing.assert_allclose(p, [0.2, 0.0], atol=1e-15)


def test_waterfill_single_stream():
    np.testing.assert_allclose(waterfill([0.3], 2.0, 5.0), [5.0])


def test_waterfill_zero_gain_gets_nothing():
    p = waterfill([1.0, 0.0, 2.0], 1.0, 10.0)
    assert p[1] == 0 and p.sum() == pytest.approx(10.0)


def test_waterfill_all_zero_rejected():
    with pytest.raises(ValueError):
        waterfill([0.0, 0.0], 1.0, 1.0)


def test_waterfill_unclamped_closed_form():
    gains = np.array([1.0, 0.9, 1.1, 1.2])
    levels = 1.0 / gains**2
    p_t = 10.0
    expected = p_t / 4 + levels.sum() / 4 - levels
    np.testing.assert_allclose(waterfill(gains, 1.0, p_t), expected, rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(gains=st.lists(st.floats(1e-6, 1e3), min_size=1, max_size=20),
       sigma2=st.floats(1e-6, 1e2), p_t=st.floats(1e-3, 1e3))
def test_waterfill_kkt(gains, sigma2, p_t):
    gains = np.array(gains)
    p = waterfill(gains, sigma2, p_t)
    levels = sigma2 / gains**2
    assert p.sum() == pytest.approx(p_t, rel=1e-10)
    active = p > 0
    mu = (p + levels)[active]
    np.testing.assert_allclose(mu, mu.mean(), rtol=1e-8)
    assert np.all(levels[~active] >= mu.mean() * (1 - 1e-8))
    np.testing.assert_allclose(p, bisection_waterfill(levels, p_t), atol=1e-8 * p_t)
    # never worse than uniform allocation
    snr = gains**2 / sigma2
    wf = np.log2(1 + snr * p).sum()
    uni = np.log2(1 + snr * p_t / gains.size).sum()
    assert wf >= uni - 1e-12 * max(1.0, uni)


def test_waterfill_huge_levels_keep_precision():
    # levels ~1e13 with a budget of 10: the mu - level cancellation must not leak
    gains = np.array([4e-8, 3.9e-8, 1e-9])
    p = waterfill(gains, 1e-3, 10.0)
    levels = 1e-3 / gains**2
    assert p.sum() == pytest.approx(10.0, rel=1e-12)
    np.testing.assert_allclose(p, bisection_waterfill(levels, 10.0), rtol=1e-6)


# -- composition -----------------------------------------------------------

@pytest.mark.parametrize("seed", range(5))
def test_three_layer_structure(seed):
    cfg, gamma = default_gamma(seed)
    stack = three_layer_precoder(gamma, cfg.n_users, cfg.n_streams, cfg.sigma2, cfg.p_t)
    s = cfg.n_streams
    assert np.sum(np.abs(stack.w) ** 2) <= cfg.p_t * (1 + 1e-9)
    t = gamma @ stack.w
    for k in range(cfg.n_users):
        gk = gamma[k * s:(k + 1) * s]
        wk = stack.w_block(k)
        own = gk @ wk
        # end-to-end amplitude lambda * sqrt(p), after the budget rescaling
        amp = stack.scale * stack.sigma_tilde[k] * np.sqrt(stack.e_powers[k * s:(k + 1) * s])
        np.testing.assert_allclose(np.diag(own), amp, rtol=1e-6, atol=1e-9 * np.abs(own).max())
        off = own - np.diag(np.diag(own))
        assert np.linalg.norm(off) <= 1e-8 * np.linalg.norm(own) or not own.any()
        for j in range(cfg.n_users):
            if j != k:
                # normalized by what the leak would be without nulling
                leak = np.linalg.norm(gk @ stack.w_block(j))
                assert leak <= 1e-8 * np.linalg.norm(gk) * np.linalg.norm(stack.w_block(j))
                if own.any():
                    assert leak <= 1e-8 * np.linalg.norm(own)


def test_compose_single_active_stream(rng):
    q = [np.eye(4)[:, :2], np.eye(4)[:, 2:]]
    d = [np.eye(2), np.eye(2)]
    stack = compose_precoder(q, d, [np.ones(2), np.ones(2)], np.array([0, 0, 1.0, 0]), 5.0)
    nz = np.flatnonzero(np.abs(stack.w).sum(axis=0))
    np.testing.assert_array_equal(nz, [2])
    assert stack.scale == 1.0


def test_compose_rescales_only_over_budget():
    q = [np.eye(2)]
    d = [np.diag([10.0, 1.0])]
    stack = compose_precoder(q, d, [np.ones(2)], np.array([1.0, 1.0]), 2.0)
    assert np.sum(np.abs(stack.w) ** 2) == pytest.approx(2.0, rel=1e-12)
    stack = compose_precoder(q, [np.eye(2) * 0.5], [np.ones(2)], np.array([1.0, 1.0]), 2.0)
    assert np.sum(np.abs(stack.w) ** 2) == pytest.approx(0.5, rel=1e-12)


def test_waterfill_beats_uniform_on_diagonalized_channel():
    cfg, gamma = default_gamma(3)
    stack = three_layer_precoder(gamma, cfg.n_users, cfg.n_streams, cfg.sigma2, cfg.p_t)
    snr = stack.gains**2 / cfg.sigma2
    wf = np.log1p(snr * stack.e_powers).sum()
    uni = np.log1p(snr * cfg.p_t / snr.size).sum()
    assert wf >= uni


# -- baselines -------------------------------------------------------------

def test_baselines_collapse_on_unitary_channel(rng):
    u, _ = np.linalg.qr(crandn(rng, 6, 6))
    h = 0.3 * u
    ref = h.conj().T / np.linalg.norm(h) * np.sqrt(4.0)
    for kind in ("mrt", "zf", "mmse"):
        np.testing.assert_allclose(baseline_precoder(kind, h, 4.0, 0.1), ref, atol=1e-12)


@pytest.mark.parametrize("shape", [(4, 4), (4, 6)])
def test_zf_diagonalizes(rng, shape):
    h = crandn(rng, *shape)
    w = baseline_precoder("zf", h, 2.0, 0.1)
    t = h @ w
    off = t - np.diag(np.diag(t))
    assert np.linalg.norm(off) <= 1e-9 * np.linalg.norm(t)
    assert np.sum(np.abs(w) ** 2) == pytest.approx(2.0)


def test_mmse_tends_to_zf(rng):
    h = crandn(rng, 4, 4)
    p_t = 3.0
    zf = baseline_precoder("zf", h, p_t, 0.0)
    mmse = baseline_precoder("mmse", h, p_t, 1e-12 * p_t)
    np.testing.assert_allclose(mmse, zf, rtol=0, atol=1e-6 * np.abs(zf).max())


def test_zf_rank_deficient_warns(rng):
    a = crandn(rng, 4, 2)
    h = a @ crandn(rng, 2, 4)
    with pytest.warns(RankDeficientWarning):
        w = baseline_precoder("zf", h, 1.0, 0.1)
    assert np.all(np.isfinite(w))


def test_unknown_baseline():
    with pytest.raises(ValueError):
        baseline_precoder("foo", np.eye(2), 1.0, 1.0)


def test_baselines_use_full_budget(rng):
    h = crandn(rng, 4, 6)
    for kind in ("mrt", "zf", "mmse"):
        w = baseline_precoder(kind, h, 7.0, 0.5)
        assert w.shape == (6, 4)
        assert np.sum(np.abs(w) ** 2) == pytest.approx(7.0)
