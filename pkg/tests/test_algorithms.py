import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sacsp.algorithms import (
    SacspConfig,
    compute_patterns,
    objective,
    select_candidates,
    train,
    train_ccacsp,
    train_csp,
    train_sacsp,
)
from sacsp.data import EpochSet
from sacsp.errors import PatternError, StatsError
from sacsp.linalg import WhiteningProjector, sym_eig, whitening_projector
from sacsp.spectral import build_train_stats, make_init_weights
from sacsp.synth import Source, SynthSpec, generate, reference_recovery_score

from conftest import random_epochs


def _cos(a, b):
    return abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))


@pytest.fixture(scope="module")
def planted_10hz():
    """Two classes whose only difference is a 10 Hz, 2 Hz-wide source per class."""
    spec = SynthSpec(
        n_channels=8, n_epochs_per_class=60, noise_sigma=1.0, seed=3,
        sources=(Source(None, 10.0, 2.0, 2.0, 0.3), Source(None, 10.0, 2.0, 0.3, 2.0)),
    ).validate()
    return generate(spec)


def test_objective_reduces_to_scaled_csp_quotient():
    ep = random_epochs(1)
    stats = build_train_stats(ep)
    bank = train_csp(ep)
    w = bank.pairs[0].spatial
    rayleigh = w @ stats.sigma1 @ w / (w @ stats.sigma_sum @ w)
    h = make_init_weights("uniform", 100, 100.0)
    np.testing.assert_allclose(objective(stats, 1, w, h), rayleigh / 10.0, rtol=1e-12)
    np.testing.assert_allclose(objective(stats, 1, 5 * w, h), objective(stats, 1, w, h), rtol=1e-12)


def test_objective_matches_per_epoch_brute_force():
    ep = random_epochs(2, n_channels=4, per_class=6)
    stats = build_train_stats(ep)
    rng = np.random.default_rng(0)
    for _ in range(5):
        w = rng.standard_normal(4)
        h = make_init_weights("random", 100, 100.0, seed=int(rng.integers(1 << 30)))
        num = np.mean([np.sum(h.weights * np.abs(np.fft.fft(w @ x) / 10.0) ** 2) / 100
                       for x in ep.data[ep.labels == 2]])
        den = np.mean([np.sum((w @ x) ** 2) / 100 for x in ep.data])
        np.testing.assert_allclose(objective(stats, 2, w, h), num / (2 * den), rtol=1e-10)


def test_csp_planted_diagonal():
    rng = np.random.default_rng(5)
    x1 = rng.standard_normal((200, 2, 100)) * np.array([2.0, 1.0])[:, None]
    x2 = rng.standard_normal((200, 2, 100)) * np.array([1.0, 2.0])[:, None]
    ep = EpochSet(np.concatenate([x1, x2]), np.repeat([1, 2], 200), 100.0)
    bank = train_csp(ep, r_filters=1)
    assert _cos(bank.pairs[0].spatial, [1, 0]) >= 0.99
    assert _cos(bank.pairs[1].spatial, [0, 1]) >= 0.99


def test_csp_identical_classes_and_complementarity():
    ep = random_epochs(3, n_channels=5, per_class=30)
    same = ep.with_labels(np.tile([1, 2], 30))
    stats = build_train_stats(ep)
    q = whitening_projector(stats.sigma_sum).q
    lam1 = sym_eig(q @ stats.sigma1 @ q.T).values
    lam2 = sym_eig(q @ stats.sigma2 @ q.T).values
    np.testing.assert_allclose(lam1 + lam2[::-1], 1.0, atol=1e-8)
    # identical distributions: ratios cluster at 1/2 as the sample grows
    big = random_epochs(3, n_channels=5, per_class=2000).with_labels(np.tile([1, 2], 2000))
    sb = build_train_stats(big)
    qb = whitening_projector(sb.sigma_sum).q
    np.testing.assert_allclose(sym_eig(qb @ sb.sigma1 @ qb.T).values, 0.5, atol=0.02)
    assert len(train_csp(same).pairs) == 6


def test_csp_rank_guard():
    ep = random_epochs(0, n_channels=3)
    with pytest.raises(StatsError):
        train_csp(ep, r_filters=4)


def test_ccacsp_recovers_autocorrelated_direction():
    rng = np.random.default_rng(9)
    n, t, per = 8, 100, 150
    a = rng.standard_normal(n)
    a /= np.linalg.norm(a)
    b = rng.standard_normal(n)
    b -= (b @ a) * a
    b /= np.linalg.norm(b)
    from sacsp.synth import band_limited_noise
    slow = band_limited_noise(rng, per, t, 10.0, 2.0, 100.0)
    fast = band_limited_noise(rng, per, t, 44.0, 8.0, 100.0)
    noise = rng.standard_normal((2 * per, n, t))
    x = noise.copy()
    x[:per] += 1.5 * a[:, None] * slow[:, None, :]
    x[per:] += 1.5 * a[:, None] * fast[:, None, :]
    # a white-noise variance difference that CSP prefers
    x[:per] += 1.6 * b[:, None] * rng.standard_normal((per, 1, t))
    ep = EpochSet(x, np.repeat([1, 2], per), 100.0)
    cca = train_ccacsp(ep, r_filters=1)
    csp = train_csp(ep, r_filters=1)
    cca_cos = _cos(cca.patterns[:, 0], a)
    csp_cos = _cos(csp.patterns[:, 0], a)
    assert cca_cos >= 0.95
    assert csp_cos < cca_cos - 0.3


def test_sacsp_reduces_to_csp():
    for seed in range(5):
        ep = random_epochs(seed)
        csp = train_csp(ep)
        sac = train_sacsp(ep, SacspConfig(init_kinds=("uniform",), spectral_updates=False))
        for p, q in zip(csp.pairs, sac.pairs[:3]):
            assert _cos(p.spatial, q.spatial) >= 0.999
        assert all(p.iterations == 0 for p in sac.pairs)


def test_sacsp_planted_band(planted_10hz):
    ep, spec = planted_10hz
    bank = train_sacsp(ep)
    for p in bank.pairs:
        assert abs(p.spectral.peak_frequency() - 10.0) <= 1.0
        assert p.spectral.is_valid()
    score = reference_recovery_score(bank, spec)
    assert min(score.pattern_cosines.values()) >= 0.9
    assert max(p.iterations for p in bank.pairs) <= 15


def test_sacsp_traces_monotone_and_selection_dominance(planted_10hz):
    ep, _ = planted_10hz
    cfg = SacspConfig(init_kinds=("uniform", "mu_band", "beta_band", "random"))
    bank = train_sacsp(ep, cfg)
    assert len(bank.trace) == 2 * 4 * 3
    for rec in bank.trace:
        obj = np.array(rec.objectives)
        assert np.all(np.diff(obj) >= -1e-10)
        assert not rec.hit_max_iters
    for c in (1, 2):
        finals = sorted((r.objectives[-1] for r in bank.trace if r.class_id == c), reverse=True)
        chosen = [p for p in bank.class_pairs(c)]
        assert min(p.objective for p in chosen) >= finals[3] - 1e-12


def test_select_candidates_tie_break():
    from sacsp.algorithms import _Candidate
    mk = lambda o, m, r: _Candidate(o, m, r, None, None, None, 0, None)
    cands = [mk(1.0, 1, 0), mk(2.0, 2, 1), mk(2.0, 0, 2), mk(2.0, 0, 1), mk(0.5, 0, 0)]
    picked = select_candidates(cands, 3)
    assert [(c.init_index, c.filter_index) for c in picked] == [(0, 1), (0, 2), (2, 1)]


def test_sacsp_scale_invariance(planted_10hz):
    ep, _ = planted_10hz
    sub = ep.subset(np.r_[0:30, 60:90])
    a = train_sacsp(sub)
    b = train_sacsp(sub.with_data(sub.data * 7.5))
    for p, q in zip(a.pairs, b.pairs):
        assert 1 - _cos(p.spatial, q.spatial) <= 1e-8
        assert 1 - _cos(p.spectral.weights, q.spectral.weights) <= 1e-8


def test_sacsp_deterministic_across_threads(planted_10hz, monkeypatch):
    ep, _ = planted_10hz
    sub = ep.subset(np.r_[0:20, 60:80])
    monkeypatch.setenv("SACSP_THREADS", "1")
    serial = train_sacsp(sub)
    monkeypatch.setenv("SACSP_THREADS", "4")
    threaded = train_sacsp(sub)
    for p, q in zip(serial.pairs, threaded.pairs):
        np.testing.assert_array_equal(p.spatial, q.spatial)
        np.testing.assert_array_equal(p.spectral.weights, q.spectral.weights)


def test_compute_patterns_examples():
    np.testing.assert_allclose(compute_patterns(np.diag([2.0, 1.0]), WhiteningProjector.identity(2)), np.diag([0.5, 1.0]))
    q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((4, 4)))
    np.testing.assert_allclose(compute_patterns(q, WhiteningProjector.identity(4)), q, atol=1e-12)
    with pytest.raises(PatternError):
        compute_patterns(np.zeros((2, 2)), WhiteningProjector.identity(2))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_filter_pattern_duality(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 3 * np.eye(n)
    np.testing.assert_allclose(a.T @ compute_patterns(a, WhiteningProjector.identity(n)), np.eye(n), atol=1e-10)


def test_bank_duality_in_channel_space():
    ep = random_epochs(4, n_channels=7)
    csp = train(ep, "csp")
    np.testing.assert_allclose(csp.spatial @ csp.patterns, np.eye(6), atol=1e-8)
    # each class has its own eigenbasis, so duality holds within a class block
    cca = train(ep, "ccacsp")
    prod = cca.spatial @ cca.patterns
    np.testing.assert_allclose(prod[:3, :3], np.eye(3), atol=1e-8)
    np.testing.assert_allclose(prod[3:, 3:], np.eye(3), atol=1e-8)


def test_sign_convention():
    bank = train_sacsp(random_epochs(6))
    for p in bank.pairs:
        assert p.spatial[np.argmax(np.abs(p.spatial))] > 0


def test_config_validation():
    for bad in (dict(r_filters=0), dict(epsilon=0), dict(max_iters=0), dict(init_kinds=()),
                dict(m_inits=2), dict(whiten_threshold=1.0)):
        with pytest.raises(ValueError):
            SacspConfig(**bad)
    with pytest.raises(ValueError):
        train(random_epochs(0), "spec-csp")
