import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from otfslab.channel import (ChannelProfile, ChannelTap, apply_channel, build_effective_matrix, default_profile,
                             identity_profile)
from otfslab.numerics import complex_gaussian, make_alphabet
from otfslab.receiver import (MpConfig, demap, estimate_channel, hard_decision, map_oracle, mp_detect,
                              mp_detect_batch, ofdm_equalize)
from otfslab.waveforms import FrameLayout, build_pilot_frame, otfs_demodulate_grid, otfs_modulate_grid

QPSK = make_alphabet(4)


def naive_mp(y, H, alphabet, cfg):
    """Edge-by-edge loop version of the same damped Gaussian MP."""
    D, C = H.shape
    a = alphabet.points
    Q = a.size
    edges = [(d, c) for d in range(D) for c in range(C) if H[d, c] != 0]
    p = {e: np.full(Q, 1 / Q) for e in edges}
    by_row = {d: [e for e in edges if e[0] == d] for d in range(D)}
    by_col = {c: [e for e in edges if e[1] == c] for c in range(C)}
    for _ in range(cfg.max_iter):
        mu, var = {}, {}
        for d, c in edges:
            m_, v_ = 0, cfg.noise_variance
            for (_, e) in by_row[d]:
                if e == c:
                    continue
                h = H[d, e]
                ex, ex2 = p[(d, e)] @ a, p[(d, e)] @ np.abs(a) ** 2
                m_ += h * ex
                v_ += abs(h) ** 2 * (ex2 - abs(ex) ** 2)
            mu[(d, c)], var[(d, c)] = m_, v_
        ll = {e: -np.abs(y[e[0]] - mu[e] - H[e] * a) ** 2 / var[e] for e in edges}
        new = {}
        for d, c in edges:
            s = sum(ll[e] for e in by_col[c] if e[0] != d) + np.zeros(Q)
            w = np.exp(s - s.max())
            new[(d, c)] = cfg.damping * w / w.sum() + (1 - cfg.damping) * p[(d, c)]
        delta = max(np.abs(new[e] - p[e]).max() for e in edges)
        p = new
        final = {c: sum(ll[e] for e in by_col[c]) for c in range(C)}
        if delta < cfg.conv_eps:
            break
    return np.array([int(np.argmax(final[c])) for c in range(C)])


def two_tap_matrix(rng, m=2, n=2):
    while True:
        t = [(int(rng.integers(0, 2)), int(rng.integers(-1, 2))) for _ in range(2)]
        if t[0] != t[1] and all(abs(k) <= n // 2 for _, k in t):
            break
    g = complex_gaussian(2, 0.5, rng)
    prof = ChannelProfile(tuple(ChannelTap(l, k, g[i]) for i, (l, k) in enumerate(t)))
    return build_effective_matrix(prof, m, n, 1)


class TestEstimateChannel:
    m = n = 16

    def run(self, prof, noise_var=0.0, seed=0):
        lay = FrameLayout.for_channel(self.m, self.n, 3, 2)
        rng = np.random.default_rng(seed)
        data = QPSK.points[rng.integers(0, 4, lay.n_data)]
        s = otfs_modulate_grid(build_pilot_frame(data, lay).grid, 3)
        r = apply_channel(s, prof, self.m * self.n, 3) + complex_gaussian(s.shape, noise_var, rng)
        return estimate_channel(otfs_demodulate_grid(r, self.m, self.n, 3), lay, noise_var, 3)

    def test_single_tap(self):
        est = self.run(ChannelProfile((ChannelTap(1, 0, 0.8),), normalize=False))
        assert len(est.taps) == 1
        assert (est.taps[0].delay_idx, est.taps[0].doppler_idx) == (1, 0)
        assert abs(est.taps[0].gain - 0.8) < 1e-9

    def test_identity(self):
        est = self.run(identity_profile())
        assert [(t.delay_idx, t.doppler_idx) for t in est.taps] == [(0, 0)]
        assert abs(est.taps[0].gain - 1) < 1e-9

    def test_default_profile(self):
        prof = default_profile()
        est = self.run(prof)
        got = {(t.delay_idx, t.doppler_idx): t.gain for t in est.taps}
        want = {(t.delay_idx, t.doppler_idx): t.gain for t in prof.taps}
        assert got.keys() == want.keys()
        assert max(abs(got[k] - want[k]) for k in want) < 1e-9

    def test_pure_noise(self):
        lay = FrameLayout.for_channel(8, 8, 1, 1)
        noise = complex_gaussian((8, 8), 1e-4, np.random.default_rng(1))
        assert estimate_channel(noise, lay, 1.0, 1).taps == ()

    def test_taps_inside_window(self):
        est = self.run(default_profile(), noise_var=0.05, seed=3)
        for t in est.taps:
            assert 0 <= t.delay_idx <= 3 and abs(t.doppler_idx) <= 2


class TestMp:
    def test_identity_one_iteration(self):
        x_idx = np.array([0, 1, 2, 3, 1, 2])
        y = QPSK.points[x_idx]
        res = mp_detect_batch(y, np.eye(6), QPSK, MpConfig(noise_variance=1e-3))
        assert np.array_equal(res.indices, x_idx)
        assert res.iterations == 1 and res.converged

    def test_noiseless_two_tap(self):
        prof = ChannelProfile((ChannelTap(0, 0, 1.0), ChannelTap(1, 1, 0.4)))
        H = build_effective_matrix(prof, 2, 2, 1)
        for idx in itertools.product(range(4), repeat=4):
            x = QPSK.points[list(idx)]
            sym, _, _ = mp_detect(H @ x, H, QPSK, MpConfig(noise_variance=1e-3))
            assert np.allclose(sym, x)

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_loop_implementation(self, seed):
        rng = np.random.default_rng(seed)
        H = build_effective_matrix(default_profile(), 4, 4, 3).toarray()
        x_idx = rng.integers(0, 4, 16)
        y = H @ QPSK.points[x_idx] + complex_gaussian(16, 0.2, rng)
        cfg = MpConfig(noise_variance=0.2, max_iter=12)
        assert np.array_equal(mp_detect_batch(y, H, QPSK, cfg).indices, naive_mp(y, H, QPSK, cfg))

    def test_batch_equals_single(self):
        rng = np.random.default_rng(9)
        H = build_effective_matrix(default_profile(), 4, 4, 3)
        Y = np.stack([H @ QPSK.points[rng.integers(0, 4, 16)] + complex_gaussian(16, 0.3, rng) for _ in range(5)])
        cfg = MpConfig(noise_variance=0.3)
        batch = mp_detect_batch(Y, H, QPSK, cfg)
        for i in range(5):
            single = mp_detect_batch(Y[i], H, QPSK, cfg)
            assert np.array_equal(batch.indices[i], single.indices)
            assert batch.iterations[i] == single.iterations

    @given(st.integers(1, 8), st.integers(0, 10**6))
    @settings(max_examples=15, deadline=None)
    def test_pmfs_are_distributions(self, iters, seed):
        rng = np.random.default_rng(seed)
        H = build_effective_matrix(default_profile(), 4, 4, 3)
        y = H @ QPSK.points[rng.integers(0, 4, 16)] + complex_gaussian(16, 0.5, rng)
        res = mp_detect_batch(y, H, QPSK, MpConfig(noise_variance=0.5, max_iter=iters, conv_eps=0.0),
                              keep_state=True)
        p = res.state.pmf
        assert np.all(p >= 0)
        assert np.allclose(p.sum(axis=-1), 1, atol=1e-9)

    def test_columns_subset(self):
        H = np.eye(4)
        y = QPSK.points[[0, 1, 2, 3]]
        res = mp_detect_batch(y, H, QPSK, MpConfig(noise_variance=0.01), columns=[1, 3])
        assert np.array_equal(res.indices, [1, 3])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MpConfig(damping=0.0)
        with pytest.raises(ValueError):
            MpConfig(noise_variance=0.0)
        with pytest.raises(ValueError):
            MpConfig(max_iter=0)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            mp_detect_batch(np.zeros(3), np.eye(4), QPSK, MpConfig())


class TestMapOracle:
    def test_identity(self):
        x = QPSK.points[[3, 0, 2]]
        assert np.allclose(map_oracle(x, np.eye(3), QPSK), x)

    def test_tie_goes_to_lowest_index(self):
        # zero matrix: every candidate has the same cost
        assert np.allclose(map_oracle(np.zeros(2), np.zeros((2, 2)), QPSK), QPSK.points[[0, 0]])

    def test_matches_least_squares_enumeration(self):
        rng = np.random.default_rng(2)
        H = two_tap_matrix(rng).toarray()
        y = H @ QPSK.points[rng.integers(0, 4, 4)] + complex_gaussian(4, 0.1, rng)
        best = min(itertools.product(range(4), repeat=4),
                   key=lambda c: np.linalg.norm(y - H @ QPSK.points[list(c)]))
        assert np.allclose(map_oracle(y, H, QPSK), QPSK.points[list(best)])

    def test_budget(self):
        with pytest.raises(ValueError, match="too large"):
            map_oracle(np.zeros(16), np.eye(16), QPSK, max_candidates=1000)


class TestOneTap:
    def test_unit(self):
        Y = np.arange(4) + 1j
        assert np.allclose(ofdm_equalize(Y, np.ones(4)), Y)

    def test_scalar_gain(self):
        X = np.arange(4) + 1j
        assert np.allclose(ofdm_equalize(2 * X, np.full(4, 2.0)), X)

    def test_random_round_trip(self):
        rng = np.random.default_rng(0)
        X = complex_gaussian(64, 1.0, rng)
        Hf = complex_gaussian(64, 1.0, rng) + 0.1
        assert np.allclose(ofdm_equalize(Hf * X, Hf), X, atol=1e-10)

    def test_singular(self):
        with pytest.raises(ZeroDivisionError, match="singular subcarrier"):
            ofdm_equalize(np.ones(3), np.array([1.0, 0.0, 1.0]))


class TestDecisions:
    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_points_map_to_themselves(self, order):
        a = make_alphabet(order)
        assert np.array_equal(hard_decision(a.points, a), np.arange(order))

    def test_small_perturbation(self):
        assert np.array_equal(hard_decision(QPSK.points + 1e-6, QPSK), np.arange(4))

    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_regions_partition(self, order):
        a = make_alphabet(order)
        z = complex_gaussian(5000, 2.0, np.random.default_rng(order))
        idx = hard_decision(z, a)
        d = np.abs(z[:, None] - a.points[None, :])
        assert np.allclose(d[np.arange(z.size), idx], d.min(axis=1))

    def test_demap_gray_bits(self):
        bits = np.random.default_rng(1).integers(0, 2, 64)
        a = make_alphabet(16)
        assert np.array_equal(demap(a.map(bits), a), bits)
