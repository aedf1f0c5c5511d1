import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from otfslab.numerics import SeededRng, awgn, complex_gaussian, dft, make_alphabet


def naive_dft(v, inverse=False):
    n = len(v)
    sign = 1 if inverse else -1
    k = np.arange(n)
    W = np.exp(sign * 2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    return W @ v


complex_vec = arrays(np.complex128, st.integers(1, 64), elements=st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                                                                     allow_infinity=False))


class TestDft:
    def test_inverse_impulse_is_flat(self):
        assert np.allclose(dft([1, 0, 0, 0], inverse=True), [0.5, 0.5, 0.5, 0.5])

    def test_zeros(self):
        assert np.array_equal(dft(np.zeros(8)), np.zeros(8))

    def test_matches_direct_sum(self):
        v = np.random.default_rng(0).standard_normal(8) + 1j * np.random.default_rng(1).standard_normal(8)
        assert np.allclose(dft(v), naive_dft(v), atol=1e-12)
        assert np.allclose(dft(v, inverse=True), naive_dft(v, inverse=True), atol=1e-12)
        assert np.isclose(np.linalg.norm(dft(v)) ** 2, np.linalg.norm(v) ** 2)

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            dft(np.array([]))

    @given(complex_vec)
    def test_unitary(self, v):
        e = np.linalg.norm(v) ** 2
        assert abs(np.linalg.norm(dft(v)) ** 2 - e) <= 1e-10 * max(e, 1.0)

    @given(complex_vec)
    def test_round_trip(self, v):
        assert np.allclose(dft(dft(v), inverse=True), v, atol=1e-9 * max(1.0, np.abs(v).max()))


class TestAlphabet:
    def test_qpsk_points(self):
        a = make_alphabet(4)
        expect = {complex(i, q) / np.sqrt(2) for i in (-1, 1) for q in (-1, 1)}
        assert {complex(round(p.real, 12), round(p.imag, 12)) for p in a.points} == \
            {complex(round(p.real, 12), round(p.imag, 12)) for p in expect}

    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_unit_energy(self, order):
        a = make_alphabet(order)
        # independent lattice: odd integers scaled by the average lattice energy
        side = int(np.sqrt(order))
        lvl = np.arange(-side + 1, side, 2)
        lattice = (lvl[:, None] + 1j * lvl[None, :]).ravel()
        assert abs(np.mean(np.abs(a.points) ** 2) - 1) < 1e-12
        assert np.allclose(np.sort_complex(a.points), np.sort_complex(lattice / np.sqrt(np.mean(np.abs(lattice) ** 2))))

    @pytest.mark.parametrize("order", [5, 8, 2, 0, 256])
    def test_bad_order(self, order):
        with pytest.raises(ValueError):
            make_alphabet(order)

    @pytest.mark.parametrize("order", [4, 16, 64])
    def test_gray_neighbours_differ_in_one_bit(self, order):
        a = make_alphabet(order)
        d = np.abs(a.points[:, None] - a.points[None, :])
        dmin = d[d > 1e-9].min()
        for i, j in zip(*np.nonzero(np.isclose(d, dmin))):
            assert np.sum(a.bit_labels[i] != a.bit_labels[j]) == 1

    @given(st.sampled_from([4, 16, 64]), st.integers(0, 2**32 - 1))
    def test_bits_round_trip(self, order, seed):
        a = make_alphabet(order)
        bits = np.random.default_rng(seed).integers(0, 2, 10 * a.bits_per_symbol)
        idx = a.bits_to_indices(bits)
        assert np.array_equal(a.indices_to_bits(idx), bits)
        assert np.allclose(a.map(bits), a.points[idx])


class TestRandom:
    def test_zero_variance_is_identity(self):
        v = np.arange(5) + 1j
        assert np.array_equal(awgn(v, 0.0, SeededRng(1)), v)

    def test_variance(self):
        w = complex_gaussian(10**6, 1.0, SeededRng(7))
        assert 0.99 <= np.var(w) <= 1.01

    def test_negative_variance(self):
        with pytest.raises(ValueError):
            awgn(np.zeros(3), -1.0, SeededRng(0))

    def test_determinism(self):
        a = awgn(np.zeros(16), 0.5, SeededRng(3, (1, 2)))
        b = awgn(np.zeros(16), 0.5, SeededRng(3, (1, 2)))
        assert np.array_equal(a, b)

    def test_streams_are_independent(self):
        a = SeededRng(3, (0, 1)).generator().standard_normal(1000)
        b = SeededRng(3, (0, 2)).generator().standard_normal(1000)
        assert not np.array_equal(a, b)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.15

    def test_child_matches_explicit_stream(self):
        a = SeededRng(9).child(4, 5).generator().integers(0, 2**31, 8)
        b = SeededRng(9, (4, 5)).generator().integers(0, 2**31, 8)
        assert np.array_equal(a, b)
