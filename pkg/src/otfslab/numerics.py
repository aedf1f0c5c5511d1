"""Shared numerical primitives: unitary DFT, Gray-mapped QAM, AWGN, seeded RNG."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SUPPORTED_ORDERS = (4, 16, 64)


def dft(v, inverse: bool = False, axis: int = -1) -> np.ndarray:
    """Unitary DFT (1/sqrt(N) on both directions) along ``axis``.

    The forward kernel is ``exp(-j 2 pi n k / N)``, the inverse ``exp(+j ...)``.
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim == 0 or v.shape[axis] == 0:
        raise ValueError("empty vector")
    if inverse:
        return np.fft.ifft(v, axis=axis, norm="ortho")
    return np.fft.fft(v, axis=axis, norm="ortho")


def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


@dataclass(frozen=True)
class Alphabet:
    """Square Gray-coded QAM constellation with unit mean energy.

    ``points[j]`` carries the label ``bit_labels[j]``, which is the binary
    expansion of ``j`` (MSB first). The first half of the bits selects the
    in-phase level, the second half the quadrature level.
    """

    order: int
    points: np.ndarray = field(repr=False)
    bit_labels: np.ndarray = field(repr=False)

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    def map(self, bits) -> np.ndarray:
        """Map a flat bit array (length multiple of bits_per_symbol) to symbols."""
        return self.points[self.bits_to_indices(bits)]

    def bits_to_indices(self, bits) -> np.ndarray:
        bits = np.asarray(bits, dtype=np.int64)
        k = self.bits_per_symbol
        if bits.shape[-1] % k:
            raise ValueError(f"bit count {bits.shape[-1]} is not a multiple of {k}")
        groups = bits.reshape(*bits.shape[:-1], -1, k)
        weights = 1 << np.arange(k - 1, -1, -1)
        return groups @ weights

    def indices_to_bits(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.int64)
        bits = self.bit_labels[idx]
        return bits.reshape(*idx.shape[:-1], -1) if idx.ndim else bits


def make_alphabet(order: int) -> Alphabet:
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported QAM order {order}; expected one of {SUPPORTED_ORDERS}")
    k = int(np.log2(order))
    side = 1 << (k // 2)
    levels = np.arange(-(side - 1), side, 2, dtype=float)
    # PAM level position of each Gray label: label g sits at position p where gray(p) == g
    pos_of_label = np.empty(side, dtype=np.int64)
    pos_of_label[_gray(np.arange(side))] = np.arange(side)

    j = np.arange(order)
    i_label = j >> (k // 2)
    q_label = j & (side - 1)
    pts = levels[pos_of_label[i_label]] + 1j * levels[pos_of_label[q_label]]
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    labels = ((j[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.int8)
    return Alphabet(order=order, points=pts, bit_labels=labels)


@dataclass(frozen=True)
class SeededRng:
    """Identifies an independent random stream by ``(seed, stream_id...)``.

    Streams with different ids are statistically independent and do not
    depend on the order in which they are created, so Monte-Carlo frames can
    be distributed over workers freely.
    """

    seed: int
    stream_id: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=tuple(self.stream_id))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, *ids: int) -> "SeededRng":
        return SeededRng(self.seed, tuple(self.stream_id) + tuple(int(i) for i in ids))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, SeededRng):
        return rng.generator()
    return np.random.default_rng(rng)


def complex_gaussian(shape, variance: float, rng) -> np.ndarray:
    gen = as_generator(rng)
    scale = np.sqrt(variance / 2.0)
    return scale * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))


def awgn(v, noise_variance: float, rng) -> np.ndarray:
    """Add circular complex Gaussian noise of total variance ``noise_variance``."""
    if noise_variance < 0:
        raise ValueError(f"negative noise variance {noise_variance}")
    v = np.asarray(v, dtype=np.complex128)
    if noise_variance == 0:
        return v.copy()
    return v + complex_gaussian(v.shape, noise_variance, rng)
