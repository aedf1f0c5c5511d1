"""Doubly-dispersive tap channel and its delay-Doppler effective matrix."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .waveforms import otfs_demodulate_grid, otfs_modulate_grid

PRUNE_TOL = 1e-9


@dataclass(frozen=True)
class ChannelTap:
    delay_idx: int
    doppler_idx: int
    gain: complex


@dataclass(frozen=True)
class ChannelProfile:
    taps: tuple[ChannelTap, ...]
    normalize: bool = True

    def __post_init__(self):
        taps = tuple(self.taps)
        if not taps:
            raise ValueError("a channel profile needs at least one tap")
        for t in taps:
            if t.delay_idx < 0:
                raise ValueError(f"negative tap delay {t.delay_idx}")
        if self.normalize:
            energy = sum(abs(t.gain) ** 2 for t in taps)
            if energy == 0:
                raise ValueError("cannot normalize an all-zero channel")
            scale = 1.0 / math.sqrt(energy)
            taps = tuple(ChannelTap(t.delay_idx, t.doppler_idx, complex(t.gain) * scale) for t in taps)
        object.__setattr__(self, "taps", taps)

    @property
    def max_delay(self) -> int:
        return max(t.delay_idx for t in self.taps)

    @property
    def max_doppler(self) -> int:
        return max(abs(t.doppler_idx) for t in self.taps)

    @property
    def n_taps(self) -> int:
        return len(self.taps)

    @classmethod
    def from_dict(cls, doc: dict) -> "ChannelProfile":
        taps = [ChannelTap(int(t["delay"]), int(t["doppler"]),
                           complex(float(t.get("gain_re", 0.0)), float(t.get("gain_im", 0.0))))
                for t in doc["taps"]]
        return cls(tuple(taps), bool(doc.get("normalize", True)))

    def to_dict(self) -> dict:
        return {"taps": [{"delay": t.delay_idx, "doppler": t.doppler_idx,
                          "gain_re": complex(t.gain).real, "gain_im": complex(t.gain).imag}
                         for t in self.taps],
                "normalize": self.normalize}


def identity_profile() -> ChannelProfile:
    return ChannelProfile((ChannelTap(0, 0, 1.0),), normalize=False)


# Equal power taps; the phases only keep the frequency response away from exact nulls.
_DEFAULT_PHASES = (0.0, 0.6 * math.pi, -0.35 * math.pi, 0.85 * math.pi)


def default_profile(doppler: bool = True) -> ChannelProfile:
    """4 equal-power taps, delays 0..3, Doppler (0, 1, -1, 2) (or all zero)."""
    dops = (0, 1, -1, 2) if doppler else (0, 0, 0, 0)
    taps = tuple(ChannelTap(l, k, complex(np.exp(1j * ph)))
                 for l, k, ph in zip(range(4), dops, _DEFAULT_PHASES))
    return ChannelProfile(taps, normalize=True)


def load_profile(ref) -> ChannelProfile:
    """Resolve a profile from a dict, the names ``default`` / ``static`` / ``identity``, or a JSON path."""
    if isinstance(ref, ChannelProfile):
        return ref
    if isinstance(ref, dict):
        return ChannelProfile.from_dict(ref)
    if ref == "default":
        return default_profile()
    if ref == "static":
        return default_profile(doppler=False)
    if ref == "identity":
        return identity_profile()
    return ChannelProfile.from_dict(json.loads(Path(ref).read_text()))


def apply_channel(s, profile: ChannelProfile, frame_len: int, cp_len: int | None = None) -> np.ndarray:
    """``y[n] = sum_i h_i s[n - l_i] exp(j 2 pi k_i (n - l_i) / frame_len)``.

    ``n`` indexes the stream as given (CP included); samples before the
    stream start are zero. ``frame_len`` fixes the Doppler resolution: a
    Doppler index of one rotates by one full cycle per ``frame_len`` samples.
    Works on the last axis of batched input.
    """
    s = np.asarray(s, dtype=np.complex128)
    if cp_len is not None:
        for t in profile.taps:
            if t.delay_idx > cp_len:
                raise ValueError(f"uncovered delay: tap delay {t.delay_idx} exceeds CP length {cp_len}")
    length = s.shape[-1]
    n = np.arange(length)
    y = np.zeros_like(s)
    for t in profile.taps:
        l = t.delay_idx
        if l >= length:
            continue
        ramp = np.exp(2j * np.pi * t.doppler_idx * (n[l:] - l) / frame_len)
        y[..., l:] += t.gain * s[..., : length - l] * ramp
    return y


@dataclass(frozen=True)
class EffectiveMatrix:
    """Sparse ``MN x MN`` map from transmitted to received vectorised DD frames."""

    matrix: sp.csr_matrix
    m: int
    n: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rows(self) -> np.ndarray:
        return self.matrix.tocoo().row

    def edges(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(row d, column c, H[d, c]) for every nonzero, sorted by row then column."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def row_index(self) -> list[np.ndarray]:
        csr = self.matrix
        return [csr.indices[csr.indptr[d]:csr.indptr[d + 1]] for d in range(self.dim)]

    def col_index(self) -> list[np.ndarray]:
        csc = self.matrix.tocsc()
        return [csc.indices[csc.indptr[c]:csc.indptr[c + 1]] for c in range(self.dim)]

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.matrix.indptr)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, x):
        return self.matrix @ x


@lru_cache(maxsize=512)
def _unit_tap_response(delay: int, doppler: int, m: int, n: int, cp_len: int) -> sp.csr_matrix:
    """Probe the OTFS pipeline with every DD basis frame through a single unit tap."""
    mn = m * n
    basis = np.eye(mn, dtype=np.complex128).reshape(mn, m, n)
    tx = otfs_modulate_grid(basis, cp_len)
    tap = ChannelProfile((ChannelTap(delay, doppler, 1.0),), normalize=False)
    rx = apply_channel(tx, tap, mn, cp_len)
    cols = otfs_demodulate_grid(rx, m, n, cp_len).reshape(mn, mn)  # row = input basis index
    dense = cols.T
    dense[np.abs(dense) < PRUNE_TOL] = 0
    mat = sp.csr_matrix(dense)
    mat.sort_indices()
    return mat


def unit_tap_response(delay: int, doppler: int, m: int, n: int, cp_len: int) -> sp.csr_matrix:
    return _unit_tap_response(int(delay), int(doppler), m, n, int(cp_len)).copy()


def build_effective_matrix(profile: ChannelProfile, m: int, n: int, cp) -> EffectiveMatrix:
    """Effective DD matrix defined by probing modulate -> channel -> demodulate.

    The pipeline is linear in the tap gains, so each distinct unit tap is
    probed once (and cached) and the gains are combined afterwards.
    """
    cp_len = cp.cp_len if hasattr(cp, "cp_len") else int(cp)
    for t in profile.taps:
        if t.delay_idx > cp_len:
            raise ValueError(f"uncovered delay: tap delay {t.delay_idx} exceeds CP length {cp_len}")
    mn = m * n
    total = sp.csr_matrix((mn, mn), dtype=np.complex128)
    for t in profile.taps:
        total = total + complex(t.gain) * _unit_tap_response(t.delay_idx, t.doppler_idx, m, n, cp_len)
    total = total.tocsr()
    total.data[np.abs(total.data) < PRUNE_TOL] = 0
    total.eliminate_zeros()
    total.sort_indices()
    return EffectiveMatrix(total, m, n)


def noise_variance_for_snr(snr_db: float, signal_power: float = 1.0) -> float:
    if signal_power <= 0:
        raise ValueError("signal power must be positive")
    return signal_power / 10.0 ** (snr_db / 10.0)


def ofdm_symbol_gains(profile: ChannelProfile, m: int, cp_len: int, n_symbols: int,
                      frame_len: int | None = None) -> np.ndarray:
    """Time-averaged per-subcarrier gain of each OFDM symbol, shape ``(n_symbols, m)``.

    This is the diagonal of the per-symbol frequency-domain channel matrix:
    a one-tap equalizer sees each tap's Doppler ramp averaged over the
    symbol's FFT window and nothing of the inter-carrier leakage.
    """
    if frame_len is None:
        frame_len = m * n_symbols
    blk = m + cp_len
    p = np.arange(m)
    sub = np.arange(m)
    out = np.zeros((n_symbols, m), dtype=np.complex128)
    for j in range(n_symbols):
        start = j * blk + cp_len
        for t in profile.taps:
            avg = np.mean(np.exp(2j * np.pi * t.doppler_idx * (start + p - t.delay_idx) / frame_len))
            out[j] += t.gain * avg * np.exp(-2j * np.pi * sub * t.delay_idx / m)
    return out
