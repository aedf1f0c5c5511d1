"""OTFS and OFDM modulators / demodulators.

Grid conventions
----------------
* Delay-Doppler grids are stored as ``(M, N)`` arrays indexed ``[l, k]``
  (delay bin ``l``, Doppler bin ``k``).
* Time-frequency grids are ``(N, M)`` arrays indexed ``[n, m]``
  (time slot ``n``, subcarrier ``m``).
* Vectorised DD frames use C order, i.e. cell ``(l, k)`` is entry ``l * N + k``.

All transforms are unitary. The ``*_grid`` helpers accept arbitrary leading
batch dimensions and are what the Monte-Carlo harness uses; the frame-typed
functions wrap them for single frames.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .numerics import Alphabet


@dataclass(frozen=True)
class DelayDopplerFrame:
    grid: np.ndarray

    def __post_init__(self):
        g = np.array(self.grid, dtype=np.complex128)
        if g.ndim != 2 or min(g.shape) < 1:
            raise ValueError(f"delay-Doppler grid must be a non-empty 2-D array, got shape {g.shape}")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    @property
    def m_delay(self) -> int:
        return self.grid.shape[0]

    @property
    def n_doppler(self) -> int:
        return self.grid.shape[1]


@dataclass(frozen=True)
class TimeFrequencyFrame:
    grid: np.ndarray

    def __post_init__(self):
        g = np.array(self.grid, dtype=np.complex128)
        if g.ndim != 2 or min(g.shape) < 1:
            raise ValueError(f"time-frequency grid must be a non-empty 2-D array, got shape {g.shape}")
        g.setflags(write=False)
        object.__setattr__(self, "grid", g)

    @property
    def n_time(self) -> int:
        return self.grid.shape[0]

    @property
    def m_freq(self) -> int:
        return self.grid.shape[1]


@dataclass(frozen=True)
class CpConfig:
    cp_len: int = 0
    scope: Literal["per-ofdm-symbol", "per-otfs-frame"] = "per-otfs-frame"

    def __post_init__(self):
        if self.cp_len < 0:
            raise ValueError("cp_len must be >= 0")
        if self.scope not in ("per-ofdm-symbol", "per-otfs-frame"):
            raise ValueError(f"unknown CP scope {self.scope!r}")


def default_cp_len(waveform: str, m: int, max_delay: int = 0) -> int:
    """CP length used when a config does not set one.

    OFDM gets M/8 per symbol, OTFS one prefix of the maximum tap delay; both
    are raised to cover ``max_delay`` so the channel stays circular.
    """
    if waveform == "ofdm":
        return max(math.ceil(m / 8), max_delay)
    return max_delay


# ---------------------------------------------------------------------------
# array-level transforms (batched over leading axes)


def isfft_grid(x: np.ndarray) -> np.ndarray:
    """DD ``(..., M, N)`` -> TF ``(..., N, M)``."""
    tf = np.fft.fft(np.fft.ifft(x, axis=-1, norm="ortho"), axis=-2, norm="ortho")
    return np.swapaxes(tf, -1, -2)


def sfft_grid(X: np.ndarray) -> np.ndarray:
    """TF ``(..., N, M)`` -> DD ``(..., M, N)``."""
    dd = np.swapaxes(X, -1, -2)
    return np.fft.ifft(np.fft.fft(dd, axis=-1, norm="ortho"), axis=-2, norm="ortho")


def heisenberg_grid(X: np.ndarray) -> np.ndarray:
    """TF ``(..., N, M)`` -> time samples ``(..., N*M)``; one M-point IDFT per slot."""
    s = np.fft.ifft(X, axis=-1, norm="ortho")
    return s.reshape(*s.shape[:-2], -1)


def wigner_grid(s: np.ndarray, n: int, m: int) -> np.ndarray:
    if s.shape[-1] != n * m:
        raise ValueError(f"expected {n * m} samples, got {s.shape[-1]}")
    return np.fft.fft(s.reshape(*s.shape[:-1], n, m), axis=-1, norm="ortho")


def add_cp(s: np.ndarray, cp_len: int) -> np.ndarray:
    if cp_len >= s.shape[-1] and cp_len > 0:
        raise ValueError(f"cp_len {cp_len} must be shorter than the block ({s.shape[-1]})")
    if cp_len == 0:
        return s.copy()
    return np.concatenate([s[..., -cp_len:], s], axis=-1)


def otfs_modulate_grid(x: np.ndarray, cp_len: int) -> np.ndarray:
    return add_cp(heisenberg_grid(isfft_grid(x)), cp_len)


def otfs_demodulate_grid(r: np.ndarray, m: int, n: int, cp_len: int) -> np.ndarray:
    if r.shape[-1] != m * n + cp_len:
        raise ValueError(f"expected {m * n + cp_len} samples, got {r.shape[-1]}")
    return sfft_grid(wigner_grid(r[..., cp_len:], n, m))


def ofdm_modulate_grid(X: np.ndarray, cp_len: int) -> np.ndarray:
    """Subcarrier symbols ``(..., N_sym, M)`` -> serial stream ``(..., N_sym*(M+cp))``."""
    s = add_cp(np.fft.ifft(X, axis=-1, norm="ortho"), cp_len)
    return s.reshape(*s.shape[:-2], -1)


def ofdm_demodulate_grid(r: np.ndarray, m: int, cp_len: int) -> np.ndarray:
    blk = m + cp_len
    if r.shape[-1] % blk:
        raise ValueError(f"stream length {r.shape[-1]} is not a multiple of {blk}")
    r = r.reshape(*r.shape[:-1], -1, blk)[..., cp_len:]
    return np.fft.fft(r, axis=-1, norm="ortho")


# ---------------------------------------------------------------------------
# frame-typed API


def isfft(dd: DelayDopplerFrame) -> TimeFrequencyFrame:
    return TimeFrequencyFrame(isfft_grid(dd.grid))


def sfft(tf: TimeFrequencyFrame) -> DelayDopplerFrame:
    return DelayDopplerFrame(sfft_grid(tf.grid))


def heisenberg(tf: TimeFrequencyFrame) -> np.ndarray:
    return heisenberg_grid(tf.grid)


def wigner(s, n: int, m: int) -> TimeFrequencyFrame:
    return TimeFrequencyFrame(wigner_grid(np.asarray(s, dtype=np.complex128), n, m))


def _check_scope(cp: CpConfig, expected: str):
    if cp.scope != expected:
        raise ValueError(f"CP scope must be {expected!r}, got {cp.scope!r}")


def otfs_modulate(dd: DelayDopplerFrame, cp: CpConfig) -> np.ndarray:
    _check_scope(cp, "per-otfs-frame")
    return otfs_modulate_grid(dd.grid, cp.cp_len)


def otfs_demodulate(r, cp: CpConfig, m: int, n: int) -> DelayDopplerFrame:
    _check_scope(cp, "per-otfs-frame")
    return DelayDopplerFrame(otfs_demodulate_grid(np.asarray(r, dtype=np.complex128), m, n, cp.cp_len))


def ofdm_modulate(X, cp: CpConfig) -> np.ndarray:
    """One OFDM symbol: unitary IDFT of ``X`` plus a cyclic prefix."""
    _check_scope(cp, "per-ofdm-symbol")
    X = np.asarray(X, dtype=np.complex128)
    return add_cp(np.fft.ifft(X, norm="ortho"), cp.cp_len)


def ofdm_demodulate(r, cp: CpConfig, n_sc: int | None = None) -> np.ndarray:
    _check_scope(cp, "per-ofdm-symbol")
    r = np.asarray(r, dtype=np.complex128)
    if n_sc is not None and r.shape[-1] != n_sc + cp.cp_len:
        raise ValueError(f"expected {n_sc + cp.cp_len} samples, got {r.shape[-1]}")
    if r.shape[-1] <= cp.cp_len:
        raise ValueError("received block is not longer than the CP")
    return np.fft.fft(r[cp.cp_len:], norm="ortho")


# ---------------------------------------------------------------------------
# embedded-pilot frames


@dataclass(frozen=True)
class FrameLayout:
    """Embedded pilot, zero guard rectangle and the remaining data cells.

    The guard is the rectangle ``|l - l_p| <= guard_delay``,
    ``|k - k_p| <= guard_doppler`` (cyclic). The receiver searches taps in
    delay offsets ``[0, max_delay]`` and Doppler offsets
    ``[-max_doppler, max_doppler]`` from the pilot; data cannot leak into
    that window as long as ``guard_delay >= max_delay`` and
    ``guard_doppler >= 2 * max_doppler``.
    """

    m: int
    n: int
    pilot_pos: tuple[int, int]
    pilot_amplitude: float
    guard_delay: int
    guard_doppler: int
    max_delay: int
    max_doppler: int
    data_mask: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, m: int, n: int, guard_delay: int, guard_doppler: int, *,
              pilot_pos: tuple[int, int] | None = None, pilot_amplitude: float | None = None,
              max_delay: int | None = None, max_doppler: int | None = None) -> "FrameLayout":
        if pilot_pos is None:
            pilot_pos = (m // 2, n // 2)
        if pilot_amplitude is None:
            pilot_amplitude = math.sqrt(10.0)
        if pilot_amplitude <= 0:
            raise ValueError("pilot amplitude must be positive")
        lp, kp = pilot_pos
        if not (0 <= lp < m and 0 <= kp < n):
            raise ValueError(f"pilot position {pilot_pos} outside the {m}x{n} grid")
        if 2 * guard_delay + 1 > m or 2 * guard_doppler + 1 > n:
            raise ValueError("guard region does not fit in the grid")
        mask = np.ones((m, n), dtype=bool)
        rows = [(lp + d) % m for d in range(-guard_delay, guard_delay + 1)]
        cols = [(kp + d) % n for d in range(-guard_doppler, guard_doppler + 1)]
        mask[np.ix_(rows, cols)] = False
        mask.setflags(write=False)
        return cls(m, n, (lp, kp), float(pilot_amplitude), guard_delay, guard_doppler,
                   guard_delay if max_delay is None else max_delay,
                   guard_doppler // 2 if max_doppler is None else max_doppler, mask)

    @classmethod
    def for_channel(cls, m: int, n: int, max_delay: int, max_doppler: int, **kw) -> "FrameLayout":
        """Smallest guard that keeps data out of the estimation window."""
        return cls.build(m, n, max_delay, 2 * max_doppler, max_delay=max_delay,
                         max_doppler=max_doppler, **kw)

    @property
    def n_data(self) -> int:
        return int(self.data_mask.sum())

    @property
    def pilot_index(self) -> int:
        return self.pilot_pos[0] * self.n + self.pilot_pos[1]

    @property
    def data_indices(self) -> np.ndarray:
        return np.flatnonzero(self.data_mask.ravel())


def build_pilot_frame(data_syms, layout: FrameLayout, alphabet: Alphabet | None = None) -> DelayDopplerFrame:
    """Place data in delay-major order, the pilot at ``pilot_pos``, zeros in the guard."""
    data_syms = np.asarray(data_syms, dtype=np.complex128).ravel()
    if data_syms.size != layout.n_data:
        raise ValueError(f"expected {layout.n_data} data symbols, got {data_syms.size}")
    return DelayDopplerFrame(_pilot_grid(data_syms, layout))


def _pilot_grid(data_syms: np.ndarray, layout: FrameLayout) -> np.ndarray:
    batch = data_syms.shape[:-1]
    flat = np.zeros(batch + (layout.m * layout.n,), dtype=np.complex128)
    flat[..., layout.data_indices] = data_syms
    flat[..., layout.pilot_index] = layout.pilot_amplitude
    return flat.reshape(batch + (layout.m, layout.n))


def extract_data(dd, layout: FrameLayout) -> np.ndarray:
    grid = dd.grid if isinstance(dd, DelayDopplerFrame) else np.asarray(dd)
    return grid.reshape(*grid.shape[:-2], -1)[..., layout.data_indices]
