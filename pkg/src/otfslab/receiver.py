"""Delay-Doppler receiver: pilot channel estimation, MP detection, MAP oracle, OFDM one-tap."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .channel import ChannelProfile, ChannelTap, EffectiveMatrix, unit_tap_response
from .numerics import Alphabet
from .waveforms import DelayDopplerFrame, FrameLayout


@dataclass(frozen=True)
class EstimatedChannel:
    taps: tuple[ChannelTap, ...]
    threshold_used: float
    pilot_snr_est: float

    def profile(self) -> ChannelProfile | None:
        if not self.taps:
            return None
        return ChannelProfile(self.taps, normalize=False)


def estimate_channel(dd_rx, layout: FrameLayout, noise_variance: float, cp_len: int,
                     threshold: float | None = None) -> EstimatedChannel:
    """Threshold the received pilot neighbourhood into delay-Doppler taps.

    Cells in the search window whose magnitude exceeds ``threshold``
    (default ``3 sqrt(noise_variance)``, never below ``1e-8`` times the
    pilot amplitude so that round-off is not mistaken for a path) become
    taps. Each gain is de-rotated by the phase the modem imposes on a unit
    tap at that offset, read off the probed single-tap response.
    """
    grid = dd_rx.grid if isinstance(dd_rx, DelayDopplerFrame) else np.asarray(dd_rx)
    m, n = layout.m, layout.n
    if threshold is None:
        threshold = 3.0 * math.sqrt(max(noise_variance, 0.0))
    threshold = max(threshold, 1e-8 * layout.pilot_amplitude)
    lp, kp = layout.pilot_pos
    taps = []
    for dl in range(layout.max_delay + 1):
        for dk in range(-layout.max_doppler, layout.max_doppler + 1):
            row_l, row_k = (lp + dl) % m, (kp + dk) % n
            val = grid[row_l, row_k]
            if abs(val) <= threshold:
                continue
            probe = unit_tap_response(dl, dk, m, n, cp_len)
            phase = probe[row_l * n + row_k, layout.pilot_index]
            taps.append(ChannelTap(dl, dk, complex(val / (layout.pilot_amplitude * phase))))
    energy = sum(abs(t.gain) ** 2 for t in taps)
    snr = math.inf if noise_variance <= 0 else layout.pilot_amplitude**2 * energy / noise_variance
    return EstimatedChannel(tuple(taps), float(threshold), float(snr))


# ---------------------------------------------------------------------------
# message passing


@dataclass(frozen=True)
class MpConfig:
    damping: float = 0.6
    max_iter: int = 30
    conv_eps: float = 1e-5
    noise_variance: float = 1.0

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValueError(f"damping must be in (0, 1], got {self.damping}")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.noise_variance <= 0:
            raise ValueError("MP needs a positive noise variance")


@dataclass
class BeliefState:
    """Per-edge messages; edge ``e`` joins observation ``rows[e]`` and variable ``cols[e]``."""

    rows: np.ndarray
    cols: np.ndarray
    pmf: np.ndarray        # (E, B, Q)
    means: np.ndarray      # (E, B)
    variances: np.ndarray  # (E, B)
    iteration: np.ndarray  # (B,)


@dataclass
class MpResult:
    symbols: np.ndarray
    indices: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    state: BeliefState | None = None


def _as_csr(H) -> sp.csr_matrix:
    if isinstance(H, EffectiveMatrix):
        return H.matrix
    if sp.issparse(H):
        return H.tocsr()
    return sp.csr_matrix(np.asarray(H, dtype=np.complex128))


def mp_detect_batch(y, H, alphabet: Alphabet, cfg: MpConfig, columns=None,
                    keep_state: bool = False) -> MpResult:
    """Damped Gaussian-approximation message passing over a batch of frames.

    ``y`` is ``(B, D)`` (or ``(D,)``); all frames share the sparse matrix
    ``H`` (``D x C``). ``columns`` restricts detection to a subset of
    variables (the others must already be removed from ``y``). Each frame
    stops independently once its largest pmf change drops below
    ``conv_eps``; messages are updated synchronously so the result does not
    depend on edge order.
    """
    y = np.asarray(y, dtype=np.complex128)
    single = y.ndim == 1
    if single:
        y = y[None]
    csr = _as_csr(H)
    if y.shape[1] != csr.shape[0]:
        raise ValueError(f"observation length {y.shape[1]} does not match H with {csr.shape[0]} rows")
    if columns is not None:
        csr = csr[:, np.asarray(columns)]
    csr = csr.tocoo()
    order = np.lexsort((csr.col, csr.row))
    rows, cols, h = csr.row[order], csr.col[order], csr.data[order].astype(np.complex128)
    n_rows, n_vars = csr.shape
    n_edges = rows.size
    batch = y.shape[0]
    a = alphabet.points
    q = a.size
    a2 = np.abs(a) ** 2
    sigma_w = cfg.noise_variance

    row_sum = sp.csr_matrix((np.ones(n_edges), (rows, np.arange(n_edges))), shape=(n_rows, n_edges))
    col_sum = sp.csr_matrix((np.ones(n_edges), (cols, np.arange(n_edges))), shape=(n_vars, n_edges))
    ar, ai, a2 = a.real, a.imag, np.abs(a) ** 2
    hr, hi = h.real[:, None], h.imag[:, None]
    h2 = hr**2 + hi**2
    ha = h[None, :] * a[:, None]                        # (Q, E)
    har, hai = ha.real[:, :, None], ha.imag[:, :, None]

    # working arrays hold only the frames that are still iterating
    ids = np.arange(batch)
    p = np.full((q, n_edges, batch), 1.0 / q)
    yr, yi = y.real[:, rows].T.copy(), y.imag[:, rows].T.copy()   # (E, b)

    out_idx = np.zeros((batch, n_vars), dtype=np.int64)
    iterations = np.zeros(batch, dtype=np.int64)
    converged = np.zeros(batch, dtype=bool)
    if keep_state:
        st_p = np.empty((n_edges, batch, q))
        st_mu = np.empty((n_edges, batch), dtype=np.complex128)
        st_var = np.empty((n_edges, batch))

    for it in range(1, cfg.max_iter + 1):
        nb = ids.size
        pf = p.reshape(q, -1)
        er = (ar @ pf).reshape(n_edges, nb)
        ei = (ai @ pf).reshape(n_edges, nb)
        e2 = (a2 @ pf).reshape(n_edges, nb)
        mr = hr * er - hi * ei
        mi = hr * ei + hi * er
        ve = h2 * e2 - (mr**2 + mi**2)
        mu_r = (row_sum @ mr)[rows] - mr
        mu_i = (row_sum @ mi)[rows] - mi
        var = np.maximum((row_sum @ ve)[rows] - ve, 0.0) + sigma_w
        rr = yr - mu_r
        ri = yi - mu_i
        ll = -((rr[None] - har) ** 2 + (ri[None] - hai) ** 2) * (1.0 / var)[None]   # (Q, E, b)
        lc = np.stack([col_sum @ ll[j] for j in range(q)])                            # (Q, C, b)
        ext = lc[:, cols, :] - ll
        ext -= ext.max(axis=0)
        pt = np.exp(ext)
        pt /= pt.sum(axis=0)
        new = cfg.damping * pt + (1.0 - cfg.damping) * p
        delta = np.abs(new - p).max(axis=(0, 1)) if n_edges else np.zeros(nb)
        p = new

        done = delta < cfg.conv_eps
        finish = done if it < cfg.max_iter else np.ones(nb, dtype=bool)
        if finish.any():
            fid = ids[finish]
            out_idx[fid] = np.argmax(lc[:, :, finish], axis=0).T
            iterations[fid] = it
            converged[fid] = done[finish]
            if keep_state:
                st_p[:, fid] = np.moveaxis(p[:, :, finish], 0, -1)
                st_mu[:, fid] = mu_r[:, finish] + 1j * mu_i[:, finish]
                st_var[:, fid] = var[:, finish]
            keep = ~finish
            if not keep.any():
                break
            ids = ids[keep]
            p = np.ascontiguousarray(p[:, :, keep])
            yr, yi = yr[:, keep], yi[:, keep]

    syms = a[out_idx]
    state = BeliefState(rows, cols, st_p, st_mu, st_var, iterations) if keep_state else None
    if single:
        return MpResult(syms[0], out_idx[0], iterations[0], converged[0], state)
    return MpResult(syms, out_idx, iterations, converged, state)


def mp_detect(y, H, alphabet: Alphabet, cfg: MpConfig, columns=None):
    """Detect one frame; returns ``(symbols, iterations, converged)``."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError("mp_detect takes a single observation vector; use mp_detect_batch")
    res = mp_detect_batch(y, H, alphabet, cfg, columns)
    return res.symbols, int(res.iterations), bool(res.converged)


def map_oracle(y, H, alphabet: Alphabet, noise_variance: float = 1.0, max_candidates: int = 10**6,
               chunk: int = 1 << 14) -> np.ndarray:
    """Exact joint MAP by enumerating every candidate vector.

    Candidates are ordered like ``itertools.product`` (first variable most
    significant); ties go to the lowest candidate index. With equiprobable
    symbols and white noise the MAP vector minimises ``||y - H x||^2``, so
    ``noise_variance`` does not change the answer.
    """
    dense = _as_csr(H).toarray()
    y = np.asarray(y, dtype=np.complex128)
    if dense.shape[0] != y.size:
        raise ValueError("dimension mismatch between y and H")
    n_vars = dense.shape[1]
    q = alphabet.order
    total = q**n_vars
    if total > max_candidates:
        raise ValueError(f"search space too large: {q}^{n_vars} candidates > {max_candidates}")
    powers = q ** np.arange(n_vars - 1, -1, -1)
    best_cost, best_idx = np.inf, 0
    for start in range(0, total, chunk):
        cand = np.arange(start, min(start + chunk, total))
        digits = (cand[:, None] // powers[None, :]) % q
        x = alphabet.points[digits]
        r = y[None, :] - x @ dense.T
        cost = np.einsum("ij,ij->i", r.real, r.real) + np.einsum("ij,ij->i", r.imag, r.imag)
        i = int(np.argmin(cost))
        if cost[i] < best_cost:
            best_cost, best_idx = cost[i], start + i
    digits = (best_idx // powers) % q
    return alphabet.points[digits]


# ---------------------------------------------------------------------------
# OFDM baseline and demapping


def ofdm_equalize(Y, H_freq) -> np.ndarray:
    Y = np.asarray(Y, dtype=np.complex128)
    H_freq = np.asarray(H_freq, dtype=np.complex128)
    if np.any(np.abs(H_freq) <= 1e-12):
        raise ZeroDivisionError("singular subcarrier")
    return Y / H_freq


def hard_decision(symbols, alphabet: Alphabet) -> np.ndarray:
    """Index of the nearest constellation point; ties go to the lowest index."""
    s = np.asarray(symbols, dtype=np.complex128)
    flat = s.ravel()
    out = np.empty(flat.size, dtype=np.int64)
    step = max(1, (1 << 20) // alphabet.order)
    for i in range(0, flat.size, step):
        d = np.abs(flat[i:i + step, None] - alphabet.points[None, :])
        out[i:i + step] = np.argmin(d, axis=1)
    return out.reshape(s.shape)


def demap(symbols, alphabet: Alphabet) -> np.ndarray:
    """Hard decision followed by Gray label emission (flattened per leading batch)."""
    return alphabet.indices_to_bits(hard_decision(symbols, alphabet))
