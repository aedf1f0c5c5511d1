"""PAPR / CCDF statistics and BER bookkeeping."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def papr(s, axis: int = -1) -> np.ndarray | float:
    """Linear peak-to-average power ratio ``max |s|^2 / mean |s|^2``."""
    s = np.asarray(s)
    p = np.abs(s) ** 2
    mean = p.mean(axis=axis)
    if np.any(mean == 0):
        raise ValueError("PAPR of an all-zero vector is undefined")
    out = p.max(axis=axis) / mean
    return float(out) if np.ndim(out) == 0 else out


def to_db(x):
    return 10.0 * np.log10(x)


def ccdf_analytic(gamma_linear, n_samples: int):
    """``1 - (1 - exp(-gamma))^n``: independent Gaussian-sample approximation."""
    g = np.asarray(gamma_linear, dtype=float)
    if np.any(g <= 0):
        raise ValueError("gamma must be positive")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    # -expm1(n log1p(-e^-g)) keeps precision deep in the tail
    out = -np.expm1(n_samples * np.log1p(-np.exp(-g)))
    return float(out) if out.ndim == 0 else out


def ccdf_analytic_inverse(prob, n_samples: int):
    """Threshold (linear) at which the analytic CCDF equals ``prob``."""
    p = np.asarray(prob, dtype=float)
    return -np.log(-np.expm1(np.log1p(-p) / n_samples))


def ccdf_empirical(papr_linear, thresholds_db) -> np.ndarray:
    """Fraction of frames whose PAPR exceeds each threshold (strictly)."""
    v = np.sort(to_db(np.asarray(papr_linear, dtype=float)))
    t = np.asarray(thresholds_db, dtype=float)
    return 1.0 - np.searchsorted(v, t, side="right") / v.size


def papr_at_ccdf(papr_linear, prob: float) -> float:
    """Empirical PAPR (dB) exceeded with probability ``prob``."""
    v = to_db(np.asarray(papr_linear, dtype=float))
    return float(np.quantile(v, 1.0 - prob, method="higher"))


def horizontal_gap_db(papr_linear, n_samples: int, thresholds_db, p_min: float) -> np.ndarray:
    """Signed dB distance (empirical - analytic) between the two CCDF curves.

    Evaluated at each grid threshold whose empirical CCDF lies in
    ``[p_min, 1)``; there the analytic curve is inverted at the empirical
    probability.
    """
    t = np.asarray(thresholds_db, dtype=float)
    emp = ccdf_empirical(papr_linear, t)
    sel = (emp >= p_min) & (emp < 1.0)
    return t[sel] - to_db(ccdf_analytic_inverse(emp[sel], n_samples))


@dataclass(frozen=True)
class PaprResult:
    waveform: str
    m: int
    n: int
    per_frame_papr: np.ndarray
    ccdf_thresholds_db: np.ndarray
    ccdf_empirical: np.ndarray
    ccdf_analytic: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.m * self.n


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    bit_errors: int
    bits_total: int
    frames: int

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_total if self.bits_total else float("nan")

    @property
    def stderr(self) -> float:
        p = self.ber
        return math.sqrt(p * (1.0 - p) / self.bits_total) if self.bits_total else float("nan")
