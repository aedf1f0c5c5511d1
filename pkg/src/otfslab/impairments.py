"""Baseband RF front-end impairment stages and their composition.

Every stage maps a complex sample stream (last axis) to a stream of the same
length. Stochastic stages draw from an explicit generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from .numerics import as_generator

Side = Literal["tx", "rx"]


@dataclass(frozen=True)
class CfoParams:
    """Carrier offset as a fraction of the subcarrier spacing."""

    normalized_offset: float = 0.0
    side: Side = "rx"


@dataclass(frozen=True)
class IqImbalance:
    epsilon: float = 0.0
    delta_phi: float = 0.0  # radians
    side: Side = "rx"

    @property
    def alpha(self) -> complex:
        return complex(math.cos(self.delta_phi), self.epsilon * math.sin(self.delta_phi))

    @property
    def beta(self) -> complex:
        return complex(self.epsilon * math.cos(self.delta_phi), -math.sin(self.delta_phi))


@dataclass(frozen=True)
class DcOffset:
    gamma_i: float = 0.0
    gamma_q: float = 0.0
    side: Side = "rx"


@dataclass(frozen=True)
class PhaseNoiseModel:
    """Receiver LO phase noise.

    ``wiener``: theta is a random walk with N(0, sigma2) increments.
    ``filtered-gaussian``: white N(0, sigma2) smoothed by a length
    ``filter_len`` moving average.
    """

    kind: Literal["wiener", "filtered-gaussian"] = "wiener"
    sigma2: float = 0.0
    filter_len: int = 8
    side: Side = "rx"

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("phase-noise variance must be >= 0")
        if self.kind not in ("wiener", "filtered-gaussian"):
            raise ValueError(f"unknown phase-noise kind {self.kind!r}")
        if self.filter_len < 1:
            raise ValueError("filter_len must be >= 1")


@dataclass(frozen=True)
class SalehPa:
    """Saleh AM-AM / AM-PM amplifier. Defaults are the classical TWT fit."""

    alpha_g: float = 2.1587
    beta_g: float = 1.1517
    alpha_phi: float = 4.0033
    beta_phi: float = 9.1040
    input_backoff_db: float = 0.0
    bypass: bool = False
    side: Side = "tx"

    def __post_init__(self):
        if self.beta_g <= 0 or self.beta_phi < 0:
            raise ValueError("Saleh model needs beta_g > 0 and beta_phi >= 0")

    def am_am(self, r):
        r = np.asarray(r, dtype=float)
        return self.alpha_g * r / (1.0 + self.beta_g * r**2)

    def am_pm(self, r):
        r = np.asarray(r, dtype=float)
        return self.alpha_phi * r**2 / (1.0 + self.beta_phi * r**2)


@dataclass(frozen=True)
class SampleClockOffset:
    delta_ratio: float = 0.0
    side: Side = "rx"

    def __post_init__(self):
        if abs(self.delta_ratio) >= 0.01:
            raise ValueError(f"|delta_ratio| must be < 0.01, got {self.delta_ratio}")


Stage = Union[CfoParams, IqImbalance, DcOffset, PhaseNoiseModel, SalehPa, SampleClockOffset]


def apply_cfo(s, p: CfoParams, samples_per_symbol: int) -> np.ndarray:
    """Rotate by ``exp(j 2 pi f_o n / samples_per_symbol)`` with ``n`` the global sample index."""
    if samples_per_symbol < 1:
        raise ValueError("samples_per_symbol must be >= 1")
    s = np.asarray(s, dtype=np.complex128)
    if p.normalized_offset == 0:
        return s.copy()
    n = np.arange(s.shape[-1])
    return s * np.exp(2j * np.pi * p.normalized_offset * n / samples_per_symbol)


def apply_iq_imbalance(s, p: IqImbalance) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    return p.alpha * s + p.beta * np.conj(s)


def apply_dc_offset(s, p: DcOffset) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    return s + complex(p.gamma_i, p.gamma_q)


def phase_noise_trajectory(length: int, p: PhaseNoiseModel, rng, batch: tuple = ()) -> np.ndarray:
    if p.sigma2 == 0:
        return np.zeros(batch + (length,))
    gen = as_generator(rng)
    w = math.sqrt(p.sigma2) * gen.standard_normal(batch + (length,))
    if p.kind == "wiener":
        return np.cumsum(w, axis=-1)
    kernel = np.full(p.filter_len, 1.0 / p.filter_len)
    return np.apply_along_axis(lambda v: np.convolve(v, kernel)[:length], -1, w)


def apply_phase_noise(s, p: PhaseNoiseModel, rng) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    if p.sigma2 == 0:
        return s.copy()
    theta = phase_noise_trajectory(s.shape[-1], p, rng, s.shape[:-1])
    return s * np.exp(1j * theta)


def wiener_sigma2_for_ssb(level_dbc_hz: float, offset_hz: float, sample_rate: float) -> float:
    """Per-sample Wiener increment variance giving ``level_dbc_hz`` at ``offset_hz``.

    A Wiener phase process has a Lorentzian spectrum whose far-out skirt is
    ``L(f) ~ linewidth / (2 pi f^2)``; the phase diffusion rate is
    ``2 pi linewidth`` rad^2/s.
    """
    linewidth = 2 * math.pi * offset_hz**2 * 10 ** (level_dbc_hz / 10)
    return 2 * math.pi * linewidth / sample_rate


def apply_saleh_pa(s, p: SalehPa) -> np.ndarray:
    s = np.asarray(s, dtype=np.complex128)
    if p.bypass:
        return s.copy()
    r = np.abs(s) * 10 ** (-p.input_backoff_db / 20)
    return p.am_am(r) * np.exp(1j * (np.angle(s) + p.am_pm(r)))


def apply_sample_clock_offset(s, p: SampleClockOffset) -> np.ndarray:
    """Linear interpolation at ``n (1 + delta_ratio)``.

    Positions past the final sample reuse the last segment (linear
    extrapolation), so affine inputs are reproduced exactly.
    """
    s = np.asarray(s, dtype=np.complex128)
    if p.delta_ratio == 0:
        return s.copy()
    length = s.shape[-1]
    if length < 2:
        return s.copy()
    pos = np.arange(length) * (1.0 + p.delta_ratio)
    i0 = np.clip(np.floor(pos).astype(int), 0, length - 2)
    i1 = i0 + 1
    frac = pos - i0
    return (1 - frac) * s[..., i0] + frac * s[..., i1]


@dataclass(frozen=True)
class ImpairmentChain:
    stages: tuple = field(default_factory=tuple)

    def side(self, side: Side) -> tuple:
        return tuple(st for st in self.stages if st.side == side)

    @property
    def stochastic(self) -> bool:
        return any(isinstance(st, PhaseNoiseModel) and st.sigma2 > 0 for st in self.stages)


def apply_stage(s, stage: Stage, samples_per_symbol: int, rng=None) -> np.ndarray:
    if isinstance(stage, CfoParams):
        return apply_cfo(s, stage, samples_per_symbol)
    if isinstance(stage, IqImbalance):
        return apply_iq_imbalance(s, stage)
    if isinstance(stage, DcOffset):
        return apply_dc_offset(s, stage)
    if isinstance(stage, PhaseNoiseModel):
        return apply_phase_noise(s, stage, rng)
    if isinstance(stage, SalehPa):
        return apply_saleh_pa(s, stage)
    if isinstance(stage, SampleClockOffset):
        return apply_sample_clock_offset(s, stage)
    raise TypeError(f"unknown impairment stage {stage!r}")


def apply_chain(s, chain: ImpairmentChain, side: Side, rng=None, samples_per_symbol: int = 1) -> np.ndarray:
    out = np.asarray(s, dtype=np.complex128)
    gen = None
    for stage in chain.side(side):
        if isinstance(stage, PhaseNoiseModel) and gen is None:
            gen = as_generator(rng)
        out = apply_stage(out, stage, samples_per_symbol, gen)
    return out.copy() if out is s else out


# ---------------------------------------------------------------------------
# config surface: angles in degrees, backoff in dB


def stage_from_dict(doc: dict) -> Stage:
    kind = doc["type"]
    side = doc.get("side")
    kw = {} if side is None else {"side": side}
    if kind == "cfo":
        return CfoParams(float(doc.get("normalized_offset", 0.0)), **kw)
    if kind == "iq":
        return IqImbalance(float(doc.get("epsilon", 0.0)), math.radians(float(doc.get("delta_phi_deg", 0.0))), **kw)
    if kind == "dc":
        return DcOffset(float(doc.get("gamma_i", 0.0)), float(doc.get("gamma_q", 0.0)), **kw)
    if kind == "phase_noise":
        if "sigma2" in doc:
            sigma2 = float(doc["sigma2"])
        else:
            sigma2 = wiener_sigma2_for_ssb(float(doc.get("level_dbc_hz", -95.0)),
                                           float(doc.get("offset_hz", 1e6)),
                                           float(doc["sample_rate"]))
        return PhaseNoiseModel(doc.get("kind", "wiener"), sigma2, int(doc.get("filter_len", 8)), **kw)
    if kind == "saleh":
        defaults = SalehPa()
        return SalehPa(float(doc.get("alpha_g", defaults.alpha_g)), float(doc.get("beta_g", defaults.beta_g)),
                       float(doc.get("alpha_phi", defaults.alpha_phi)), float(doc.get("beta_phi", defaults.beta_phi)),
                       float(doc.get("input_backoff_db", 0.0)), bool(doc.get("bypass", False)), **kw)
    if kind == "sco":
        return SampleClockOffset(float(doc.get("delta_ratio", 0.0)), **kw)
    raise ValueError(f"unknown impairment type {kind!r}")


def chain_from_config(docs: list[dict], sample_rate: float | None = None) -> ImpairmentChain:
    stages = []
    for d in docs:
        if d.get("type") == "phase_noise" and "sigma2" not in d and "sample_rate" not in d:
            if sample_rate is None:
                raise ValueError("phase_noise needs sigma2 or a sample rate for SSB calibration")
            d = {**d, "sample_rate": sample_rate}
        stages.append(stage_from_dict(d))
    return ImpairmentChain(tuple(stages))
