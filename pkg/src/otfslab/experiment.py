"""Experiment configuration and Monte-Carlo BER / PAPR runners.

Frame ``f`` of SNR point ``p`` draws all of its randomness from the stream
``(seed, p, f)``. Frames are processed in fixed-size chunks, so the results
do not depend on how many workers share the chunks.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .channel import (ChannelProfile, apply_channel, build_effective_matrix, load_profile,
                      noise_variance_for_snr, ofdm_symbol_gains)
from .impairments import ImpairmentChain, apply_chain, chain_from_config
from .metrics import BerPoint, PaprResult, ccdf_analytic, ccdf_empirical, papr
from .numerics import SeededRng, complex_gaussian, make_alphabet
from .receiver import MpConfig, estimate_channel, hard_decision, map_oracle, mp_detect_batch
from .waveforms import (FrameLayout, _pilot_grid, default_cp_len, ofdm_demodulate_grid,
                        ofdm_modulate_grid, otfs_demodulate_grid, otfs_modulate_grid)

log = logging.getLogger("otfslab")

WAVEFORMS = ("otfs", "ofdm")
BER_HEADER = ("snr_db", "ber", "stderr", "frames", "bits")
PAPR_HEADER = ("threshold_db", "ccdf_empirical", "ccdf_analytic")

_STAGE = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["cfo", "iq", "dc", "phase_noise", "saleh", "sco"]},
        "side": {"enum": ["tx", "rx"]},
        "normalized_offset": {"type": "number"},
        "epsilon": {"type": "number"},
        "delta_phi_deg": {"type": "number"},
        "gamma_i": {"type": "number"},
        "gamma_q": {"type": "number"},
        "kind": {"enum": ["wiener", "filtered-gaussian"]},
        "sigma2": {"type": "number", "minimum": 0},
        "filter_len": {"type": "integer", "minimum": 1},
        "level_dbc_hz": {"type": "number"},
        "offset_hz": {"type": "number", "exclusiveMinimum": 0},
        "alpha_g": {"type": "number"},
        "beta_g": {"type": "number", "exclusiveMinimum": 0},
        "alpha_phi": {"type": "number"},
        "beta_phi": {"type": "number", "minimum": 0},
        "input_backoff_db": {"type": "number"},
        "bypass": {"type": "boolean"},
        "delta_ratio": {"type": "number", "exclusiveMinimum": -0.01, "exclusiveMaximum": 0.01},
    },
    "additionalProperties": False,
}

_TAPS = {
    "type": "object",
    "required": ["taps"],
    "properties": {
        "taps": {"type": "array", "minItems": 1, "items": {
            "type": "object",
            "required": ["delay", "doppler"],
            "properties": {"delay": {"type": "integer", "minimum": 0}, "doppler": {"type": "integer"},
                           "gain_re": {"type": "number"}, "gain_im": {"type": "number"}},
            "additionalProperties": False}},
        "normalize": {"type": "boolean"},
    },
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["waveform", "grid", "sweep"],
    "properties": {
        "name": {"type": "string"},
        "waveform": {"oneOf": [{"enum": list(WAVEFORMS)},
                               {"type": "array", "minItems": 1, "uniqueItems": True,
                                "items": {"enum": list(WAVEFORMS)}}]},
        "grid": {
            "type": "object",
            "required": ["M", "N"],
            "properties": {
                "M": {"type": "integer", "minimum": 1},
                "N": {"type": "integer", "minimum": 1},
                "modulation": {"enum": [4, 16, 64]},
                "cp": {"type": ["integer", "null"], "minimum": 0},
                "subcarrier_spacing_hz": {"type": "number", "exclusiveMinimum": 0},
                "pilot": {"oneOf": [{"type": "null"}, {
                    "type": "object",
                    "required": ["max_delay", "max_doppler"],
                    "properties": {"max_delay": {"type": "integer", "minimum": 0},
                                   "max_doppler": {"type": "integer", "minimum": 0},
                                   "guard_delay": {"type": "integer", "minimum": 0},
                                   "guard_doppler": {"type": "integer", "minimum": 0},
                                   "amplitude": {"type": "number", "exclusiveMinimum": 0}},
                    "additionalProperties": False}]},
            },
            "additionalProperties": False,
        },
        "channel": {"oneOf": [
            {"type": "object", "required": ["profile"],
             "properties": {"profile": {"oneOf": [{"type": "string"}, _TAPS]}},
             "additionalProperties": False},
            _TAPS]},
        "impairments": {"type": "array", "items": _STAGE},
        "detector": {
            "type": "object",
            "properties": {
                "otfs": {"enum": ["mp", "map-oracle"]},
                "ofdm": {"enum": ["one-tap"]},
                "csi": {"enum": ["perfect", "pilot"]},
                "damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "max_iter": {"type": "integer", "minimum": 1},
                "conv_eps": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "snr_db": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "frames": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
                "chunk": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "papr": {
            "type": "object",
            "properties": {"frames": {"type": "integer", "minimum": 1},
                           "max_threshold_db": {"type": "number", "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}

# Parameter values covered by the reference measurements; anything else only warns.
TABLE_RANGES = {
    "M": (4, 32, 256, 1024),
    "N": (1, 4, 32, 256),
    "normalized_offset": (0.0, 0.05, 0.01, 0.1),
    "epsilon": (0.0, 0.5),
    "delta_phi_deg": (0.0, 10.0),
}


class ConfigError(ValueError):
    """Config document failed to parse or validate; ``str()`` carries a line reference."""


def _locate_line(text: str, path) -> int | None:
    pos, found = 0, None
    for key in path:
        if isinstance(key, int):
            continue
        i = text.find(f'"{key}"', pos)
        if i < 0:
            break
        pos, found = i, i
    return None if found is None else text.count("\n", 0, found) + 1


@dataclass(frozen=True)
class ExperimentConfig:
    waveforms: tuple[str, ...]
    m: int
    n: int
    order: int = 4
    cp: int | None = None
    subcarrier_spacing_hz: float = 100e3
    pilot: dict | None = None
    channel: ChannelProfile = field(default_factory=lambda: load_profile("default"))
    impairments: tuple = ()
    detector: dict = field(default_factory=dict)
    snr_db: tuple[float, ...] = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    frames: int = 1000
    seed: int = 0
    chunk: int = 250
    papr_frames: int = 10000
    papr_max_threshold_db: float | None = None
    name: str = "experiment"
    source: dict = field(default_factory=dict, compare=False)

    # ------------------------------------------------------------------ loading
    @classmethod
    def from_dict(cls, doc: dict, text: str | None = None, origin: str = "<config>",
                  base_dir: Path | None = None) -> "ExperimentConfig":
        try:
            jsonschema.validate(doc, CONFIG_SCHEMA)
        except jsonschema.ValidationError as err:
            path = list(err.absolute_path)
            line = _locate_line(text, path) if text is not None else None
            where = ".".join(str(p) for p in path) or "<root>"
            loc = f"{origin}:{line}" if line else origin
            raise ConfigError(f"{loc}: {where}: {err.message}") from None
        wf = doc["waveform"]
        waveforms = (wf,) if isinstance(wf, str) else tuple(wf)
        grid = doc["grid"]
        chan = doc.get("channel", {"profile": "default"})
        ref = chan.get("profile", chan) if "profile" in chan else chan
        if isinstance(ref, str) and ref not in ("default", "static", "identity") and base_dir is not None:
            p = Path(ref)
            ref = str(p if p.is_absolute() else base_dir / p)
        try:
            profile = load_profile(ref)
        except (OSError, ValueError, KeyError) as err:
            raise ConfigError(f"{origin}: channel.profile: cannot load {ref!r}: {err}") from None
        sweep = doc["sweep"]
        det = dict(doc.get("detector", {}))
        cfg = cls(
            waveforms=waveforms,
            m=grid["M"], n=grid["N"], order=grid.get("modulation", 4), cp=grid.get("cp"),
            subcarrier_spacing_hz=float(grid.get("subcarrier_spacing_hz", 100e3)),
            pilot=grid.get("pilot"),
            channel=profile,
            impairments=tuple(copy.deepcopy(doc.get("impairments", []))),
            detector=det,
            snr_db=tuple(float(s) for s in sweep.get("snr_db", cls.snr_db)),
            frames=sweep.get("frames", 1000), seed=sweep.get("seed", 0), chunk=sweep.get("chunk", 250),
            papr_frames=doc.get("papr", {}).get("frames", 10000),
            papr_max_threshold_db=doc.get("papr", {}).get("max_threshold_db"),
            name=doc.get("name", "experiment"),
            source=copy.deepcopy(doc),
        )
        cfg.check(origin, text)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"{path}: cannot read config: {err.strerror}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}:{err.lineno}: invalid JSON: {err.msg}") from None
        return cls.from_dict(doc, text, str(path), path.parent)

    def check(self, origin: str = "<config>", text: str | None = None, quiet: bool = False) -> list[str]:
        """Cross-field checks (errors) and reference-range warnings (returned and logged)."""
        def fail(path, msg):
            line = _locate_line(text, path) if text else None
            loc = f"{origin}:{line}" if line else origin
            raise ConfigError(f"{loc}: {'.'.join(path)}: {msg}")

        for t in self.channel.taps:
            if not -self.n / 2 < t.doppler_idx <= self.n / 2:
                fail(["channel"], f"tap Doppler {t.doppler_idx} outside (-N/2, N/2] for N={self.n}")
            if t.delay_idx >= self.m:
                fail(["channel"], f"tap delay {t.delay_idx} must be < M={self.m}")
        for wf in self.waveforms:
            if self.cp_len(wf) < self.channel.max_delay:
                fail(["grid", "cp"], f"CP of {self.cp_len(wf)} samples does not cover tap delay {self.channel.max_delay}")
        if self.csi == "pilot":
            if self.pilot is None:
                fail(["detector", "csi"], "pilot CSI needs grid.pilot")
        if self.pilot is not None:
            try:
                lay = self.layout()
            except ValueError as err:
                fail(["grid", "pilot"], str(err))
            if lay.max_delay < self.channel.max_delay or lay.max_doppler < self.channel.max_doppler:
                fail(["grid", "pilot"], "pilot search window smaller than the channel spread")
            if lay.guard_delay < lay.max_delay or lay.guard_doppler < 2 * lay.max_doppler:
                fail(["grid", "pilot"], "guard must satisfy guard_delay >= max_delay and guard_doppler >= 2*max_doppler")
        if "otfs" in self.waveforms and self.detector.get("otfs") == "map-oracle":
            n_vars = self.m * self.n if self.pilot is None else self.layout().n_data
            if self.order ** n_vars > 10**6:
                fail(["detector", "otfs"], "map-oracle search space exceeds 1e6 candidates")
        try:
            chain_from_config(list(self.impairments), self.sample_rate)
        except (ValueError, KeyError) as err:
            fail(["impairments"], str(err))

        warnings = []
        def warn(name, value):
            if value not in TABLE_RANGES[name]:
                warnings.append(f"{name}={value} is outside the reference parameter set {TABLE_RANGES[name]}")
        warn("M", self.m)
        warn("N", self.n)
        for st in self.impairments:
            for key in ("normalized_offset", "epsilon", "delta_phi_deg"):
                if key in st:
                    warn(key, float(st[key]))
        if not quiet:
            for w in warnings:
                log.warning("%s: %s", origin, w)
        return warnings

    # ----------------------------------------------------------------- derived
    @property
    def csi(self) -> str:
        return self.detector.get("csi", "perfect")

    @property
    def sample_rate(self) -> float:
        return self.m * self.subcarrier_spacing_hz

    def cp_len(self, waveform: str) -> int:
        if self.cp is not None:
            return self.cp
        return default_cp_len(waveform, self.m, self.channel.max_delay)

    def layout(self) -> FrameLayout | None:
        if self.pilot is None:
            return None
        p = self.pilot
        md, mk = p["max_delay"], p["max_doppler"]
        return FrameLayout.build(self.m, self.n, p.get("guard_delay", md), p.get("guard_doppler", 2 * mk),
                                 pilot_amplitude=p.get("amplitude"), max_delay=md, max_doppler=mk)

    def chain(self) -> ImpairmentChain:
        return chain_from_config(list(self.impairments), self.sample_rate)

    def mp_config(self, noise_variance: float) -> MpConfig:
        d = self.detector
        return MpConfig(damping=d.get("damping", 0.6), max_iter=d.get("max_iter", 30),
                        conv_eps=d.get("conv_eps", 1e-5), noise_variance=noise_variance)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update({k: v for k, v in kw.items() if v is not None})
        return ExperimentConfig(**fields)

    def echo(self) -> dict:
        return {
            "name": self.name, "waveform": list(self.waveforms),
            "grid": {"M": self.m, "N": self.n, "modulation": self.order, "cp": self.cp,
                     "subcarrier_spacing_hz": self.subcarrier_spacing_hz, "pilot": self.pilot},
            "channel": self.channel.to_dict(), "impairments": list(self.impairments),
            "detector": self.detector,
            "sweep": {"snr_db": list(self.snr_db), "frames": self.frames, "seed": self.seed, "chunk": self.chunk},
            "papr": {"frames": self.papr_frames},
        }


# ---------------------------------------------------------------------------
# workers


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get("OTFSLAB_THREADS", "").strip()
        workers = int(env) if env else 0
    if workers <= 0:
        workers = os.cpu_count() or 1
    return workers


def _map(fn, tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


# ---------------------------------------------------------------------------
# BER


@lru_cache(maxsize=32)
def _perfect_h(profile: ChannelProfile, m: int, n: int, cp_len: int):
    return build_effective_matrix(profile, m, n, cp_len)


def _frame_tail(gen, tx, cfg, chain, waveform, noise_var, frame_len, cp_len):
    """tx impairments -> channel -> AWGN -> rx impairments for one frame."""
    sps = cfg.m  # offset normalised to the subcarrier spacing fs / M
    s = apply_chain(tx, chain, "tx", gen, sps)
    s = apply_channel(s, cfg.channel, frame_len, cp_len)
    s = s + complex_gaussian(s.shape, noise_var, gen)
    return apply_chain(s, chain, "rx", gen, sps)


def _simulate_chunk(task) -> tuple[int, int]:
    cfg, waveform, point, snr_db, start, count = task
    alphabet = make_alphabet(cfg.order)
    k = alphabet.bits_per_symbol
    m, n = cfg.m, cfg.n
    cp_len = cfg.cp_len(waveform)
    chain = cfg.chain()
    noise_var = noise_variance_for_snr(snr_db, 1.0)
    layout = cfg.layout() if waveform == "otfs" else None
    n_data = layout.n_data if layout is not None else m * n
    frame_len = m * n

    gens = [SeededRng(cfg.seed, (point, start + i)).generator() for i in range(count)]
    bits = np.stack([g.integers(0, 2, n_data * k, dtype=np.int8) for g in gens])
    syms = alphabet.map(bits)

    if waveform == "otfs":
        if layout is not None:
            grid = _pilot_grid(syms, layout)
        else:
            grid = syms.reshape(count, m, n)
        tx = otfs_modulate_grid(grid, cp_len)
    else:
        tx = ofdm_modulate_grid(syms.reshape(count, n, m), cp_len)

    rx = np.stack([_frame_tail(g, tx[i], cfg, chain, waveform, noise_var, frame_len, cp_len)
                   for i, g in enumerate(gens)])
    if not np.all(np.isfinite(rx)):
        bad = int(np.flatnonzero(~np.isfinite(rx).all(axis=1))[0]) + start
        raise FloatingPointError(f"non-finite samples at SNR {snr_db} dB, frame {bad}")

    if waveform == "ofdm":
        Y = ofdm_demodulate_grid(rx, m, cp_len)                 # (B, N, M)
        gains = ofdm_symbol_gains(cfg.channel, m, cp_len, n, frame_len)
        erased = np.abs(gains) <= 1e-12
        Xh = np.where(erased, 0.0, Y / np.where(erased, 1.0, gains))
        est = hard_decision(Xh.reshape(count, -1), alphabet)
    else:
        y = otfs_demodulate_grid(rx, m, n, cp_len).reshape(count, -1)
        est = _detect_otfs(cfg, y, layout, alphabet, noise_var, cp_len)

    dec_bits = alphabet.indices_to_bits(est)
    errors = int(np.count_nonzero(dec_bits != bits))
    return errors, int(bits.size)


def _detect_otfs(cfg, y, layout, alphabet, noise_var, cp_len):
    m, n = cfg.m, cfg.n
    method = cfg.detector.get("otfs", "mp")
    mp_cfg = cfg.mp_config(max(noise_var, 1e-12))
    cols = None if layout is None else layout.data_indices

    def detect(y_, H, nv=noise_var):
        if layout is not None:
            y_ = y_ - (H.matrix[:, layout.pilot_index].toarray().ravel() * layout.pilot_amplitude)
        if method == "map-oracle":
            Hs = H.matrix if cols is None else H.matrix[:, cols]
            return np.stack([hard_decision(map_oracle(v, Hs, alphabet, nv), alphabet) for v in np.atleast_2d(y_)])
        c = mp_cfg if nv == noise_var else cfg.mp_config(max(nv, 1e-12))
        return mp_detect_batch(np.atleast_2d(y_), H, alphabet, c, columns=cols).indices

    if cfg.csi == "perfect":
        return detect(y, _perfect_h(cfg.channel, m, n, cp_len))

    out = np.empty((y.shape[0], layout.n_data), dtype=np.int64)
    for i, yi in enumerate(y):
        est = estimate_channel(yi.reshape(m, n), layout, noise_var, cp_len)
        prof = est.profile()
        if prof is None:
            out[i] = hard_decision(np.zeros(layout.n_data), alphabet)
            continue
        # each estimated gain carries error variance sigma^2 / A_p^2, which leaks into every data row
        nv_eff = noise_var * (1.0 + len(est.taps) / layout.pilot_amplitude ** 2)
        out[i] = detect(yi, build_effective_matrix(prof, m, n, cp_len), nv_eff)[0]
    return out


def run_ber_experiment(cfg: ExperimentConfig, waveform: str | None = None,
                       workers: int | None = None) -> list[BerPoint]:
    waveform = waveform or cfg.waveforms[0]
    if waveform not in WAVEFORMS:
        raise ValueError(f"unknown waveform {waveform!r}")
    tasks = []
    for p, snr in enumerate(cfg.snr_db):
        for start in range(0, cfg.frames, cfg.chunk):
            tasks.append((cfg, waveform, p, snr, start, min(cfg.chunk, cfg.frames - start)))
    results = _map(_simulate_chunk, tasks, resolve_workers(workers))
    errs = np.zeros(len(cfg.snr_db), dtype=np.int64)
    bits = np.zeros(len(cfg.snr_db), dtype=np.int64)
    for (_, _, p, *_), (e, b) in zip(tasks, results):
        errs[p] += e
        bits[p] += b
    return [BerPoint(float(s), int(errs[p]), int(bits[p]), cfg.frames) for p, s in enumerate(cfg.snr_db)]


# ---------------------------------------------------------------------------
# PAPR

PAPR_CHUNK = 1000


def _papr_chunk(task) -> np.ndarray:
    waveform, m, n, order, seed, idx, count = task
    alphabet = make_alphabet(order)
    gen = SeededRng(seed, (idx,)).generator()
    syms = alphabet.points[gen.integers(0, order, (count, m * n))]
    if waveform == "otfs":
        s = otfs_modulate_grid(syms.reshape(count, m, n), 0)
    else:
        s = ofdm_modulate_grid(syms.reshape(count, n, m), 0)
    return papr(s, axis=-1)


def papr_samples(waveform: str, m: int, n: int, n_frames: int, order: int = 4, seed: int = 0,
                 workers: int | None = 1) -> np.ndarray:
    """Per-frame PAPR of CP-free frames; OFDM frames are N concatenated M-carrier symbols."""
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    tasks = [(waveform, m, n, order, seed, i, min(PAPR_CHUNK, n_frames - s))
             for i, s in enumerate(range(0, n_frames, PAPR_CHUNK))]
    return np.concatenate(_map(_papr_chunk, tasks, resolve_workers(workers)))


def run_papr_experiment(cfg: ExperimentConfig, n_frames: int | None = None, waveform: str | None = None,
                        workers: int | None = None) -> PaprResult:
    waveform = waveform or cfg.waveforms[0]
    n_frames = n_frames or cfg.papr_frames
    values = papr_samples(waveform, cfg.m, cfg.n, n_frames, cfg.order, cfg.seed, workers)
    top = cfg.papr_max_threshold_db or math.ceil(10 * np.log10(values.max())) + 1.0
    thresholds = np.round(np.arange(0.0, top + 1e-9, 0.1), 1)
    emp = ccdf_empirical(values, thresholds)
    ana = ccdf_analytic(np.maximum(10 ** (thresholds / 10), 1e-300), cfg.m * cfg.n)
    return PaprResult(waveform, cfg.m, cfg.n, values, thresholds, emp, ana)


# ---------------------------------------------------------------------------
# output


def _fmt(x: float) -> str:
    return repr(float(x))


def ber_csv(points: list[BerPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BER_HEADER)
    for p in points:
        w.writerow((_fmt(p.snr_db), _fmt(p.ber), _fmt(p.stderr), p.frames, p.bits_total))
    return buf.getvalue()


def papr_csv(res: PaprResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PAPR_HEADER)
    for t, e, a in zip(res.ccdf_thresholds_db, res.ccdf_empirical, res.ccdf_analytic):
        w.writerow((f"{t:.1f}", _fmt(e), _fmt(a)))
    return buf.getvalue()


def _metadata(cfg: ExperimentConfig) -> dict:
    echo = cfg.echo()
    digest = hashlib.sha256(json.dumps(echo, sort_keys=True).encode()).hexdigest()
    return {"otfslab_version": __version__, "config_sha256": digest, "config": echo}


def ber_json(cfg: ExperimentConfig, waveform: str, points: list[BerPoint]) -> str:
    doc = _metadata(cfg)
    doc["waveform"] = waveform
    doc["results"] = [{"snr_db": p.snr_db, "ber": p.ber, "stderr": p.stderr, "frames": p.frames,
                       "bits": p.bits_total, "bit_errors": p.bit_errors} for p in points]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def papr_json(cfg: ExperimentConfig, res: PaprResult) -> str:
    doc = _metadata(cfg)
    doc["waveform"] = res.waveform
    doc["frames"] = int(res.per_frame_papr.size)
    doc["results"] = [{"threshold_db": float(t), "ccdf_empirical": float(e), "ccdf_analytic": float(a)}
                      for t, e, a in zip(res.ccdf_thresholds_db, res.ccdf_empirical, res.ccdf_analytic)]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
