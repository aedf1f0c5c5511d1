"""Command line entry point: ``otfslab {ber,papr,probe-channel,validate-config}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .experiment import (WAVEFORMS, ConfigError, ExperimentConfig, ber_csv, ber_json, papr_csv, papr_json,
                         run_ber_experiment, run_papr_experiment, write_text)
from .channel import build_effective_matrix

log = logging.getLogger("otfslab")


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="otfslab", description="OTFS / OFDM link-level simulator")
    ap.add_argument("--version", action="version", version=f"otfslab {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, frames_help):
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--seed", type=_nonneg, help="override sweep.seed")
        p.add_argument("--frames", type=_positive, help=frames_help)
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--workers", type=_nonneg, help="worker processes (0 = auto; env OTFSLAB_THREADS)")
        p.add_argument("--waveform", choices=WAVEFORMS, help="run only this waveform")

    common(sub.add_parser("ber", help="BER vs SNR sweep"), "override sweep.frames (frames per SNR point)")
    common(sub.add_parser("papr", help="PAPR CCDF"), "override papr.frames")

    pc = sub.add_parser("probe-channel", help="print effective channel matrix statistics")
    pc.add_argument("--config", required=True)
    pc.add_argument("--waveform", choices=WAVEFORMS, default="otfs")

    vc = sub.add_parser("validate-config", help="validate a config document")
    vc.add_argument("path", nargs="?", help="config file")
    vc.add_argument("--config", dest="config_opt", help="config file (alternative to the positional)")
    return ap


def _load(path: str, **overrides) -> ExperimentConfig:
    return ExperimentConfig.load(path).with_overrides(**overrides)


def _waveforms(cfg: ExperimentConfig, only: str | None) -> tuple[str, ...]:
    return (only,) if only else cfg.waveforms


def cmd_ber(args) -> int:
    cfg = _load(args.config, seed=args.seed, frames=args.frames)
    out = Path(args.out)
    for wf in _waveforms(cfg, args.waveform):
        points = run_ber_experiment(cfg, wf, workers=args.workers)
        write_text(out / f"ber_{wf}.csv", ber_csv(points))
        write_text(out / f"ber_{wf}.json", ber_json(cfg, wf, points))
        print(f"ber_{wf}.csv: {len(points)} points -> {out}")
    return 0


def cmd_papr(args) -> int:
    cfg = _load(args.config, seed=args.seed, papr_frames=args.frames)
    out = Path(args.out)
    for wf in _waveforms(cfg, args.waveform):
        res = run_papr_experiment(cfg, waveform=wf, workers=args.workers)
        write_text(out / f"papr_{wf}.csv", papr_csv(res))
        write_text(out / f"papr_{wf}.json", papr_json(cfg, res))
        print(f"papr_{wf}.csv: {res.per_frame_papr.size} frames -> {out}")
    return 0


def cmd_probe(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    wf = args.waveform
    cp = cfg.cp_len(wf)
    H = build_effective_matrix(cfg.channel, cfg.m, cfg.n, cp)
    nnz = H.row_nnz()
    dense = H.toarray()
    print(f"waveform={wf} M={cfg.m} N={cfg.n} cp={cp} taps={cfg.channel.n_taps}")
    print(f"shape={dense.shape[0]}x{dense.shape[1]} nnz={H.matrix.nnz}")
    print(f"row_nnz min={nnz.min()} max={nnz.max()} mean={nnz.mean():.3f}")
    print(f"frobenius^2/MN={np.linalg.norm(dense) ** 2 / dense.shape[0]:.6f}")
    return 0


def cmd_validate(args) -> int:
    path = args.path or args.config_opt
    if path is None:
        raise ConfigError("validate-config: no config file given")
    cfg = ExperimentConfig.load(path)
    warnings = cfg.check(path, quiet=True)  # already logged once by load()
    print(f"{path}: ok ({len(warnings)} warning{'s' if len(warnings) != 1 else ''})")
    return 0


COMMANDS = {"ber": cmd_ber, "papr": cmd_papr, "probe-channel": cmd_probe, "validate-config": cmd_validate}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError, ArithmeticError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
