"""Command-line interface.

Subcommands: waveform-mse, papr, ber-awgn, ber-fading, crosslink (experiment
runners writing CSV + manifest + figures), validate (numerology checker),
and selftest (the DFT/time dual-path identity suite).

SNR in all experiments is average received signal power per complex sample
over the complex noise variance, measured after the channel and before the
receive filter.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .experiments import ConfigError, parse_snr_range, run_experiment
from .sc import Numerology, admissible_guard_range, condition1_offset, default_guard_offset, \
    validate_numerology


def _load_config_file(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    if p.suffix.lower() == ".json":
        return json.loads(text)
    # no recognizable extension: try JSON first, then TOML
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON or TOML config file; flags override it")
    p.add_argument("--seed", type=int, help="root seed (default 0)")
    p.add_argument("--out", help="output directory (default ./results)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.add_argument("--dump-iq", metavar="FILE",
                   help="dump representative waveforms as raw float64 LE I/Q")


def _add_link_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--snr", help="sweep as start:step:stop in dB")
    p.add_argument("--mod", choices=["bpsk", "qpsk", "16qam"], help="constellation")
    p.add_argument("--rolloff", type=float, help="RRC roll-off")
    p.add_argument("--tx", choices=["sc", "uw", "uww"],
                   help="restrict to one transmitter kind")
    p.add_argument("--rx", choices=["sc", "uw", "uww2"],
                   help="restrict to one receiver kind")
    p.add_argument("--min-errors", type=int, help="required bit errors per point")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fdelink",
        description="SC-FDE vs UW DFT-s-OFDM link-level experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("waveform-mse", help="aligned-waveform MSE between SC and UW chains")
    _add_common(p)
    p.add_argument("--rolloff", type=float)
    p.add_argument("--mod", choices=["bpsk", "qpsk", "16qam"])
    p.add_argument("--blocks", type=int, dest="n_blocks", help="packet length in blocks")

    p = sub.add_parser("papr", help="PAPR CCDF of the SC, UW, and windowed-UW waveforms")
    _add_common(p)
    p.add_argument("--rolloff", type=float)
    p.add_argument("--blocks", type=int, dest="n_blocks", help="number of measured blocks")
    p.add_argument("--oversample", type=int, help="FD oversampling factor (default 2)")
    p.add_argument("--ext-bins", type=int, dest="extension_bins",
                   help="window extension per side for the uww waveform")

    p = sub.add_parser("ber-awgn", help="uncoded BER over AWGN vs the analytic bound")
    _add_common(p)
    _add_link_flags(p)

    p = sub.add_parser("ber-fading", help="uncoded BER over the tapped-delay-line channel")
    _add_common(p)
    _add_link_flags(p)
    p.add_argument("--taps", type=int, help="channel memory L")
    p.add_argument("--decay", type=float, dest="decay_db_per_tap", help="dB per tap")
    p.add_argument("--channels", type=int, dest="n_channels", help="channel draws per point")

    p = sub.add_parser("crosslink", help="cross-pairing BER incl. high-SNR floor check")
    _add_common(p)
    _add_link_flags(p)
    p.add_argument("--taps", type=int)
    p.add_argument("--decay", type=float, dest="decay_db_per_tap")
    p.add_argument("--channels", type=int, dest="n_channels")

    p = sub.add_parser("validate", help="check a numerology against a channel memory")
    p.add_argument("--taps", type=int, default=0, help="channel memory L (default 0)")
    p.add_argument("--m-h", type=int, default=9, dest="m_h")
    p.add_argument("--n-g", type=int, dest="n_g", help="guard offset (default: auto)")
    p.add_argument("--n-t", type=int, dest="n_t", help="epoch offset (default: zero-phase)")

    p = sub.add_parser("selftest", help="run the dual-path identity suite")
    p.add_argument("--seed", type=int, default=0)

    return ap


def _experiment_overrides(args: argparse.Namespace) -> dict:
    overrides = {}
    if args.config:
        file_cfg = _load_config_file(args.config)
        if not isinstance(file_cfg, dict):
            raise ConfigError(f"config file {args.config} must hold a table/object")
        overrides.update(file_cfg)
    for key in ("seed", "out", "rolloff", "mod", "n_blocks", "oversample",
                "extension_bins", "snr", "min_errors", "taps",
                "decay_db_per_tap", "n_channels", "dump_iq"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "no_figures", False):
        overrides["figures"] = False
    tx = getattr(args, "tx", None)
    rx = getattr(args, "rx", None)
    if tx or rx:
        overrides["pairings"] = [[tx or "sc", rx or "sc"]]
    return overrides


def _cmd_validate(args: argparse.Namespace) -> int:
    base = Numerology(m=512, m_s=64, m_h=args.m_h, a=3, b=2, l_tx=67, l_rx=67,
                      n_g=0, n_t=0)
    n_t = args.n_t if args.n_t is not None else condition1_offset(
        base.m_s, base.m_h, base.a, base.b, base.l_tx)
    lo, hi = admissible_guard_range(base, args.taps)
    if args.n_g is not None:
        n_g = args.n_g
    elif lo <= hi:
        n_g = default_guard_offset(base, args.taps)
    else:
        n_g = lo  # range is empty; report the failure below
    num = base.with_offsets(n_g=n_g, n_t=n_t)
    report = validate_numerology(num, args.taps)
    print(f"numerology: M={num.m} M_s={num.m_s} M_h={num.m_h} a={num.a} b={num.b} "
          f"L_tx={num.l_tx} L_rx={num.l_rx} N_g={num.n_g} N_t={num.n_t}")
    print(f"derived: N={num.n} T_tx={num.t_tx} O_tx={num.o_tx} O_rx={num.o_rx}")
    print(f"admissible guard range for L={args.taps}: "
          f"[{lo}, {hi}]" + (" (empty)" if lo > hi else ""))
    print(report)
    return 0 if report.ok else 1


def _cmd_selftest(args: argparse.Namespace) -> int:
    from .selftest import run_selftest
    return run_selftest(args.seed)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        return _cmd_validate(args)
    if args.command == "selftest":
        return _cmd_selftest(args)
    try:
        overrides = _experiment_overrides(args)
        manifest = run_experiment(args.command, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = manifest["config"]["out"]
    print(f"experiment : {manifest['experiment']}")
    print(f"outputs    : {out}/ -> {', '.join(manifest['outputs']['csv'] + manifest['outputs']['figures'])}")
    print(f"summary    : {json.dumps(manifest['summary'], default=float)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
