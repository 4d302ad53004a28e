"""Named experiments behind the CLI: waveform MSE, PAPR CCDF, AWGN BER,
fading BER, and the cross-link study. Each run writes plot-ready CSVs, a
JSON manifest, and rendered figures into the output directory; everything
in the CSVs is a deterministic function of (config, seed)."""
from __future__ import annotations

import csv
import json
import subprocess
import time
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import plots
from .dataio import write_iq
from .link import LinkScenario, run_link
from .metrics import block_paprs_db, papr_at_ccdf, qpsk_awgn_ber, waveform_mse_db
from .modem import Constellation, map_bits, unique_word_for
from .pulses import design_fd_window, design_rrc
from .sc import Numerology, sc_assemble_packet, sc_modulate_block, sc_modulate_block_dft, \
    transmit_shaping_gains
from .uw import SubcarrierMap, uw_assemble_packet, uw_modulate_symbol, uw_w_modulate

__all__ = ["run_experiment", "EXPERIMENTS", "parse_snr_range"]

MANIFEST_SCHEMA = 1
CSV_SCHEMA = 1

_DEFAULTS_COMMON = {
    "seed": 0,
    "out": "results",
    "figures": True,
    "dump_iq": None,
    "m_h": 9,
}

_DEFAULTS = {
    "waveform-mse": {
        "rolloff": 0.0,
        "mod": "bpsk",
        "n_blocks": 20,
    },
    "papr": {
        "rolloff": 0.2,
        "extension_bins": 51,
        "oversample": 2,
        "n_blocks": 100_000,
        "mods": ["qpsk", "16qam"],
        "waveforms": ["sc", "uw", "uww"],
        "ccdf_ref": 1e-3,
    },
    "ber-awgn": {
        "mod": "qpsk",
        "rolloff": 0.2,
        "snr": "6:0.5:9.5",
        "pairings": [["sc", "sc"], ["uw", "uw"], ["sc", "uw"], ["uw", "sc"]],
        "min_errors": 100,
        "min_bits": 1_000_000,
        "max_bits": 8_000_000,
        "n_blocks": 8,
    },
    "ber-fading": {
        "mod": "qpsk",
        "rolloff": 0.2,
        "snr": "8:2:24",
        "pairings": [["sc", "sc"], ["uw", "uw"], ["sc", "uw"], ["uw", "sc"]],
        "taps": 10,
        "decay_db_per_tap": 0.0,
        "n_channels": 200,
        "n_blocks": 8,
        "extension_bins": 51,
    },
    "crosslink": {
        "mod": "qpsk",
        "rolloff": 0.2,
        "snr": "18:6:30",
        "pairings": [["uw", "uw"], ["uw", "sc"], ["sc", "uw"], ["sc", "sc"]],
        "taps": 10,
        "decay_db_per_tap": 0.0,
        "n_channels": 200,
        "n_blocks": 8,
        "extension_bins": 51,
    },
}


class ConfigError(ValueError):
    pass


def parse_snr_range(spec) -> np.ndarray:
    """Accepts 'start:step:stop' (inclusive stop), a number, or a list."""
    if isinstance(spec, (int, float)):
        return np.array([float(spec)])
    if isinstance(spec, (list, tuple)):
        return np.asarray([float(v) for v in spec])
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) != 3:
            raise ConfigError(f"snr '{spec}': expected 'start:step:stop'")
        start, step, stop = (float(p) for p in parts)
        if step <= 0:
            raise ConfigError(f"snr '{spec}': step must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return start + step * np.arange(max(n, 1))
    raise ConfigError(f"snr: unsupported value {spec!r}")


def _resolve_config(experiment: str, overrides: dict) -> dict:
    if experiment not in _DEFAULTS:
        raise ConfigError(f"unknown experiment '{experiment}' "
                          f"(choose from {sorted(_DEFAULTS)})")
    cfg = dict(_DEFAULTS_COMMON)
    cfg.update(_DEFAULTS[experiment])
    for key, val in overrides.items():
        if val is None:
            continue
        if key not in cfg and key != "experiment":
            raise ConfigError(f"config key '{key}' is not valid for experiment "
                              f"'{experiment}' (valid: {sorted(cfg)})")
        if key != "experiment":
            cfg[key] = val
    cfg["experiment"] = experiment
    return cfg


def _git_describe() -> str | None:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5)
        return out.stdout.strip() or None
    except (OSError, subprocess.SubprocessError):
        return None


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _scenario_seed(root_seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(root_seed, spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _ebn0_db(snr_db: float, num: Numerology, bits_per_symbol: int) -> float:
    return snr_db + 10.0 * np.log10(num.n / num.m) - 10.0 * np.log10(bits_per_symbol)


# ---------------------------------------------------------------- waveform-mse

def _tx_packets_for_mse(cfg, num, uw, rng):
    """Same data through both transmitters: SC packet and CP-free UW packet."""
    conste = Constellation.by_name(cfg["mod"])
    k = conste.bits_per_symbol
    bits = rng.integers(0, 2, size=cfg["n_blocks"] * num.m_d * k)
    d = map_bits(bits, conste).reshape(cfg["n_blocks"], num.m_d)
    f = design_rrc(num.l_tx, cfg["rolloff"], num.a)
    blocks = [sc_modulate_block(d[i], uw, num, f) for i in range(cfg["n_blocks"])]
    sc_packet = sc_assemble_packet(blocks, uw, num, f)
    smap = SubcarrierMap.centered(num.m, num.n)
    uw_packet = uw_assemble_packet(
        [uw_modulate_symbol(d[i], uw, smap) for i in range(cfg["n_blocks"])], n_cp=0)
    return sc_packet, uw_packet


def _run_waveform_mse(cfg: dict, out: Path) -> dict:
    num = Numerology.ieee80211ad(channel_taps=0, m_h=cfg["m_h"])
    uw = unique_word_for(num.m_t, num.m_h)
    rng = np.random.default_rng(np.random.SeedSequence(cfg["seed"], spawn_key=(0,)))
    sc_packet, uw_packet = _tx_packets_for_mse(cfg, num, uw, rng)
    overlap = min(len(sc_packet) - num.n_t, len(uw_packet))
    mse = waveform_mse_db(sc_packet, uw_packet, offset=num.n_t)

    csv_path = out / "waveform_mse.csv"
    _write_csv(csv_path,
               ["rolloff", "modulation", "n_blocks", "offset_samples",
                "overlap_samples", "mse_db"],
               [[cfg["rolloff"], cfg["mod"], cfg["n_blocks"], num.n_t,
                 overlap, f"{mse:.6f}"]])
    outputs = {"csv": [csv_path.name], "figures": [], "iq": []}
    if cfg["figures"]:
        fig_path = out / "waveform_mse.png"
        plots.save_waveform_overlay(fig_path, sc_packet, uw_packet, num.n_t, mse)
        outputs["figures"].append(fig_path.name)
    if cfg["dump_iq"]:
        stem = Path(cfg["dump_iq"])
        for tag, vec in (("sc", sc_packet), ("uw", uw_packet)):
            p = stem.with_name(f"{stem.stem}_{tag}{stem.suffix or '.iq'}")
            write_iq(p, vec)
            outputs["iq"].append(str(p))
    return {"outputs": outputs, "summary": {"mse_db": mse, "offset": num.n_t}}


# ------------------------------------------------------------------------ papr

def _papr_blocks(waveform: str, mod: str, cfg, num, uw, seed: int, n_blocks: int):
    """Per-epoch interior blocks of each waveform, synthesized in batches."""
    conste = Constellation.by_name(mod)
    smap = SubcarrierMap.centered(num.m, num.n)
    # keep the epoch offset inside the exact-rewrite window so SC epochs are
    # true packet slices
    num_sc = num.with_offsets(n_t=min(num.n_t, num.n_t_window[1]))
    f = design_rrc(num.l_tx, cfg["rolloff"], num.a)
    lam = transmit_shaping_gains(f, num_sc)
    window = design_fd_window(num.m, num.n, cfg["extension_bins"], cfg["rolloff"])
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    k = conste.bits_per_symbol
    chunk = 8192
    paprs = []
    done = 0
    while done < n_blocks:
        nb = min(chunk, n_blocks - done)
        bits = rng.integers(0, 2, size=nb * num.m_d * k)
        d = map_bits(bits, conste).reshape(nb, num.m_d)
        if waveform == "sc":
            blocks = sc_modulate_block_dft(d, uw, num_sc, lam)
        elif waveform == "uw":
            blocks = uw_modulate_symbol(d, uw, smap)
        elif waveform == "uww":
            blocks = uw_w_modulate(d, uw, smap, window)
        else:
            raise ConfigError(f"unknown waveform '{waveform}'")
        paprs.append(block_paprs_db(blocks, cfg["oversample"]))
        done += nb
    return np.concatenate(paprs)


def _run_papr(cfg: dict, out: Path) -> dict:
    num = Numerology.ieee80211ad(channel_taps=0, m_h=cfg["m_h"])
    uw = unique_word_for(num.m_t, num.m_h)
    thresholds = np.arange(0.0, 13.0 + 1e-9, 0.05)
    rows, summary, curves = [], {}, {}
    for mi, mod in enumerate(cfg["mods"]):
        for wi, wf in enumerate(cfg["waveforms"]):
            seed = _scenario_seed(cfg["seed"], 1, mi, wi)
            paprs = _papr_blocks(wf, mod, cfg, num, uw, seed, cfg["n_blocks"])
            probs = np.array([(paprs > t).mean() for t in thresholds])
            label = f"{wf}_{mod}"
            curves[label] = (thresholds, probs)
            summary[label] = papr_at_ccdf(paprs, cfg["ccdf_ref"])
            rows.extend([[wf, mod, f"{t:.2f}", repr(float(p))]
                         for t, p in zip(thresholds, probs)])

    csv_path = out / "papr.csv"
    _write_csv(csv_path, ["waveform", "modulation", "threshold_db", "ccdf"], rows)
    per_curve = []
    for label, (t, p) in curves.items():
        path = out / f"papr_{label}.csv"
        _write_csv(path, ["threshold_db", "ccdf"],
                   [[f"{ti:.2f}", repr(float(pi))] for ti, pi in zip(t, p)])
        per_curve.append(path.name)
    outputs = {"csv": [csv_path.name] + per_curve, "figures": [], "iq": []}
    if cfg["figures"]:
        fig_path = out / "papr.png"
        plots.save_ccdf(fig_path, curves)
        outputs["figures"].append(fig_path.name)
    return {"outputs": outputs,
            "summary": {f"papr_db_at_ccdf_{cfg['ccdf_ref']:g}": summary}}


# ------------------------------------------------------------------- BER loops

def _ber_point_awgn(pairing, snr_db, cfg, num, snr_idx):
    # trial seeds are shared across pairings so curves are directly comparable
    tx, rx = pairing
    bits = errors = 0
    trial = 0
    while (errors < cfg["min_errors"] or bits < cfg["min_bits"]) and bits < cfg["max_bits"]:
        s = LinkScenario(
            tx_kind=tx, rx_kind=rx, numerology=num, constellation=cfg["mod"],
            rolloff=cfg["rolloff"], channel="awgn", snr_db=float(snr_db),
            seed=_scenario_seed(cfg["seed"], 2, snr_idx, trial),
            n_blocks=cfg["n_blocks"])
        r = run_link(s)
        bits += r.tx_bits.size
        errors += r.n_bit_errors
        trial += 1
    return bits, errors


def _ber_point_fading(pairing, snr_db, cfg, num, snr_idx):
    # every pairing sees the same channel draws, data, and noise realizations
    tx, rx = pairing
    bits = errors = 0
    for trial in range(cfg["n_channels"]):
        s = LinkScenario(
            tx_kind=tx, rx_kind=rx, numerology=num, constellation=cfg["mod"],
            rolloff=cfg["rolloff"], channel="tdl", channel_memory=cfg["taps"],
            decay_db_per_tap=cfg["decay_db_per_tap"], snr_db=float(snr_db),
            seed=_scenario_seed(cfg["seed"], 3, snr_idx, trial),
            n_blocks=cfg["n_blocks"],
            extension_bins=cfg.get("extension_bins", 51))
        r = run_link(s)
        bits += r.tx_bits.size
        errors += r.n_bit_errors
    return bits, errors


def _pairing_label(p) -> str:
    return f"{p[0]}-{p[1]}"


def _run_ber_awgn(cfg: dict, out: Path) -> dict:
    num = Numerology.ieee80211ad(channel_taps=0, m_h=cfg["m_h"])
    snrs = parse_snr_range(cfg["snr"])
    kbits = Constellation.by_name(cfg["mod"]).bits_per_symbol
    rows, curves = [], {}
    for pi, pairing in enumerate(cfg["pairings"]):
        pts = []
        for si, snr in enumerate(snrs):
            bits, errors = _ber_point_awgn(pairing, snr, cfg, num, si)
            b = errors / bits
            stderr = np.sqrt(max(b * (1 - b), 1e-30) / bits)
            ebn0 = _ebn0_db(snr, num, kbits)
            rows.append([_pairing_label(pairing), f"{snr:.3f}", f"{ebn0:.3f}",
                         repr(b), repr(float(stderr)), bits, errors])
            pts.append((snr, b))
        curves[_pairing_label(pairing)] = pts
    if cfg["mod"] in ("qpsk", "bpsk"):
        bound = [(s, float(qpsk_awgn_ber(_ebn0_db(s, num, kbits)))) for s in snrs]
        curves["analytic"] = bound
        for s, b in bound:
            rows.append(["analytic", f"{s:.3f}", f"{_ebn0_db(s, num, kbits):.3f}",
                         repr(b), repr(0.0), 0, 0])
    csv_path = out / "ber_awgn.csv"
    _write_csv(csv_path, ["pairing", "snr_db", "ebn0_db", "ber", "stderr",
                          "n_bits", "n_errors"], rows)
    outputs = {"csv": [csv_path.name], "figures": [], "iq": []}
    if cfg["figures"]:
        fig_path = out / "ber_awgn.png"
        plots.save_ber(fig_path, curves, xlabel="SNR per received sample (dB)")
        outputs["figures"].append(fig_path.name)
    return {"outputs": outputs,
            "summary": {lbl: dict(pts) for lbl, pts in curves.items() if lbl != "analytic"}}


def _run_fading_common(cfg: dict, out: Path, stem: str) -> dict:
    num = Numerology.ieee80211ad(channel_taps=cfg["taps"], m_h=cfg["m_h"])
    snrs = parse_snr_range(cfg["snr"])
    rows, curves = [], {}
    for pi, pairing in enumerate(cfg["pairings"]):
        pts = []
        for si, snr in enumerate(snrs):
            bits, errors = _ber_point_fading(pairing, snr, cfg, num, si)
            b = errors / bits
            rows.append([_pairing_label(pairing), f"{snr:.3f}", repr(b),
                         bits, errors, cfg["n_channels"]])
            pts.append((float(snr), b))
        curves[_pairing_label(pairing)] = pts
    csv_path = out / f"{stem}.csv"
    _write_csv(csv_path, ["pairing", "snr_db", "ber", "n_bits", "n_errors",
                          "n_channels"], rows)
    outputs = {"csv": [csv_path.name], "figures": [], "iq": []}
    if cfg["figures"]:
        fig_path = out / f"{stem}.png"
        plots.save_ber(fig_path, curves, xlabel="SNR per received sample (dB)")
        outputs["figures"].append(fig_path.name)
    return {"outputs": outputs, "summary": {lbl: dict(pts) for lbl, pts in curves.items()}}


def _run_ber_fading(cfg: dict, out: Path) -> dict:
    return _run_fading_common(cfg, out, "ber_fading")


def _run_crosslink(cfg: dict, out: Path) -> dict:
    result = _run_fading_common(cfg, out, "crosslink")
    summary = result["summary"]
    snrs = parse_snr_range(cfg["snr"])
    hi, lo = float(snrs[-1]), float(snrs[-2]) if len(snrs) > 1 else float(snrs[-1])
    ratios = {}
    for label, pts in summary.items():
        if hi in pts and lo in pts:
            if pts[lo] > 0:
                ratios[label] = pts[hi] / pts[lo]
            else:
                # error-free at both points: the curve kept falling, ratio 0
                ratios[label] = 0.0 if pts[hi] == 0 else float("inf")
    result["summary"] = {"ber": summary, f"ber_ratio_{hi:g}dB_over_{lo:g}dB": ratios}
    return result


EXPERIMENTS = {
    "waveform-mse": _run_waveform_mse,
    "papr": _run_papr,
    "ber-awgn": _run_ber_awgn,
    "ber-fading": _run_ber_fading,
    "crosslink": _run_crosslink,
}


def run_experiment(experiment: str, overrides: dict | None = None) -> dict:
    """Resolve the config, run the named experiment, and persist results.

    Returns the manifest dict (also written to <out>/manifest.json).
    """
    cfg = _resolve_config(experiment, overrides or {})
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.monotonic()
    result = EXPERIMENTS[experiment](cfg, out)
    manifest = {
        "schema_version": MANIFEST_SCHEMA,
        "csv_schema_version": CSV_SCHEMA,
        "experiment": experiment,
        "config": {k: v for k, v in cfg.items() if k != "experiment"},
        "outputs": result["outputs"],
        "summary": result["summary"],
        "git": _git_describe(),
        "wall_time_s": round(time.monotonic() - t0, 3),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    with (out / "manifest.json").open("w") as fh:
        json.dump(manifest, fh, indent=2, default=float)
        fh.write("\n")
    return manifest
