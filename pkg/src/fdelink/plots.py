"""Figure rendering for experiment reports (PNG files next to the CSVs)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["save_waveform_overlay", "save_ccdf", "save_ber"]


def save_waveform_overlay(path, sc_packet, uw_packet, offset: int, mse_db: float,
                          span: int = 600) -> None:
    """Real parts of both waveforms over a window, plus the aligned error."""
    sc_packet = np.asarray(sc_packet)
    uw_packet = np.asarray(uw_packet)
    n = min(span, len(uw_packet), len(sc_packet) - offset)
    t = np.arange(n)
    fig, (ax0, ax1) = plt.subplots(2, 1, figsize=(8, 5), sharex=True)
    ax0.plot(t, sc_packet[offset:offset + n].real, lw=0.9, label="SC (offset)")
    ax0.plot(t, uw_packet[:n].real, lw=0.9, ls="--", label="UW DFT-s-OFDM")
    ax0.set_ylabel("real part")
    ax0.legend(loc="upper right", fontsize=8)
    ax0.set_title(f"aligned waveforms, MSE = {mse_db:.1f} dB")
    err = np.abs(sc_packet[offset:offset + n] - uw_packet[:n])
    ax1.semilogy(t, np.maximum(err, 1e-12), lw=0.9, color="tab:red")
    ax1.set_ylabel("|difference|")
    ax1.set_xlabel("sample")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ccdf(path, curves: dict) -> None:
    """curves: label -> (thresholds_db, probabilities)."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, (t, p) in curves.items():
        mask = np.asarray(p) > 0
        ax.semilogy(np.asarray(t)[mask], np.asarray(p)[mask], label=label, lw=1.1)
    ax.set_xlabel("PAPR threshold (dB)")
    ax.set_ylabel("CCDF")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_ber(path, curves: dict, xlabel: str = "SNR (dB)") -> None:
    """curves: label -> list of (snr_db, ber) points."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for label, pts in curves.items():
        pts = sorted(pts)
        x = [p[0] for p in pts]
        y = [max(p[1], 1e-12) for p in pts]
        style = dict(ls="--", color="k", lw=1.0) if label == "analytic" else dict(lw=1.1, marker="o", ms=3)
        ax.semilogy(x, y, label=label, **style)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
