"""Waveform and link metrics: PAPR CCDF, bit error rate, waveform MSE."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

__all__ = [
    "CcdfCurve",
    "papr_ccdf",
    "block_paprs_db",
    "papr_at_ccdf",
    "ber",
    "waveform_mse_db",
    "qfunc",
    "qpsk_awgn_ber",
]

MSE_FLOOR_DB = -300.0


@dataclass(frozen=True)
class CcdfCurve:
    """P(PAPR > threshold) sampled on a threshold grid."""

    thresholds_db: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.thresholds_db, dtype=np.float64)
        p = np.asarray(self.probabilities, dtype=np.float64)
        object.__setattr__(self, "thresholds_db", t)
        object.__setattr__(self, "probabilities", p)
        if t.shape != p.shape:
            raise ValueError("thresholds and probabilities must have equal length")
        if np.any(np.diff(p) > 0):
            raise ValueError("CCDF must be non-increasing in threshold")


def block_paprs_db(blocks: np.ndarray, oversample: int = 2) -> np.ndarray:
    """Peak/mean power ratio in dB per row, after FD zero-pad oversampling."""
    blocks = np.atleast_2d(np.asarray(blocks, dtype=np.complex128))
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    n = blocks.shape[-1]
    if oversample == 1:
        y = blocks
    else:
        spec = np.fft.fft(blocks, axis=-1)
        padded = np.zeros(blocks.shape[:-1] + (n * oversample,), dtype=np.complex128)
        padded[..., :n // 2] = spec[..., :n // 2]
        padded[..., -(n - n // 2):] = spec[..., n // 2:]
        y = np.fft.ifft(padded, axis=-1) * oversample
    p = np.abs(y) ** 2
    mean = p.mean(axis=-1)
    if np.any(mean == 0):
        raise ValueError("cannot measure PAPR of an all-zero block")
    return 10.0 * np.log10(p.max(axis=-1) / mean)


def papr_ccdf(packet, block_len: int, oversample: int = 2,
              thresholds_db: np.ndarray | None = None) -> CcdfCurve:
    """CCDF of per-block PAPR over a packet chopped into block_len pieces."""
    packet = np.asarray(packet, dtype=np.complex128)
    if block_len < 1 or len(packet) < block_len:
        raise ValueError("packet shorter than one block")
    n_blocks = len(packet) // block_len
    blocks = packet[:n_blocks * block_len].reshape(n_blocks, block_len)
    paprs = block_paprs_db(blocks, oversample)
    if thresholds_db is None:
        thresholds_db = np.arange(0.0, 14.0 + 1e-9, 0.1)
    probs = np.array([(paprs > t).mean() for t in thresholds_db])
    return CcdfCurve(np.asarray(thresholds_db, dtype=np.float64), probs)


def papr_at_ccdf(paprs_db: np.ndarray, prob: float) -> float:
    """PAPR threshold exceeded with probability `prob` (empirical quantile)."""
    if not 0 < prob < 1:
        raise ValueError("prob must be in (0, 1)")
    return float(np.quantile(np.asarray(paprs_db, dtype=np.float64), 1.0 - prob))


def ber(tx_bits, rx_bits) -> float:
    """Hamming-error fraction between two equal-length bit arrays."""
    tx = np.asarray(tx_bits).reshape(-1)
    rx = np.asarray(rx_bits).reshape(-1)
    if tx.shape != rx.shape:
        raise ValueError(f"bit arrays differ in length: {tx.shape} vs {rx.shape}")
    if tx.size == 0:
        raise ValueError("empty bit arrays")
    return float(np.mean(tx != rx))


def waveform_mse_db(x, y, offset: int = 0) -> float:
    """10*log10(|x_al - y_al|^2 / |x_al|^2) with x advanced by `offset` and the
    comparison taken over the overlapping region. Identical inputs report the
    floor value -300 dB."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if offset < 0 or offset >= len(x):
        raise ValueError("offset must lie inside the first waveform")
    overlap = min(len(x) - offset, len(y))
    if overlap < 1:
        raise ValueError("waveforms do not overlap at this offset")
    xa = x[offset:offset + overlap]
    ya = y[:overlap]
    ref = np.sum(np.abs(xa) ** 2)
    if ref == 0:
        raise ValueError("reference region is all zero")
    ratio = np.sum(np.abs(xa - ya) ** 2) / ref
    if ratio < 1e-30:
        return MSE_FLOOR_DB
    return float(10.0 * np.log10(ratio))


def qfunc(x) -> np.ndarray:
    """Gaussian tail probability Q(x)."""
    return 0.5 * erfc(np.asarray(x, dtype=np.float64) / np.sqrt(2.0))


def qpsk_awgn_ber(ebn0_db) -> np.ndarray:
    """Analytic uncoded QPSK (and BPSK) bit error rate, Q(sqrt(2 Eb/N0))."""
    ebn0 = 10.0 ** (np.asarray(ebn0_db, dtype=np.float64) / 10.0)
    return qfunc(np.sqrt(2.0 * ebn0))
