"""Transmit/receive pulse shapes (RRC) and frequency-domain windows.

The RRC follows the standard continuous-time root-raised-cosine response
sampled at `samples_per_symbol` per symbol, truncated symmetrically and
normalized to unit energy. Frequency windows are real, non-negative, and
power-complementary across their cyclic M-shift so that despreading stays
invertible.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import read_vector_csv, write_vector_csv

__all__ = ["PulseShape", "FrequencyWindow", "design_rrc", "matched_filter", "design_fd_window"]


@dataclass(frozen=True)
class PulseShape:
    """Unit-energy FIR pulse with its design metadata."""

    taps: np.ndarray
    rolloff: float
    samples_per_symbol: int

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        object.__setattr__(self, "taps", taps)
        if len(taps) % 2 == 0:
            raise ValueError("pulse length must be odd")
        if not np.isclose(np.linalg.norm(taps), 1.0, atol=1e-9):
            raise ValueError("pulse must have unit l2 energy")

    def __len__(self) -> int:
        return len(self.taps)

    @property
    def group_delay(self) -> int:
        return (len(self.taps) - 1) // 2

    def to_csv(self, path) -> None:
        write_vector_csv(path, self.taps)

    @classmethod
    def from_csv(cls, path, rolloff: float = 0.0, samples_per_symbol: int = 1) -> "PulseShape":
        return cls(read_vector_csv(path), rolloff, samples_per_symbol)


@dataclass(frozen=True)
class FrequencyWindow:
    """Real per-bin gains over a contiguous band of `support_width` bins."""

    gains: np.ndarray
    band_width: int          # M, the despreader size
    extension_bins: int      # bins added on each side of the band

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=np.float64)
        object.__setattr__(self, "gains", gains)
        if np.any(gains < 0) or not np.all(np.isfinite(gains)):
            raise ValueError("window gains must be finite and non-negative")
        if len(gains) != self.band_width + 2 * self.extension_bins:
            raise ValueError("gain vector does not match band width plus extensions")

    @property
    def support_width(self) -> int:
        return len(self.gains)


def design_rrc(num_taps: int, rolloff: float, samples_per_symbol: int) -> PulseShape:
    """Root-raised-cosine pulse, truncated to `num_taps` and unit-normalized.

    The removable singularities at t = 0 and |t| = T/(4*rolloff) are
    evaluated by their analytic limits. rolloff = 0 reduces to a sinc.
    """
    if num_taps % 2 == 0 or num_taps < 1:
        raise ValueError("num_taps must be odd and positive")
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("rolloff must be in [0, 1]")
    if samples_per_symbol < 1:
        raise ValueError("samples_per_symbol must be >= 1")

    t = (np.arange(num_taps) - (num_taps - 1) / 2) / samples_per_symbol
    h = np.empty(num_taps)
    for i, ti in enumerate(t):
        if abs(ti) < 1e-12:
            h[i] = 1.0 - rolloff + 4.0 * rolloff / np.pi
        elif rolloff > 0 and abs(abs(ti) - 1.0 / (4.0 * rolloff)) < 1e-9:
            h[i] = (rolloff / np.sqrt(2.0)) * (
                (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * rolloff))
                + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * rolloff))
            )
        else:
            num = np.sin(np.pi * ti * (1.0 - rolloff)) + 4.0 * rolloff * ti * np.cos(np.pi * ti * (1.0 + rolloff))
            den = np.pi * ti * (1.0 - (4.0 * rolloff * ti) ** 2)
            h[i] = num / den
    h /= np.linalg.norm(h)
    return PulseShape(h.astype(np.complex128), rolloff, samples_per_symbol)


def matched_filter(f: PulseShape) -> PulseShape:
    """Conjugated, time-reversed copy of f; self-inverse for real symmetric pulses."""
    return PulseShape(np.conj(f.taps[::-1]), f.rolloff, f.samples_per_symbol)


def design_fd_window(band_width: int, dft_size: int, extension_bins: int, rolloff: float) -> FrequencyWindow:
    """Real RRC-shaped window over band_width + 2*extension_bins contiguous bins.

    Gains are exactly 1 over the inner band_width - 2*extension_bins bins and
    roll off as a square-root raised cosine over each 2*extension_bins-wide
    transition, built so gain[k]^2 + gain[k + band_width]^2 == 1 across the
    overlap (the cyclic M-shifted copies of a spread symbol stay combinable).
    extension_bins = 0 degenerates to the rectangular window of UW DFT-s-OFDM.
    """
    if band_width < 1 or dft_size < 1:
        raise ValueError("band_width and dft_size must be positive")
    if extension_bins < 0:
        raise ValueError("extension_bins must be non-negative")
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("rolloff must be in [0, 1]")
    support = band_width + 2 * extension_bins
    if support > dft_size:
        raise ValueError(f"window support {support} exceeds DFT size {dft_size}")
    if 2 * extension_bins > band_width:
        raise ValueError("transitions overlap: extension_bins too large for band_width")

    gains = np.ones(support)
    e = extension_bins
    if e > 0:
        x = (np.arange(2 * e) + 0.5) / (2 * e)
        gains[:2 * e] = np.sin(0.5 * np.pi * x)          # rising edge
        gains[band_width:] = np.cos(0.5 * np.pi * x)     # falling edge, mirror
    return FrequencyWindow(gains, band_width, extension_bins)
