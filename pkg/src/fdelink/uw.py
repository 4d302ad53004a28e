"""UW DFT-s-OFDM: spread-and-map transmitter, FDE receiver, the windowed
variant (UW DFT-s-W-OFDM), and the two-stage phase-then-amplitude equalizer.

Subcarrier mapping places the DC bin of the spread vector at the center of
the occupied band; with the default band centered on DC this coincides with
the image an SC low-pass transmit pulse selects, which is what makes the two
waveforms line up sample-by-sample at the right epoch offset.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modem import UniqueWord
from .multirate import dft, idft
from .pulses import FrequencyWindow, design_fd_window

__all__ = [
    "SubcarrierMap",
    "uw_modulate_symbol",
    "uw_assemble_packet",
    "build_mmse_uw",
    "uw_demodulate",
    "uw_w_modulate",
    "two_stage_equalize",
    "single_alias_equalize",
    "default_cp_len",
]


@dataclass(frozen=True)
class SubcarrierMap:
    """M contiguous bins (modulo N) carrying an fftshifted M-point spread.

    start_bin is the first occupied bin; position j carries spread index
    (j + M//2) mod M, so the spread DC lands mid-band.
    """

    n: int
    m: int
    start_bin: int

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise ValueError("band width must satisfy 1 <= m <= n")
        object.__setattr__(self, "start_bin", self.start_bin % self.n)

    @classmethod
    def centered(cls, m: int, n: int) -> "SubcarrierMap":
        """Band centered on DC: start_bin = -m/2 mod n."""
        return cls(n=n, m=m, start_bin=(-(m // 2)) % n)

    def bins(self, extension: int = 0) -> np.ndarray:
        """Occupied bins, optionally extended by `extension` on each side."""
        width = self.m + 2 * extension
        if width > self.n:
            raise ValueError("extended band exceeds the DFT size")
        return (self.start_bin - extension + np.arange(width)) % self.n

    def spread_indices(self, extension: int = 0) -> np.ndarray:
        """Spread index carried at each band position (cyclic beyond the band)."""
        width = self.m + 2 * extension
        return ((np.arange(width) - extension) + self.m // 2) % self.m


def _split_parts(v: np.ndarray, uw: UniqueWord, m: int):
    m_h, m_t = uw.n_head, uw.n_tail
    m_d = m - m_h - m_t
    return v[..., :m_h], v[..., m_h:m_h + m_d], v[..., m_h + m_d:]


def _spread(d, uw: UniqueWord, m: int) -> np.ndarray:
    d = np.asarray(d, dtype=np.complex128)
    m_d = m - len(uw)
    if d.shape[-1] != m_d:
        raise ValueError(f"expected {m_d} data symbols, got {d.shape}")
    batched = d.ndim == 2
    if not batched:
        d = d[None, :]
    rows = d.shape[0]
    v = np.concatenate([
        np.broadcast_to(uw.head, (rows, uw.n_head)),
        d,
        np.broadcast_to(uw.tail, (rows, uw.n_tail)),
    ], axis=1)
    return dft(v), batched


def uw_modulate_symbol(d, uw: UniqueWord, smap: SubcarrierMap) -> np.ndarray:
    """One symbol: F_N^H map(F_M [head; d; tail]). Accepts a batch on axis 0."""
    (V, batched) = _spread(d, uw, smap.m)
    rows = V.shape[0]
    x_freq = np.zeros((rows, smap.n), dtype=np.complex128)
    x_freq[:, smap.bins()] = V[:, smap.spread_indices()]
    x = idft(x_freq)
    return x if batched else x[0]


def uw_w_modulate(d, uw: UniqueWord, smap: SubcarrierMap,
                  window: FrequencyWindow) -> np.ndarray:
    """Windowed symbol: the spread is cyclically extended over the window
    support, scaled by the window gains, mapped, and returned to time.
    A zero-extension flat window reproduces uw_modulate_symbol exactly."""
    if window.band_width != smap.m:
        raise ValueError("window band width does not match the subcarrier map")
    e = window.extension_bins
    (V, batched) = _spread(d, uw, smap.m)
    rows = V.shape[0]
    x_freq = np.zeros((rows, smap.n), dtype=np.complex128)
    x_freq[:, smap.bins(e)] = window.gains[None, :] * V[:, smap.spread_indices(e)]
    x = idft(x_freq)
    return x if batched else x[0]


def uw_assemble_packet(symbols, n_cp: int) -> np.ndarray:
    """Concatenate symbols back to back, prefixing only the first with a
    cyclic prefix of n_cp samples (each symbol's tail already serves as the
    next one's guard)."""
    if len(symbols) < 1:
        raise ValueError("need at least one symbol")
    if n_cp < 0:
        raise ValueError("cyclic prefix length must be non-negative")
    symbols = [np.asarray(s, dtype=np.complex128) for s in symbols]
    n = len(symbols[0])
    if any(len(s) != n for s in symbols):
        raise ValueError("all symbols must have the same length")
    if n_cp > n:
        raise ValueError("cyclic prefix cannot exceed the symbol length")
    head = symbols[0][n - n_cp:] if n_cp else np.empty(0, dtype=np.complex128)
    return np.concatenate([head] + symbols)


def default_cp_len(smap: SubcarrierMap, n_tail: int) -> int:
    """Default first-symbol prefix: n - floor(n_tail*n/m), capped at n/8."""
    return min(smap.n // 8, smap.n - (n_tail * smap.n) // smap.m)


def channel_bin_gains(h, n: int) -> np.ndarray:
    """Per-bin channel response sqrt(N) F_N [h; 0] on the N-point grid."""
    h = np.asarray(h, dtype=np.complex128)
    if len(h) > n:
        raise ValueError("channel taps exceed the DFT size")
    return np.fft.fft(h, n)


def build_mmse_uw(h, n: int, smap: SubcarrierMap, noise_var: float):
    """Per-bin MMSE gains conj(H)/(|H|^2 + sigma^2), zero outside the band."""
    from .sc import EqualizerGains  # local import to avoid a module cycle

    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    q = channel_bin_gains(h, n)
    denom = np.abs(q) ** 2 + noise_var
    gains = np.divide(np.conj(q), denom, out=np.zeros_like(q), where=denom > 0)
    mask = np.zeros(n, dtype=bool)
    mask[smap.bins()] = True
    gains[~mask] = 0.0
    return EqualizerGains(gains, noise_var, "mmse-uw")


def uw_demodulate(e, smap: SubcarrierMap, eq, uw: UniqueWord):
    """Receiver for one symbol period: F_M^H demap(E F_N e).

    Returns (head, data, tail) estimates of lengths (m_h, m_d, m_t).
    """
    e = np.asarray(e, dtype=np.complex128)
    if e.shape != (smap.n,):
        raise ValueError(f"expected {smap.n} samples, got {e.shape}")
    x_freq = dft(e)
    v_freq = np.zeros(smap.m, dtype=np.complex128)
    v_freq[smap.spread_indices()] = eq.gains[smap.bins()] * x_freq[smap.bins()]
    v = idft(v_freq)
    return _split_parts(v, uw, smap.m)


def two_stage_equalize(received_bins, channel_freq, window: FrequencyWindow,
                       smap: SubcarrierMap, noise_var: float) -> np.ndarray:
    """Phase-first equalization, SNR-weighted alias combining, then scalar
    amplitude MMSE. Input/outputs are frequency-domain vectors:

    received_bins: the window-support bins of the received symbol's DFT
    channel_freq:  the channel response at those same bins

    Returns the M combined spread-domain bins, ready for F_M^H despreading.
    On a flat real channel with a rectangular window this reduces exactly to
    single-stage MMSE. Bins with |H| = 0 get zero combining weight.
    """
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    if window.band_width != smap.m:
        raise ValueError("window band width does not match the subcarrier map")
    e = window.extension_bins
    width = smap.m + 2 * e
    r = np.asarray(received_bins, dtype=np.complex128)
    hf = np.asarray(channel_freq, dtype=np.complex128)
    if r.shape != (width,) or hf.shape != (width,):
        raise ValueError(f"expected {width} support bins")

    habs = np.abs(hf)
    phase = np.divide(np.conj(hf), habs, out=np.zeros_like(hf), where=habs > 0)
    z = phase * r                      # stage 1: phase-aligned observations
    amp = habs * window.gains          # per-bin signal amplitude after stage 1

    sidx = smap.spread_indices(e)
    combined = np.zeros(smap.m, dtype=np.complex128)
    weight_sq = np.zeros(smap.m)
    np.add.at(combined, sidx, amp * z)  # matched (SNR-proportional) combining
    np.add.at(weight_sq, sidx, amp ** 2)

    denom = weight_sq + noise_var
    return np.divide(combined, denom, out=np.zeros_like(combined), where=denom > 0)


def single_alias_equalize(received_bins, channel_freq, window: FrequencyWindow,
                          smap: SubcarrierMap, noise_var: float) -> np.ndarray:
    """Baseline that equalizes only the primary band copy of each spread bin
    (per-bin MMSE on the composite gain H*W), discarding the extension
    aliases. Same in/out conventions as two_stage_equalize."""
    if window.band_width != smap.m:
        raise ValueError("window band width does not match the subcarrier map")
    e = window.extension_bins
    width = smap.m + 2 * e
    r = np.asarray(received_bins, dtype=np.complex128)
    hf = np.asarray(channel_freq, dtype=np.complex128)
    if r.shape != (width,) or hf.shape != (width,):
        raise ValueError(f"expected {width} support bins")
    main = slice(e, e + smap.m)
    comp = hf[main] * window.gains[main]
    denom = np.abs(comp) ** 2 + noise_var
    eq = np.divide(np.conj(comp), denom, out=np.zeros_like(comp), where=denom > 0)
    out = np.zeros(smap.m, dtype=np.complex128)
    out[smap.spread_indices()] = eq * r[main]
    return out


def rect_window(m: int, n: int) -> FrequencyWindow:
    """The degenerate all-ones window of plain UW DFT-s-OFDM."""
    return design_fd_window(m, n, 0, 0.0)
