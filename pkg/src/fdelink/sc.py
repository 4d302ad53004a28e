"""Single-carrier FDE chain: block synthesis, overlap-add packets, epochs,
MMSE equalization, and the exact DFT-domain rewrites of both chain ends.

Conventions fixed here (and pinned by the dual-path tests):

* circ-shift orientation is "delay by tau" (np.roll), so the transmit
  shaping kernel is the pulse rolled by tau1 = (M_s - M_h)*a - N_t*b and
  the equalizer kernel is the effective channel rolled by
  tau0 = (M_s - M_h)*a - N_g*b - L_rx + 1.
* The receive filter is applied as a correlation (the Hermitian of the
  convolution matrix), which on the cyclic core of an epoch equals a
  circular convolution with conj(flip(g)) at shift 0.
* The DFT transmit path reproduces time-domain packet slices exactly
  only while O_tx <= N_t <= (a/b)*M_s: beyond that window the outermost
  pulse taps reach the next block's data, so the zero-phase alignment
  N_t = ((M_s - M_h)*a + (L_tx-1)/2)/b is exact only when M_h is large
  enough to keep N_t inside the window (M_h >= ceil((L_tx-1)/(2a))).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .modem import UniqueWord
from .multirate import (
    circ_shift,
    circulant_eigenvalues,
    dft,
    downsample_time,
    idft,
    linear_convolve,
    upsample_time,
)
from .pulses import PulseShape

__all__ = [
    "Numerology",
    "EqualizerGains",
    "GuardCheck",
    "ValidationReport",
    "validate_numerology",
    "admissible_guard_range",
    "default_guard_offset",
    "condition1_offset",
    "nt_for_condition1",
    "sc_modulate_block",
    "sc_assemble_packet",
    "epoch_extract",
    "build_mmse_sc",
    "sc_demodulate_epoch",
    "transmit_shaping_gains",
    "rectangular_shaping_gains",
    "receive_shaping_gains",
    "sc_modulate_block_dft",
    "sc_demodulate_epoch_dft",
    "alias_combining_weights",
]


@dataclass(frozen=True)
class Numerology:
    """Block sizes, resampling factors, filter lengths, and alignment offsets.

    m: symbols per block; m_s of them fixed (m_h head + m_t tail), m_d data.
    a/b: up/down-sampling factors of the transmit chain (b <= a).
    n_g: receiver guard discard, samples at the transmit output rate.
    n_t: transmitter epoch offset, same rate.
    """

    m: int
    m_s: int
    m_h: int
    a: int
    b: int
    l_tx: int
    l_rx: int
    n_g: int
    n_t: int

    def __post_init__(self):
        if min(self.m, self.m_s, self.a, self.b, self.l_tx, self.l_rx) < 1:
            raise ValueError("sizes and factors must be positive")
        if self.m_h < 0 or self.m_h > self.m_s:
            raise ValueError("m_h must lie in [0, m_s]")
        if self.m_s >= self.m:
            raise ValueError("fixed part must leave room for data (m_s < m)")
        if self.b > self.a:
            raise ValueError("requires b <= a")
        if (self.a * self.m) % self.b:
            raise ValueError("b must divide a*m")
        if (self.l_tx - 1) % self.b or (self.l_rx - 1) % self.b:
            raise ValueError("b must divide l_tx - 1 and l_rx - 1")
        if self.n_g < 0 or self.n_t < 0:
            raise ValueError("offsets must be non-negative")

    @property
    def m_t(self) -> int:
        return self.m_s - self.m_h

    @property
    def m_d(self) -> int:
        return self.m - self.m_s

    @property
    def k(self) -> int:
        return self.a * self.m

    @property
    def n(self) -> int:
        return self.a * self.m // self.b

    @property
    def o_tx(self) -> int:
        return (self.l_tx - 1) // self.b

    @property
    def o_rx(self) -> int:
        return (self.l_rx - 1) // self.b

    @property
    def t_tx(self) -> int:
        return (self.a * self.m + self.l_tx - 1) // self.b

    @property
    def trailer_len(self) -> int:
        return (self.a * self.m_s + self.l_tx - 1) // self.b

    @property
    def n_t_window(self) -> tuple[int, int]:
        """Offsets for which the DFT transmit path is an exact packet slice."""
        return self.o_tx, (self.a * self.m_s) // self.b

    def with_offsets(self, n_g: int | None = None, n_t: int | None = None) -> "Numerology":
        kw = {}
        if n_g is not None:
            kw["n_g"] = n_g
        if n_t is not None:
            kw["n_t"] = n_t
        return replace(self, **kw)

    @classmethod
    def ieee80211ad(cls, channel_taps: int = 0, m_h: int = 9) -> "Numerology":
        """The 802.11ad SC numerology: M=512, M_s=64, a=3, b=2, 67-tap filters.

        n_t follows the zero-phase alignment for the given m_h; n_g is the
        grid-aligned midpoint of the admissible guard range for a channel
        with `channel_taps` memory.
        """
        num = cls(m=512, m_s=64, m_h=m_h, a=3, b=2, l_tx=67, l_rx=67, n_g=0, n_t=0)
        n_t = condition1_offset(num.m_s, m_h, num.a, num.b, num.l_tx)
        num = num.with_offsets(n_t=n_t)
        return num.with_offsets(n_g=default_guard_offset(num, channel_taps))


@dataclass(frozen=True)
class EqualizerGains:
    """Per-bin diagonal equalizer with the criterion it was built under."""

    gains: np.ndarray
    noise_var: float
    label: str

    def __post_init__(self):
        object.__setattr__(self, "gains", np.asarray(self.gains, dtype=np.complex128))


@dataclass(frozen=True)
class GuardCheck:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    checks: tuple[GuardCheck, ...]

    def __str__(self) -> str:
        lines = [f"[{'PASS' if c.ok else 'FAIL'}] {c.name}: {c.detail}" for c in self.checks]
        return "\n".join(lines)


def admissible_guard_range(num: Numerology, channel_taps: int) -> tuple[int, int]:
    """Inclusive guard-offset bounds [O_tx + L, (a/b)*M_s - O_rx]; may be empty."""
    return num.o_tx + channel_taps, (num.a * num.m_s) // num.b - num.o_rx


def validate_numerology(num: Numerology, channel_taps: int) -> ValidationReport:
    """Check the guard constraint and the ISI-freedom bound for a channel memory."""
    checks = []
    lo, hi = admissible_guard_range(num, channel_taps)
    ok_lo = num.n_g >= lo
    ok_hi = num.n_g <= hi
    checks.append(GuardCheck(
        "guard lower bound", ok_lo,
        f"O_tx + L = {lo} <= n_g = {num.n_g}" if ok_lo else f"n_g = {num.n_g} < O_tx + L = {lo}"))
    checks.append(GuardCheck(
        "guard upper bound", ok_hi,
        f"n_g = {num.n_g} <= (a/b)*M_s - O_rx = {hi}" if ok_hi
        else f"n_g = {num.n_g} > (a/b)*M_s - O_rx = {hi}"))
    need = num.l_tx + num.l_rx + (channel_taps * num.b + 1) - 3
    have = num.m_s * num.a
    ok_isi = have >= need
    checks.append(GuardCheck(
        "fixed-part length", ok_isi,
        f"M_s*a = {have} >= L_tx + L_rx + (L*b + 1) - 3 = {need}" if ok_isi
        else f"M_s*a = {have} < L_tx + L_rx + (L*b + 1) - 3 = {need}"))
    return ValidationReport(all(c.ok for c in checks), tuple(checks))


def default_guard_offset(num: Numerology, channel_taps: int) -> int:
    """Admissible guard offset nearest the range midpoint, preferring offsets
    with a | b*n_g so the receiver's symbol-rate sampling stays on the symbol
    grid (off-grid offsets make the matched-filter alias combining incoherent
    even in AWGN)."""
    lo, hi = admissible_guard_range(num, channel_taps)
    if lo > hi:
        raise ValueError(f"no admissible guard offset for channel memory {channel_taps}")
    mid = (lo + hi) / 2
    aligned = [g for g in range(lo, hi + 1) if (num.b * g) % num.a == 0]
    if aligned:
        return min(aligned, key=lambda g: (abs(g - mid), g))
    return int(round(mid))


def condition1_offset(m_s: int, m_h: int, a: int, b: int, l_tx: int) -> int:
    """Epoch offset that zeroes the phase of the transmit shaping gains,
    i.e. solves (m_s - m_h)*a - n_t*b = -(l_tx - 1)/2 for integer n_t."""
    if l_tx % 2 == 0:
        raise ValueError("zero-phase alignment needs an odd transmit filter length")
    numer = (m_s - m_h) * a + (l_tx - 1) // 2
    if numer % b:
        raise ValueError(
            f"zero-phase offset is not an integer for this numerology: {numer}/{b}")
    return numer // b


def nt_for_condition1(num: Numerology) -> int:
    return condition1_offset(num.m_s, num.m_h, num.a, num.b, num.l_tx)


def _check_pulse(p: PulseShape, expect_len: int, what: str) -> np.ndarray:
    if len(p) != expect_len:
        raise ValueError(f"{what} has {len(p)} taps, numerology expects {expect_len}")
    return p.taps


def _check_uw(uw: UniqueWord, num: Numerology) -> None:
    if len(uw) != num.m_s or uw.n_head != num.m_h:
        raise ValueError(
            f"unique word split ({uw.n_tail}, {uw.n_head}) does not match "
            f"numerology (m_t={num.m_t}, m_h={num.m_h})")


def sc_modulate_block(d, uw: UniqueWord, num: Numerology, f: PulseShape) -> np.ndarray:
    """One SC block: sqrt(b) * downsample_b(pulse * upsample_a([s; d])).

    Output has t_tx = (a*m + l_tx - 1)/b samples.
    """
    d = np.asarray(d, dtype=np.complex128)
    if d.shape != (num.m_d,):
        raise ValueError(f"expected {num.m_d} data symbols, got {d.shape}")
    _check_uw(uw, num)
    taps = _check_pulse(f, num.l_tx, "transmit pulse")
    v = np.concatenate([uw.symbols, d])
    w = linear_convolve(upsample_time(v, num.a), taps)
    return np.sqrt(num.b) * downsample_time(w, num.b)


def sc_assemble_packet(blocks: Sequence[np.ndarray], uw: UniqueWord, num: Numerology,
                       f: PulseShape) -> np.ndarray:
    """Overlap-add the blocks at stride N and append the fixed-sequence trailer.

    Consecutive blocks overlap by O_tx samples; the trailer re-sends the
    unique word so the last epoch keeps its cyclic structure. Total length
    is n_blocks*N + (a*m_s + l_tx - 1)/b. Equal (exactly) to one pass of
    the pulse over the concatenated symbol stream ending in the unique word.
    """
    if len(blocks) < 1:
        raise ValueError("need at least one block")
    _check_uw(uw, num)
    taps = _check_pulse(f, num.l_tx, "transmit pulse")
    n_b = len(blocks)
    out = np.zeros(n_b * num.n + num.trailer_len, dtype=np.complex128)
    for i, x in enumerate(blocks):
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (num.t_tx,):
            raise ValueError(f"block {i} has length {x.shape}, expected {num.t_tx}")
        out[i * num.n:i * num.n + num.t_tx] += x
    trailer = np.sqrt(num.b) * downsample_time(
        linear_convolve(upsample_time(uw.symbols, num.a), taps), num.b)
    out[n_b * num.n:] += trailer[:num.trailer_len]
    return out


def epoch_extract(received, i: int, num: Numerology) -> np.ndarray:
    """Epoch i: the N + O_rx samples starting at n_g + i*N in the received stream."""
    received = np.asarray(received, dtype=np.complex128)
    start = num.n_g + i * num.n
    stop = start + num.n + num.o_rx
    if i < 0 or start < 0 or stop > len(received):
        raise ValueError(f"epoch {i} spans [{start}, {stop}) outside the received stream "
                         f"of {len(received)} samples")
    return received[start:stop]


def effective_channel(h, f: PulseShape, g: PulseShape, num: Numerology) -> np.ndarray:
    """Composite kernel f * g * upsample_b(h) at the filter rate."""
    h = np.asarray(h, dtype=np.complex128)
    h_eff = linear_convolve(linear_convolve(f.taps, g.taps), upsample_time(h, num.b))
    if len(h_eff) > num.k:
        raise ValueError(f"effective channel ({len(h_eff)} taps) exceeds the circular "
                         f"buffer length {num.k}")
    return h_eff


def build_mmse_sc(h, f: PulseShape, g: PulseShape, num: Numerology,
                  noise_var: float) -> EqualizerGains:
    """Single-tap MMSE gains for the SC chain.

    The folded diagonal is Q = sqrt(M) F_M downsample_a(circ-shift(h_eff, tau0))
    with tau0 = (m_s - m_h)*a - n_g*b - l_rx + 1, and E = conj(Q)/(|Q|^2 + sigma^2).
    """
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    h_eff = effective_channel(h, f, g, num)
    tau0 = (num.m_s - num.m_h) * num.a - num.n_g * num.b - num.l_rx + 1
    psi = np.zeros(num.k, dtype=np.complex128)
    psi[:len(h_eff)] = h_eff
    q = np.sqrt(num.m) * dft(downsample_time(circ_shift(psi, tau0), num.a))
    denom = np.abs(q) ** 2 + noise_var
    gains = np.divide(np.conj(q), denom, out=np.zeros_like(q), where=denom > 0)
    return EqualizerGains(gains, noise_var, "mmse-sc")


def sc_demodulate_epoch(e, g: PulseShape, num: Numerology,
                        eq: EqualizerGains) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """FDE of one epoch: upsample by b, receive-filter, downsample by a,
    equalize per M-point bin, despread. Returns (head, data, tail) estimates."""
    e = np.asarray(e, dtype=np.complex128)
    if e.shape != (num.n + num.o_rx,):
        raise ValueError(f"epoch must have {num.n + num.o_rx} samples, got {e.shape}")
    taps = _check_pulse(g, num.l_rx, "receive pulse")
    u = upsample_time(e, num.b)
    r = linear_convolve(u, np.conj(taps[::-1]))[num.l_rx - 1:num.l_rx - 1 + num.k]
    ra = downsample_time(r, num.a)
    out = np.sqrt(num.b) * idft(eq.gains * dft(ra))
    return out[:num.m_h], out[num.m_h:num.m_h + num.m_d], out[num.m_h + num.m_d:]


def transmit_shaping_gains(f: PulseShape, num: Numerology) -> np.ndarray:
    """Per-bin gains of the circular transmit shaping at the a*M grid,
    kernel = pulse rolled by tau1 = (m_s - m_h)*a - n_t*b. Real-valued
    (zero phase) exactly when n_t satisfies the zero-phase alignment."""
    taps = _check_pulse(f, num.l_tx, "transmit pulse")
    tau1 = (num.m_s - num.m_h) * num.a - num.n_t * num.b
    kernel = np.zeros(num.k, dtype=np.complex128)
    kernel[:num.l_tx] = taps
    return circulant_eigenvalues(circ_shift(kernel, tau1), num.k)


def rectangular_shaping_gains(num: Numerology) -> np.ndarray:
    """Ideal rectangular shaping: sqrt(a) over the M DC-centered bins of the
    a*M grid, zero elsewhere. Feeding this to the DFT transmit path yields a
    UW DFT-s-OFDM symbol."""
    kappa = np.arange(num.k)
    signed = ((kappa + num.k // 2) % num.k) - num.k // 2
    gains = np.where((signed >= -(num.m // 2)) & (signed < num.m - num.m // 2),
                     np.sqrt(num.a), 0.0)
    return gains.astype(np.complex128)


def receive_shaping_gains(g: PulseShape, num: Numerology) -> np.ndarray:
    """Per-bin gains of the circular receive filtering at the a*M grid.

    The correlation receiver equals a circular convolution with
    conj(flip(g)) at shift 0 on the cyclic epoch core; these are that
    kernel's circulant eigenvalues.
    """
    taps = _check_pulse(g, num.l_rx, "receive pulse")
    return circulant_eigenvalues(np.conj(taps[::-1]), num.k)


def sc_modulate_block_dft(d, uw: UniqueWord, num: Numerology, lam: np.ndarray) -> np.ndarray:
    """DFT-domain synthesis of the length-N epoch m_i:
    F_N^H fold_b(lam * replicate_a(F_M [head; d; tail])) / sqrt(a).

    Accepts a single data vector or a batch on the leading axis. With lam
    from transmit_shaping_gains and O_tx <= n_t <= (a/b)*m_s this equals
    the time-domain packet samples at offset n_t + i*N exactly.
    """
    d = np.asarray(d, dtype=np.complex128)
    batched = d.ndim == 2
    if d.shape[-1] != num.m_d:
        raise ValueError(f"expected {num.m_d} data symbols, got {d.shape}")
    _check_uw(uw, num)
    lam = np.asarray(lam, dtype=np.complex128)
    if lam.shape != (num.k,):
        raise ValueError(f"shaping gains must cover the {num.k}-point grid")
    if not batched:
        d = d[None, :]
    n_rows = d.shape[0]
    v = np.concatenate([
        np.broadcast_to(uw.head, (n_rows, num.m_h)),
        d,
        np.broadcast_to(uw.tail, (n_rows, num.m_t)),
    ], axis=1)
    spread = np.tile(dft(v), (1, num.a))
    folded = (lam[None, :] * spread).reshape(n_rows, num.b, num.n).sum(axis=1)
    m = idft(folded) / np.sqrt(num.a)
    return m if batched else m[0]


def alias_combining_weights(f: PulseShape, g: PulseShape, h, num: Numerology) -> np.ndarray:
    """Per-alias one-tap coefficients of the folded receiver, shape (a, M).

    Row rho, column mu is the complex weight multiplying the data spectrum
    V[mu] in alias rho (grid bin kappa = rho*M + mu) as seen by
    sc_demodulate_epoch_dft before the fold; the rows sum to the diagonal
    model Q of build_mmse_sc. With a matched filter on a flat channel the
    weights of each bin share one phase; a frequency-selective channel
    breaks that alignment, which is the combining loss of this receiver.
    """
    h = np.asarray(h, dtype=np.complex128)
    lam = transmit_shaping_gains(f, num)
    upsilon = receive_shaping_gains(g, num)
    h_bins = np.fft.fft(h, num.n)
    kappa = np.arange(num.k)
    n_bins = kappa % num.n
    # epoch core starts n_g + o_rx samples into the stream, n_t marks the
    # transmit epoch origin the shaping gains are referenced to
    delay = np.exp(2j * np.pi * n_bins * (num.n_g + num.o_rx - num.n_t) / num.n)
    w = upsilon * lam * h_bins[n_bins] * delay / num.a
    return w.reshape(num.a, num.m)


def sc_demodulate_epoch_dft(m, upsilon: np.ndarray, num: Numerology, eq: EqualizerGains,
                            return_alias_bins: bool = False):
    """DFT-domain receiver on the cyclic epoch core (the last N samples of an
    epoch): F_M^H E fold_a(upsilon * replicate_b(F_N m)) / sqrt(a).

    Matches sc_demodulate_epoch exactly on guard-valid epochs. With
    return_alias_bins=True, also returns the (a, M) array of per-alias
    contributions before the fold, the stage where a frequency-selective
    channel makes the combination incoherent.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.shape != (num.n,):
        raise ValueError(f"expected the {num.n}-sample epoch core, got {m.shape}")
    upsilon = np.asarray(upsilon, dtype=np.complex128)
    if upsilon.shape != (num.k,):
        raise ValueError(f"receive gains must cover the {num.k}-point grid")
    spread = np.tile(dft(m), num.b)
    alias_bins = (upsilon * spread).reshape(num.a, num.m)
    folded = alias_bins.sum(axis=0)
    out = idft(eq.gains * folded) / np.sqrt(num.a)
    parts = (out[:num.m_h], out[num.m_h:num.m_h + num.m_d], out[num.m_h + num.m_d:])
    if return_alias_bins:
        return parts, alias_bins
    return parts
