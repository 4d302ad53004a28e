"""End-to-end link composition for every transmitter/receiver pairing.

A LinkScenario (including its seed) fully determines the run: bits, channel
draw, and noise come from independent sub-streams of one seed sequence, so
results are reproducible and trials are order-independent.

SNR is referenced to the average received signal power per complex sample,
after the channel and before the receive filter, divided by the per-sample
complex noise variance. That makes the SC and UW chains directly comparable
even though their waveforms are different.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, add_awgn, apply_multipath, make_tdl_channel
from .modem import Constellation, unique_word_for, demap_hard, map_bits
from .multirate import dft, idft
from .pulses import design_fd_window, design_rrc, matched_filter
from .sc import (
    Numerology,
    build_mmse_sc,
    epoch_extract,
    sc_assemble_packet,
    sc_demodulate_epoch,
    sc_modulate_block,
    validate_numerology,
)
from .uw import (
    SubcarrierMap,
    build_mmse_uw,
    channel_bin_gains,
    default_cp_len,
    rect_window,
    single_alias_equalize,
    two_stage_equalize,
    uw_assemble_packet,
    uw_demodulate,
    uw_modulate_symbol,
    uw_w_modulate,
)

__all__ = ["LinkScenario", "LinkResult", "run_link", "TX_KINDS", "RX_KINDS"]

TX_KINDS = ("sc", "uw", "uww")
RX_KINDS = ("sc", "uw", "uww2", "uww1")


@dataclass(frozen=True)
class LinkScenario:
    """One reproducible link run: waveform pairing, numerology, channel, SNR."""

    tx_kind: str
    rx_kind: str
    numerology: Numerology
    constellation: str = "qpsk"
    rolloff: float = 0.2
    channel: str = "awgn"            # "awgn" (single unit tap) or "tdl"
    channel_memory: int = 0          # L for the tdl model
    decay_db_per_tap: float = 3.0
    snr_db: float = 20.0
    seed: int = 0
    n_blocks: int = 8
    extension_bins: int = 51         # window extension for the uww waveform
    n_cp: int | None = None          # first-symbol prefix; None = default

    def __post_init__(self):
        if self.tx_kind not in TX_KINDS:
            raise ValueError(f"tx_kind must be one of {TX_KINDS}")
        if self.rx_kind not in RX_KINDS:
            raise ValueError(f"rx_kind must be one of {RX_KINDS}")
        if self.n_blocks < 1:
            raise ValueError("n_blocks must be positive")
        if self.channel not in ("awgn", "tdl"):
            raise ValueError("channel must be 'awgn' or 'tdl'")


@dataclass(frozen=True)
class LinkResult:
    tx_bits: np.ndarray
    rx_bits: np.ndarray
    tx_symbols: np.ndarray
    est_symbols: np.ndarray
    n_bit_errors: int
    ber: float
    evm_db: float
    signal_power: float
    noise_var: float
    channel_taps: np.ndarray
    tx_stream: np.ndarray = field(repr=False, default=None)


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_link(s: LinkScenario) -> LinkResult:
    """Modulate, propagate, equalize, and demap one packet; see LinkScenario."""
    num = s.numerology
    bits_ss, chan_ss, noise_ss = np.random.SeedSequence(s.seed).spawn(3)

    conste = Constellation.by_name(s.constellation)
    uw = unique_word_for(num.m_t, num.m_h)
    f = design_rrc(num.l_tx, s.rolloff, num.a)
    g = matched_filter(f) if num.l_rx == num.l_tx else design_rrc(num.l_rx, s.rolloff, num.a)
    smap = SubcarrierMap.centered(num.m, num.n)
    n_cp = default_cp_len(smap, num.m_t) if s.n_cp is None else s.n_cp
    window = design_fd_window(num.m, num.n, s.extension_bins, s.rolloff) \
        if s.tx_kind == "uww" else rect_window(num.m, num.n)

    if s.channel == "awgn":
        ch = ChannelRealization.identity()
    else:
        ch = make_tdl_channel(s.channel_memory, s.decay_db_per_tap, _seed_int(chan_ss))

    if "sc" in (s.tx_kind, s.rx_kind):
        report = validate_numerology(num, ch.memory)
        if not report.ok:
            raise ValueError(f"numerology rejected for this channel:\n{report}")
    elif ch.memory + 1 > num.n:
        raise ValueError(f"channel memory {ch.memory} does not fit one symbol period")

    bit_rng = np.random.default_rng(bits_ss)
    k = conste.bits_per_symbol
    tx_bits = bit_rng.integers(0, 2, size=s.n_blocks * num.m_d * k)
    d = map_bits(tx_bits, conste).reshape(s.n_blocks, num.m_d)

    # --- transmit ---
    if s.tx_kind == "sc":
        blocks = [sc_modulate_block(d[i], uw, num, f) for i in range(s.n_blocks)]
        tx = sc_assemble_packet(blocks, uw, num, f)
        sc_origin, uw_origin = 0, num.n_t
    else:
        mod = uw_modulate_symbol if s.tx_kind == "uw" else \
            (lambda di, u, m: uw_w_modulate(di, u, m, window))
        symbols = [mod(d[i], uw, smap) for i in range(s.n_blocks)]
        tx = uw_assemble_packet(symbols, n_cp)
        sc_origin, uw_origin = n_cp - num.n_t, n_cp

    # --- channel + noise ---
    faded = apply_multipath(tx, ch)
    signal_power = float(np.mean(np.abs(faded) ** 2))
    noise_var = signal_power / (10.0 ** (s.snr_db / 10.0))
    y = add_awgn(faded, noise_var, _seed_int(noise_ss))

    # --- receive ---
    if s.rx_kind == "sc":
        first = sc_origin + num.n_g
        if first < 0:
            raise ValueError(
                f"SC receiver needs {-first} samples before the stream start; "
                f"increase n_cp (>= {num.n_t - num.n_g}) for this pairing")
        need = sc_origin + num.n_g + s.n_blocks * num.n + num.o_rx
        if need > len(y):
            y = np.concatenate([y, np.zeros(need - len(y), dtype=np.complex128)])
        eq = build_mmse_sc(ch.taps, f, g, num, noise_var)
        if sc_origin >= 0:
            shifted = y[sc_origin:]
        else:
            # the receiver's frame starts before the stream; the unread gap
            # (first >= 0 was checked above) is padded, never consumed
            shifted = np.concatenate([np.zeros(-sc_origin, dtype=np.complex128), y])
        est = np.empty((s.n_blocks, num.m_d), dtype=np.complex128)
        for i in range(s.n_blocks):
            _, d_hat, _ = sc_demodulate_epoch(epoch_extract(shifted, i, num), g, num, eq)
            est[i] = d_hat
    else:
        need = uw_origin + s.n_blocks * num.n
        if need > len(y):
            y = np.concatenate([y, np.zeros(need - len(y), dtype=np.complex128)])
        est = np.empty((s.n_blocks, num.m_d), dtype=np.complex128)
        if s.rx_kind == "uw":
            eq = build_mmse_uw(ch.taps, num.n, smap, noise_var)
            for i in range(s.n_blocks):
                e = y[uw_origin + i * num.n:uw_origin + (i + 1) * num.n]
                _, d_hat, _ = uw_demodulate(e, smap, eq, uw)
                est[i] = d_hat
        else:
            stage = two_stage_equalize if s.rx_kind == "uww2" else single_alias_equalize
            hf = channel_bin_gains(ch.taps, num.n)
            support = smap.bins(window.extension_bins)
            for i in range(s.n_blocks):
                e = y[uw_origin + i * num.n:uw_origin + (i + 1) * num.n]
                v_hat = stage(dft(e)[support], hf[support], window, smap, noise_var)
                v = idft(v_hat)
                est[i] = v[num.m_h:num.m_h + num.m_d]

    rx_bits = demap_hard(est.reshape(-1), conste)
    n_err = int(np.sum(rx_bits != tx_bits))
    evm = np.mean(np.abs(est - d) ** 2) / np.mean(np.abs(d) ** 2)
    evm_db = 10.0 * np.log10(evm) if evm > 1e-30 else -300.0
    return LinkResult(
        tx_bits=tx_bits,
        rx_bits=rx_bits,
        tx_symbols=d,
        est_symbols=est,
        n_bit_errors=n_err,
        ber=n_err / tx_bits.size,
        evm_db=float(evm_db),
        signal_power=signal_power,
        noise_var=float(noise_var),
        channel_taps=ch.taps,
        tx_stream=tx,
    )
