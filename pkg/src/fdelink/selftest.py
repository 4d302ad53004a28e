"""Fast self-check of the algebraic identities the simulator is built on.

Prints one PASS/FAIL line per check; returns a non-zero exit code on any
failure. Covers the resampling identities, both transmit-path and
receive-path DFT/time equivalences, and the rectangular-shaping link to the
UW DFT-s-OFDM modulator.
"""
from __future__ import annotations

import numpy as np

from .modem import unique_word_for
from .multirate import downsample_dft, downsample_time, upsample_dft, upsample_time
from .pulses import design_rrc, matched_filter
from .sc import (
    Numerology,
    build_mmse_sc,
    epoch_extract,
    rectangular_shaping_gains,
    sc_assemble_packet,
    sc_demodulate_epoch,
    sc_demodulate_epoch_dft,
    sc_modulate_block,
    sc_modulate_block_dft,
    receive_shaping_gains,
    transmit_shaping_gains,
)
from .uw import SubcarrierMap, uw_modulate_symbol


def _rel(x, y) -> float:
    return float(np.linalg.norm(x - y) / max(np.linalg.norm(y), 1e-300))


def run_selftest(seed: int = 0) -> int:
    rng = np.random.default_rng(seed)
    failures = 0

    def check(name: str, err: float, tol: float):
        nonlocal failures
        ok = err <= tol
        failures += 0 if ok else 1
        print(f"[{'PASS' if ok else 'FAIL'}] {name}: {err:.3e} (tol {tol:.0e})")

    # resampling identities
    worst_up = worst_dn = 0.0
    for factor in (1, 2, 3, 4):
        x = rng.standard_normal(480) + 1j * rng.standard_normal(480)
        worst_up = max(worst_up, _rel(upsample_dft(x, factor), upsample_time(x, factor)))
        worst_dn = max(worst_dn, _rel(downsample_dft(x, factor), downsample_time(x, factor)))
    check("up-sampling identity, factors 1..4", worst_up, 1e-10)
    check("down-sampling identity, factors 1..4", worst_dn, 1e-10)

    # SC transmit dual path at an offset inside the exact-rewrite window
    num = Numerology.ieee80211ad(channel_taps=0).with_offsets(n_t=96)
    uw = unique_word_for(num.m_t, num.m_h)
    f = design_rrc(num.l_tx, 0.2, num.a)
    g = matched_filter(f)
    d = (rng.choice([-1.0, 1.0], (3, num.m_d))
         + 1j * rng.choice([-1.0, 1.0], (3, num.m_d))) / np.sqrt(2)
    packet = sc_assemble_packet(
        [sc_modulate_block(d[i], uw, num, f) for i in range(3)], uw, num, f)
    lam = transmit_shaping_gains(f, num)
    worst = 0.0
    for i in range(3):
        m = sc_modulate_block_dft(d[i], uw, num, lam)
        sl = packet[num.n_t + i * num.n:num.n_t + (i + 1) * num.n]
        worst = max(worst, _rel(m, sl))
    check("SC transmit dual path (N_t inside window)", worst, 1e-9)

    # SC receive dual path on guard-valid epochs
    eq = build_mmse_sc(np.array([1.0 + 0j]), f, g, num, noise_var=0.0)
    ups = receive_shaping_gains(g, num)
    worst = 0.0
    for i in range(3):
        e = epoch_extract(packet, i, num)
        t_out = np.concatenate(sc_demodulate_epoch(e, g, num, eq))
        f_out = np.concatenate(sc_demodulate_epoch_dft(e[num.o_rx:], ups, num, eq))
        worst = max(worst, _rel(f_out, t_out))
    check("SC receive dual path", worst, 1e-10)

    # rectangular shaping reproduces the UW DFT-s-OFDM modulator
    smap = SubcarrierMap.centered(num.m, num.n)
    x_uw = uw_modulate_symbol(d[0], uw, smap)
    x_rect = sc_modulate_block_dft(d[0], uw, num, rectangular_shaping_gains(num))
    check("rectangular shaping == UW modulator", _rel(x_rect, x_uw), 1e-10)

    # zero-phase alignment makes the shaping gains real
    num_c1 = Numerology.ieee80211ad(channel_taps=0, m_h=11)
    lam_c1 = transmit_shaping_gains(design_rrc(num_c1.l_tx, 0.2, num_c1.a), num_c1)
    resid = float(np.max(np.abs(lam_c1.imag)) / np.max(np.abs(lam_c1)))
    check("zero-phase alignment: shaping gains real", resid, 1e-9)

    print("selftest:", "all checks passed" if failures == 0 else f"{failures} check(s) failed")
    return 0 if failures == 0 else 1
