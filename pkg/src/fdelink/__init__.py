"""fdelink: link-level simulation of single-carrier FDE and UW DFT-s-OFDM
waveforms, their DFT-domain equivalences, and comparison experiments."""

from .channel import ChannelRealization, add_awgn, apply_multipath, make_tdl_channel
from .link import LinkResult, LinkScenario, run_link
from .metrics import CcdfCurve, ber, papr_ccdf, waveform_mse_db
from .modem import Constellation, UniqueWord, default_unique_word, demap_hard, golay_pair, map_bits
from .pulses import FrequencyWindow, PulseShape, design_fd_window, design_rrc, matched_filter
from .sc import (
    EqualizerGains,
    Numerology,
    ValidationReport,
    build_mmse_sc,
    epoch_extract,
    nt_for_condition1,
    sc_assemble_packet,
    sc_demodulate_epoch,
    sc_demodulate_epoch_dft,
    sc_modulate_block,
    sc_modulate_block_dft,
    validate_numerology,
)
from .uw import (
    SubcarrierMap,
    build_mmse_uw,
    two_stage_equalize,
    uw_assemble_packet,
    uw_demodulate,
    uw_modulate_symbol,
    uw_w_modulate,
)

__version__ = "0.1.0"
