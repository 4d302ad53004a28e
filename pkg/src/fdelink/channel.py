"""Channel models: linear multipath convolution, AWGN, and a normalized
exponentially-decaying tapped-delay-line generator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import read_vector_csv, write_vector_csv
from .multirate import linear_convolve

__all__ = ["ChannelRealization", "apply_multipath", "add_awgn", "make_tdl_channel"]


@dataclass(frozen=True)
class ChannelRealization:
    """Multipath taps h_0..h_L with unit total power."""

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=np.complex128)
        object.__setattr__(self, "taps", taps)
        if len(taps) < 1:
            raise ValueError("channel needs at least one tap")
        power = np.sum(np.abs(taps) ** 2)
        if not np.isclose(power, 1.0, atol=1e-9):
            raise ValueError(f"channel power must be 1, got {power}")

    @property
    def memory(self) -> int:
        """L: the tap-memory length (number of taps minus one)."""
        return len(self.taps) - 1

    def to_csv(self, path) -> None:
        write_vector_csv(path, self.taps)

    @classmethod
    def from_csv(cls, path) -> "ChannelRealization":
        return cls(read_vector_csv(path))

    @classmethod
    def identity(cls) -> "ChannelRealization":
        return cls(np.array([1.0 + 0.0j]))


def apply_multipath(x, ch: ChannelRealization) -> np.ndarray:
    """Linear convolution with the channel taps; length grows by the memory."""
    return linear_convolve(np.asarray(x, dtype=np.complex128), ch.taps)


def add_awgn(x, noise_var: float, seed: int) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise of the given per-sample
    variance; bit-identical output for identical (x, noise_var, seed)."""
    if noise_var < 0:
        raise ValueError("noise variance must be non-negative")
    x = np.asarray(x, dtype=np.complex128)
    if noise_var == 0:
        return x.copy()
    rng = np.random.default_rng(seed)
    scale = np.sqrt(noise_var / 2.0)
    return x + scale * (rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape))


def make_tdl_channel(memory: int, decay_db_per_tap: float, seed: int) -> ChannelRealization:
    """memory+1 complex Gaussian taps with an exponential power profile,
    renormalized to unit total power."""
    if memory < 0:
        raise ValueError("memory must be non-negative")
    rng = np.random.default_rng(seed)
    profile = 10.0 ** (-decay_db_per_tap * np.arange(memory + 1) / 10.0)
    taps = np.sqrt(profile / 2.0) * (
        rng.standard_normal(memory + 1) + 1j * rng.standard_normal(memory + 1))
    taps /= np.linalg.norm(taps)
    return ChannelRealization(taps)
