"""Bit/symbol mapping (BPSK, QPSK, 16QAM, Gray-labeled) and Golay unique words."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import read_vector_csv, write_vector_csv

__all__ = [
    "Constellation",
    "UniqueWord",
    "map_bits",
    "demap_hard",
    "golay_pair",
    "default_unique_word",
    "unique_word_for",
]


def _gray_pam(n_levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Gray-labeled PAM levels: returns (levels, word_of_level)."""
    levels = 2.0 * np.arange(n_levels) - (n_levels - 1)
    words = np.array([i ^ (i >> 1) for i in range(n_levels)])
    return levels, words


@dataclass(frozen=True)
class Constellation:
    """Unit-average-energy constellation with Gray bit labels.

    points[w] is the symbol whose bit label (MSB first) is the integer w.
    """

    order: int
    points: np.ndarray
    name: str

    def __post_init__(self):
        if self.order not in (2, 4, 16):
            raise ValueError("supported orders: 2 (BPSK), 4 (QPSK), 16 (16QAM)")
        pts = np.asarray(self.points, dtype=np.complex128)
        object.__setattr__(self, "points", pts)
        if len(pts) != self.order:
            raise ValueError("points length must equal order")
        if not np.isclose(np.mean(np.abs(pts) ** 2), 1.0, atol=1e-12):
            raise ValueError("constellation average energy must be 1")

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    @classmethod
    def bpsk(cls) -> "Constellation":
        return cls(2, np.array([1.0, -1.0], dtype=np.complex128), "bpsk")

    @classmethod
    def qpsk(cls) -> "Constellation":
        # bit 0 -> I sign, bit 1 -> Q sign; 0 maps to +
        pts = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / np.sqrt(2.0)
        return cls(4, pts, "qpsk")

    @classmethod
    def qam16(cls) -> "Constellation":
        # bits (b0 b1) -> I level, (b2 b3) -> Q level, Gray per axis
        levels, words = _gray_pam(4)
        lv = np.empty(4)
        lv[words] = levels
        pts = np.empty(16, dtype=np.complex128)
        for w in range(16):
            pts[w] = lv[w >> 2] + 1j * lv[w & 3]
        pts /= np.sqrt(np.mean(np.abs(pts) ** 2))
        return cls(16, pts, "16qam")

    @classmethod
    def by_name(cls, name: str) -> "Constellation":
        table = {"bpsk": cls.bpsk, "qpsk": cls.qpsk, "16qam": cls.qam16}
        if name not in table:
            raise ValueError(f"unknown constellation '{name}' (choose from {sorted(table)})")
        return table[name]()


def map_bits(bits, c: Constellation) -> np.ndarray:
    """Gray-map a flat bit array (MSB first per symbol) to unit-energy symbols."""
    bits = np.asarray(bits, dtype=np.int64).reshape(-1)
    k = c.bits_per_symbol
    if bits.size % k != 0:
        raise ValueError(f"bit count {bits.size} not divisible by {k}")
    words = bits.reshape(-1, k) @ (1 << np.arange(k - 1, -1, -1))
    return c.points[words]


def demap_hard(symbols, c: Constellation) -> np.ndarray:
    """Minimum-distance hard decisions, inverse Gray labeling, flat bit array."""
    symbols = np.asarray(symbols, dtype=np.complex128).reshape(-1)
    k = c.bits_per_symbol
    out = np.empty((symbols.size, k), dtype=np.int64)
    chunk = 1 << 20
    shifts = np.arange(k - 1, -1, -1)
    for lo in range(0, symbols.size, chunk):
        s = symbols[lo:lo + chunk]
        d2 = np.abs(s[:, None] - c.points[None, :]) ** 2
        words = np.argmin(d2, axis=1)
        out[lo:lo + len(s)] = (words[:, None] >> shifts) & 1
    return out.reshape(-1)


def golay_pair(exponent: int, delays, weights) -> tuple[np.ndarray, np.ndarray]:
    """Binary Golay complementary pair via the delay/weight recursion.

    delays must be a permutation of {1, 2, 4, ..., 2^(exponent-1)} and
    weights entries of +-1; both of length `exponent`. The returned pair
    (ga, gb) has length 2^exponent and satisfies
    autocorr(ga) + autocorr(gb) == 2^(exponent+1) * delta exactly.
    """
    if exponent < 1:
        raise ValueError("exponent must be >= 1")
    delays = np.asarray(delays, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.int64)
    if len(delays) != exponent or len(weights) != exponent:
        raise ValueError("delays and weights must have length `exponent`")
    if sorted(delays.tolist()) != [1 << i for i in range(exponent)]:
        raise ValueError("delays must be a permutation of {1, 2, 4, ..., 2^(exponent-1)}")
    if not np.all(np.abs(weights) == 1):
        raise ValueError("weights must be +-1")

    n = 1 << exponent
    a = np.zeros(n, dtype=np.int64)
    b = np.zeros(n, dtype=np.int64)
    a[0] = 1
    b[0] = 1
    for d, w in zip(delays, weights):
        shifted = np.concatenate([np.zeros(d, dtype=np.int64), b[:n - d]])
        a, b = a + w * shifted, a - w * shifted
    return a.astype(np.complex128), b.astype(np.complex128)


# A fixed valid delay/weight set for the default length-64 pair.
_GA64_DELAYS = (1, 8, 2, 4, 16, 32)
_GA64_WEIGHTS = (-1, -1, -1, -1, 1, -1)


@dataclass(frozen=True)
class UniqueWord:
    """Fixed symbol sequence s = [tail; head] carried by every block."""

    symbols: np.ndarray
    n_tail: int
    n_head: int

    def __post_init__(self):
        s = np.asarray(self.symbols, dtype=np.complex128)
        object.__setattr__(self, "symbols", s)
        if self.n_tail < 0 or self.n_head < 0 or self.n_tail + self.n_head != len(s):
            raise ValueError("tail/head split must partition the sequence")
        if not np.isclose(np.mean(np.abs(s) ** 2), 1.0, atol=1e-9):
            raise ValueError("unique word must have unit average energy")

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def tail(self) -> np.ndarray:
        return self.symbols[:self.n_tail]

    @property
    def head(self) -> np.ndarray:
        return self.symbols[self.n_tail:]

    def to_csv(self, path) -> None:
        write_vector_csv(path, self.symbols)

    @classmethod
    def from_csv(cls, path, n_tail: int, n_head: int) -> "UniqueWord":
        return cls(read_vector_csv(path), n_tail, n_head)


def default_unique_word(n_tail: int = 55, n_head: int = 9) -> UniqueWord:
    """BPSK length-64 Golay sequence with the given tail/head split."""
    if n_tail + n_head != 64:
        raise ValueError("default unique word is length 64")
    ga, _ = golay_pair(6, _GA64_DELAYS, _GA64_WEIGHTS)
    return UniqueWord(ga, n_tail, n_head)


def unique_word_for(n_tail: int, n_head: int) -> UniqueWord:
    """Deterministic BPSK unique word for an arbitrary split: the length-64
    Golay default when it fits, otherwise the leading symbols of the next
    power-of-two Golay sequence."""
    n = n_tail + n_head
    if n == 64:
        return default_unique_word(n_tail, n_head)
    exponent = max(1, int(np.ceil(np.log2(max(n, 2)))))
    delays = [1 << i for i in range(exponent)]
    ga, _ = golay_pair(exponent, delays, [-1] * exponent)
    return UniqueWord(ga[:n], n_tail, n_head)
