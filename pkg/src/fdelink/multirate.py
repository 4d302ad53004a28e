"""Unitary DFT, resampling, and circular-convolution primitives.

Every transform here is normalized so that energy bookkeeping is explicit:
the DFT pair carries 1/sqrt(n) both ways, and the DFT-domain resamplers
carry the 1/sqrt(a), 1/sqrt(b) factors of the zero-insertion / decimation
identities. All functions accept 1-D vectors or batches of vectors on the
last axis, and are pure.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "dft",
    "idft",
    "upsample_time",
    "upsample_dft",
    "downsample_time",
    "downsample_dft",
    "linear_convolve",
    "circ_shift",
    "circular_convolve",
    "circulant_eigenvalues",
]


def _as_complex(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] < 1:
        raise ValueError("empty vector")
    return x


def dft(x) -> np.ndarray:
    """Unitary (1/sqrt(n)-scaled) forward DFT along the last axis."""
    x = _as_complex(x)
    return np.fft.fft(x, axis=-1) / np.sqrt(x.shape[-1])


def idft(x) -> np.ndarray:
    """Unitary inverse DFT along the last axis; idft(dft(x)) == x."""
    x = _as_complex(x)
    return np.fft.ifft(x, axis=-1) * np.sqrt(x.shape[-1])


def upsample_time(x, a: int) -> np.ndarray:
    """Zero-insertion by a: output[m] = x[m/a] when a | m, else 0."""
    x = _as_complex(x)
    if a < 1:
        raise ValueError("upsampling factor must be >= 1")
    y = np.zeros(x.shape[:-1] + (x.shape[-1] * a,), dtype=np.complex128)
    y[..., ::a] = x
    return y


def upsample_dft(x, a: int) -> np.ndarray:
    """DFT-domain zero-insertion: (1/sqrt(a)) * F_{aM}^H (1_{a x 1} (x) I_M) F_M x.

    Replicates the M-point spectrum a times on the aM-point grid and
    returns to time; identical to upsample_time for every input.
    """
    x = _as_complex(x)
    if a < 1:
        raise ValueError("upsampling factor must be >= 1")
    spec = dft(x)
    stacked = np.tile(spec, (1,) * (x.ndim - 1) + (a,))
    return idft(stacked) / np.sqrt(a)


def downsample_time(x, b: int) -> np.ndarray:
    """Decimation by b: output[m] = x[m*b]. Requires b | len(x)."""
    x = _as_complex(x)
    if b < 1:
        raise ValueError("downsampling factor must be >= 1")
    if x.shape[-1] % b != 0:
        raise ValueError(f"downsampling factor {b} does not divide length {x.shape[-1]}")
    return x[..., ::b]


def downsample_dft(x, b: int) -> np.ndarray:
    """DFT-domain decimation: (1/sqrt(b)) * F_N^H (1_{1 x b} (x) I_N) F_{bN} x.

    Folds the bN-point spectrum onto N bins (alias sum) and returns to
    time; identical to downsample_time for every input.
    """
    x = _as_complex(x)
    if b < 1:
        raise ValueError("downsampling factor must be >= 1")
    if x.shape[-1] % b != 0:
        raise ValueError(f"downsampling factor {b} does not divide length {x.shape[-1]}")
    n = x.shape[-1] // b
    spec = dft(x)
    folded = spec.reshape(x.shape[:-1] + (b, n)).sum(axis=-2)
    return idft(folded) / np.sqrt(b)


def linear_convolve(x, f) -> np.ndarray:
    """Full linear convolution, length len(x) + len(f) - 1.

    FFT-based for production sizes; set direct=True on the oracle helper
    in tests for the O(n^2) reference path.
    """
    x = _as_complex(x)
    f = _as_complex(f)
    if x.ndim == 1 and f.ndim == 1:
        n = x.shape[-1] + f.shape[-1] - 1
        nfft = 1 << (n - 1).bit_length()
        y = np.fft.ifft(np.fft.fft(x, nfft) * np.fft.fft(f, nfft))
        return y[:n]
    # batched: broadcast f over leading axes of x
    n = x.shape[-1] + f.shape[-1] - 1
    nfft = 1 << (n - 1).bit_length()
    y = np.fft.ifft(np.fft.fft(x, nfft, axis=-1) * np.fft.fft(f, nfft, axis=-1), axis=-1)
    return y[..., :n]


def linear_convolve_direct(x, f) -> np.ndarray:
    """O(n^2) direct-sum convolution; reference path for tests only."""
    x = _as_complex(x)
    f = _as_complex(f)
    n = len(x) + len(f) - 1
    y = np.zeros(n, dtype=np.complex128)
    for j, fj in enumerate(f):
        y[j:j + len(x)] += fj * x
    return y


def circ_shift(x, tau: int) -> np.ndarray:
    """Circular delay by tau: output[k] = x[(k - tau) mod n]; tau may be negative."""
    x = _as_complex(x)
    return np.roll(x, tau, axis=-1)


def _pad_kernel(c, n: int) -> np.ndarray:
    c = _as_complex(c)
    if c.ndim != 1:
        raise ValueError("kernel must be 1-D")
    if len(c) > n:
        raise ValueError(f"kernel length {len(c)} exceeds buffer length {n}")
    k = np.zeros(n, dtype=np.complex128)
    k[:len(c)] = c
    return k


def circular_convolve(x, c) -> np.ndarray:
    """Cyclic convolution of x with c zero-padded to len(x)."""
    x = _as_complex(x)
    k = _pad_kernel(c, x.shape[-1])
    n = x.shape[-1]
    spec = dft(x) * (np.sqrt(n) * dft(k))
    return idft(spec)


def circulant_eigenvalues(c, n: int) -> np.ndarray:
    """Per-bin gains lam of the circulant with first column c padded to n.

    For every x of length n: circular_convolve(x, c) == idft(lam * dft(x)).
    """
    k = _pad_kernel(c, n)
    return np.fft.fft(k)
