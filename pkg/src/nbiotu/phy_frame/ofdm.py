"""Downlink OFDM numerology inherited from NB-IoT: 15 kHz spacing, 128-point
transform at 1.92 Msps, normal cyclic prefix."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

SAMPLE_RATE = 1.92e6
FFT_SIZE = 128
SUBCARRIER_SPACING = 15e3
SYMBOLS_PER_SUBFRAME = 14
SUBCARRIERS_PER_PRB = 12
CP_LENGTHS = (10, 9, 9, 9, 9, 9, 9) * 2
SUBFRAME_SAMPLES = sum(CP_LENGTHS) + SYMBOLS_PER_SUBFRAME * FFT_SIZE  # 1920
TS = 1.0 / SAMPLE_RATE


def symbol_starts() -> np.ndarray:
    """Offset of each symbol's useful part (after its CP) within a subframe."""
    offsets = np.cumsum((0,) + tuple(c + FFT_SIZE for c in CP_LENGTHS[:-1]))
    return offsets + np.array(CP_LENGTHS)


def subcarrier_bins(num_subcarriers: int) -> np.ndarray:
    """FFT bins for grid subcarriers 0..n-1, centred on DC."""
    return (np.arange(num_subcarriers) - num_subcarriers // 2) % FFT_SIZE


def subcarrier_frequencies(num_subcarriers: int) -> np.ndarray:
    return (np.arange(num_subcarriers) - num_subcarriers // 2) * SUBCARRIER_SPACING


def _as_ports(grids: np.ndarray) -> np.ndarray:
    grids = np.asarray(grids)
    if grids.ndim == 3:
        grids = grids[None]
    if grids.ndim != 4 or grids.shape[2] != SYMBOLS_PER_SUBFRAME:
        raise ValueError("grids must have shape ([ports,] subframes, 14, subcarriers)")
    if grids.shape[3] > FFT_SIZE:
        raise ValueError("too many subcarriers for the transform size")
    return grids


def ofdm_modulate(grids: np.ndarray) -> np.ndarray:
    """Unitary-scaled OFDM modulation, returns (ports, subframes * 1920) samples."""
    grids = _as_ports(grids)
    ports, nsf, nsym, nsc = grids.shape
    spectrum = np.zeros((ports, nsf, nsym, FFT_SIZE), dtype=complex)
    spectrum[..., subcarrier_bins(nsc)] = grids
    body = np.fft.ifft(spectrum, axis=-1) * np.sqrt(FFT_SIZE)
    out = np.empty((ports, nsf, SUBFRAME_SAMPLES), dtype=complex)
    pos = 0
    for sym, cp in enumerate(CP_LENGTHS):
        out[:, :, pos : pos + cp] = body[:, :, sym, FFT_SIZE - cp :]
        out[:, :, pos + cp : pos + cp + FFT_SIZE] = body[:, :, sym]
        pos += cp + FFT_SIZE
    return out.reshape(ports, nsf * SUBFRAME_SAMPLES)


@lru_cache(maxsize=64)
def _window_index(num_subframes: int, backoff: int) -> np.ndarray:
    starts = (np.arange(num_subframes)[:, None] * SUBFRAME_SAMPLES + symbol_starts()[None, :] - backoff)
    return starts[..., None] + np.arange(FFT_SIZE)


def ofdm_demodulate(samples: np.ndarray, timing: int, num_subframes: int,
                    num_subcarriers: int = SUBCARRIERS_PER_PRB, backoff: int = 0) -> np.ndarray:
    """Extract grids of ``num_subframes`` subframes starting at sample ``timing``.

    ``backoff`` moves every FFT window that many samples into the cyclic
    prefix; the resulting linear phase is removed so a clean signal
    round-trips exactly.
    Returns shape (ports, subframes, 14, subcarriers); a 1-D input yields a
    single port.
    """
    samples = np.asarray(samples)
    squeeze = samples.ndim == 1
    if squeeze:
        samples = samples[None]
    if not 0 <= backoff <= min(CP_LENGTHS):
        raise ValueError("backoff must lie within the cyclic prefix")
    end = timing + num_subframes * SUBFRAME_SAMPLES
    if timing - backoff < 0 or end > samples.shape[-1]:
        raise ValueError(f"timing {timing} out of bounds for {samples.shape[-1]} samples")
    idx = _window_index(num_subframes, backoff) + timing
    spectrum = np.fft.fft(samples[:, idx], axis=-1) / np.sqrt(FFT_SIZE)
    bins = subcarrier_bins(num_subcarriers)
    grids = spectrum[..., bins]
    if backoff:
        grids = grids * np.exp(2j * np.pi * bins * backoff / FFT_SIZE)
    return grids
