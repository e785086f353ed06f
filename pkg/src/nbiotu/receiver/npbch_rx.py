"""NPBCH demodulation and MIB decoding with soft combining across shots."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..phy_frame import coding
from ..phy_frame.npbch import (
    MIB_BITS,
    REPETITIONS,
    Mib,
    bits_per_block,
    data_positions,
    nrs_mask,
    nrs_values,
    scrambling_sequence,
)
from ..phy_frame.ofdm import SAMPLE_RATE, SUBFRAME_SAMPLES, FFT_SIZE, symbol_starts

RESIDUAL_CFO_SPAN = 100.0
RESIDUAL_CFO_STEP = 2.0


@dataclass
class NpbchShot:
    """Demodulated NPBCH subframes of one anchor (10, 14, 12) and its code block."""

    grids: np.ndarray
    block_index: int


def _symbol_times() -> np.ndarray:
    t = (np.arange(REPETITIONS)[:, None] * SUBFRAME_SAMPLES + symbol_starts()[None, :] + FFT_SIZE / 2)
    return t / SAMPLE_RATE  # (10, 14)


def estimate_residual_cfo(shots: list[NpbchShot], span: float = RESIDUAL_CFO_SPAN,
                          step: float = RESIDUAL_CFO_STEP) -> float:
    """Common residual CFO from the repetition structure.

    The 10 subframes of an anchor are identical, so the energy of their
    frequency-compensated sum peaks at the true offset; energies of all
    shots are added.
    """
    nu = np.arange(-span, span + step / 2, step)
    t = _symbol_times()
    steer = np.exp(-2j * np.pi * nu[:, None, None] * t[None])  # (F, 10, 14)
    power = np.zeros(len(nu))
    for shot in shots:
        acc = np.einsum("fsl,slk->flk", steer, shot.grids)
        power += np.sum(np.abs(acc) ** 2, axis=(1, 2))
    k = int(np.argmax(power))
    est = nu[k]
    if 0 < k < len(nu) - 1:
        a, b, c = power[k - 1], power[k], power[k + 1]
        den = a - 2 * b + c
        if den < 0:
            est += 0.5 * (a - c) / den * step
    return float(est)


def _fit_channel(pilot_k: np.ndarray, pilot_h: np.ndarray) -> np.ndarray:
    """Complex first-order fit of the channel across the 12 subcarriers."""
    A = np.stack([np.ones_like(pilot_k, dtype=float), pilot_k - 5.5], axis=1)
    coef, *_ = np.linalg.lstsq(A, pilot_h, rcond=None)
    k = np.arange(12)
    return coef[0] + coef[1] * (k - 5.5)


def shot_llrs(shot: NpbchShot, pci: int, num_ports: int = 2, residual_cfo: float = 0.0) -> np.ndarray:
    """Descrambled LLRs (positive favours 0) of the shot's 2 * 152 coded bits."""
    grids = np.asarray(shot.grids)
    if grids.shape != (REPETITIONS, 14, 12):
        raise ValueError(f"expected NPBCH grids of shape (10, 14, 12), got {grids.shape}")
    if residual_cfo:
        grids = grids * np.exp(-2j * np.pi * residual_cfo * _symbol_times())[..., None]
    mean = grids.mean(axis=0)
    noise_var = np.sum(np.abs(grids - mean) ** 2) / ((REPETITIONS - 1) * grids[0].size)
    noise_var = max(noise_var / REPETITIONS, 1e-12)  # of the averaged grid

    mask = nrs_mask(pci)
    pilots = nrs_values(pci)
    h = np.zeros((num_ports, 12), dtype=complex)
    for port in range(num_ports):
        sym, k = np.nonzero(mask[port])
        obs = mean[sym, k] * np.conj(pilots[port, sym, k])
        h[port] = _fit_channel(k.astype(float), obs)

    sym, k = data_positions(pci)
    y = mean[sym, k]
    if num_ports == 2:
        h0 = h[0, k] / np.sqrt(2)
        h1 = h[1, k] / np.sqrt(2)
        h0p = 0.5 * (h0[0::2] + h0[1::2])
        h1p = 0.5 * (h1[0::2] + h1[1::2])
        ya, yb = y[0::2], y[1::2]
        x = np.empty(len(y), dtype=complex)
        x[0::2] = np.conj(h0p) * ya + h1p * np.conj(yb)
        x[1::2] = np.conj(h0p) * yb - h1p * np.conj(ya)
    else:
        x = np.conj(h[0, k]) * y
    amp = 1 / np.sqrt(2)
    llr = np.empty(2 * len(x))
    llr[0::2] = 4 * amp * x.real / noise_var
    llr[1::2] = 4 * amp * x.imag / noise_var
    e = bits_per_block(pci)
    c = scrambling_sequence(pci)[shot.block_index * e : (shot.block_index + 1) * e]
    return llr * (1 - 2.0 * c)


def combine_llrs(shots: list[NpbchShot], pci: int, num_ports: int = 2,
                 residual_cfo: float = 0.0) -> np.ndarray:
    """Soft buffer of the 3 x 50 mother-code bits accumulated over ``shots``."""
    e = bits_per_block(pci)
    acc = np.zeros((3, MIB_BITS))
    for shot in shots:
        coding.rate_dematch(shot_llrs(shot, pci, num_ports, residual_cfo), MIB_BITS,
                            offset=shot.block_index * e, out=acc)
    return acc


def npbch_decode(shots: list[NpbchShot], pci: int, num_ports: int = 2,
                 estimate_cfo: bool = True) -> Mib | None:
    """Decode the MIB from 1..8 shots; None when the CRC check fails."""
    if not 1 <= len(shots) <= 8:
        raise ValueError("between 1 and 8 shots are supported")
    shapes = {np.shape(s.grids) for s in shots}
    if len(shapes) != 1:
        raise ValueError("inconsistent grid shapes across shots")
    cfo = estimate_residual_cfo(shots) if estimate_cfo else 0.0
    soft = combine_llrs(shots, pci, num_ports, cfo)
    return Mib.from_bits(coding.viterbi_tbcc(soft))
