"""Memory-less frequency hopping pattern generator for the FCC data channels.

The hop index for a frame is a pure function of the physical cell id and the
frame clock.  A 5-bit base-sequence lookup is scrambled by the frame number,
passed through the Bluetooth PERM5 butterfly network and then mapped onto
64 channels through a second base sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NUM_DATA_CHANNELS = 64
FRAMES_PER_HYPERFRAME = 1024
MAX_PCI = 503

# 64-entry base sequence, indexed 0-based by j = n32 + 32 * bit5(nSFN).
BASE_C = (
    0, 23, 62, 8, 43, 16, 47, 19, 61, 29, 59, 22, 52, 63, 26, 31,
    2, 18, 11, 36, 54, 21, 3, 37, 10, 34, 7, 4, 60, 27, 12, 25,
    14, 57, 41, 32, 9, 58, 45, 20, 39, 13, 33, 50, 56, 42, 48, 15,
    5, 17, 6, 49, 40, 1, 28, 55, 35, 53, 24, 44, 51, 38, 30, 46,
)

# 32-entry base sequence, indexed 0-based by i = nSFN(4:0) xor pci(4:0).
BASE_B = (
    0, 14, 1, 16, 24, 11, 22, 3, 12, 13, 9, 19, 5, 25, 2, 17,
    8, 23, 15, 28, 10, 27, 29, 21, 7, 31, 6, 20, 30, 4, 18, 26,
)

# Bluetooth hop selection kernel PERM5: control bit P_k swaps wires
# (BUTTERFLY[k][0], BUTTERFLY[k][1]).  Stages are applied P13 first, P0 last.
BUTTERFLY = (
    (0, 1), (2, 3), (1, 2), (3, 4), (0, 4), (1, 3), (0, 2),
    (3, 4), (1, 4), (0, 3), (2, 4), (1, 3), (0, 3), (1, 2),
)


@dataclass(frozen=True)
class CellIdentity:
    pci: int

    def __post_init__(self):
        if not 0 <= self.pci <= MAX_PCI:
            raise ValueError(f"pci must be in 0..{MAX_PCI}, got {self.pci}")


@dataclass(frozen=True)
class FrameClock:
    """Hyper-frame number and radio frame number (0..1023)."""

    nHFN: int
    nF: int

    def __post_init__(self):
        if self.nHFN < 0:
            raise ValueError("nHFN must be non-negative")
        if not 0 <= self.nF < FRAMES_PER_HYPERFRAME:
            raise ValueError(f"nF must be in 0..1023, got {self.nF}")

    @classmethod
    def from_frame_count(cls, frames: int) -> "FrameClock":
        """Clock reached after ``frames`` radio frames counted from (0, 0)."""
        return cls(*divmod(frames, FRAMES_PER_HYPERFRAME))


def _bits(value, hi: int, lo: int):
    """Bit slice value(hi:lo), works elementwise on integer arrays."""
    return (value >> lo) & ((1 << (hi - lo + 1)) - 1)


def _pci_value(pci) -> int:
    return pci.pci if isinstance(pci, CellIdentity) else int(pci)


def nsfn_from_clock(clock: FrameClock) -> int:
    return (FRAMES_PER_HYPERFRAME * clock.nHFN + clock.nF) // 2


def perm5(z, p):
    """Apply the 14-stage PERM5 butterfly network.

    Parameters
    ----------
    z : int or ndarray
        5-bit input word(s).
    p : int or ndarray
        14-bit control word(s); bit k enables butterfly ``BUTTERFLY[k]``.

    Returns
    -------
    int or ndarray
        The permuted 5-bit word(s), same shape as the broadcast inputs.
    """
    scalar = np.isscalar(z) and np.isscalar(p)
    z = np.asarray(z, dtype=np.int64)
    p = np.asarray(p, dtype=np.int64)
    if np.any((z < 0) | (z > 31)) or np.any((p < 0) | (p > 0x3FFF)):
        raise ValueError("perm5 expects 0 <= z < 32 and 0 <= p < 16384")
    z, p = np.broadcast_arrays(z, p)
    wires = [(z >> k) & 1 for k in range(5)]
    for k in range(13, -1, -1):
        a, b = BUTTERFLY[k]
        swap = ((p >> k) & 1).astype(bool)
        wa, wb = wires[a], wires[b]
        wires[a] = np.where(swap, wb, wa)
        wires[b] = np.where(swap, wa, wb)
    out = sum(w << k for k, w in enumerate(wires))
    return int(out) if scalar else out


def n32(nsfn, pci):
    """Intermediate 5-bit hop index for system frame number(s) ``nsfn``."""
    pci = _pci_value(pci)
    nsfn = np.asarray(nsfn, dtype=np.int64)
    if np.any(nsfn < 0):
        raise ValueError("nSFN must be non-negative")
    b = np.asarray(BASE_B, dtype=np.int64)
    i = _bits(nsfn, 4, 0) ^ _bits(pci, 4, 0)
    x = (b[i] + _bits(nsfn, 9, 5)) % 32
    p = _bits(nsfn, 10, 5) + 64 * _bits(pci, 7, 0)
    out = perm5(x, p)
    return int(out) if np.ndim(out) == 0 else out


def n64(nsfn, pci):
    """Data channel index in 0..63 for system frame number(s) ``nsfn``."""
    pci = _pci_value(pci)
    nsfn = np.asarray(nsfn, dtype=np.int64)
    c = np.asarray(BASE_C, dtype=np.int64)
    j = n32(nsfn, pci) + 32 * _bits(nsfn, 5, 5)
    out = ((c[j] ^ _bits(pci, 5, 0)) + _bits(nsfn, 10, 6)) % NUM_DATA_CHANNELS
    return int(out) if np.ndim(out) == 0 else out


def hop_channel(clock: FrameClock, pci) -> int:
    return n64(nsfn_from_clock(clock), pci)


def hop_sequence(pci, num_hops: int, start_nsfn: int = 0) -> np.ndarray:
    """Channels of ``num_hops`` consecutive 20 ms hops starting at ``start_nsfn``."""
    return n64(np.arange(start_nsfn, start_nsfn + num_hops, dtype=np.int64), pci)
