"""DRS block and 3-PRB anchor channel assembly."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import sequences as seq
from ..fh_kernel import FrameClock
from .npbch import Mib, block_index_for_frame, encode_npbch

NPSS = "NPSS"
NSSS = "NSSS"
NPBCH = "NPBCH"
DRS_LAYOUT = (NPSS,) * 8 + (NSSS,) * 2 + (NPBCH,) * 10
DRS_SUBFRAMES = len(DRS_LAYOUT)
NPSS_SLICE = slice(0, 8)
NSSS_SLICE = slice(8, 10)
NPBCH_SLICE = slice(10, 20)
ANCHOR_PRBS = 3

# NPSS transmit options
LONG_OCC_PVS = "long"
LEGACY = "legacy"


def ports_weights(num_ports: int, reps: int, sf: int, pvs: bool) -> np.ndarray:
    if num_ports == 1:
        return np.ones(1)
    if pvs:
        return seq.pvs_weights(reps, sf)
    return seq.pvs_weights(reps, 0)


def npss_grids(num_ports: int = 2, mode: str = LONG_OCC_PVS) -> np.ndarray:
    """NPSS burst on a 12-subcarrier PRB, shape (ports, 8, 14, 12)."""
    grids = np.zeros((num_ports, 8, 14, 12), dtype=complex)
    if mode == LONG_OCC_PVS:
        burst = seq.gen_npss_burst()
        for sf in range(8):
            w = ports_weights(num_ports, 8, sf, pvs=True)
            grids[:, sf, :, :11] = w[:, None, None] * burst[sf][None]
    elif mode == LEGACY:
        sym = seq.LEGACY_NPSS_COVER[:, None] * seq.npss_base()[None, :]
        w = ports_weights(num_ports, 8, 0, pvs=False)
        grids[:, :, 3:, :11] = w[:, None, None, None] * sym[None, None]
    else:
        raise ValueError(f"unknown NPSS mode {mode!r}")
    return grids


def nsss_grids(pci: int, x: int, num_ports: int = 2, pvs: bool = True) -> np.ndarray:
    base = seq.nsss_to_grid(seq.gen_nsss(pci, x))
    grids = np.zeros((num_ports, 2, 14, 12), dtype=complex)
    for sf in range(2):
        w = ports_weights(num_ports, 2, sf, pvs)
        grids[:, sf] = w[:, None, None] * base[None]
    return grids


@dataclass
class DrsBlock:
    """One anchor occasion's discovery reference signal on PRB1."""

    grids: np.ndarray  # (ports, 20, 14, 12)
    pci: int
    x: int
    mib: Mib
    block_index: int
    npss_mode: str = LONG_OCC_PVS

    layout = DRS_LAYOUT

    @property
    def num_ports(self) -> int:
        return self.grids.shape[0]

    @property
    def duration_ms(self) -> int:
        return self.grids.shape[1]


def build_drs(pci: int, x: int, mib: Mib, block_index: int, num_ports: int = 2,
              npss_mode: str = LONG_OCC_PVS) -> DrsBlock:
    pvs = npss_mode == LONG_OCC_PVS
    grids = np.concatenate(
        [
            npss_grids(num_ports, npss_mode),
            nsss_grids(pci, x, num_ports, pvs),
            encode_npbch(mib, block_index, pci, num_ports),
        ],
        axis=1,
    )
    return DrsBlock(grids, pci, x, mib, block_index, npss_mode)


@dataclass
class Anchor:
    drs: DrsBlock
    grids: np.ndarray  # (ports, 20, 14, 36): PRB1 DRS, PRB2 data, PRB3 SIB placeholder
    clock: FrameClock


def build_anchor(pci: int, clock: FrameClock, mib: Mib, x: int = 0, num_ports: int = 2,
                 rng: np.random.Generator | None = None) -> Anchor:
    """Assemble the 540 kHz anchor carrier for the occasion starting at ``clock``.

    PRB2 and PRB3 carry random QPSK of the same per-RE power as the DRS; they
    stand in for downlink data and SIBs.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    drs = build_drs(pci, x, mib, block_index_for_frame(clock.nF), num_ports)
    shape = (num_ports, DRS_SUBFRAMES, 14, 24)
    filler = (rng.choice([-1.0, 1.0], shape) + 1j * rng.choice([-1.0, 1.0], shape)) / np.sqrt(2)
    filler /= np.sqrt(num_ports)
    grids = np.concatenate([drs.grids, filler], axis=-1)
    return Anchor(drs, grids, clock)
