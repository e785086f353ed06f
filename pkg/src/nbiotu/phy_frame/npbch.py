"""NPBCH: MIB coding into eight self-decodable blocks and resource mapping."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import coding

MIB_PAYLOAD_BITS = 34
CRC_BITS = 16
MIB_BITS = MIB_PAYLOAD_BITS + CRC_BITS
NUM_CODE_BLOCKS = 8
REPETITIONS = 10
NRS_SYMBOLS = (5, 6, 12, 13)
NUM_TX_PORTS_MAX = 2


@dataclass(frozen=True)
class Mib:
    payload: tuple[int, ...]

    def __post_init__(self):
        if len(self.payload) != MIB_PAYLOAD_BITS or any(b not in (0, 1) for b in self.payload):
            raise ValueError(f"MIB payload must be {MIB_PAYLOAD_BITS} bits")

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Mib":
        return cls(tuple(int(b) for b in rng.integers(0, 2, MIB_PAYLOAD_BITS)))

    @classmethod
    def from_bits(cls, bits_with_crc) -> "Mib | None":
        """Rebuild from decoded payload+CRC bits, None when the CRC fails."""
        bits = np.asarray(bits_with_crc, dtype=np.uint8)
        if len(bits) != MIB_BITS:
            raise ValueError("expected payload + CRC bits")
        if not coding.check_crc(bits):
            return None
        return cls(tuple(int(b) for b in bits[:MIB_PAYLOAD_BITS]))

    def bits(self) -> np.ndarray:
        return coding.attach_crc(np.array(self.payload, dtype=np.uint8))


@lru_cache(maxsize=None)
def nrs_mask(pci: int) -> np.ndarray:
    """Boolean (ports, 14, 12) mask of narrowband reference signal positions."""
    vshift = pci % 6
    mask = np.zeros((NUM_TX_PORTS_MAX, 14, 12), dtype=bool)
    for port in range(NUM_TX_PORTS_MAX):
        for sym in NRS_SYMBOLS:
            first = sym in (5, 12)
            v = (0 if first else 3) if port == 0 else (3 if first else 0)
            for m in range(2):
                mask[port, sym, 6 * m + (v + vshift) % 6] = True
    mask.setflags(write=False)
    return mask


@lru_cache(maxsize=None)
def data_positions(pci: int) -> tuple[np.ndarray, np.ndarray]:
    """(symbol, subcarrier) of NPBCH data REs in symbol-major order."""
    free = ~nrs_mask(pci).any(axis=0)
    sym, sc = np.nonzero(free)
    return sym, sc


def num_data_res(pci: int = 0) -> int:
    return len(data_positions(pci)[0])


def bits_per_block(pci: int = 0) -> int:
    return 2 * num_data_res(pci)


@lru_cache(maxsize=None)
def nrs_values(pci: int) -> np.ndarray:
    """Unit-modulus QPSK pilot values on a (ports, 14, 12) grid (zero elsewhere)."""
    vals = np.zeros((NUM_TX_PORTS_MAX, 14, 12), dtype=complex)
    for sym in NRS_SYMBOLS:
        c = coding.gold_sequence(2**10 * (sym + 1) * (2 * pci + 1) + 2 * pci + 1, 8)
        q = ((1 - 2.0 * c[0::2]) + 1j * (1 - 2.0 * c[1::2])) / np.sqrt(2)
        for port in range(NUM_TX_PORTS_MAX):
            cols = np.nonzero(nrs_mask(pci)[port, sym])[0]
            vals[port, sym, cols] = q[2 * port : 2 * port + 2]
    vals.setflags(write=False)
    return vals


@lru_cache(maxsize=None)
def scrambling_sequence(pci: int) -> np.ndarray:
    seq = coding.gold_sequence(pci, NUM_CODE_BLOCKS * bits_per_block(pci))
    seq.setflags(write=False)
    return seq


def qpsk(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=float)
    return ((1 - 2 * bits[0::2]) + 1j * (1 - 2 * bits[1::2])) / np.sqrt(2)


def coded_block_bits(mib: Mib, block_index: int, pci: int) -> np.ndarray:
    """Scrambled rate-matched bits of code block ``block_index``."""
    if not 0 <= block_index < NUM_CODE_BLOCKS:
        raise ValueError("block_index must be in 0..7")
    bits = mib.bits()
    if len(bits) != MIB_BITS:
        raise ValueError("MIB with CRC must carry 50 bits")
    e = bits_per_block(pci)
    streams = coding.tbcc_encode(bits)
    rm = coding.rate_match(streams, e, offset=block_index * e)
    return rm ^ scrambling_sequence(pci)[block_index * e : (block_index + 1) * e]


def sfbc_encode(symbols: np.ndarray) -> np.ndarray:
    """Alamouti space-frequency block code over consecutive pairs, shape (2, n)."""
    x0, x1 = symbols[0::2], symbols[1::2]
    out = np.empty((2, len(symbols)), dtype=complex)
    out[0, 0::2], out[0, 1::2] = x0, x1
    out[1, 0::2], out[1, 1::2] = -np.conj(x1), np.conj(x0)
    return out / np.sqrt(2)


def encode_npbch(mib: Mib, block_index: int, pci: int, num_ports: int = 2) -> np.ndarray:
    """Grids of one anchor's NPBCH: shape (ports, 10, 14, 12), identical subframes."""
    if num_ports not in (1, 2):
        raise ValueError("num_ports must be 1 or 2")
    symbols = qpsk(coded_block_bits(mib, block_index, pci))
    sym, sc = data_positions(pci)
    grid = np.zeros((num_ports, 14, 12), dtype=complex)
    if num_ports == 2:
        grid[:, sym, sc] = sfbc_encode(symbols)
    else:
        grid[0, sym, sc] = symbols
    grid += nrs_values(pci)[:num_ports]
    return np.repeat(grid[:, None], REPETITIONS, axis=1)


def block_index_for_frame(nF: int) -> int:
    """Code block carried by the anchor of radio frame ``nF`` (640 ms MIB period)."""
    return (nF % 64) // 8
