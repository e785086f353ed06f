"""NPSS, NSSS and precoding-vector-switching sequences of the enhanced DRS."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from .fh_kernel import MAX_PCI

NPSS_ROOT = 5
NPSS_LENGTH = 11
NPSS_SUBFRAMES = 8
SYMBOLS_PER_SUBFRAME = 14
NPSS_SYMBOLS = NPSS_SUBFRAMES * SYMBOLS_PER_SUBFRAME  # 112
NSSS_LENGTH = 168
NSSS_ZC_LENGTH = 167
HADAMARD_LENGTH = 160
NSSS_SUBFRAMES = 2
NUM_SHIFTS = 4

# 3GPP Rel-13 NPSS cover over symbols 3..13 of a subframe
LEGACY_NPSS_COVER = np.array([1, 1, 1, 1, -1, -1, 1, 1, 1, -1, 1])


def _load_table(name: str) -> np.ndarray:
    text = resources.files("nbiotu.data").joinpath(name).read_text()
    rows = [
        [int(v) for v in line.split()]
        for line in text.splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]
    table = np.array(rows, dtype=np.int8)
    if not np.all(np.abs(table) == 1):
        raise ValueError(f"{name}: entries must be +1/-1")
    return table


@lru_cache(maxsize=None)
def occ_sequence() -> np.ndarray:
    """The length-112 long orthogonal cover code S(l)."""
    occ = _load_table("npss_occ.txt")[0]
    if occ.shape != (NPSS_SYMBOLS,):
        raise ValueError("OCC table must hold 112 entries")
    occ.setflags(write=False)
    return occ


@lru_cache(maxsize=None)
def hadamard_table() -> np.ndarray:
    rows = _load_table("nsss_hadamard.txt")
    if rows.shape != (4, HADAMARD_LENGTH):
        raise ValueError("Hadamard table must be 4 x 160")
    rows.setflags(write=False)
    return rows


def zadoff_chu(root: int, length: int, num: int | None = None) -> np.ndarray:
    """exp(-j*pi*u*n*(n+1)/N) for n = 0..num-1, evaluated with exact modular phase."""
    n = np.arange(length if num is None else num, dtype=np.int64)
    # n(n+1) is even, so the phase is a multiple of 2*pi/N; reduce before exp
    k = (root * ((n * (n + 1) // 2) % length)) % length
    return np.exp(-2j * np.pi * k / length)


def npss_base() -> np.ndarray:
    return zadoff_chu(NPSS_ROOT, NPSS_LENGTH)


def gen_npss_burst(occ=None) -> np.ndarray:
    """Frequency-domain NPSS values, shape (8 subframes, 14 symbols, 11 subcarriers)."""
    occ = occ_sequence() if occ is None else np.asarray(occ)
    if occ.shape != (NPSS_SYMBOLS,) or not np.all(np.abs(occ) == 1):
        raise ValueError("occ must be 112 entries of +1/-1")
    burst = occ[:, None] * npss_base()[None, :]
    return burst.reshape(NPSS_SUBFRAMES, SYMBOLS_PER_SUBFRAME, NPSS_LENGTH)


def nsss_root(pci: int) -> int:
    return pci % 126 + 3


def nsss_shift(x: int) -> Fraction:
    """Cyclic-shift parameter (42/168)(x+1) kept exact."""
    return Fraction(42, 168) * (x + 1)


def _check_nsss_args(pci: int, x: int):
    if not 0 <= pci <= MAX_PCI:
        raise ValueError(f"pci must be in 0..{MAX_PCI}")
    if not 0 <= x < NUM_SHIFTS:
        raise ValueError("shift index x must be in 0..3")


def gen_nsss(pci: int, x: int, table=None) -> np.ndarray:
    """The 168-entry NSSS sequence for cell ``pci`` and cyclic shift ``x``."""
    _check_nsss_args(pci, x)
    table = hadamard_table() if table is None else np.asarray(table)
    n = np.arange(NSSS_LENGTH, dtype=np.int64)
    q = pci // 126
    theta = nsss_shift(x)
    # theta*n mod 1 computed exactly on the integer grid of the denominator
    shift_phase = (theta.numerator * n) % theta.denominator / theta.denominator
    cover = table[q][n % HADAMARD_LENGTH]
    zc = zadoff_chu(nsss_root(pci), NSSS_ZC_LENGTH, NSSS_LENGTH)  # n' = n mod 167 via periodicity
    return cover * np.exp(-2j * np.pi * shift_phase) * zc


@lru_cache(maxsize=None)
def nsss_codebook() -> np.ndarray:
    """All 504 x 4 NSSS hypotheses, shape (504, 4, 168)."""
    book = np.empty((MAX_PCI + 1, NUM_SHIFTS, NSSS_LENGTH), dtype=complex)
    for pci in range(MAX_PCI + 1):
        for x in range(NUM_SHIFTS):
            book[pci, x] = gen_nsss(pci, x)
    book.setflags(write=False)
    return book


def nsss_to_grid(seq: np.ndarray) -> np.ndarray:
    """Symbol-major mapping of the 168 entries onto a 14 x 12 grid."""
    return np.asarray(seq).reshape(SYMBOLS_PER_SUBFRAME, 12)


def pvs_weights(num_repetitions: int, sf_index: int, normalize: bool = True) -> np.ndarray:
    """Two-antenna precoder for subframe ``sf_index`` of an N-subframe burst.

    [1, 1] for the first half of the burst and [1, -1] for the rest.  With
    ``normalize`` the vector is scaled by 1/sqrt(2) so the total transmit
    power equals that of a single antenna.
    """
    if num_repetitions <= 0 or num_repetitions % 2:
        raise ValueError("number of repetitions must be a positive even number")
    if not 0 <= sf_index < num_repetitions:
        raise ValueError("sf_index out of range")
    w = np.array([1.0, 1.0]) if sf_index < num_repetitions // 2 else np.array([1.0, -1.0])
    return w / np.sqrt(2) if normalize else w


def aperiodic_autocorrelation(seq) -> np.ndarray:
    """|R(k)| for lags k = 0..N-1, direct summation."""
    s = np.asarray(seq, dtype=float)
    n = len(s)
    return np.array([abs(np.dot(s[: n - k], s[k:])) for k in range(n)])


def secondary_peak_ratio(seq) -> float:
    """Largest off-peak aperiodic autocorrelation magnitude divided by the main peak."""
    r = aperiodic_autocorrelation(seq)
    return float(r[1:].max() / r[0])
