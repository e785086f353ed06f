"""Straight-line reference implementations used to cross-check the package.

Deliberately slow and scalar: plain Python integers, no shared helpers with
the library code.
"""

from __future__ import annotations

import cmath
import math

# Bluetooth PERM5 butterfly stages in the order they act on the word
# (control bit, wire a, wire b); first stage is driven by P13.
PERM5_STAGES = [
    (13, 1, 2), (12, 0, 3),
    (11, 1, 3), (10, 2, 4),
    (9, 0, 3), (8, 1, 4),
    (7, 3, 4), (6, 0, 2),
    (5, 1, 3), (4, 0, 4),
    (3, 3, 4), (2, 1, 2),
    (1, 2, 3), (0, 0, 1),
]

C_TABLE = [0, 23, 62, 8, 43, 16, 47, 19, 61, 29, 59, 22, 52, 63, 26, 31, 2, 18,
           11, 36, 54, 21, 3, 37, 10, 34, 7, 4, 60, 27, 12, 25, 14, 57, 41, 32, 9, 58, 45,
           20, 39, 13, 33, 50, 56, 42, 48, 15, 5, 17, 6, 49, 40, 1, 28, 55, 35, 53, 24, 44,
           51, 38, 30, 46]
B_TABLE = [0, 14, 1, 16, 24, 11, 22, 3, 12, 13, 9, 19, 5, 25, 2, 17,
           8, 23, 15, 28, 10, 27, 29, 21, 7, 31, 6, 20, 30, 4, 18, 26]


def bit_field(value: int, hi: int, lo: int) -> int:
    text = format(value, "064b")[::-1]  # text[k] is bit k
    return int(text[lo : hi + 1][::-1], 2)


def perm5(z: int, p: int) -> int:
    bits = [(z >> k) & 1 for k in range(5)]
    for ctrl, a, b in PERM5_STAGES:
        if (p >> ctrl) & 1:
            bits[a], bits[b] = bits[b], bits[a]
    return sum(v << k for k, v in enumerate(bits))


def n32(nsfn: int, pci: int) -> int:
    i = bit_field(nsfn, 4, 0) ^ bit_field(pci, 4, 0)
    x = (B_TABLE[i] + bit_field(nsfn, 9, 5)) % 32
    p = bit_field(nsfn, 10, 5) + 64 * bit_field(pci, 7, 0)
    return perm5(x, p)


def n64(nsfn: int, pci: int) -> int:
    j = n32(nsfn, pci) + 32 * bit_field(nsfn, 5, 5)
    return ((C_TABLE[j] ^ bit_field(pci, 5, 0)) + bit_field(nsfn, 10, 6)) % 64


def nsfn(nhfn: int, nf: int) -> int:
    return (1024 * nhfn + nf) // 2


def zadoff_chu(u: int, length: int, n: int) -> complex:
    return cmath.exp(-1j * math.pi * u * n * (n + 1) / length)


def crc16(bits: list[int]) -> list[int]:
    """Remainder of bits(D) * D^16 divided by D^16 + D^12 + D^5 + 1."""
    poly = (1 << 16) | (1 << 12) | (1 << 5) | 1
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    value <<= 16
    for shift in range(value.bit_length() - 17, -1, -1):
        if value >> (shift + 16) & 1:
            value ^= poly << shift
    return [(value >> (15 - k)) & 1 for k in range(16)]


def conv_encode_tail_biting(bits: list[int]) -> list[list[int]]:
    """Rate 1/3, K = 7, generators 133/171/165 octal; register preloaded with the last six bits."""
    gens = [0o133, 0o171, 0o165]
    reg = list(reversed(bits[-6:]))  # reg[0] = most recent
    out = [[], [], []]
    for b in bits:
        window = [b] + reg
        for g, stream in zip(gens, out):
            taps = [(g >> (6 - j)) & 1 for j in range(7)]
            stream.append(sum(t * w for t, w in zip(taps, window)) % 2)
        reg = [b] + reg[:-1]
    return out


def gold(c_init: int, length: int, nc: int = 1600) -> list[int]:
    total = nc + length + 31
    x1 = [1] + [0] * 30
    x2 = [(c_init >> i) & 1 for i in range(31)]
    while len(x1) < total:
        n = len(x1) - 31
        x1.append((x1[n + 3] + x1[n]) % 2)
        x2.append((x2[n + 3] + x2[n + 2] + x2[n + 1] + x2[n]) % 2)
    return [(x1[n + nc] + x2[n + nc]) % 2 for n in range(length)]


def subblock_interleave(stream: list, cols: int = 32) -> list:
    """Column-permuted read-out, None marks filler positions."""
    perm = [1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31,
            0, 16, 8, 24, 4, 20, 12, 28, 2, 18, 10, 26, 6, 22, 14, 30]
    rows = math.ceil(len(stream) / cols)
    padded = [None] * (rows * cols - len(stream)) + list(stream)
    matrix = [padded[r * cols : (r + 1) * cols] for r in range(rows)]
    out = []
    for c in perm:
        for r in range(rows):
            out.append(matrix[r][c])
    return out


def circular_buffer(streams: list[list]) -> list:
    buf = []
    for s in streams:
        buf.extend(v for v in subblock_interleave(s) if v is not None)
    return buf


def aperiodic_autocorrelation(seq: list[float]) -> list[float]:
    n = len(seq)
    return [abs(sum(seq[i] * seq[i + k] for i in range(n - k))) for k in range(n)]


def transition_counts(channels: list[int], n: int = 64) -> list[list[int]]:
    counts = [[0] * n for _ in range(n)]
    for a, b in zip(channels, channels[1:]):
        counts[a][b] += 1
    return counts
