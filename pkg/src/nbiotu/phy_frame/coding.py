"""Broadcast channel coding chain: CRC16, LTE tail-biting convolutional code,
sub-block interleaving / circular-buffer rate matching and Gold scrambling."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

CRC16_POLY = 0x1021  # D^16 + D^12 + D^5 + 1
CONSTRAINT_LENGTH = 7
NUM_STATES = 1 << (CONSTRAINT_LENGTH - 1)
# octal 133, 171, 165
GENERATORS = (0o133, 0o171, 0o165)

# column permutation of the convolutional-code sub-block interleaver
SUBBLOCK_PERMUTATION = (
    1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31,
    0, 16, 8, 24, 4, 20, 12, 28, 2, 18, 10, 26, 6, 22, 14, 30,
)
GOLD_NC = 1600


def crc16(bits) -> np.ndarray:
    """16 parity bits (MSB first) of ``bits`` under the LTE gCRC16 polynomial."""
    reg = 0
    for b in np.asarray(bits, dtype=np.uint8):
        fb = ((reg >> 15) & 1) ^ int(b)
        reg = (reg << 1) & 0xFFFF
        if fb:
            reg ^= CRC16_POLY
    return np.array([(reg >> (15 - k)) & 1 for k in range(16)], dtype=np.uint8)


def attach_crc(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    return np.concatenate([bits, crc16(bits)])


def check_crc(bits_with_crc) -> bool:
    bits_with_crc = np.asarray(bits_with_crc, dtype=np.uint8)
    return bool(np.array_equal(crc16(bits_with_crc[:-16]), bits_with_crc[-16:]))


def _taps(gen: int) -> np.ndarray:
    # tap j multiplies c[k - j]; the octal MSB is j = 0
    return np.array([(gen >> (CONSTRAINT_LENGTH - 1 - j)) & 1 for j in range(CONSTRAINT_LENGTH)])


def tbcc_encode(bits) -> np.ndarray:
    """Rate-1/3 tail-biting encoding, returns shape (3, K) streams d0, d1, d2."""
    c = np.asarray(bits, dtype=np.int64)
    k = len(c)
    if k < CONSTRAINT_LENGTH - 1:
        raise ValueError("block too short for tail-biting")
    idx = (np.arange(k)[:, None] - np.arange(CONSTRAINT_LENGTH)[None, :]) % k
    window = c[idx]  # window[k, j] = c[k - j] with circular wrap
    return np.stack([(window @ _taps(g)) % 2 for g in GENERATORS]).astype(np.uint8)


@lru_cache(maxsize=None)
def _trellis():
    # state = (c[k-1], ..., c[k-6]) packed with c[k-1] as the MSB
    taps = np.stack([_taps(g) for g in GENERATORS])  # (3, 7)
    prev_states = np.empty((NUM_STATES, 2), dtype=np.int64)
    out_sign = np.empty((NUM_STATES, 2, 3))
    for ns in range(NUM_STATES):
        u = ns >> 5
        for branch in range(2):
            ps = ((ns << 1) & (NUM_STATES - 1)) | branch
            reg = [u] + [(ps >> (5 - m)) & 1 for m in range(6)]
            out = taps @ np.array(reg) % 2
            prev_states[ns, branch] = ps
            out_sign[ns, branch] = 1 - 2 * out
    return prev_states, out_sign


def viterbi_tbcc(llr: np.ndarray, wraps: int = 3) -> np.ndarray:
    """Max-log Viterbi for the tail-biting code by wrap-around decoding.

    ``llr`` has shape (3, K) with positive values favouring bit 0.  The
    stream is decoded ``wraps`` times back to back from uniform state metrics
    and the decisions of the middle copy are returned.
    """
    llr = np.asarray(llr, dtype=float)
    k = llr.shape[1]
    prev_states, out_sign = _trellis()
    total = wraps * k
    metric = np.zeros(NUM_STATES)
    survivors = np.empty((total, NUM_STATES), dtype=np.int8)
    for t in range(total):
        branch = out_sign @ llr[:, t % k]  # (64, 2)
        cand = metric[prev_states] + branch
        choice = np.argmax(cand, axis=1)
        metric = cand[np.arange(NUM_STATES), choice]
        metric -= metric.max()
        survivors[t] = choice
    state = int(np.argmax(metric))
    decided = np.empty(total, dtype=np.uint8)
    for t in range(total - 1, -1, -1):
        decided[t] = state >> 5
        state = int(prev_states[state, survivors[t, state]])
    mid = (wraps // 2) * k
    return decided[mid : mid + k]


@lru_cache(maxsize=None)
def _subblock_positions(d: int) -> np.ndarray:
    """Circular-buffer read order as indices into the flattened (3, D) stream."""
    cols = 32
    rows = -(-d // cols)
    nulls = rows * cols - d
    order = []
    for stream in range(3):
        padded = np.full(rows * cols, -1, dtype=np.int64)
        padded[nulls:] = stream * d + np.arange(d)
        matrix = padded.reshape(rows, cols)[:, list(SUBBLOCK_PERMUTATION)]
        read = matrix.T.ravel()
        order.append(read[read >= 0])
    return np.concatenate(order)


def rate_match(streams: np.ndarray, e: int, offset: int = 0) -> np.ndarray:
    """Bits ``offset .. offset + e - 1`` of the circular buffer of ``streams``."""
    streams = np.asarray(streams)
    pos = _subblock_positions(streams.shape[1])
    flat = streams.ravel()
    return flat[pos[(offset + np.arange(e)) % len(pos)]]


def rate_dematch(llr: np.ndarray, d: int, offset: int = 0, out: np.ndarray | None = None) -> np.ndarray:
    """Accumulate soft bits read at circular-buffer ``offset`` into a (3, d) array."""
    pos = _subblock_positions(d)
    acc = np.zeros(3 * d) if out is None else out.reshape(-1)
    np.add.at(acc, pos[(offset + np.arange(len(llr))) % len(pos)], llr)
    return acc.reshape(3, d)


def gold_sequence(c_init: int, length: int) -> np.ndarray:
    """LTE length-31 Gold pseudo-random sequence c(n)."""
    total = GOLD_NC + length
    x1 = np.zeros(total + 31, dtype=np.uint8)
    x2 = np.zeros(total + 31, dtype=np.uint8)
    x1[0] = 1
    x2[:31] = [(c_init >> i) & 1 for i in range(31)]
    for n in range(total):
        x1[n + 31] = x1[n + 3] ^ x1[n]
        x2[n + 31] = x2[n + 3] ^ x2[n + 2] ^ x2[n + 1] ^ x2[n]
    return (x1[GOLD_NC : GOLD_NC + length] ^ x2[GOLD_NC : GOLD_NC + length]).astype(np.uint8)
