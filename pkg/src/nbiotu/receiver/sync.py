"""NPSS timing/frequency acquisition and NSSS cell identification.

Timing search: every OFDM symbol of the burst carries the same length-11 ZC
symbol, so a single matched filter against one useful-symbol template gives
the per-symbol correlations for all timing hypotheses.  Adjacent-symbol
products ``conj(r_l) r_{l+1}``, despread with the cover code and summed
inside each precoder segment, form segment metrics whose magnitude does not
depend on the residual frequency offset.  The detection score adds these
magnitudes over segments and shots.  Frequency-offset hypotheses are laid on
a 5 kHz grid so the per-symbol loss stays below 0.4 dB.

Frequency refinement: the despread per-symbol correlations at the detected
timing are fed to a periodogram whose power is summed over precoder segments
and shots.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .. import sequences as seq
from ..phy_frame.anchor import LEGACY, LONG_OCC_PVS
from ..phy_frame.ofdm import (
    FFT_SIZE,
    SAMPLE_RATE,
    SUBFRAME_SAMPLES,
    ofdm_demodulate,
    subcarrier_bins,
    symbol_starts,
)

BURST_SUBFRAMES = 8
BURST_SAMPLES = BURST_SUBFRAMES * SUBFRAME_SAMPLES
CFO_GRID_STEP = 5e3
CFO_GRID_SPAN = 20e3
FINE_SPAN = 1500.0
FINE_STEP = 10.0
# subframes per coherent combining segment of the detection metric
SEGMENT_SUBFRAMES = 1
# FFT length granularity that puts every CFO_GRID_STEP hypothesis on an integer bin
_FFT_QUANTUM = int(SAMPLE_RATE / CFO_GRID_STEP)  # 384


@dataclass(frozen=True)
class SyncHypothesis:
    timing: int
    cfo_estimate: float
    metric: float
    coarse_cfo: float = 0.0


@dataclass(frozen=True)
class NpssPattern:
    """Receiver model of the transmitted burst."""

    cover: np.ndarray  # (112,) +1/-1, 0 where the symbol is empty
    segment: np.ndarray  # (112,) precoder segment id, -1 where empty
    offsets: np.ndarray  # (112,) useful-part start relative to the burst start

    @property
    def active(self) -> np.ndarray:
        return np.nonzero(self.cover)[0]

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        la = np.arange(len(self.cover) - 1)
        keep = (self.cover[la] != 0) & (self.cover[la + 1] != 0) & (self.segment[la] == self.segment[la + 1])
        return la[keep], la[keep] + 1

    def segments(self) -> list[np.ndarray]:
        ids = np.unique(self.segment[self.segment >= 0])
        return [np.nonzero(self.segment == s)[0] for s in ids]


@lru_cache(maxsize=None)
def npss_pattern(mode: str = LONG_OCC_PVS, num_ports: int = 2) -> NpssPattern:
    offsets = (np.arange(BURST_SUBFRAMES)[:, None] * SUBFRAME_SAMPLES + symbol_starts()[None, :]).ravel()
    if mode == LONG_OCC_PVS:
        cover = seq.occ_sequence().astype(float)
        segment = np.zeros(seq.NPSS_SYMBOLS, dtype=int)
        if num_ports == 2:
            segment[seq.NPSS_SYMBOLS // 2 :] = 1
    elif mode == LEGACY:
        per_sf = np.concatenate([np.zeros(3), seq.LEGACY_NPSS_COVER])
        cover = np.tile(per_sf, BURST_SUBFRAMES)
        segment = np.where(cover != 0, 0, -1)
    else:
        raise ValueError(f"unknown NPSS mode {mode!r}")
    return NpssPattern(cover, segment, offsets)


@lru_cache(maxsize=None)
def npss_template() -> np.ndarray:
    """Time-domain useful part of the NPSS base symbol (unit-energy per RE)."""
    spectrum = np.zeros(FFT_SIZE, dtype=complex)
    spectrum[subcarrier_bins(12)[:11]] = seq.npss_base()
    return np.fft.ifft(spectrum) * np.sqrt(FFT_SIZE)


def _fft_length(n: int) -> int:
    m = -(-n // _FFT_QUANTUM)
    return _FFT_QUANTUM * sfft.next_fast_len(m)


class NpssSearcher:
    """Sliding NPSS correlator over timing and coarse CFO hypotheses."""

    def __init__(self, mode: str = LONG_OCC_PVS, num_ports: int = 2,
                 cfo_span: float = CFO_GRID_SPAN, cfo_step: float = CFO_GRID_STEP,
                 segment_subframes: int = SEGMENT_SUBFRAMES):
        if not np.isclose(cfo_step, CFO_GRID_STEP * round(cfo_step / CFO_GRID_STEP)):
            raise ValueError("cfo_step must be a multiple of 5 kHz")
        if segment_subframes < 1 or BURST_SUBFRAMES % segment_subframes:
            raise ValueError("segment_subframes must divide the 8-subframe burst")
        self.segment_subframes = segment_subframes
        self.mode = mode
        self.pattern = npss_pattern(mode, num_ports)
        n_h = int(round(cfo_span / cfo_step))
        self.hypotheses = np.arange(-n_h, n_h + 1) * cfo_step
        la, lb = self.pattern.pairs()
        self.pair_start = self.pattern.offsets[la]
        self.pair_lag = self.pattern.offsets[lb] - self.pattern.offsets[la]
        self.pair_coef = self.pattern.cover[la] * self.pattern.cover[lb]
        # combining segment: precoder segment split into groups of subframes
        group = (self.pattern.segment[la] * BURST_SUBFRAMES
                 + la // seq.SYMBOLS_PER_SUBFRAME // segment_subframes)
        _, self.pair_segment = np.unique(group, return_inverse=True)
        self.num_segments = int(self.pair_segment.max()) + 1
        self.lags = np.unique(self.pair_lag)
        self._template = npss_template()
        nu = np.arange(-FINE_SPAN, FINE_SPAN + FINE_STEP / 2, FINE_STEP)
        self._fine_grid = nu
        t = (self.pattern.offsets + FFT_SIZE / 2) / SAMPLE_RATE
        self._fine_steer = np.exp(-2j * np.pi * nu[:, None] * t[None, :])

    def _symbol_correlations(self, y: np.ndarray, length: int) -> np.ndarray:
        """r[h, t] = sum_n y(t+n) exp(-j2 pi f_h (t+n)/fs) conj(template(n))."""
        L = _fft_length(len(y) + FFT_SIZE)
        Y = sfft.fft(y, L)
        T = np.conj(sfft.fft(self._template, L))
        shifts = np.rint(self.hypotheses * L / SAMPLE_RATE).astype(int)
        rows = np.stack([np.roll(Y, -s) * T for s in shifts])
        r = sfft.ifft(rows, axis=1)[:, :length]
        return r.astype(np.complex64)

    def metric(self, y: np.ndarray, num_timings: int | None = None) -> np.ndarray:
        """Complex segment metrics D[seg, h, tau] for burst starts tau = 0..num_timings-1."""
        y = np.asarray(y).ravel()
        max_t = len(y) - BURST_SAMPLES + 1
        if max_t <= 0:
            raise ValueError("stream shorter than one NPSS burst")
        num_timings = max_t if num_timings is None else min(num_timings, max_t)
        need = num_timings + self.pattern.offsets[-1] + max(self.lags) + 1
        r = self._symbol_correlations(y, min(need, len(y)))
        # D[tau] = sum_pairs c * q_lag[start + tau]: a correlation of each lag
        # product with a sparse comb, evaluated through one shared FFT size
        span = int(self.pair_start.max()) + 1
        L = sfft.next_fast_len(num_timings + span)
        acc = np.zeros((self.num_segments, len(self.hypotheses), L), dtype=np.complex128)
        for lag in self.lags:
            q = np.conj(r[:, :-lag]) * r[:, lag:]
            Q = sfft.fft(q[:, : num_timings + span - 1], L, axis=1)
            for seg in range(self.num_segments):
                sel = (self.pair_lag == lag) & (self.pair_segment == seg)
                comb = np.zeros(L)
                np.add.at(comb, self.pair_start[sel], self.pair_coef[sel])
                acc[seg] += Q * np.conj(sfft.fft(comb))
        return sfft.ifft(acc, axis=2)[..., :num_timings].astype(np.complex64)

    @staticmethod
    def score(D: np.ndarray) -> np.ndarray:
        """Detection score S[h, tau]: segment metric magnitudes added."""
        return np.abs(D).sum(axis=0)

    def pick(self, score: np.ndarray) -> tuple[int, int]:
        """Index (hypothesis, timing) of the largest score."""
        h, tau = np.unravel_index(np.argmax(score), score.shape)
        return int(h), int(tau)

    def coarse_cfo(self, D: np.ndarray, h: int, tau: int) -> float:
        """CFO from the phase of the segment-summed metric ``D[seg, h, tau]``."""
        mean_lag = np.mean(self.pair_lag)
        phase = np.angle(D[:, h, tau].sum())
        return float(self.hypotheses[h] + phase * SAMPLE_RATE / (2 * np.pi * mean_lag))

    def despread(self, y: np.ndarray, tau: int, cfo: float) -> np.ndarray:
        """Cover-removed per-symbol correlations at burst start ``tau``, shape (112,)."""
        idx = tau + self.pattern.offsets[:, None] + np.arange(FFT_SIZE)[None, :]
        seg = y[idx] * np.exp(-2j * np.pi * cfo * idx / SAMPLE_RATE)
        return (seg @ np.conj(self._template)) * self.pattern.cover

    def normalized_metric(self, ys: list[np.ndarray], tau: int, cfo: float) -> float:
        la, lb = self.pattern.pairs()
        num = 0j
        den = 0.0
        for y in ys:
            z = self.despread(y, tau, cfo)
            prod = np.conj(z[la]) * z[lb]
            num += prod.sum()
            den += np.abs(prod).sum()
        return float(abs(num) / den) if den > 0 else 0.0

    def fine_cfo(self, ys: list[np.ndarray], tau: int, cfo: float) -> float:
        power = np.zeros(len(self._fine_grid))
        for y in ys:
            z = self.despread(y, tau, cfo)
            for seg in self.pattern.segments():
                power += np.abs(self._fine_steer[:, seg] @ z[seg]) ** 2
        k = int(np.argmax(power))
        nu = self._fine_grid[k]
        if 0 < k < len(power) - 1:
            a, b, c = power[k - 1], power[k], power[k + 1]
            den = a - 2 * b + c
            if den < 0:
                nu += 0.5 * (a - c) / den * FINE_STEP
        return float(cfo + nu)

    def acquire(self, ys: list[np.ndarray], score: np.ndarray, D_sum: np.ndarray) -> SyncHypothesis:
        """Decision from the shot-summed score and complex segment metrics."""
        h, tau = self.pick(score)
        coarse = self.coarse_cfo(D_sum, h, tau)
        fine = self.fine_cfo(ys, tau, coarse)
        metric = self.normalized_metric(ys, tau, fine)
        return SyncHypothesis(tau, fine, metric, coarse)


def npss_search(rx_samples, mode: str = LONG_OCC_PVS, num_ports: int = 2,
                num_timings: int | None = None, searcher: NpssSearcher | None = None) -> SyncHypothesis:
    """Acquire burst timing and CFO from one or more shots.

    ``rx_samples`` is a 1-D stream or a list of equally aligned shot streams.
    """
    ys = [np.asarray(rx_samples).ravel()] if np.ndim(rx_samples[0]) == 0 else [np.asarray(y).ravel() for y in rx_samples]
    searcher = NpssSearcher(mode, num_ports) if searcher is None else searcher
    Ds = [searcher.metric(y, num_timings) for y in ys]
    score = sum(searcher.score(D) for D in Ds)
    return searcher.acquire(ys, score, sum(Ds))


def derotate(y: np.ndarray, cfo: float) -> np.ndarray:
    return y * np.exp(-2j * np.pi * cfo * np.arange(len(y)) / SAMPLE_RATE)


def npss_channel_estimates(npss_grids: np.ndarray, mode: str = LONG_OCC_PVS,
                           num_ports: int = 2) -> np.ndarray:
    """Per-subcarrier channel of each precoder segment from demodulated NPSS.

    ``npss_grids`` has shape (8, 14, 12); returns (segments, 12).
    """
    pattern = npss_pattern(mode, num_ports)
    sym = npss_grids.reshape(seq.NPSS_SYMBOLS, 12)[:, :11]
    ref = pattern.cover[:, None] * seq.npss_base()[None, :]
    est = []
    for s in pattern.segments():
        h = np.mean(sym[s] * np.conj(ref[s]), axis=0)
        est.append(np.append(h, h[-1]))
    return np.array(est)


def _nsss_channels(h_npss: np.ndarray, mode: str) -> np.ndarray:
    # NSSS subframe 0 shares the first NPSS precoder, subframe 1 the second
    if mode == LONG_OCC_PVS and len(h_npss) == 2:
        return h_npss
    return np.repeat(h_npss[:1], 2, axis=0)


def nsss_scores(nsss_grids: np.ndarray, h_npss: np.ndarray, mode: str = LONG_OCC_PVS) -> np.ndarray:
    """Correlation magnitude for every (pci, x), summed over the 2 NSSS subframes."""
    book = seq.nsss_codebook()
    h = _nsss_channels(h_npss, mode)
    scores = np.zeros(book.shape[:2])
    for sf in range(2):
        z = (nsss_grids[sf] * np.conj(h[sf])[None, :]).ravel()
        scores += np.abs(np.conj(book) @ z)
    return scores


def nsss_detect(nsss_grids: np.ndarray, h_npss: np.ndarray, mode: str = LONG_OCC_PVS,
                two_stage: bool = False) -> tuple[int, int]:
    """Maximum-correlation (pci, x) decision.

    With ``two_stage`` the root index is chosen first from the energy over
    its 16 cover/shift hypotheses, then the cover row and shift.
    """
    scores = nsss_scores(nsss_grids, h_npss, mode)
    if not two_stage:
        pci, x = np.unravel_index(np.argmax(scores), scores.shape)
        return int(pci), int(x)
    per_root = (scores.reshape(4, 126, 4) ** 2).sum(axis=(0, 2))
    root = int(np.argmax(per_root))
    sub = scores.reshape(4, 126, 4)[:, root, :]
    q, x = np.unravel_index(np.argmax(sub), sub.shape)
    return int(126 * q + root), int(x)


def demodulate_drs(y: np.ndarray, timing: int, cfo: float, num_subframes: int = 10) -> np.ndarray:
    """Frequency-corrected grids of the first ``num_subframes`` DRS subframes."""
    return ofdm_demodulate(derotate(np.asarray(y).ravel(), cfo), timing, num_subframes)[0]
