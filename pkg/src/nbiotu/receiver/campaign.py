"""Monte Carlo campaigns for synchronization and MIB detection.

Every trial draws its randomness from ``SeedSequence([seed, trial])`` so
results do not depend on the worker count, and all SNR points of a
campaign reuse the same fading/noise draws (only the noise scale changes).
Within a trial the shots are nested: the k-shot decision uses shots 0..k-1.

With ``shot_spacing_ms`` unset every shot sees an independent fading draw;
when set, one fading process per trial is sampled at the anchor times
(0, spacing, 2*spacing, ...) so successive shots are correlated as the
Doppler spectrum dictates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from multiprocessing import Pool
from typing import Sequence

import numpy as np

from ..channel import PPM_20_CFO_HZ, TU, ChannelConfig, FadingProcess, apply_channel, draw_realization
from ..phy_frame.anchor import LONG_OCC_PVS, build_drs
from ..phy_frame.npbch import Mib, encode_npbch
from ..phy_frame.ofdm import FFT_SIZE, SUBFRAME_SAMPLES, ofdm_demodulate, ofdm_modulate
from .npbch_rx import NpbchShot, npbch_decode
from .sync import SEGMENT_SUBFRAMES, NpssSearcher, demodulate_drs, npss_channel_estimates, nsss_scores

TIMING_TOLERANCE = 64  # samples
FREQ_TOLERANCE = 50.0  # Hz
# reference level for SNR: every occupied RE carries unit energy over 12 of 128 bins
RE_SIGNAL_POWER = 12 / FFT_SIZE
NPBCH_TIMING_SPREAD = 4  # samples, 64 LTE Ts at 30.72 MHz
NPBCH_GUARD = 32


@dataclass(frozen=True)
class DetectionResult:
    sync_ok: bool
    timing_error: int
    freq_error: float
    detected_pci: int | None
    detected_x: int | None
    mib_ok: bool
    shots_used: int


def success(timing_error: int, freq_error: float, timing_tol: int = TIMING_TOLERANCE,
            freq_tol: float = FREQ_TOLERANCE) -> bool:
    return abs(timing_error) <= timing_tol and abs(freq_error) <= freq_tol


@dataclass(frozen=True)
class SyncCampaignConfig:
    snr_db: Sequence[float] = (-9.0, -7.0, -5.0)
    shots: Sequence[int] = (1,)
    trials: int = 1000
    seed: int = 0
    npss_mode: str = LONG_OCC_PVS
    profile: str = TU
    doppler: float = 1.0
    cfo: float = PPM_20_CFO_HZ
    tx_ports: int = 2
    search_window: int = 10 * SUBFRAME_SAMPLES
    timing_tolerance: int = TIMING_TOLERANCE
    freq_tolerance: float = FREQ_TOLERANCE
    detect_cell: bool = True
    segment_subframes: int = SEGMENT_SUBFRAMES
    shot_spacing_ms: float | None = None
    jobs: int = 1


@dataclass(frozen=True)
class NpbchCampaignConfig:
    snr_db: Sequence[float] = (-13.3, -8.5)
    shots: Sequence[int] = tuple(range(1, 9))
    trials: int = 1000
    seed: int = 0
    profile: str = TU
    doppler: float = 1.0
    residual_cfo: float = FREQ_TOLERANCE
    timing_spread: int = NPBCH_TIMING_SPREAD
    tx_ports: int = 2
    shot_spacing_ms: float | None = None
    jobs: int = 1


@dataclass
class CurvePoint:
    snr_db: float
    shots: int
    trials: int
    detections: int

    @property
    def probability(self) -> float:
        return self.detections / self.trials if self.trials else float("nan")

    @property
    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.detections, self.trials)


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return (max(0.0, centre - half), min(1.0, centre + half))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, trial]))


# -- synchronization ---------------------------------------------------------

_SEARCHERS: dict = {}


def _searcher(mode: str, ports: int, segment_subframes: int) -> NpssSearcher:
    key = (mode, ports, segment_subframes)
    if key not in _SEARCHERS:
        _SEARCHERS[key] = NpssSearcher(mode, ports, segment_subframes=segment_subframes)
    return _SEARCHERS[key]


def _shot_fading(spacing_ms: float | None, ch: ChannelConfig, rng: np.random.Generator,
                 num_shots: int) -> list[dict]:
    """draw_realization keyword arguments for each shot of one trial."""
    if spacing_ms is None:
        return [{}] * num_shots
    process = FadingProcess.draw(ch, rng)
    return [dict(process=process, start_time=s * spacing_ms / 1000) for s in range(num_shots)]


def block_step(spacing_ms: float | None) -> int:
    """Code block advance between shots: one block per 80 ms, modulo 8."""
    if spacing_ms is None:
        return 1
    return int(round(spacing_ms / 80)) % 8


def _sync_streams(cfg: SyncCampaignConfig, rng: np.random.Generator, num_shots: int):
    pci = int(rng.integers(504))
    x = int(rng.integers(4))
    mib = Mib.random(rng)
    block0 = int(rng.integers(8))
    sto = int(rng.integers(cfg.search_window))
    cfo = cfg.cfo * (1 if rng.random() < 0.5 else -1)
    length = cfg.search_window + 10 * SUBFRAME_SAMPLES + FFT_SIZE
    ch = ChannelConfig(profile=cfg.profile, doppler=cfg.doppler, cfo=cfo, sto=sto,
                       tx_ports=cfg.tx_ports)
    fading = _shot_fading(cfg.shot_spacing_ms, ch, rng, num_shots)
    step = block_step(cfg.shot_spacing_ms)
    shots = []
    for s in range(num_shots):
        drs = build_drs(pci, x, mib, (block0 + step * s) % 8, cfg.tx_ports, cfg.npss_mode)
        tx = ofdm_modulate(drs.grids)[:, : length - sto]
        real = draw_realization(ch, length, rng=rng, **fading[s])
        shots.append((tx, ch, real))
    return pci, x, sto, cfo, shots


def sync_trial(cfg: SyncCampaignConfig, trial: int) -> dict[float, list[DetectionResult]]:
    """Detection results per SNR for each requested shot count of one trial."""
    rng = trial_rng(cfg.seed, trial)
    max_shots = max(cfg.shots)
    pci, x, sto, cfo, shots = _sync_streams(cfg, rng, max_shots)
    searcher = _searcher(cfg.npss_mode, cfg.tx_ports, cfg.segment_subframes)
    out = {}
    for snr in cfg.snr_db:
        ys, Ds, scores = [], [], []
        for tx, ch, real in shots:
            y = apply_channel(tx, ch.with_(snr_db=snr), real, signal_power=RE_SIGNAL_POWER)[0]
            ys.append(y)
            D = searcher.metric(y, cfg.search_window)
            Ds.append(D if not Ds else Ds[-1] + D)
            scores.append(searcher.score(D) if not scores else scores[-1] + searcher.score(D))
        results = []
        for k in sorted(cfg.shots):
            hyp = searcher.acquire(ys[:k], scores[k - 1], Ds[k - 1])
            t_err = hyp.timing - sto
            f_err = hyp.cfo_estimate - cfo
            det_pci = det_x = None
            if cfg.detect_cell:
                cell = 0
                for y in ys[:k]:
                    g = demodulate_drs(y, hyp.timing, hyp.cfo_estimate, 10)
                    h = npss_channel_estimates(g[:8], cfg.npss_mode, cfg.tx_ports)
                    cell = cell + nsss_scores(g[8:10], h, cfg.npss_mode)
                det_pci, det_x = (int(v) for v in np.unravel_index(np.argmax(cell), cell.shape))
            ok = success(t_err, f_err, cfg.timing_tolerance, cfg.freq_tolerance)
            results.append(DetectionResult(ok, t_err, f_err, det_pci, det_x, False, k))
        out[snr] = results
    return out


# -- NPBCH -------------------------------------------------------------------

def npbch_trial(cfg: NpbchCampaignConfig, trial: int) -> dict[float, list[DetectionResult]]:
    rng = trial_rng(cfg.seed, trial)
    pci = int(rng.integers(504))
    mib = Mib.random(rng)
    block0 = int(rng.integers(8))
    cfo = float(rng.uniform(-cfg.residual_cfo, cfg.residual_cfo))
    t_err = int(rng.integers(-cfg.timing_spread, cfg.timing_spread + 1))
    max_shots = max(cfg.shots)
    n_tx = 10 * SUBFRAME_SAMPLES + NPBCH_GUARD
    ch = ChannelConfig(profile=cfg.profile, doppler=cfg.doppler, cfo=cfo, sto=NPBCH_GUARD,
                       tx_ports=cfg.tx_ports)
    fading = _shot_fading(cfg.shot_spacing_ms, ch, rng, max_shots)
    step = block_step(cfg.shot_spacing_ms)
    shots = []
    for s in range(max_shots):
        block = (block0 + step * s) % 8
        tx = np.zeros((cfg.tx_ports, n_tx), dtype=complex)
        tx[:, : 10 * SUBFRAME_SAMPLES] = ofdm_modulate(encode_npbch(mib, block, pci, cfg.tx_ports))
        real = draw_realization(ch, n_tx + NPBCH_GUARD, rng=rng, **fading[s])
        shots.append((tx, ch, real, block))
    out = {}
    for snr in cfg.snr_db:
        demod = []
        for tx, ch, real, block in shots:
            y = apply_channel(tx, ch.with_(snr_db=snr), real, signal_power=RE_SIGNAL_POWER)[0]
            g = ofdm_demodulate(y, NPBCH_GUARD + t_err, 10)[0]
            demod.append(NpbchShot(g, block))
        results = []
        for k in sorted(cfg.shots):
            ok = npbch_decode(demod[:k], pci, cfg.tx_ports) == mib
            results.append(DetectionResult(True, t_err, cfo, pci, None, ok, k))
        out[snr] = results
    return out


# -- orchestration -----------------------------------------------------------

def _run_trials(fn, cfg, trials: int, jobs: int) -> list:
    args = [(cfg, t) for t in range(trials)]
    if jobs <= 1:
        return [fn(*a) for a in args]
    with Pool(jobs) as pool:
        return pool.starmap(fn, args, chunksize=max(1, trials // (4 * jobs)))


def _aggregate(results: list[dict], cfg, attr: str) -> list[CurvePoint]:
    points = []
    for snr in cfg.snr_db:
        for idx, k in enumerate(sorted(cfg.shots)):
            hits = sum(bool(getattr(r[snr][idx], attr)) for r in results)
            points.append(CurvePoint(float(snr), k, len(results), hits))
    return points


def run_sync_campaign(cfg: SyncCampaignConfig, return_trials: bool = False):
    """Fraction of trials with successful acquisition per (snr, shots)."""
    if cfg.trials < 1:
        raise ValueError("trials must be >= 1")
    results = _run_trials(sync_trial, cfg, cfg.trials, cfg.jobs)
    points = _aggregate(results, cfg, "sync_ok")
    return (points, results) if return_trials else points


def run_npbch_campaign(cfg: NpbchCampaignConfig, return_trials: bool = False):
    if cfg.trials < 1:
        raise ValueError("trials must be >= 1")
    results = _run_trials(npbch_trial, cfg, cfg.trials, cfg.jobs)
    points = _aggregate(results, cfg, "mib_ok")
    return (points, results) if return_trials else points


def required_shots(points: list[CurvePoint], snr_db: float, target: float = 0.9) -> int | None:
    """Smallest shot count reaching ``target`` at ``snr_db`` (None if never)."""
    for p in sorted((p for p in points if np.isclose(p.snr_db, snr_db)), key=lambda p: p.shots):
        if p.probability >= target:
            return p.shots
    return None


def required_snr(points: list[CurvePoint], shots: int = 1, target: float = 0.9) -> float | None:
    """SNR where the detection curve crosses ``target`` (linear interpolation)."""
    pts = sorted((p for p in points if p.shots == shots), key=lambda p: p.snr_db)
    for lo, hi in zip(pts, pts[1:]):
        if lo.probability < target <= hi.probability:
            frac = (target - lo.probability) / (hi.probability - lo.probability)
            return lo.snr_db + frac * (hi.snr_db - lo.snr_db)
    return None
