from dataclasses import replace

import numpy as np
import pytest

from nbiotu.channel import AWGN, TU, ChannelConfig, apply_channel
from nbiotu.phy_frame.anchor import LEGACY, LONG_OCC_PVS, build_drs
from nbiotu.phy_frame.npbch import Mib, encode_npbch
from nbiotu.phy_frame.ofdm import SAMPLE_RATE, SUBFRAME_SAMPLES, ofdm_demodulate, ofdm_modulate
from nbiotu.receiver import campaign
from nbiotu.receiver.npbch_rx import NpbchShot, estimate_residual_cfo, npbch_decode
from nbiotu.receiver.sync import (
    NpssSearcher,
    demodulate_drs,
    npss_channel_estimates,
    npss_search,
    nsss_detect,
)

WINDOW = 4000


def _stream(pci=33, x=1, sto=1500, cfo=0.0, snr_db=float("inf"), profile=AWGN, mode=LONG_OCC_PVS, seed=0):
    rng = np.random.default_rng(seed)
    mib = Mib.random(rng)
    drs = build_drs(pci, x, mib, 0, 2, mode)
    tx = ofdm_modulate(drs.grids)
    cfg = ChannelConfig(profile=profile, cfo=cfo, sto=sto, snr_db=snr_db, seed=seed)
    return apply_channel(tx, cfg, signal_power=campaign.RE_SIGNAL_POWER)[0], mib


def _reference_metric(searcher, y, num_timings):
    """Direct pair-by-pair summation of the segment metrics."""
    r = searcher._symbol_correlations(y, len(y) - 128)
    D = np.zeros((searcher.num_segments, len(searcher.hypotheses), num_timings), dtype=complex)
    for start, lag, coef, seg in zip(searcher.pair_start, searcher.pair_lag, searcher.pair_coef,
                                     searcher.pair_segment):
        a = r[:, start : start + num_timings]
        b = r[:, start + lag : start + lag + num_timings]
        D[seg] += coef * np.conj(a) * b
    return D


@pytest.mark.parametrize("segment_subframes", [1, 4])
def test_metric_matches_direct_summation(segment_subframes):
    rng = np.random.default_rng(7)
    y = rng.standard_normal(16000 + 300) + 1j * rng.standard_normal(16000 + 300)
    s = NpssSearcher(segment_subframes=segment_subframes)
    ref = _reference_metric(s, y, 300)
    got = s.metric(y, 300)
    assert got.shape == ref.shape
    assert np.max(np.abs(got - ref)) < 1e-4 * np.max(np.abs(ref))


@pytest.mark.parametrize("cfo", [0.0, 18e3, -18e3, 7321.0])
def test_noiseless_acquisition(cfo):
    y, _ = _stream(cfo=cfo)
    hyp = npss_search(y, num_timings=WINDOW)
    assert hyp.timing == 1500
    assert hyp.cfo_estimate == pytest.approx(cfo, abs=5.0)
    assert hyp.metric == pytest.approx(1.0, abs=1e-3)


def test_legacy_acquisition():
    y, _ = _stream(cfo=-9e3, mode=LEGACY)
    hyp = npss_search(y, mode=LEGACY, num_timings=WINDOW)
    assert hyp.timing == 1500
    assert hyp.cfo_estimate == pytest.approx(-9e3, abs=5.0)


def test_acquisition_in_fading_and_noise():
    y, _ = _stream(cfo=18e3, snr_db=0.0, profile=TU, seed=3)
    hyp = npss_search(y, num_timings=WINDOW)
    assert abs(hyp.timing - 1500) <= 64
    assert abs(hyp.cfo_estimate - 18e3) <= 50


def test_multi_shot_lists_are_accepted():
    ys = [_stream(cfo=2e3, snr_db=-3.0, profile=TU, seed=s)[0] for s in range(3)]
    hyp = npss_search(ys, num_timings=WINDOW)
    assert abs(hyp.timing - 1500) <= 64


def test_searcher_validation():
    with pytest.raises(ValueError):
        NpssSearcher(cfo_step=2e3)
    with pytest.raises(ValueError):
        NpssSearcher(segment_subframes=3)
    with pytest.raises(ValueError):
        NpssSearcher().metric(np.zeros(1000, complex))


@pytest.mark.parametrize("two_stage", [False, True])
@pytest.mark.parametrize("pci,x", [(0, 0), (200, 3), (503, 2)])
def test_cell_identification(pci, x, two_stage):
    y, _ = _stream(pci=pci, x=x, cfo=4e3, snr_db=5.0, profile=TU, seed=pci)
    hyp = npss_search(y, num_timings=WINDOW)
    grids = demodulate_drs(y, hyp.timing, hyp.cfo_estimate)
    h = npss_channel_estimates(grids[:8])
    assert h.shape == (2, 12)
    assert nsss_detect(grids[8:10], h, two_stage=two_stage) == (pci, x)


def _npbch_shots(pci, mib, blocks, snr_db, cfo=0.0, seed=0):
    shots = []
    for k, block in enumerate(blocks):
        tx = np.zeros((2, 10 * SUBFRAME_SAMPLES + 32), complex)
        tx[:, : 10 * SUBFRAME_SAMPLES] = ofdm_modulate(encode_npbch(mib, block, pci))
        cfg = ChannelConfig(profile=TU, cfo=cfo, sto=32, snr_db=snr_db, seed=seed * 100 + k)
        y = apply_channel(tx, cfg, signal_power=campaign.RE_SIGNAL_POWER)[0]
        shots.append(NpbchShot(ofdm_demodulate(y, 32, 10)[0], block))
    return shots


def test_npbch_decodes_single_clean_shot():
    mib = Mib.random(np.random.default_rng(5))
    for block in range(8):
        assert npbch_decode(_npbch_shots(77, mib, [block], 20.0, seed=block), 77) == mib


def test_npbch_combines_consecutive_blocks():
    mib = Mib.random(np.random.default_rng(6))
    shots = _npbch_shots(12, mib, [6, 7, 0, 1], -2.0, cfo=35.0, seed=1)
    assert npbch_decode(shots, 12) == mib


def test_npbch_wrong_pci_fails_crc():
    mib = Mib.random(np.random.default_rng(8))
    shots = _npbch_shots(12, mib, [0], 20.0)
    assert npbch_decode(shots, 13) is None


def test_residual_cfo_estimate():
    mib = Mib.random(np.random.default_rng(9))
    shots = _npbch_shots(40, mib, [0, 1], 10.0, cfo=-42.0)
    assert estimate_residual_cfo(shots) == pytest.approx(-42.0, abs=3.0)


def test_npbch_argument_checks():
    mib = Mib.random(np.random.default_rng(10))
    shots = _npbch_shots(3, mib, [0], 10.0)
    with pytest.raises(ValueError):
        npbch_decode([], 3)
    with pytest.raises(ValueError):
        npbch_decode(shots * 9, 3)
    with pytest.raises(ValueError):
        npbch_decode([shots[0], NpbchShot(np.zeros((9, 14, 12)), 1)], 3)


# -- campaigns ---------------------------------------------------------------

def test_wilson_interval():
    lo, hi = campaign.wilson_interval(90, 100)
    assert lo < 0.9 < hi
    assert campaign.wilson_interval(0, 10)[0] == 0.0
    assert campaign.wilson_interval(10, 10)[1] == pytest.approx(1.0)


def test_success_rule():
    assert campaign.success(64, 50.0)
    assert not campaign.success(65, 0.0)
    assert not campaign.success(0, -50.1)


def test_sync_trial_determinism_and_nesting():
    cfg = campaign.SyncCampaignConfig(snr_db=(-3.0,), shots=(1, 2), trials=2, seed=4,
                                      search_window=3000)
    a = campaign.sync_trial(cfg, 1)
    b = campaign.sync_trial(cfg, 1)
    assert a == b
    single = campaign.sync_trial(campaign.SyncCampaignConfig(snr_db=(-3.0,), shots=(1,), seed=4,
                                                             search_window=3000), 1)
    assert single[-3.0][0] == a[-3.0][0]


def test_sync_campaign_high_snr():
    cfg = campaign.SyncCampaignConfig(snr_db=(10.0,), shots=(1,), trials=4, seed=1, search_window=3000)
    (point,) = campaign.run_sync_campaign(cfg)
    assert point.trials == 4 and point.detections == 4


def test_npbch_campaign_high_snr():
    cfg = campaign.NpbchCampaignConfig(snr_db=(10.0,), shots=(1, 2), trials=3, seed=2)
    points = campaign.run_npbch_campaign(cfg)
    assert [p.detections for p in points] == [3, 3]


def test_required_shots_and_snr():
    pts = [campaign.CurvePoint(-13.3, k, 100, d) for k, d in zip(range(1, 6), (40, 60, 80, 91, 95))]
    assert campaign.required_shots(pts, -13.3) == 4
    assert campaign.required_shots(pts, -8.5) is None
    curve = [campaign.CurvePoint(s, 1, 100, d) for s, d in zip((-9, -7, -5), (70, 85, 95))]
    assert campaign.required_snr(curve) == pytest.approx(-6.0)


def test_block_step_follows_anchor_spacing():
    assert campaign.block_step(None) == 1
    assert campaign.block_step(80.0) == 1
    assert campaign.block_step(1280.0) == 0


def test_correlated_shots_are_deterministic():
    cfg = campaign.NpbchCampaignConfig(snr_db=(-5.0,), shots=(1, 3), trials=2, seed=3,
                                       shot_spacing_ms=80.0)
    assert campaign.npbch_trial(cfg, 0) == campaign.npbch_trial(cfg, 0)
    (p1, p3) = campaign.run_npbch_campaign(replace(cfg, snr_db=(10.0,)))
    assert p1.detections == p3.detections == 2
