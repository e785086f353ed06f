import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbiotu.channel import (
    AWGN,
    PPM_20_CFO_HZ,
    TU,
    ChannelConfig,
    FadingProcess,
    apply_channel,
    draw_realization,
    measure_snr_db,
    noise_variance,
    sampled_profile,
    sum_of_sinusoids,
)
from nbiotu.phy_frame.ofdm import SAMPLE_RATE, ofdm_modulate


def _tx(ports=2, nsf=2, seed=0):
    rng = np.random.default_rng(seed)
    grids = np.exp(2j * np.pi * rng.random((ports, nsf, 14, 12))) / np.sqrt(ports)
    return ofdm_modulate(grids)


def test_cfo_constant():
    assert PPM_20_CFO_HZ == pytest.approx(18e3)


def test_tu_profile_normalised_and_causal():
    delays, powers = sampled_profile(TU)
    assert powers.sum() == pytest.approx(1.0)
    assert delays[0] == 0 and np.all(np.diff(delays) > 0)
    assert delays[-1] == round(5e-6 * SAMPLE_RATE)
    with pytest.raises(ValueError):
        sampled_profile("EPA")


def test_awgn_noiseless_is_sum_of_ports():
    tx = _tx()
    rx = apply_channel(tx, ChannelConfig(profile=AWGN), signal_power=1.0)
    assert np.allclose(rx[0], tx.sum(axis=0))


def test_sto_prepends_samples():
    tx = _tx()
    rx = apply_channel(tx, ChannelConfig(profile=AWGN, sto=50))
    assert rx.shape[1] == tx.shape[1] + 50
    assert np.allclose(rx[0, :50], 0)
    assert np.allclose(rx[0, 50:], tx.sum(axis=0))


def test_cfo_rotation():
    tx = _tx(ports=1)
    cfg = ChannelConfig(profile=AWGN, cfo=1234.0, tx_ports=1)
    rx = apply_channel(tx, cfg)
    n = np.arange(tx.shape[1])
    assert np.allclose(rx[0], tx[0] * np.exp(2j * np.pi * 1234.0 * n / SAMPLE_RATE))


@settings(max_examples=15, deadline=None)
@given(st.floats(-20, 20), st.integers(0, 2**32 - 1))
def test_in_band_snr_calibration(snr_db, seed):
    tx = _tx(ports=1, nsf=4, seed=seed)
    cfg = ChannelConfig(profile=AWGN, snr_db=snr_db, tx_ports=1)
    real = draw_realization(cfg, tx.shape[1], rng=np.random.default_rng(seed))
    rx, sig, noise = apply_channel(tx, cfg, real, return_components=True)
    assert np.allclose(rx, sig + noise)
    assert measure_snr_db(sig, noise) == pytest.approx(snr_db, abs=0.3)


def test_noise_variance_formula():
    assert noise_variance(1.0, 0.0) == pytest.approx(SAMPLE_RATE / 180e3)
    assert noise_variance(1.0, float("inf")) == 0.0


def test_sum_of_sinusoids_unit_power():
    rng = np.random.default_rng(0)
    g = sum_of_sinusoids(rng, np.zeros(1), 1.0, 16, (20000,))
    assert np.mean(np.abs(g) ** 2) == pytest.approx(1.0, rel=0.05)
    assert abs(np.mean(g)) < 0.05


def test_fading_correlation_follows_doppler():
    # Clarke autocorrelation J0(2 pi fd tau): at fd * tau = 0.3823 the first zero
    from scipy.special import j0
    rng = np.random.default_rng(1)
    t = np.array([0.0, 0.2])
    g = sum_of_sinusoids(rng, t, 1.0, 16, (20000,))
    rho = np.mean(g[:, 0].conj() * g[:, 1]).real
    assert rho == pytest.approx(j0(2 * np.pi * 0.2), abs=0.05)


def test_tu_average_gain_is_unity():
    tx = _tx(ports=1, nsf=1)
    powers = []
    for seed in range(200):
        cfg = ChannelConfig(profile=TU, tx_ports=1, seed=seed)
        rx = apply_channel(tx, cfg)
        powers.append(np.mean(np.abs(rx[0, 20:]) ** 2) / np.mean(np.abs(tx[0]) ** 2))
    assert np.mean(powers) == pytest.approx(1.0, rel=0.15)


def test_zero_doppler_is_static():
    cfg = ChannelConfig(profile=TU, doppler=0.0)
    real = draw_realization(cfg, 10_000)
    assert real.gains.shape[-1] == 1


def test_realization_reuse_is_deterministic():
    tx = _tx()
    cfg = ChannelConfig(profile=TU, snr_db=-5.0, cfo=300.0, sto=7, seed=3)
    assert np.array_equal(apply_channel(tx, cfg), apply_channel(tx, cfg))


@pytest.mark.parametrize("kwargs", [dict(tx_ports=3), dict(rx_ports=2), dict(doppler=-1), dict(sto=-1)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ChannelConfig(**kwargs)


def test_port_count_mismatch():
    with pytest.raises(ValueError):
        apply_channel(_tx(ports=1), ChannelConfig(tx_ports=2))


def test_fading_process_is_continuous_across_shots():
    cfg = ChannelConfig(profile=TU, doppler=1.0)
    proc = FadingProcess.draw(cfg, np.random.default_rng(2))
    rng = np.random.default_rng(3)
    a = draw_realization(cfg, 1920, rng=rng, process=proc, start_time=0.5)
    b = draw_realization(cfg, 1920, rng=rng, process=proc, start_time=0.5)
    assert np.array_equal(a.gains, b.gains)
    assert not np.array_equal(a.noise, b.noise)
    # a single 1920-sample block is evaluated at its midpoint
    assert a.gains.shape[-1] == 1
    assert np.allclose(a.gains[..., 0], proc.gains(np.array([0.5 + 960 / SAMPLE_RATE]))[..., 0])


def test_shot_correlation_follows_spacing():
    from scipy.special import j0
    cfg = ChannelConfig(profile=TU, doppler=1.0, tx_ports=1)
    g0, g1 = [], []
    for seed in range(3000):
        proc = FadingProcess.draw(cfg, np.random.default_rng(seed))
        g = proc.gains(np.array([0.0, 0.08]))[0, 0, 0]
        g0.append(g[0]); g1.append(g[1])
    g0, g1 = np.array(g0), np.array(g1)
    rho = np.mean(np.conj(g0) * g1).real / np.mean(np.abs(g0) ** 2)
    assert rho == pytest.approx(j0(2 * np.pi * 0.08), abs=0.05)
