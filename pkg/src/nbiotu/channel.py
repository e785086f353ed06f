"""Impaired downlink channel: tapped-delay-line Rayleigh fading, carrier
frequency offset, integer timing offset and in-band calibrated AWGN."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .phy_frame.ofdm import SAMPLE_RATE

AWGN = "AWGN"
TU = "TU"

CARRIER_HZ = 900e6
BANDWIDTH_HZ = 180e3
PPM_20_CFO_HZ = 20e-6 * CARRIER_HZ  # 18 kHz

# 12-path Typical Urban profile: delay in microseconds, relative power in dB
TU12_DELAYS_US = np.array([0.0, 0.2, 0.4, 0.6, 0.8, 1.2, 1.4, 1.8, 2.4, 3.0, 3.2, 5.0])
TU12_POWERS_DB = np.array([-4.0, -3.0, 0.0, -2.6, -3.0, -5.0, -7.0, -5.0, -6.5, -8.6, -11.0, -10.0])


def sampled_profile(profile: str, sample_rate: float = SAMPLE_RATE) -> tuple[np.ndarray, np.ndarray]:
    """Tap delays (samples) and unit-sum powers on the sampling grid.

    Paths rounding onto the same sample are merged with their powers added.
    """
    if profile == AWGN:
        return np.zeros(1, dtype=int), np.ones(1)
    if profile != TU:
        raise ValueError(f"unknown channel profile {profile!r}")
    delays = np.rint(TU12_DELAYS_US * 1e-6 * sample_rate).astype(int)
    powers = 10 ** (TU12_POWERS_DB / 10)
    taps = np.unique(delays)
    merged = np.array([powers[delays == d].sum() for d in taps])
    return taps, merged / merged.sum()


@dataclass(frozen=True)
class ChannelConfig:
    profile: str = TU
    doppler: float = 1.0
    snr_db: float = float("inf")
    cfo: float = 0.0
    sto: int = 0
    tx_ports: int = 2
    rx_ports: int = 1
    seed: int = 0
    bandwidth: float = BANDWIDTH_HZ
    num_sinusoids: int = 16

    def __post_init__(self):
        if self.tx_ports not in (1, 2):
            raise ValueError("tx_ports must be 1 or 2")
        if self.rx_ports != 1:
            raise ValueError("only a single receive antenna is modelled")
        if self.doppler < 0:
            raise ValueError("doppler must be non-negative")
        if self.sto < 0:
            raise ValueError("sto must be a non-negative number of samples")
        if self.num_sinusoids < 1:
            raise ValueError("num_sinusoids must be positive")

    def with_(self, **changes) -> "ChannelConfig":
        return replace(self, **changes)


@dataclass
class ChannelRealization:
    delays: np.ndarray  # (taps,) integer sample delays
    gains: np.ndarray  # (tx, rx, taps, blocks) complex, power profile included
    block_len: int
    noise: np.ndarray  # (rx, samples) unit-variance complex Gaussian

    def tap_power(self) -> float:
        """Total instantaneous power summed over taps, averaged over port pairs and blocks."""
        return float(np.mean(np.sum(np.abs(self.gains) ** 2, axis=2)))

    def gains_at(self, n: int) -> np.ndarray:
        return self.gains[..., min(n // self.block_len, self.gains.shape[-1] - 1)]


def _block_length(doppler: float, sample_rate: float) -> int:
    # gains held piecewise constant while the fading phase moves < 0.01 cycle
    if doppler == 0:
        return 1 << 62
    return int(max(1, min(1920, np.floor(0.01 * sample_rate / doppler))))


def sum_of_sinusoids(rng: np.random.Generator, times: np.ndarray, doppler: float,
                     num_sinusoids: int, size: tuple[int, ...]) -> np.ndarray:
    """Unit-power Rayleigh processes with a Clarke (J0) autocorrelation.

    Random arrival angles and phases per oscillator; returns ``size + times.shape``.
    """
    angles = rng.uniform(0, 2 * np.pi, size + (num_sinusoids,))
    phases = rng.uniform(0, 2 * np.pi, size + (num_sinusoids,))
    return _oscillators(angles, phases, doppler, times)


def _oscillators(angles, phases, doppler, times):
    arg = 2 * np.pi * (doppler * np.cos(angles))[..., None] * times + phases[..., None]
    return np.exp(1j * arg).sum(axis=-2) / np.sqrt(angles.shape[-1])


@dataclass(frozen=True)
class FadingProcess:
    """Frozen sum-of-sinusoids parameters: one continuous fading process per link.

    Evaluating it at different start times gives channel snapshots that are
    correlated as the Doppler spectrum dictates (e.g. successive anchors).
    """

    angles: np.ndarray  # (tx, rx, taps, sinusoids)
    phases: np.ndarray
    powers: np.ndarray  # (taps,)
    doppler: float

    @classmethod
    def draw(cls, config: ChannelConfig, rng: np.random.Generator,
             sample_rate: float = SAMPLE_RATE) -> "FadingProcess":
        _, powers = sampled_profile(config.profile, sample_rate)
        size = (config.tx_ports, config.rx_ports, len(powers), config.num_sinusoids)
        angles = rng.uniform(0, 2 * np.pi, size)
        phases = rng.uniform(0, 2 * np.pi, size)
        return cls(angles, phases, powers, config.doppler)

    def gains(self, times: np.ndarray) -> np.ndarray:
        g = _oscillators(self.angles, self.phases, self.doppler, np.asarray(times, float))
        return g * np.sqrt(self.powers)[None, None, :, None]


def draw_realization(config: ChannelConfig, num_samples: int, sample_rate: float = SAMPLE_RATE,
                     rng: np.random.Generator | None = None, process: FadingProcess | None = None,
                     start_time: float = 0.0) -> ChannelRealization:
    """Channel gains and unit noise for one stream of ``num_samples`` samples.

    Without ``process`` a fresh fading process is drawn; with it the gains
    are those of ``process`` from ``start_time`` seconds on.
    """
    rng = np.random.default_rng(config.seed) if rng is None else rng
    delays, powers = sampled_profile(config.profile, sample_rate)
    shape = (config.tx_ports, config.rx_ports, len(delays))
    if config.profile == AWGN:
        gains = np.ones(shape + (1,), dtype=complex)
        block = 1 << 62
    else:
        block = _block_length(config.doppler, sample_rate)
        n_blocks = max(1, -(-num_samples // block)) if config.doppler > 0 else 1
        times = start_time + (np.arange(n_blocks) + 0.5) * min(block, num_samples) / sample_rate
        if process is None:
            process = FadingProcess.draw(config, rng, sample_rate)
        gains = process.gains(times)
    noise = (rng.standard_normal((config.rx_ports, num_samples))
             + 1j * rng.standard_normal((config.rx_ports, num_samples))) / np.sqrt(2)
    return ChannelRealization(delays, gains, block, noise)


def noise_variance(signal_power: float, snr_db: float, bandwidth: float = BANDWIDTH_HZ,
                   sample_rate: float = SAMPLE_RATE) -> float:
    """Per-sample noise variance giving ``snr_db`` inside ``bandwidth``."""
    if np.isinf(snr_db) and snr_db > 0:
        return 0.0
    return signal_power * (sample_rate / bandwidth) / 10 ** (snr_db / 10)


def measure_snr_db(signal: np.ndarray, noise: np.ndarray, bandwidth: float = BANDWIDTH_HZ,
                   sample_rate: float = SAMPLE_RATE) -> float:
    """In-band SNR from separately known signal and noise components."""
    ps = np.mean(np.abs(signal) ** 2)
    pn = np.mean(np.abs(noise) ** 2) * bandwidth / sample_rate
    return float(10 * np.log10(ps / pn))


def apply_channel(tx: np.ndarray, config: ChannelConfig, realization: ChannelRealization | None = None,
                  signal_power: float | None = None, sample_rate: float = SAMPLE_RATE,
                  return_components: bool = False):
    """Pass per-port streams ``tx`` (ports, N) through the channel.

    The output has ``N + sto`` samples per receive port: ``sto`` leading
    samples of noise only, then the faded, frequency-shifted signal.  SNR is
    referenced to ``signal_power`` (average per-sample transmit power summed
    over ports; defaults to the mean over ``tx``), which with the unit-power
    channel is the average received power.
    """
    tx = np.atleast_2d(np.asarray(tx))
    if tx.shape[0] != config.tx_ports:
        raise ValueError(f"expected {config.tx_ports} transmit streams, got {tx.shape[0]}")
    n_in = tx.shape[1]
    n_out = n_in + config.sto
    if realization is None:
        realization = draw_realization(config, n_out, sample_rate)
    if realization.noise.shape[1] < n_out:
        raise ValueError("realization noise shorter than the output stream")
    block = realization.block_len
    n_blocks = realization.gains.shape[-1]
    signal = np.zeros((config.rx_ports, n_out), dtype=complex)
    for t_idx, d in enumerate(realization.delays):
        shifted = np.zeros_like(tx)
        shifted[:, d:] = tx[:, : n_in - d] if d else tx
        for rx in range(config.rx_ports):
            g = realization.gains[:, rx, t_idx, :]  # (tx, blocks)
            if n_blocks == 1:
                contrib = g[:, 0] @ shifted
            else:
                # blocks are indexed on the output time axis
                blk = np.minimum((np.arange(n_in) + config.sto) // block, n_blocks - 1)
                contrib = np.sum(g[:, blk] * shifted, axis=0)
            signal[rx, config.sto :] += contrib
    if config.cfo:
        signal *= np.exp(2j * np.pi * config.cfo * np.arange(n_out) / sample_rate)
    ref = np.mean(np.sum(np.abs(tx) ** 2, axis=0)) if signal_power is None else signal_power
    sigma2 = noise_variance(ref, config.snr_db, config.bandwidth, sample_rate)
    noise = np.sqrt(sigma2) * realization.noise[:, :n_out]
    rx = signal + noise
    return (rx, signal, noise) if return_components else rx
