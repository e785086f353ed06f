"""MIB recovery by soft-combining NPBCH shots from successive anchors."""

import numpy as np

from nbiotu.channel import TU, ChannelConfig, apply_channel
from nbiotu.phy_frame.npbch import Mib, encode_npbch
from nbiotu.phy_frame.ofdm import SUBFRAME_SAMPLES, ofdm_demodulate, ofdm_modulate
from nbiotu.receiver.campaign import RE_SIGNAL_POWER
from nbiotu.receiver.npbch_rx import NpbchShot, npbch_decode

rng = np.random.default_rng(3)
pci, mib, guard = 88, Mib.random(rng), 32
shots = []
for k in range(6):
    block = k % 8
    tx = np.zeros((2, 10 * SUBFRAME_SAMPLES + guard), complex)
    tx[:, : 10 * SUBFRAME_SAMPLES] = ofdm_modulate(encode_npbch(mib, block, pci))
    cfg = ChannelConfig(profile=TU, cfo=20.0, sto=guard, snr_db=-16.5, seed=100 + k)
    y = apply_channel(tx, cfg, signal_power=RE_SIGNAL_POWER)[0]
    shots.append(NpbchShot(ofdm_demodulate(y, guard, 10)[0], block))
    got = npbch_decode(shots, pci)
    print(f"{k + 1} shot(s): {'MIB ok' if got == mib else 'CRC failed'}")
