"""One acquisition from a faded, noisy anchor with a 20 ppm offset.

Builds a discovery burst, passes it through the TU channel and runs the
timing/CFO search followed by cell identification.
"""

import numpy as np

from nbiotu.channel import PPM_20_CFO_HZ, TU, ChannelConfig, apply_channel
from nbiotu.phy_frame.anchor import build_drs
from nbiotu.phy_frame.npbch import Mib
from nbiotu.phy_frame.ofdm import ofdm_modulate
from nbiotu.receiver.campaign import RE_SIGNAL_POWER
from nbiotu.receiver.sync import demodulate_drs, npss_channel_estimates, npss_search, nsss_detect

rng = np.random.default_rng(1)
pci, x, sto = 321, 1, 2345
drs = build_drs(pci, x, Mib.random(rng), block_index=0)
tx = ofdm_modulate(drs.grids)
cfg = ChannelConfig(profile=TU, cfo=PPM_20_CFO_HZ, sto=sto, snr_db=-3.0, seed=7)
y = apply_channel(tx, cfg, signal_power=RE_SIGNAL_POWER)[0]

hyp = npss_search(y, num_timings=6000)
print(f"timing {hyp.timing} (true {sto}), CFO {hyp.cfo_estimate:.1f} Hz (true {PPM_20_CFO_HZ:.1f})")
grids = demodulate_drs(y, hyp.timing, hyp.cfo_estimate)
h = npss_channel_estimates(grids[:8])
print("detected (pci, x):", nsss_detect(grids[8:10], h), "true:", (pci, x))
