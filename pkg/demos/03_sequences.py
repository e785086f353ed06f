"""Synchronization sequences: NPSS burst, NSSS and the cover code."""

import numpy as np

from nbiotu import sequences as seq

burst = seq.gen_npss_burst()
print("NPSS burst shape (subframes, symbols, subcarriers):", burst.shape)
print("max | |x| - 1 | over NPSS:", float(np.max(np.abs(np.abs(burst) - 1))))

nsss = seq.gen_nsss(pci=101, x=2)
print("NSSS length", len(nsss), "root", seq.nsss_root(101), "shift", seq.nsss_shift(2))

occ = seq.occ_sequence()
print("cover secondary peak ratio:", round(seq.secondary_peak_ratio(occ), 3),
      "vs all-ones", round(seq.secondary_peak_ratio(np.ones(len(occ))), 3))
print("PVS precoders for subframes 0 and 7:", seq.pvs_weights(8, 0).round(3), seq.pvs_weights(8, 7).round(3))
