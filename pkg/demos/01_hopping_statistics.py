"""Hopping pattern of the data channels: transitions and usage.

Runs the hop kernel for a few cells, prints how evenly the 64 data channels
are used and how the transition matrix compares with the ideal 1/63.
"""

import numpy as np

from nbiotu import fh_kernel as fk
from nbiotu import fh_stats

HOPS = 1_000_000

print("first hops of pci 0:", fk.hop_sequence(0, 12).tolist())
for pci in (0, 7, 255):
    tm = fh_stats.transition_matrix(pci, HOPS)
    usage = fh_stats.usage_histogram(pci, HOPS)
    off = tm.off_diagonal() * 63
    print(f"pci {pci:3d}: usage x64 in [{usage.min() * 64:.3f}, {usage.max() * 64:.3f}], "
          f"off-diagonal p*63 in [{off.min():.2f}, {off.max():.2f}], "
          f"empty cells {np.mean(off == 0):.0%}, self-hop rate {tm.self_transition_rate():.1e}")

# the pattern only depends on the low 11 bits of nSFN, hence a 2048-hop period
seq = fk.hop_sequence(7, 4096)
print("period 2048:", bool(np.array_equal(seq[:2048], seq[2048:])))
