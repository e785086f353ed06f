"""Regional frame schedules and their regulatory audits.

FCC: anchor every 80 ms plus hopping 20 ms data slots, audited for channel
count and dwell time.  ETSI: anchor every 1280 ms on one carrier, audited
for the 10% duty cycle.
"""

from nbiotu import fh_stats
from nbiotu.phy_frame.schedule import ETSI, FCC, audit_etsi, build_schedule

fcc = build_schedule(FCC, 20_000, pci=42)
print("FCC first occasions:")
for occ in fcc.occasions[:6]:
    print("   ", occ)
rep = fh_stats.audit_fcc(fcc)
print(f"FCC audit: {rep.channel_count} channels, max dwell {rep.max_dwell_in_window:.3f} s "
      f"per 20 s, passed={rep.passed}")

etsi = build_schedule(ETSI, 5120)
erep = audit_etsi(etsi)
print(f"ETSI audit: duty cycle {erep.duty_cycle:.3f} (worst period {erep.max_period_duty_cycle:.3f}), "
      f"anchor every {erep.anchor_period_ms} ms, passed={erep.passed}")
