"""FCC and ETSI downlink frame structures as occupancy timelines."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable

from ..fh_kernel import FrameClock, hop_channel

FCC = "FCC"
ETSI = "ETSI"

SLOT_MS = 20
FCC_ANCHOR_PERIOD_MS = 80
ETSI_ANCHOR_PERIOD_MS = 1280
ETSI_OCCASION_DL_MS = 8
ETSI_OCCASION_UL_MS = 72
ETSI_MAX_DUTY_CYCLE = 0.10

# roles
ANCHOR = "anchor"
DATA = "data"
DL = "dl"
UL = "ul"
TRANSMIT_ROLES = (ANCHOR, DATA, DL)


@dataclass(frozen=True)
class Occasion:
    start_ms: int
    dur_ms: int
    carrier: int
    role: str

    @property
    def end_ms(self) -> int:
        return self.start_ms + self.dur_ms


@dataclass
class Schedule:
    region: str
    occasions: list[Occasion] = field(default_factory=list)

    @property
    def duration_ms(self) -> int:
        return max((o.end_ms for o in self.occasions), default=0)

    def by_role(self, *roles: str) -> list[Occasion]:
        return [o for o in self.occasions if o.role in roles]

    def anchor_starts(self) -> list[int]:
        return [o.start_ms for o in self.by_role(ANCHOR)]

    def duty_cycle(self) -> float:
        """Fraction of the timeline the base station is transmitting."""
        if not self.occasions:
            return 0.0
        on = sum(o.dur_ms for o in self.by_role(*TRANSMIT_ROLES))
        return on / self.duration_ms

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["start_ms", "dur_ms", "carrier", "role"])
        for o in self.occasions:
            writer.writerow([o.start_ms, o.dur_ms, o.carrier, o.role])
        return buf.getvalue() if fh is None else ""


def _fcc_schedule(total_ms: int, pci, start_frame: int) -> Schedule:
    occasions = []
    slots_per_period = FCC_ANCHOR_PERIOD_MS // SLOT_MS
    for slot in range(-(-total_ms // SLOT_MS)):
        start = slot * SLOT_MS
        if slot % slots_per_period == 0:
            occasions.append(Occasion(start, SLOT_MS, 0, ANCHOR))
        else:
            clock = FrameClock.from_frame_count(start_frame + 2 * slot)
            occasions.append(Occasion(start, SLOT_MS, hop_channel(clock, pci), DATA))
    return Schedule(FCC, occasions)


def _etsi_schedule(total_ms: int) -> Schedule:
    occasions = []
    budget = ETSI_MAX_DUTY_CYCLE * ETSI_ANCHOR_PERIOD_MS
    occasion_ms = ETSI_OCCASION_DL_MS + ETSI_OCCASION_UL_MS
    for period_start in range(0, total_ms, ETSI_ANCHOR_PERIOD_MS):
        period_end = period_start + ETSI_ANCHOR_PERIOD_MS
        occasions.append(Occasion(period_start, SLOT_MS, 0, ANCHOR))
        on_ms = SLOT_MS
        t = period_start + SLOT_MS
        # the anchor occupies the DL part of the first occasion
        first_ul = occasion_ms - SLOT_MS
        occasions.append(Occasion(t, first_ul, 0, UL))
        t += first_ul
        while t < period_end:
            dur = min(occasion_ms, period_end - t)
            dl = min(ETSI_OCCASION_DL_MS, dur)
            if on_ms + dl > budget:
                occasions.append(Occasion(t, dur, 0, UL))
            else:
                occasions.append(Occasion(t, dl, 0, DL))
                if dur > dl:
                    occasions.append(Occasion(t + dl, dur - dl, 0, UL))
                on_ms += dl
            t += dur
    return Schedule(ETSI, occasions)


def build_schedule(region: str, total_ms: int, pci=0, start_frame: int = 0) -> Schedule:
    """Lay out anchor and data occasions for ``total_ms`` milliseconds.

    FCC: a 20 ms anchor every 80 ms at a fixed frequency, the three 20 ms
    slots in between hop over the 64 data channels.  ETSI: a single carrier,
    one anchor every 1280 ms and 8 DL + 72 UL subframe occasions, with DL
    occasions dropped whenever they would push the per-period duty cycle
    above 10 %.
    """
    if total_ms <= 0:
        raise ValueError("total_ms must be positive")
    region = region.upper()
    if region == FCC:
        return _fcc_schedule(int(total_ms), pci, start_frame)
    if region == ETSI:
        return _etsi_schedule(int(total_ms))
    raise ValueError(f"unknown region {region!r}")


@dataclass(frozen=True)
class EtsiAuditReport:
    duty_cycle: float
    max_period_duty_cycle: float
    anchor_period_ms: float | None
    passed: bool


def audit_etsi(schedule: Schedule) -> EtsiAuditReport:
    per_period = []
    for p0 in range(0, schedule.duration_ms, ETSI_ANCHOR_PERIOD_MS):
        p1 = p0 + ETSI_ANCHOR_PERIOD_MS
        on = sum(
            max(0, min(o.end_ms, p1) - max(o.start_ms, p0))
            for o in schedule.by_role(*TRANSMIT_ROLES)
        )
        per_period.append(on / min(ETSI_ANCHOR_PERIOD_MS, schedule.duration_ms - p0))
    starts = schedule.anchor_starts()
    periods = {b - a for a, b in zip(starts, starts[1:])}
    period = periods.pop() if len(periods) == 1 else None
    worst = max(per_period, default=0.0)
    return EtsiAuditReport(
        duty_cycle=schedule.duty_cycle(),
        max_period_duty_cycle=worst,
        anchor_period_ms=period,
        passed=worst <= ETSI_MAX_DUTY_CYCLE + 1e-12,
    )


def occasions_from_channels(channels: Iterable[int], dwell_ms: int = SLOT_MS) -> Schedule:
    """A pure hopping timeline: one data occasion per channel entry."""
    occ = [Occasion(k * dwell_ms, dwell_ms, int(ch), DATA) for k, ch in enumerate(channels)]
    return Schedule(FCC, occ)
