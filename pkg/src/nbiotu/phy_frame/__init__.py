"""Frame assembly: DRS/anchor composition, NPBCH coding, schedules, OFDM."""

from .anchor import (
    DRS_LAYOUT,
    LEGACY,
    LONG_OCC_PVS,
    Anchor,
    DrsBlock,
    build_anchor,
    build_drs,
)
from .npbch import Mib, block_index_for_frame, encode_npbch
from .ofdm import SAMPLE_RATE, SUBFRAME_SAMPLES, ofdm_demodulate, ofdm_modulate
from .schedule import ETSI, FCC, Occasion, Schedule, audit_etsi, build_schedule

__all__ = [
    "DRS_LAYOUT", "LEGACY", "LONG_OCC_PVS", "Anchor", "DrsBlock", "build_anchor",
    "build_drs", "Mib", "block_index_for_frame", "encode_npbch", "SAMPLE_RATE",
    "SUBFRAME_SAMPLES", "ofdm_demodulate", "ofdm_modulate", "ETSI", "FCC",
    "Occasion", "Schedule", "audit_etsi", "build_schedule",
]
