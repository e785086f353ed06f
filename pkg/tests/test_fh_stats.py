import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from nbiotu import fh_kernel as fk
from nbiotu import fh_stats
from nbiotu.phy_frame.schedule import (
    ANCHOR,
    DATA,
    ETSI,
    FCC,
    audit_etsi,
    build_schedule,
    occasions_from_channels,
)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, fk.MAX_PCI), st.integers(2, 3000), st.integers(0, 5000))
def test_counts_match_oracle(pci, hops, start):
    tm = fh_stats.transition_matrix(pci, hops, start)
    seq = [int(c) for c in fk.hop_sequence(pci, hops, start)]
    assert tm.counts.tolist() == oracles.transition_counts(seq)
    assert tm.counts.sum() == hops - 1


@given(st.integers(0, fk.MAX_PCI), st.integers(64, 4000))
def test_usage_sums_to_one(pci, hops):
    assert np.isclose(fh_stats.usage_histogram(pci, hops).sum(), 1.0)


def test_probability_rows_sum_to_one():
    p = fh_stats.transition_matrix(3, 20_000).probabilities
    assert np.allclose(p.sum(axis=1), 1.0)
    assert np.all((p >= 0) & (p <= 1))


def test_merge_equals_concatenated_count():
    # splitting the hop range and merging overlaps the boundary pair once
    full = fh_stats.transition_matrix(5, 4001)
    a = fh_stats.transition_matrix(5, 2001)
    b = fh_stats.transition_matrix(5, 2001, start_nsfn=2000)
    assert np.array_equal(a.merge(b).counts, full.counts)


def test_usage_exactly_uniform_over_full_period():
    for pci in (0, 7, 255):
        assert np.allclose(fh_stats.usage_histogram(pci, 2048), 1 / 64)


def test_chi_square_zero_for_uniform():
    assert fh_stats.chi_square_uniform(np.full(64, 1 / 64), 6400) == 0.0


def test_small_inputs_rejected():
    with pytest.raises(ValueError):
        fh_stats.transition_matrix(0, 1)
    with pytest.raises(ValueError):
        fh_stats.usage_histogram(0, 63)


def test_matrix_csv_layout():
    text = fh_stats.matrix_csv(np.eye(64))
    lines = text.splitlines()
    assert len(lines) == 65
    assert lines[0].split(",")[:3] == ["from", "0", "1"]
    assert len(lines[1].split(",")) == 65


# -- schedules and audits ---------------------------------------------------

def test_fcc_160ms_layout():
    sched = build_schedule(FCC, 160)
    roles = [o.role for o in sched.occasions]
    assert roles.count(ANCHOR) == 2
    assert roles.count(DATA) == 6
    assert sched.anchor_starts() == [0, 80]
    assert all(o.dur_ms == 20 for o in sched.occasions)


def test_fcc_data_slots_follow_kernel():
    sched = build_schedule(FCC, 400, pci=17)
    for o in sched.by_role(DATA):
        clock = fk.FrameClock.from_frame_count(o.start_ms // 10)
        assert o.carrier == fk.hop_channel(clock, 17)


def test_fcc_20s_passes_audit():
    rep = fh_stats.audit_fcc(build_schedule(FCC, 20_000))
    assert rep.passed
    assert rep.channel_count >= 50
    assert rep.max_dwell_in_window <= 0.4


def test_pure_hopping_dwell_arithmetic():
    # 1000 hops of 20 ms over 64 equally used channels: 0.3125 s each
    sched = occasions_from_channels(fk.hop_sequence(0, 1000))
    rep = fh_stats.audit_fcc(sched)
    assert rep.mean_dwell_in_window == pytest.approx(0.3125)
    assert rep.passed


def test_fcc_audit_flags_too_few_channels():
    sched = occasions_from_channels([k % 10 for k in range(1000)])
    rep = fh_stats.audit_fcc(sched)
    assert not rep.channels_ok
    assert not rep.dwell_ok
    assert not rep.passed


def test_fcc_audit_argument_errors():
    with pytest.raises(ValueError):
        fh_stats.audit_fcc(build_schedule(FCC, 20_000), window=0)
    with pytest.raises(ValueError):
        fh_stats.audit_fcc(build_schedule(FCC, 1_000))


def test_etsi_2560ms():
    sched = build_schedule(ETSI, 2560)
    assert sched.anchor_starts() == [0, 1280]
    rep = audit_etsi(sched)
    assert rep.passed
    assert rep.max_period_duty_cycle <= 0.10
    assert rep.anchor_period_ms == 1280
    assert {o.carrier for o in sched.occasions} == {0}


@given(st.integers(1, 20_000))
def test_etsi_duty_cycle_bound(total):
    assert audit_etsi(build_schedule(ETSI, total)).max_period_duty_cycle <= 0.10 + 1e-12


def test_schedule_csv_header():
    text = build_schedule(FCC, 80).to_csv()
    assert text.splitlines()[0] == "start_ms,dur_ms,carrier,role"
    assert len(text.splitlines()) == 5


def test_unknown_region():
    with pytest.raises(ValueError):
        build_schedule("ARIB", 100)
