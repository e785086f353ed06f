"""Empirical statistics of the hopping pattern and FCC FHSS audit."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .fh_kernel import NUM_DATA_CHANNELS, hop_sequence
from .phy_frame.schedule import DATA, Schedule

FCC_MIN_CHANNELS = 50
FCC_MAX_DWELL_S = 0.4
FCC_DWELL_WINDOW_S = 20.0


@dataclass
class TransitionMatrix:
    counts: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        rows = self.counts.sum(axis=1, keepdims=True).astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            p = self.counts / rows
        return np.where(rows > 0, p, 0.0)

    def merge(self, other: "TransitionMatrix") -> "TransitionMatrix":
        return TransitionMatrix(self.counts + other.counts)

    def off_diagonal(self) -> np.ndarray:
        p = self.probabilities
        return p[~np.eye(p.shape[0], dtype=bool)]

    def diagonal(self) -> np.ndarray:
        return np.diag(self.probabilities)

    def self_transition_rate(self) -> float:
        """Fraction of all counted hops that stay on the same channel."""
        return float(np.trace(self.counts) / self.counts.sum())


def transition_counts(channels: np.ndarray) -> np.ndarray:
    n = NUM_DATA_CHANNELS
    flat = channels[:-1] * n + channels[1:]
    return np.bincount(flat, minlength=n * n).reshape(n, n)


def transition_matrix(pci, num_hops: int, start_nsfn: int = 0) -> TransitionMatrix:
    """Count (from, to) pairs over ``num_hops`` consecutive hops."""
    if num_hops < 2:
        raise ValueError("num_hops must be at least 2")
    return TransitionMatrix(transition_counts(hop_sequence(pci, num_hops, start_nsfn)))


def usage_histogram(pci, num_hops: int, start_nsfn: int = 0) -> np.ndarray:
    if num_hops < NUM_DATA_CHANNELS:
        raise ValueError(f"num_hops must be at least {NUM_DATA_CHANNELS}")
    counts = np.bincount(hop_sequence(pci, num_hops, start_nsfn), minlength=NUM_DATA_CHANNELS)
    return counts / num_hops


def chi_square_uniform(fractions: np.ndarray, num_hops: int) -> float:
    """Pearson statistic of a usage histogram against the uniform law."""
    observed = np.asarray(fractions) * num_hops
    expected = num_hops / len(observed)
    return float(((observed - expected) ** 2 / expected).sum())


@dataclass(frozen=True)
class ComplianceReport:
    channel_count: int
    max_dwell_in_window: float
    mean_dwell_in_window: float
    usage_deviation: float
    window: float
    channels_ok: bool
    dwell_ok: bool

    @property
    def passed(self) -> bool:
        return self.channels_ok and self.dwell_ok

    @property
    def verdict(self) -> dict:
        return {"channels": self.channels_ok, "dwell": self.dwell_ok}


def _max_window_dwell(intervals: list[tuple[float, float]], window: float) -> float:
    # the maximum windowed overlap is attained with the window opening on an interval start
    starts = np.array([a for a, _ in intervals])
    ends = np.array([b for _, b in intervals])
    best = 0.0
    for s in starts:
        overlap = np.clip(np.minimum(ends, s + window) - np.maximum(starts, s), 0, None)
        best = max(best, float(overlap.sum()))
    return best


def audit_fcc(schedule: Schedule, window: float = FCC_DWELL_WINDOW_S) -> ComplianceReport:
    """Check the hopping (data) occasions of ``schedule`` against the FHSS rules.

    ``window`` is in seconds.  Only data occasions are audited; anchor
    carriers operate in DTS mode.
    """
    if window <= 0:
        raise ValueError("window must be positive")
    span = schedule.duration_ms / 1000.0
    if span + 1e-9 < window:
        raise ValueError(f"schedule covers {span} s, shorter than the {window} s window")
    per_channel: dict[int, list[tuple[float, float]]] = {}
    for o in schedule.by_role(DATA):
        per_channel.setdefault(o.carrier, []).append((o.start_ms / 1000.0, o.end_ms / 1000.0))
    dwell = {ch: _max_window_dwell(iv, window) for ch, iv in per_channel.items()}
    usage = np.zeros(NUM_DATA_CHANNELS)
    for ch, iv in per_channel.items():
        usage[ch] = sum(b - a for a, b in iv)
    total = usage.sum()
    deviation = float(np.max(np.abs(usage / total * NUM_DATA_CHANNELS - 1))) if total else float("inf")
    max_dwell = max(dwell.values(), default=0.0)
    n_windows = span / window
    return ComplianceReport(
        channel_count=len(per_channel),
        max_dwell_in_window=max_dwell,
        mean_dwell_in_window=float(total / NUM_DATA_CHANNELS / n_windows) if total else 0.0,
        usage_deviation=deviation,
        window=window,
        channels_ok=len(per_channel) >= FCC_MIN_CHANNELS,
        dwell_ok=max_dwell <= FCC_MAX_DWELL_S + 1e-12,
    )


def matrix_csv(matrix: np.ndarray, fmt: str = "{:.9g}") -> str:
    """Row-major CSV with a header row of channel indices."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["from"] + list(range(matrix.shape[1])))
    for i, row in enumerate(matrix):
        writer.writerow([i] + [fmt.format(v) for v in row])
    return buf.getvalue()


def histogram_csv(fractions: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["channel", "fraction"])
    for ch, f in enumerate(fractions):
        writer.writerow([ch, f"{f:.9g}"])
    return buf.getvalue()
