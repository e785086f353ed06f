"""Command-line front end for the simulation campaigns and audits.

    nbiotu-sim <experiment> [--config FILE] [--seed N] [--trials N]
               [--out PATH] [--jobs N] [--set key=value ...]

The config file is flat ``key = value`` text (``#`` starts a comment);
flags override file values.  Every CSV starts with ``#`` comment lines that
record the package version and the full resolved configuration.
Exit codes: 0 success, 2 configuration error, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import io
import logging
import sys
from dataclasses import asdict, dataclass, field, fields

from . import __version__
from . import fh_stats
from .phy_frame.anchor import LEGACY, LONG_OCC_PVS
from .phy_frame.schedule import ETSI, FCC, audit_etsi, build_schedule
from .receiver.campaign import (
    NpbchCampaignConfig,
    SyncCampaignConfig,
    run_npbch_campaign,
    run_sync_campaign,
)

log = logging.getLogger("nbiotu.simcli")

EXPERIMENTS = ("sync-curve", "shots-curve", "npbch-curve", "fh-matrix", "fh-usage", "fcc-audit", "etsi-audit")
LINK_EXPERIMENTS = ("sync-curve", "shots-curve", "npbch-curve")
TARGET_SNR = {FCC: -13.3, ETSI: -8.5}
AUDIT_REGION = {"fcc-audit": FCC, "etsi-audit": ETSI}
ANCHOR_SPACING_MS = {FCC: 80.0, ETSI: 1280.0}
SHOT_FADING = ("independent", "correlated")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class ConfigError(ValueError):
    pass


@dataclass
class CampaignConfig:
    experiment: str
    region: str = FCC
    snr: list[float] = field(default_factory=list)
    shots: list[int] = field(default_factory=list)
    trials: int = 1000
    seed: int = 0
    pci: list[int] = field(default_factory=lambda: [0])
    hops: int = 1_000_000
    total_ms: int = 20_000
    window_s: float = 20.0
    npss_mode: str = LONG_OCC_PVS
    profile: str = "TU"
    doppler: float = 1.0
    tx_ports: int = 2
    search_window: int = 19_200
    shot_fading: str = "correlated"
    output: str = "-"
    jobs: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        self.region = self.region.upper()
        if self.region not in (FCC, ETSI):
            raise ConfigError(f"unknown region {self.region!r}")
        if self.experiment in AUDIT_REGION:
            self.region = AUDIT_REGION[self.experiment]
        if self.hops < 64:
            raise ConfigError("hops must be >= 64")
        if self.total_ms <= 0 or self.window_s <= 0:
            raise ConfigError("total_ms and window_s must be positive")
        if not self.pci:
            raise ConfigError("pci list must be non-empty")
        if self.npss_mode not in (LONG_OCC_PVS, LEGACY):
            raise ConfigError(f"unknown npss_mode {self.npss_mode!r}")
        if self.shot_fading not in SHOT_FADING:
            raise ConfigError(f"shot_fading must be one of {', '.join(SHOT_FADING)}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if not self.snr:
            self.snr = self._default_snr()
        if not self.shots:
            self.shots = self._default_shots()
        if self.experiment in LINK_EXPERIMENTS and not self.snr:
            raise ConfigError("SNR list must be non-empty")
        if any(s < 1 for s in self.shots):
            raise ConfigError("shot counts must be >= 1")
        if self.experiment == "npbch-curve" and max(self.shots) > 8:
            raise ConfigError("at most 8 NPBCH shots")
        if any(not 0 <= p <= 503 for p in self.pci):
            raise ConfigError("pci values must lie in 0..503")

    def _default_snr(self) -> list[float]:
        if self.experiment == "sync-curve":
            return [-13.0, -11.0, -9.0, -7.0, -5.0, -3.0]
        if self.experiment in LINK_EXPERIMENTS:
            return [TARGET_SNR[self.region]]
        return []

    def _default_shots(self) -> list[int]:
        if self.experiment == "sync-curve":
            return [1]
        if self.experiment == "shots-curve":
            return list(range(1, 9 if self.region == FCC else 5))
        if self.experiment == "npbch-curve":
            return list(range(1, 9 if self.region == FCC else 5))
        return [1]


def _parse_list(text: str, cast):
    items = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if cast is int and "-" in part[1:]:
            lo, hi = part.split("-", 1) if not part.startswith("-") else part[1:].split("-", 1)
            items.extend(range(int(lo), int(hi) + 1))
        else:
            items.append(cast(part))
    return items


_CASTS = {
    "snr": lambda v: _parse_list(v, float),
    "shots": lambda v: _parse_list(v, int),
    "pci": lambda v: _parse_list(v, int),
}


def _coerce(key: str, value: str):
    types = {f.name: f.type for f in fields(CampaignConfig)}
    if key not in types:
        raise ConfigError(f"unknown config key {key!r}")
    if key in _CASTS:
        return _CASTS[key](value)
    kind = types[key]
    try:
        if kind == "int":
            return int(float(value)) if "e" in value.lower() else int(value)
        if kind == "float":
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return value


def parse_config_text(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = _coerce(key, value)
    return values


def build_config(args: argparse.Namespace) -> CampaignConfig:
    values: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values.update(parse_config_text(fh.read()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), value.strip())
    for key in ("seed", "trials", "jobs"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    if args.out is not None:
        values["output"] = args.out
    values.pop("experiment", None)
    try:
        return CampaignConfig(experiment=args.experiment, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _header(cfg: CampaignConfig) -> str:
    lines = [f"# nbiotu {__version__}", f"# experiment={cfg.experiment}"]
    for key, value in asdict(cfg).items():
        if key in ("experiment", "jobs", "output"):
            continue
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"# {key}={value}")
    return "\n".join(lines) + "\n"


def _curve_csv(points) -> str:
    buf = io.StringIO()
    buf.write("snr_db,shots,trials,detections,probability,wilson_ci_low,wilson_ci_high\n")
    for p in points:
        lo, hi = p.wilson
        buf.write(f"{p.snr_db:g},{p.shots},{p.trials},{p.detections},{p.probability:.6f},{lo:.6f},{hi:.6f}\n")
    return buf.getvalue()


def _kv_csv(rows: list[tuple[str, object]]) -> str:
    return "key,value\n" + "".join(f"{k},{v}\n" for k, v in rows)


def shot_spacing(cfg: CampaignConfig) -> float | None:
    """Anchor spacing for correlated shot fading, None for independent draws."""
    return ANCHOR_SPACING_MS[cfg.region] if cfg.shot_fading == "correlated" else None


def run_experiment(cfg: CampaignConfig) -> str:
    """Compute the experiment and return the CSV body (without header)."""
    exp = cfg.experiment
    if exp in ("sync-curve", "shots-curve"):
        sync = SyncCampaignConfig(
            snr_db=tuple(cfg.snr), shots=tuple(cfg.shots), trials=cfg.trials, seed=cfg.seed,
            npss_mode=cfg.npss_mode, profile=cfg.profile, doppler=cfg.doppler,
            tx_ports=cfg.tx_ports, search_window=cfg.search_window, detect_cell=False,
            shot_spacing_ms=shot_spacing(cfg), jobs=cfg.jobs,
        )
        return _curve_csv(run_sync_campaign(sync))
    if exp == "npbch-curve":
        npbch = NpbchCampaignConfig(
            snr_db=tuple(cfg.snr), shots=tuple(cfg.shots), trials=cfg.trials, seed=cfg.seed,
            profile=cfg.profile, doppler=cfg.doppler, tx_ports=cfg.tx_ports,
            shot_spacing_ms=shot_spacing(cfg), jobs=cfg.jobs,
        )
        return _curve_csv(run_npbch_campaign(npbch))
    if exp == "fh-matrix":
        tm = None
        for pci in cfg.pci:
            part = fh_stats.transition_matrix(pci, cfg.hops)
            tm = part if tm is None else tm.merge(part)
        return fh_stats.matrix_csv(tm.probabilities)
    if exp == "fh-usage":
        fractions = sum(fh_stats.usage_histogram(p, cfg.hops) for p in cfg.pci) / len(cfg.pci)
        chi2 = fh_stats.chi_square_uniform(fractions, cfg.hops * len(cfg.pci))
        return f"# chi_square={chi2:.6f}\n" + fh_stats.histogram_csv(fractions)
    if exp == "fcc-audit":
        sched = build_schedule(FCC, cfg.total_ms, pci=cfg.pci[0])
        rep = fh_stats.audit_fcc(sched, cfg.window_s)
        return _kv_csv([
            ("channel_count", rep.channel_count),
            ("max_dwell_in_window_s", f"{rep.max_dwell_in_window:.6f}"),
            ("mean_dwell_in_window_s", f"{rep.mean_dwell_in_window:.6f}"),
            ("usage_deviation", f"{rep.usage_deviation:.6f}"),
            ("channels_ok", rep.channels_ok),
            ("dwell_ok", rep.dwell_ok),
            ("passed", rep.passed),
        ])
    if exp == "etsi-audit":
        rep = audit_etsi(build_schedule(ETSI, cfg.total_ms))
        return _kv_csv([
            ("duty_cycle", f"{rep.duty_cycle:.6f}"),
            ("max_period_duty_cycle", f"{rep.max_period_duty_cycle:.6f}"),
            ("anchor_period_ms", rep.anchor_period_ms),
            ("passed", rep.passed),
        ])
    raise ConfigError(f"unknown experiment {exp!r}")


def run(cfg: CampaignConfig) -> int:
    body = run_experiment(cfg)
    text = _header(cfg) + body
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", cfg.output)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nbiotu-sim", description="NB-IoT-U link-level simulator")
    sub = parser.add_subparsers(dest="experiment", metavar="experiment")
    sub.required = True
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", help="output CSV path ('-' for stdout)")
        p.add_argument("--jobs", type=int, help="worker processes")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = build_config(args)
    except ConfigError as exc:
        print(f"nbiotu-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"nbiotu-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"nbiotu-sim: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
