"""Result persistence: canonical CSV schema plus a JSON run manifest.

The CSV layout is the interchange format consumed by the figure renderer;
writing is deterministic (fixed row order, shortest-roundtrip float repr) so
identical configurations produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import subprocess
from dataclasses import asdict
from pathlib import Path

from .. import __version__
from .analysis import FAIL, TauTableRow
from .scenarios import Scenario, SweepConfig, surrogate_to_dict
from .sweep import ScenarioRun, SnrPointResult

RESULT_COLUMNS = [
    "scenario_id",
    "scenario_name",
    "receiver",
    "snr_db",
    "slots",
    "bler",
    "coded_ber",
    "rollback_rate",
    "forced_rollback_rate",
    "mean_d",
    "mean_confidence_fraction",
    "pcw",
]

TAU_COLUMNS = ["scenario_id", "scenario_name", "tau", "receiver", "operating_snr_db", "failed"]

LATENCY_COLUMNS = ["component", "mean_ms", "median_ms", "std_ms", "min_ms", "max_ms"]


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def results_rows(runs: list[ScenarioRun]) -> list[dict]:
    rows = []
    for run in runs:
        for point in run.points:
            for recv in run.cfg.receivers:
                if recv not in point:
                    continue
                p: SnrPointResult = point[recv]
                rows.append(
                    {
                        "scenario_id": run.scenario.id,
                        "scenario_name": run.scenario.name,
                        "receiver": recv,
                        "snr_db": p.snr_db,
                        "slots": p.slots,
                        "bler": p.bler,
                        "coded_ber": p.coded_ber,
                        "rollback_rate": p.rollback_rate,
                        "forced_rollback_rate": p.forced_rollback_rate,
                        "mean_d": p.mean_d,
                        "mean_confidence_fraction": p.mean_confidence_fraction,
                        "pcw": p.pcw,
                    }
                )
    return rows


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=10,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def write_results(
    runs: list[ScenarioRun], out_dir, manifest_extra: dict | None = None
) -> tuple[Path, Path]:
    """Write results.csv + manifest.json; returns both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in results_rows(runs):
            writer.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])

    manifest = {
        "package_version": __version__,
        "git": git_describe(),
        "config": _cfg_dict(runs[0].cfg) if runs else {},
        "scenarios": [_scenario_dict(r.scenario) for r in runs],
        "codes": [
            {"scenario_id": r.scenario.id, "name": "rate64_qc39",
             "n": r.scenario.slot_config(r.cfg.n_prb).n_coded_bits}
            for r in runs
        ],
    }
    if manifest_extra:
        manifest.update(manifest_extra)
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return csv_path, manifest_path


def _cfg_dict(cfg: SweepConfig) -> dict:
    d = asdict(cfg)
    d["snr_db"] = list(cfg.snr_db)
    d["receivers"] = list(cfg.receivers)
    return d


def _scenario_dict(sc: Scenario) -> dict:
    return {
        "id": sc.id,
        "name": sc.name,
        "axis": sc.axis,
        "channel_profile": sc.channel_profile,
        "doppler_hz": sc.doppler_hz,
        "delay_spread_ns": sc.delay_spread_s * 1e9,
        "modulation": sc.modulation.name,
        "dmrs_additional_positions": sc.dmrs_additional_positions,
        "rician_k_db": sc.rician_k_db,
        "surrogate": surrogate_to_dict(sc.surrogate),
    }


_FLOAT_FIELDS = {
    "snr_db", "bler", "coded_ber", "rollback_rate", "forced_rollback_rate",
    "mean_d", "mean_confidence_fraction", "pcw",
}
_INT_FIELDS = {"scenario_id", "slots"}


def read_results(path) -> list[dict]:
    """Exact inverse of write_results on the CSV subset."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty results file", line=1) from None
        missing = [c for c in RESULT_COLUMNS if c not in header]
        if missing:
            raise ParseError(f"missing column {missing[0]!r}", line=1)
        col = {c: header.index(c) for c in RESULT_COLUMNS}
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) < len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(raw)}", lineno)
            row = {}
            for c in RESULT_COLUMNS:
                text = raw[col[c]]
                try:
                    if text == "":
                        row[c] = None
                    elif c in _INT_FIELDS:
                        row[c] = int(text)
                    elif c in _FLOAT_FIELDS:
                        row[c] = float(text)
                    else:
                        row[c] = text
                except ValueError as exc:
                    raise ParseError(f"bad value {text!r} for column {c!r}", lineno) from exc
            rows.append(row)
    return rows


def write_tau_table(rows: list[TauTableRow], out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "tau_sweep.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TAU_COLUMNS)
        for r in rows:
            op = r.operating_snr
            writer.writerow(
                [
                    r.scenario_id,
                    r.scenario_name,
                    _fmt(r.tau),
                    r.receiver,
                    _fmt(op.value_db),
                    "true" if op.failed else "false",
                ]
            )
    return path


def write_latency_table(stats: dict, out_dir, detector_fraction: float) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "latency.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LATENCY_COLUMNS)
        for name, s in stats.items():
            writer.writerow(
                [name, _fmt(s["mean"]), _fmt(s["median"]), _fmt(s["std"]),
                 _fmt(s["min"]), _fmt(s["max"])]
            )
        writer.writerow(["detector_fraction_of_pipeline", _fmt(detector_fraction), "", "", "", ""])
    return path


def format_operating(op) -> str:
    return FAIL if op.failed else f"{op.value_db:.2f}"
