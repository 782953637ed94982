"""Readers for the benchmark's documented CSV schemas.

This package talks to the simulator only through its file formats; nothing
here imports the simulator.
"""

from __future__ import annotations

import csv
from pathlib import Path

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


class SchemaError(ValueError):
    pass


def _read(path: Path, columns: list[str], numeric: set[str], ints: set[str]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column {missing[0]!r}")
        idx = {c: header.index(c) for c in columns}
        rows = []
        for lineno, raw in enumerate(reader, start=2):
            if not raw:
                continue
            row = {}
            for c in columns:
                text = raw[idx[c]] if idx[c] < len(raw) else ""
                if text == "":
                    row[c] = None
                elif c in ints:
                    row[c] = int(text)
                elif c in numeric:
                    try:
                        row[c] = float(text)
                    except ValueError:
                        raise SchemaError(
                            f"{path}:{lineno}: bad value {text!r} in column {c!r}"
                        ) from None
                else:
                    row[c] = text
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_results(path) -> list[dict]:
    return _read(
        Path(path),
        RESULT_COLUMNS,
        numeric={"snr_db", "bler", "coded_ber", "rollback_rate",
                 "forced_rollback_rate", "mean_d", "mean_confidence_fraction", "pcw"},
        ints={"scenario_id", "slots"},
    )


def read_tau_table(path) -> list[dict]:
    rows = _read(
        Path(path),
        TAU_COLUMNS,
        numeric={"tau", "operating_snr_db"},
        ints={"scenario_id"},
    )
    for row in rows:
        row["failed"] = str(row["failed"]).lower() == "true"
    return rows


def read_latency(path) -> list[dict]:
    return _read(
        Path(path),
        LATENCY_COLUMNS,
        numeric={"mean_ms", "median_ms", "std_ms", "min_ms", "max_ms"},
        ints=set(),
    )


def operating_snr_db(curve: list[tuple[float, float]], slots: int, target: float = 0.1):
    """10% crossing via log10(BLER) interpolation; None when out of range.

    Mirrors the simulator's documented extraction rule so the bar chart can
    be drawn from the BLER curves alone.
    """
    import numpy as np

    floor = 0.5 / max(slots, 1)
    snrs = [s for s, _ in curve]
    blers = [max(b, floor) for _, b in curve]
    for s, b in zip(snrs, blers):
        if b == target:
            return s
    for i in range(len(curve) - 1):
        b0, b1 = blers[i], blers[i + 1]
        if (b0 - target) * (b1 - target) < 0:
            lt, l0, l1 = np.log10(target), np.log10(b0), np.log10(b1)
            return snrs[i] + (lt - l0) / (l1 - l0) * (snrs[i + 1] - snrs[i])
    return None
