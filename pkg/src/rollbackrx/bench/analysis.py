"""Operating-SNR extraction and detector-threshold sweeps."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .scenarios import Scenario, SweepConfig
from .sweep import ScenarioRun, run_scenario

FAIL = "fail"
DEFAULT_TAUS = (0.01, 0.05, 0.10, 0.20, 0.50)


@dataclass(frozen=True)
class OperatingSnr:
    value_db: float | None
    failed: bool
    bracket: tuple[tuple[float, float], tuple[float, float]] | None = None

    def __str__(self) -> str:
        return FAIL if self.failed else f"{self.value_db:.2f}"


def operating_snr(
    curve: list[tuple[float, float]], target: float = 0.1, slots: int = 200
) -> OperatingSnr:
    """SNR at which BLER crosses the target, interpolated in log10(BLER).

    Zero BLER values are clamped to 0.5/slots before taking logs.  The first
    adjacent pair bracketing the target is used; an exact hit returns that
    SNR directly.  No crossing in range -> failed.
    """
    if not curve:
        raise ValueError("empty BLER curve")
    snrs = [float(s) for s, _ in curve]
    if snrs != sorted(snrs):
        raise ValueError("curve must be sorted by SNR")
    floor = 0.5 / max(slots, 1)
    blers = [max(float(b), floor) for _, b in curve]
    for s, b in zip(snrs, blers):
        if b == target:
            return OperatingSnr(value_db=s, failed=False, bracket=((s, b), (s, b)))
    for i in range(len(curve) - 1):
        b0, b1 = blers[i], blers[i + 1]
        if (b0 - target) * (b1 - target) < 0:
            lt, l0, l1 = np.log10(target), np.log10(b0), np.log10(b1)
            frac = (lt - l0) / (l1 - l0)
            snr = snrs[i] + frac * (snrs[i + 1] - snrs[i])
            return OperatingSnr(
                value_db=float(snr),
                failed=False,
                bracket=((snrs[i], b0), (snrs[i + 1], b1)),
            )
    return OperatingSnr(value_db=None, failed=True)


def bler_curve(run: ScenarioRun, receiver: str) -> list[tuple[float, float]]:
    curve = []
    for snr_db, point in zip(run.cfg.snr_db, run.points):
        if receiver in point:
            curve.append((snr_db, point[receiver].bler))
    return curve


def run_operating_snr(run: ScenarioRun, receiver: str, target: float = 0.1) -> OperatingSnr:
    return operating_snr(
        bler_curve(run, receiver), target=target, slots=run.cfg.slots_per_point
    )


def rederive_bler_for_tau(run: ScenarioRun, tau: float) -> list[tuple[float, float]]:
    """R5 BLER curve at an alternative threshold, from cached slot records.

    Every tau is evaluated on identical randomness: the per-slot disagreement
    statistic d and both candidate decode outcomes are already stored.
    """
    curve = []
    for i, snr_db in enumerate(run.cfg.snr_db):
        recs = [r for r in run.records if r.snr_idx == i]
        errs = 0
        for r in recs:
            trust = (not r.forced) and r.d is not None and r.d <= tau
            stream = "R3" if trust else "R1"
            errs += 1 if r.scores[stream].block_error else 0
        curve.append((snr_db, errs / len(recs)))
    return curve


@dataclass
class TauTableRow:
    scenario_id: int
    scenario_name: str
    tau: float | None  # None for the R1/R3 reference rows
    receiver: str
    operating_snr: OperatingSnr


def tau_sweep(
    scenarios: list[Scenario],
    cfg: SweepConfig,
    taus: tuple[float, ...] = DEFAULT_TAUS,
    runs: dict[int, ScenarioRun] | None = None,
) -> tuple[list[TauTableRow], dict[int, ScenarioRun]]:
    """Operating SNR of R5 per (scenario, tau), reusing cached runs if given."""
    runs = dict(runs or {})
    rows: list[TauTableRow] = []
    need = replace(cfg, receivers=("R1", "R3", "R5"))
    for sc in scenarios:
        if sc.id not in runs:
            runs[sc.id] = run_scenario(sc, need)
        run = runs[sc.id]
        for recv in ("R1", "R3"):
            rows.append(
                TauTableRow(sc.id, sc.name, None, recv, run_operating_snr(run, recv))
            )
        for tau in taus:
            op = operating_snr(
                rederive_bler_for_tau(run, tau), slots=cfg.slots_per_point
            )
            rows.append(TauTableRow(sc.id, sc.name, float(tau), "R5", op))
    return rows, runs
