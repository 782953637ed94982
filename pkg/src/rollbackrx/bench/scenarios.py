"""Scenario registry and sweep configuration."""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import yaml

from ..grid import ConfigError, DmrsConfig, ModulationScheme, SlotConfig
from ..surrogate import (
    GenieBoost,
    HardFailureMode,
    Miscalibrated,
    SilentFailure,
    SurrogateMode,
)

RECEIVERS = ("R0", "R1", "R3", "R5", "R5c", "R5or", "R5and")
ARBITRATED = ("R5", "R5c", "R5or", "R5and")


@dataclass(frozen=True)
class Scenario:
    id: int
    name: str
    channel_profile: str
    doppler_hz: float
    delay_spread_s: float
    modulation: ModulationScheme
    dmrs_additional_positions: int
    surrogate: SurrogateMode
    rician_k_db: float = 10.0
    axis: str = "-"

    def slot_config(self, n_prb: int = 26) -> SlotConfig:
        return SlotConfig(
            n_prb=n_prb,
            modulation=self.modulation,
            dmrs=DmrsConfig(additional_positions=self.dmrs_additional_positions),
        )


@dataclass
class SweepConfig:
    snr_db: tuple[float, ...] = (-2, 0, 2, 4, 6, 8, 10, 12, 14, 16, 18)
    slots_per_point: int = 200
    base_seed: int = 1
    receivers: tuple[str, ...] = RECEIVERS
    tau: float = 0.05
    delta_max: float = 1.3862943611198906
    jobs: int = 1
    n_prb: int = 26

    def __post_init__(self):
        self.snr_db = tuple(float(s) for s in self.snr_db)
        if not self.snr_db or list(self.snr_db) != sorted(self.snr_db):
            raise ConfigError("snr_db must be a nonempty ascending list")
        if self.slots_per_point < 1:
            raise ConfigError("slots_per_point must be >= 1")
        bad = set(self.receivers) - set(RECEIVERS)
        if bad:
            raise ConfigError(f"unknown receivers: {sorted(bad)}")
        self.receivers = tuple(self.receivers)


def parse_surrogate(spec: dict) -> SurrogateMode:
    mode = spec.get("mode")
    if mode == "genie_boost":
        return GenieBoost(alpha=float(spec.get("alpha", 0.15)))
    if mode == "silent_failure":
        return SilentFailure(
            p_wrong=float(spec["p_wrong"]),
            magnitude_source=spec.get("magnitude_source", "profile"),
        )
    if mode == "miscalibrated":
        return Miscalibrated(
            scale=float(spec.get("scale", 0.5)),
            extra_noise=float(spec.get("extra_noise", 0.5)),
        )
    if mode == "hard_failure":
        return HardFailureMode()
    raise ConfigError(f"unknown surrogate mode {mode!r}")


def surrogate_to_dict(mode: SurrogateMode) -> dict:
    if isinstance(mode, GenieBoost):
        return {"mode": "genie_boost", "alpha": mode.alpha}
    if isinstance(mode, SilentFailure):
        return {
            "mode": "silent_failure",
            "p_wrong": mode.p_wrong,
            "magnitude_source": mode.magnitude_source,
        }
    if isinstance(mode, Miscalibrated):
        return {
            "mode": "miscalibrated",
            "scale": mode.scale,
            "extra_noise": mode.extra_noise,
        }
    return {"mode": "hard_failure"}


def load_registry(path=None) -> tuple[list[Scenario], SweepConfig]:
    """Load scenarios + sweep defaults from the bundled or given YAML file."""
    if path is None:
        ref = importlib.resources.files("rollbackrx.data") / "scenarios.yaml"
        raw = yaml.safe_load(ref.read_text())
    else:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    defaults = raw.get("defaults", {})
    scenarios = []
    for row in raw["scenarios"]:
        merged = {**defaults, **row}
        scenarios.append(
            Scenario(
                id=int(merged["id"]),
                name=str(merged["name"]),
                channel_profile=str(merged["channel_profile"]),
                doppler_hz=float(merged["doppler_hz"]),
                delay_spread_s=float(merged["delay_spread_ns"]) * 1e-9,
                modulation=ModulationScheme[str(merged["modulation"])],
                dmrs_additional_positions=int(merged["dmrs_additional_positions"]),
                surrogate=parse_surrogate(merged["surrogate"]),
                rician_k_db=float(merged.get("rician_k_db", 10.0)),
                axis=str(merged.get("axis", "-")),
            )
        )
    sweep_raw = dict(raw.get("sweep", {}))
    sweep_raw.setdefault("snr_db", SweepConfig().snr_db)
    cfg = SweepConfig(
        snr_db=tuple(sweep_raw["snr_db"]),
        slots_per_point=int(sweep_raw.get("slots_per_point", 200)),
        base_seed=int(sweep_raw.get("base_seed", 1)),
        receivers=tuple(sweep_raw.get("receivers", RECEIVERS)),
        tau=float(sweep_raw.get("tau", 0.05)),
        delta_max=float(sweep_raw.get("delta_max", 1.3862943611198906)),
        jobs=int(sweep_raw.get("jobs", 1)),
    )
    ids = [s.id for s in scenarios]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate scenario ids in registry")
    return scenarios, cfg
