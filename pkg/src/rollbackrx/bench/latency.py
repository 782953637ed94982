"""Wall-clock latency protocol: warmup runs discarded, fixed slot input."""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from .. import arbiter, coding
from ..channel import apply_channel, load_tdl_profiles, realize_channel
from ..grid import assemble_tx_grid
from ..rxchain import receive_r0, receive_r1
from ..surrogate import GenieBoost, receive_r3
from .scenarios import Scenario, SweepConfig

PIPELINE_COMPONENTS = (
    "r1_chain",
    "r3_surrogate",
    "detect_hard",
    "detect_confidence",
    "ldpc_decode",
)
DETECTOR_COMPONENTS = ("detect_hard", "detect_confidence")


def latency_bench(
    components: dict[str, Callable[[], object]], reps: int = 100, warmup: int = 10
) -> dict[str, dict[str, float]]:
    """Per-component wall-clock stats in ms over exactly `reps` samples."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    out: dict[str, dict[str, float]] = {}
    for name, fn in components.items():
        for _ in range(warmup):
            fn()
        samples = np.empty(reps)
        for i in range(reps):
            t0 = time.perf_counter()
            fn()
            samples[i] = (time.perf_counter() - t0) * 1e3
        out[name] = {
            "mean": float(np.mean(samples)),
            "median": float(np.median(samples)),
            "std": float(np.std(samples)),
            "min": float(np.min(samples)),
            "max": float(np.max(samples)),
        }
    return out


def detector_fraction(stats: dict[str, dict[str, float]]) -> float:
    """Combined detector time as a fraction of the full rollback pipeline."""
    total = sum(stats[c]["mean"] for c in PIPELINE_COMPONENTS if c in stats)
    det = sum(stats[c]["mean"] for c in DETECTOR_COMPONENTS if c in stats)
    return det / total if total > 0 else 0.0


def build_latency_components(
    scenario: Scenario, cfg: SweepConfig, snr_db: float = 10.0
) -> dict[str, Callable[[], object]]:
    """Freeze one slot's inputs and expose each pipeline stage as a closure."""
    slot = scenario.slot_config(cfg.n_prb)
    code = coding.LdpcCode.for_slot(slot)
    profile = load_tdl_profiles()[scenario.channel_profile]
    ss = np.random.SeedSequence([cfg.base_seed, scenario.id, 0x1A7E])
    s_bits, s_grid, s_chan, s_noise, s_surr = ss.spawn(5)
    rng = np.random.default_rng(s_bits)
    info = rng.integers(0, 2, size=code.k).astype(np.uint8)
    coded = code.encode(info)
    tx, record = assemble_tx_grid(coded.astype(np.int64), slot, s_grid)
    ch = realize_channel(
        profile, scenario.delay_spread_s, scenario.doppler_hz, slot, s_chan,
        rician_k_db=scenario.rician_k_db,
    )
    ch.noise_var = 10.0 ** (-snr_db / 10.0)
    rx = apply_channel(tx, ch, s_noise)
    mode = GenieBoost(alpha=0.15)
    l1 = receive_r1(rx, record.pilots)
    l3 = receive_r3(rx, ch, coded, mode, s_surr)
    dcfg = arbiter.DetectorConfig(tau=cfg.tau)
    return {
        "r0_chain": lambda: receive_r0(rx, ch),
        "r1_chain": lambda: receive_r1(rx, record.pilots),
        "r3_surrogate": lambda: receive_r3(rx, ch, coded, mode, s_surr),
        "detect_hard": lambda: arbiter.detect_hard(l1, l3, dcfg),
        "detect_confidence": lambda: arbiter.detect_confidence(l1, l3),
        "ldpc_decode": lambda: code.decode(l1.llrs),
    }
