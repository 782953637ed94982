"""Randomized property suites for the two architectural guarantees.

Suite 1 (bounded output): over randomized slots and every decision rule, the
combiner's output must be pointwise identical to one of its inputs.  A
deliberately stream-mixing combiner must be caught.

Suite 2 (bounded residual): no additive correction with sup-norm at most
delta_max can push the bit error rate below the confidently-wrong fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import arbiter
from .rxchain import L_MAX, LlrVector
from .surrogate import HardFailure


@dataclass
class SuiteResult:
    ok: bool
    checked: int
    failures: int
    detail: str = ""


def _random_llrs(rng: np.random.Generator, n: int) -> np.ndarray:
    scale = 10.0 ** rng.uniform(-2, 2)
    llrs = scale * rng.standard_normal(n)
    # Sprinkle exact zeros and clipped values: the edge cases that matter.
    zero_mask = rng.random(n) < 0.05
    llrs[zero_mask] = 0.0
    clip_mask = rng.random(n) < 0.05
    llrs[clip_mask] = np.sign(llrs[clip_mask] + 0.5) * L_MAX
    return np.clip(llrs, -L_MAX, L_MAX)


def mixing_combiner(
    l1: LlrVector, l3_or_failure, decision_rule, out_stream: str = "R5"
):
    """Negative control: elementwise max-confidence mixture of the streams."""
    if isinstance(l3_or_failure, HardFailure):
        return arbiter.combine(l1, l3_or_failure, decision_rule, out_stream)
    decision = decision_rule(l1, l3_or_failure)
    a, b = l1.llrs, l3_or_failure.llrs
    mixed = np.where(np.abs(b) >= np.abs(a), b, a)
    return LlrVector(mixed, out_stream), decision


def run_bounded_output_suite(
    n_slots: int = 10_000,
    seed: int = 0,
    combiner: Callable = arbiter.combine,
) -> SuiteResult:
    """Proposition-1 witness over randomized slots, all detectors + ensembles."""
    rng = np.random.default_rng(seed)
    cfg = arbiter.DetectorConfig(tau=0.05)
    rules = [
        ("R5", lambda a, b: arbiter.detect_hard(a, b, cfg)),
        ("R5c", arbiter.detect_confidence),
        ("R5or", lambda a, b: arbiter.detect_disjunctive(a, b, cfg)),
        ("R5and", lambda a, b: arbiter.detect_conjunctive(a, b, cfg)),
    ]
    failures = 0
    checked = 0
    detail = ""
    for i in range(n_slots):
        n = int(rng.integers(16, 512))
        l1 = LlrVector(_random_llrs(rng, n), "R1")
        if rng.random() < 0.1:
            l3 = HardFailure("injected")
        else:
            l3 = LlrVector(_random_llrs(rng, n), "R3")
        for stream, rule in rules:
            out, decision = combiner(l1, l3, rule, stream)
            checked += 1
            ref3 = l3 if isinstance(l3, LlrVector) else l1
            ok = arbiter.check_bounded_output(l1, ref3, out)
            bound = max(np.max(np.abs(l1.llrs)), np.max(np.abs(ref3.llrs)))
            ok = ok and float(np.max(np.abs(out.llrs))) <= bound
            if not ok:
                failures += 1
                if not detail:
                    detail = f"slot {i}, rule {stream}: output is not one of the inputs"
    return SuiteResult(ok=failures == 0, checked=checked, failures=failures, detail=detail)


def run_bounded_residual_suite(
    n_slots: int = 1000,
    residual_trials: int = 1000,
    seed: int = 0,
) -> SuiteResult:
    """Proposition-2 witness: random slots x bounded residuals, with extremes."""
    rng = np.random.default_rng(seed)
    cfg = arbiter.PcwConfig()
    failures = 0
    detail = ""
    for i in range(n_slots):
        n = int(rng.integers(32, 192))
        bits = rng.integers(0, 2, size=n)
        # Mix of confident and hesitant LLRs, wrong signs included.
        mags = rng.exponential(2.0, size=n)
        signs = np.where(rng.random(n) < 0.7, 1.0 - 2.0 * bits, 2.0 * bits - 1.0)
        llrs = np.clip(signs * mags, -L_MAX, L_MAX)
        ok = arbiter.check_bounded_residual(
            llrs, bits, cfg, residual_trials=residual_trials, seed=rng.integers(2**32)
        )
        if not ok:
            failures += 1
            if not detail:
                detail = f"slot {i}: residual beat p_cw"
    return SuiteResult(ok=failures == 0, checked=n_slots, failures=failures, detail=detail)
