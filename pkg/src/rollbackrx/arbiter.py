"""Per-slot LLR arbitration: detectors, combiner, and safety witnesses.

Two detectors decide, per slot, whether the surrogate stream can be trusted
or the chain must roll back to the conventional receiver:

  * hard-disagreement: trust iff the fraction of sign-differing bits d is at
    most tau (non-strict boundary);
  * confidence vote: on the disagreeing set, trust iff the stream whose
    median-normalized magnitude wins does so on strictly more than half of
    the disagreeing bits (ties roll back).

Two executable witnesses back the architecture: the combiner's output is
always pointwise one of its inputs (bounded output), and no additive
residual bounded by delta_max can push the bit error rate below the
confidently-wrong fraction p_cw (bounded-residual impossibility).

Sign convention throughout: sgn(0) = +1, i.e. a zero LLR decides bit 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .rxchain import LlrVector
from .surrogate import HardFailure

DELTA_MAX_DEFAULT = math.log(4.0)


@dataclass(frozen=True)
class DetectorConfig:
    tau: float = 0.05
    vote_threshold: float = 0.5  # fixed by the confidence-vote rule

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")


@dataclass(frozen=True)
class PcwConfig:
    delta_max: float = DELTA_MAX_DEFAULT

    def __post_init__(self):
        if self.delta_max <= 0:
            raise ValueError("delta_max must be > 0")


@dataclass
class SlotDecision:
    verdict: str  # "trust" | "rollback"
    d: float
    confidence_fraction: float | None
    disagreement_count: int
    forced: bool = False

    @property
    def trusted(self) -> bool:
        return self.verdict == "trust"


def _llrs(x) -> np.ndarray:
    return x.llrs if isinstance(x, LlrVector) else np.asarray(x, dtype=float)


def _signs(llrs: np.ndarray) -> np.ndarray:
    return np.where(llrs < 0, -1.0, 1.0)


def _check_pair(a: np.ndarray, b: np.ndarray):
    if a.size != b.size:
        raise ValueError(f"LLR length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("empty LLR vectors")


def _sign_diff(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # sgn(0) = +1, so the decision boundary is simply "< 0".
    return (a < 0) != (b < 0)


def _median(x: np.ndarray) -> float:
    """Median via one selection pass; detector cost must stay O(N) and light."""
    n = x.size
    k = n // 2
    part = np.partition(x, k)
    if n % 2:
        return float(part[k])
    return float(part[:k].max() + part[k]) / 2.0


def disagreement(l1, l3) -> float:
    """Fraction of bit positions whose sign decisions differ (symmetric)."""
    a, b = _llrs(l1), _llrs(l3)
    _check_pair(a, b)
    return int(np.count_nonzero(_sign_diff(a, b))) / a.size


def detect_hard(l1, l3, cfg: DetectorConfig = DetectorConfig()) -> SlotDecision:
    """Trust iff d <= tau."""
    a, b = _llrs(l1), _llrs(l3)
    _check_pair(a, b)
    n_diff = int(np.count_nonzero(_sign_diff(a, b)))
    d = n_diff / a.size
    return SlotDecision(
        verdict="trust" if d <= cfg.tau else "rollback",
        d=d,
        confidence_fraction=None,
        disagreement_count=n_diff,
    )


def detect_confidence(l1, l3) -> SlotDecision:
    """Median-normalized confidence vote on the disagreeing bits.

    Each stream is normalized by its own median absolute value over all N
    entries.  An empty disagreement set trusts (consistent with d = 0); a
    stream whose median is zero is majority-erasure and loses every
    comparison.  The strict > 1/2 vote sends ties to rollback.
    """
    a, b = _llrs(l1), _llrs(l3)
    _check_pair(a, b)
    diff = _sign_diff(a, b)
    n_diff = int(np.count_nonzero(diff))
    d = n_diff / a.size
    if n_diff == 0:
        return SlotDecision("trust", d, None, 0)
    abs_a, abs_b = np.abs(a), np.abs(b)
    med1 = _median(abs_a)
    med3 = _median(abs_b)
    if med3 == 0.0:
        frac = 0.0
    elif med1 == 0.0:
        frac = 1.0
    else:
        # Compare med1-normalized |a| with med3-normalized |b| on S; the
        # cross-multiplied form avoids two divisions over the subset.
        wins = med1 * abs_b[diff] > med3 * abs_a[diff]
        frac = int(np.count_nonzero(wins)) / n_diff
    verdict = "trust" if frac > 0.5 else "rollback"
    return SlotDecision(verdict, d, frac, n_diff)


def detect_disjunctive(l1, l3, cfg: DetectorConfig = DetectorConfig()) -> SlotDecision:
    """Trust if either detector accepts; statistics of both retained."""
    hard = detect_hard(l1, l3, cfg)
    conf = detect_confidence(l1, l3)
    verdict = "trust" if (hard.trusted or conf.trusted) else "rollback"
    return SlotDecision(verdict, hard.d, conf.confidence_fraction, hard.disagreement_count)


def detect_conjunctive(l1, l3, cfg: DetectorConfig = DetectorConfig()) -> SlotDecision:
    """Trust only if both detectors accept; statistics of both retained."""
    hard = detect_hard(l1, l3, cfg)
    conf = detect_confidence(l1, l3)
    verdict = "trust" if (hard.trusted and conf.trusted) else "rollback"
    return SlotDecision(verdict, hard.d, conf.confidence_fraction, hard.disagreement_count)


def combine(
    l1: LlrVector,
    l3_or_failure: Union[LlrVector, HardFailure],
    decision_rule: Callable[[LlrVector, LlrVector], SlotDecision],
    out_stream: str = "R5",
) -> tuple[LlrVector, SlotDecision]:
    """Select exactly one input stream per slot; hard failures force rollback."""
    if isinstance(l3_or_failure, HardFailure):
        decision = SlotDecision(
            verdict="rollback",
            d=1.0,
            confidence_fraction=None,
            disagreement_count=len(l1),
            forced=True,
        )
        return LlrVector(l1.llrs.copy(), out_stream), decision
    decision = decision_rule(l1, l3_or_failure)
    chosen = l3_or_failure if decision.trusted else l1
    return LlrVector(chosen.llrs.copy(), out_stream), decision


def pcw_fraction(l3, true_bits, cfg: PcwConfig = PcwConfig()) -> float:
    """Fraction of confidently wrong bits: wrong sign and |LLR| > delta_max."""
    llrs = _llrs(l3)
    bits = np.asarray(true_bits).reshape(-1)
    if llrs.size != bits.size:
        raise ValueError(f"length mismatch: {llrs.size} LLRs vs {bits.size} bits")
    hard = (llrs < 0).astype(np.int64)
    wrong = hard != bits
    confident = np.abs(llrs) > cfg.delta_max
    return float(np.mean(wrong & confident))


def check_bounded_output(l1, l3, l_out) -> bool:
    """True iff the output equals one input elementwise (whole-vector select)."""
    a, b, out = _llrs(l1), _llrs(l3), _llrs(l_out)
    if a.size != out.size or b.size != out.size:
        return False
    return bool(np.array_equal(out, a) or np.array_equal(out, b))


def check_bounded_residual(
    l3,
    true_bits,
    cfg: PcwConfig = PcwConfig(),
    residual_trials: int = 1000,
    seed=0,
) -> bool:
    """Empirical witness that bounded residuals cannot beat p_cw.

    Tries residual_trials random vectors with ||r||_inf <= delta_max plus
    three deterministic extremes: +/- delta_max opposing the LLR signs, and
    the genie corrector pushing every bit toward its true value (the
    strongest bounded correction possible).  Returns True iff the BER of
    sign decisions on L3 + r stays >= p_cw for every trial.
    """
    if residual_trials < 1:
        raise ValueError("residual_trials must be >= 1")
    llrs = _llrs(l3)
    bits = np.asarray(true_bits).reshape(-1)
    if llrs.size != bits.size:
        raise ValueError("length mismatch")
    dmax = cfg.delta_max
    p_cw = pcw_fraction(llrs, bits, cfg)
    rng = np.random.default_rng(seed)

    def ber(residual: np.ndarray) -> float:
        corrected = llrs + residual
        hard = (corrected < 0).astype(np.int64)
        return float(np.mean(hard != bits))

    toward_true = dmax * (1.0 - 2.0 * bits)
    for r in (-dmax * _signs(llrs), dmax * _signs(llrs), toward_true):
        if ber(r) < p_cw:
            return False
    n_random = max(residual_trials - 3, 0)
    chunk = max(1, min(n_random, 10_000_000 // max(llrs.size, 1)))
    done = 0
    while done < n_random:
        take = min(chunk, n_random - done)
        rs = rng.uniform(-dmax, dmax, size=(take, llrs.size))
        hard = ((llrs[None, :] + rs) < 0).astype(np.int64)
        bers = np.mean(hard != bits[None, :], axis=1)
        if np.any(bers < p_cw):
            return False
        done += take
    return True


def forced_rollback_decision(n: int) -> SlotDecision:
    """Decision record for a hard-failure slot (no comparable LLR stream)."""
    return SlotDecision("rollback", 1.0, None, n, forced=True)
