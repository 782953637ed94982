"""Executable forms of the two architectural guarantees.

Bounded output: the combiner forwards exactly one of its input vectors, so
no new LLR values can appear.  Bounded residual: once a bit is confidently
wrong (|LLR| beyond the safety budget), no additive correction within that
budget can fix it, so the bit error rate stays at or above the
confidently-wrong fraction p_cw.
"""

import numpy as np

from rollbackrx import props
from rollbackrx.arbiter import PcwConfig, check_bounded_residual, pcw_fraction

print("Randomized bounded-output suite (all detectors + ensembles):")
res = props.run_bounded_output_suite(n_slots=2000, seed=1)
print(f"  {res.checked} combiner outputs checked, failures: {res.failures}")

print("Negative control with a stream-mixing combiner:")
bad = props.run_bounded_output_suite(n_slots=200, seed=1, combiner=props.mixing_combiner)
print(f"  caught {bad.failures} violations (as it must)")

print("\nBounded-residual witness on a hand-built slot:")
cfg = PcwConfig()  # delta_max = ln 4
llrs = np.array([-2.0, -1.0, 0.3, 5.0, -5.0, 0.9])
bits = np.zeros(6, dtype=int)
p_cw = pcw_fraction(llrs, bits, cfg)
print(f"  LLRs {llrs.tolist()} against all-zero bits: p_cw = {p_cw:.3f}")
print(f"  (only the entries with LLR < -ln4 = -1.386 count)")
ok = check_bounded_residual(llrs, bits, cfg, residual_trials=2000, seed=3)
print(f"  2000 bounded residuals incl. the genie corrector: BER >= p_cw held: {ok}")

print("\nRandomized bounded-residual suite:")
res2 = props.run_bounded_residual_suite(n_slots=300, residual_trials=300, seed=2)
print(f"  {res2.checked} slots checked, failures: {res2.failures}")
