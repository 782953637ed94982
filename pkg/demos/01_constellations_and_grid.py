"""Constellation tables and the slot layout at a glance.

Prints the Gray label -> point mapping for each modulation and shows how a
slot splits into DMRS pilots and data REs, including the bit budget that
the LDPC code is sized to.
"""

import numpy as np

from rollbackrx.grid import (
    DmrsConfig,
    ModulationScheme,
    SlotConfig,
    build_dmrs_pattern,
    constellation,
)

for scheme in ModulationScheme:
    pts = constellation(scheme)
    print(f"\n{scheme.name}  (Qm={scheme.bits_per_symbol}, mean |s|^2 = "
          f"{np.mean(np.abs(pts) ** 2):.6f})")
    qm = scheme.bits_per_symbol
    for label, p in list(enumerate(pts))[: 8 if qm > 2 else 4]:
        bits = format(label, f"0{qm}b")
        print(f"  {bits} -> {p.real:+.4f}{p.imag:+.4f}j")
    if pts.size > 8:
        print(f"  ... ({pts.size} points total)")

print("\nSlot geometry (26 PRB, 14 symbols):")
for addpos in (0, 1, 2):
    slot = SlotConfig(dmrs=DmrsConfig(additional_positions=addpos))
    pilots = build_dmrs_pattern(slot.dmrs, slot)
    print(
        f"  AddPos={addpos}: DMRS symbols {slot.dmrs.symbol_indices}, "
        f"{len(pilots)} pilot REs, {slot.n_data_re} data REs, "
        f"{slot.n_coded_bits} coded bits at {slot.modulation.name}"
    )
