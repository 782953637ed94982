"""Coded BLER of the conventional receivers on the baseline channel.

Runs a reduced sweep of the baseline scenario with the perfect-CSI and
practical receivers and prints the BLER curves plus the interpolated 10%
operating SNRs.  The gap between R0 and R1 is the practical estimation
penalty of raw LS pilots with linear interpolation.
"""

from dataclasses import replace

from rollbackrx.bench import load_registry, run_operating_snr, run_scenario

scenarios, cfg = load_registry()
baseline = scenarios[0]
small = replace(
    cfg,
    slots_per_point=25,
    snr_db=(6.0, 8.0, 10.0, 12.0, 14.0, 16.0),
    receivers=("R0", "R1"),
    jobs=2,
)

run = run_scenario(baseline, small)
print(f"scenario: {baseline.name} ({baseline.channel_profile}, "
      f"{baseline.delay_spread_s * 1e9:.0f} ns, {baseline.doppler_hz:.0f} Hz)")
print("snr_db   R0 bler   R1 bler")
for snr, point in zip(small.snr_db, run.points):
    print(f"{snr:6.1f}   {point['R0'].bler:7.3f}   {point['R1'].bler:7.3f}")
for recv in ("R0", "R1"):
    print(f"{recv} operating SNR: {run_operating_snr(run, recv)} dB")
