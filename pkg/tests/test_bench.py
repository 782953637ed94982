import json
from dataclasses import replace

import numpy as np
import pytest

from rollbackrx.grid import ModulationScheme
from rollbackrx.bench import (
    OperatingSnr,
    ParseError,
    SimContext,
    SweepConfig,
    build_latency_components,
    detector_fraction,
    latency_bench,
    load_registry,
    operating_snr,
    read_results,
    rederive_bler_for_tau,
    run_scenario,
    silent_failure_monitor,
    simulate_slot,
    tau_sweep,
    write_results,
)

SCENARIOS, DEFAULT_CFG = load_registry()
BY_ID = {s.id: s for s in SCENARIOS}

# Small, fast sweep shape shared by the tests below (13 PRB halves the
# decode cost; the code still sizes exactly).
SMALL = replace(
    DEFAULT_CFG,
    n_prb=13,
    slots_per_point=4,
    snr_db=(6.0, 12.0),
    receivers=("R0", "R1", "R3", "R5", "R5c", "R5or", "R5and"),
)


@pytest.fixture(scope="module")
def baseline_run():
    return run_scenario(BY_ID[1], SMALL)


@pytest.fixture(scope="module")
def silent_run():
    return run_scenario(BY_ID[13], SMALL)


class TestRegistry:
    def test_sixteen_scenarios_match_table(self):
        assert [s.id for s in SCENARIOS] == list(range(1, 17))
        assert SCENARIOS[0].name == "Baseline"
        axes = {
            2: ("CDL-B",), 3: ("CDL-D",), 4: ("TDL-B",), 5: ("TDL-C",),
            6: ("TDL-D",), 7: ("TDL-E",),
        }
        for sid, (profile,) in axes.items():
            assert BY_ID[sid].channel_profile == profile
        assert BY_ID[8].doppler_hz == 50.0
        assert BY_ID[9].doppler_hz == 200.0
        assert BY_ID[10].doppler_hz == 500.0
        assert BY_ID[11].modulation is ModulationScheme.QPSK
        assert BY_ID[12].dmrs_additional_positions == 0
        assert BY_ID[13].dmrs_additional_positions == 2
        assert BY_ID[14].delay_spread_s == pytest.approx(30e-9)
        assert BY_ID[15].delay_spread_s == pytest.approx(100e-9)
        assert BY_ID[16].delay_spread_s == pytest.approx(1000e-9)
        # Non-varied axes stay at the baseline values.
        for s in SCENARIOS:
            if s.id not in (14, 15, 16):
                assert s.delay_spread_s == pytest.approx(300e-9)
            if s.id not in (8, 9, 10):
                assert s.doppler_hz == 5.0

    def test_surrogate_policy(self):
        from rollbackrx.surrogate import GenieBoost, Miscalibrated, SilentFailure

        assert isinstance(BY_ID[13].surrogate, SilentFailure)
        assert BY_ID[13].surrogate.p_wrong == 0.07
        assert isinstance(BY_ID[11].surrogate, Miscalibrated)
        for sid in (9, 10):
            assert isinstance(BY_ID[sid].surrogate, GenieBoost)
            assert BY_ID[sid].surrogate.alpha == 0.05
        assert isinstance(BY_ID[1].surrogate, GenieBoost)
        assert BY_ID[1].surrogate.alpha == 0.15

    def test_sweep_defaults(self):
        assert DEFAULT_CFG.snr_db == tuple(range(-2, 20, 2))
        assert DEFAULT_CFG.slots_per_point == 200
        assert DEFAULT_CFG.tau == 0.05

    def test_invalid_sweep(self):
        with pytest.raises(Exception):
            SweepConfig(snr_db=())
        with pytest.raises(Exception):
            SweepConfig(snr_db=(4.0, 2.0))
        with pytest.raises(Exception):
            SweepConfig(receivers=("R7",))


class TestOperatingSnr:
    def test_midpoint_interpolation(self):
        # log10(0.2) and log10(0.05) straddle -1 symmetrically -> 5.0 dB.
        op = operating_snr([(4.0, 0.2), (6.0, 0.05)])
        assert op.value_db == pytest.approx(5.0)
        assert not op.failed

    def test_exact_hit(self):
        op = operating_snr([(2.0, 0.5), (4.0, 0.1), (6.0, 0.01)])
        assert op.value_db == 4.0

    def test_no_crossing_fails(self):
        op = operating_snr([(0.0, 0.9), (2.0, 0.4), (4.0, 0.2)])
        assert op.failed and op.value_db is None

    def test_zero_bler_clamped(self):
        op = operating_snr([(0.0, 0.5), (2.0, 0.0)], slots=200)
        assert not op.failed
        assert 0.0 < op.value_db < 2.0

    def test_empty_curve(self):
        with pytest.raises(ValueError):
            operating_snr([])

    def test_monotone_under_improvement(self):
        base = [(0.0, 0.8), (2.0, 0.3), (4.0, 0.05), (6.0, 0.01)]
        better = [(s, b * 0.5) for s, b in base]
        a = operating_snr(base).value_db
        b = operating_snr(better).value_db
        assert b <= a

    def test_str(self):
        assert str(OperatingSnr(None, True)) == "fail"
        assert str(OperatingSnr(3.25, False)) == "3.25"


class TestRunScenario:
    def test_r0_clean_at_high_snr(self):
        cfg = replace(SMALL, snr_db=(18.0,), receivers=("R0",), slots_per_point=10)
        run = run_scenario(BY_ID[1], cfg)
        assert run.points[0]["R0"].bler == 0.0

    def test_determinism_same_seed(self):
        a = run_scenario(BY_ID[1], SMALL)
        b = run_scenario(BY_ID[1], SMALL)
        for pa, pb in zip(a.points, b.points):
            for recv in pa:
                assert pa[recv] == pb[recv]

    def test_jobs_do_not_change_results(self, baseline_run):
        par = run_scenario(BY_ID[1], replace(SMALL, jobs=2))
        for pa, pb in zip(baseline_run.points, par.points):
            for recv in pa:
                assert pa[recv] == pb[recv]

    def test_rollback_rate_consistency(self, baseline_run):
        for i, point in enumerate(baseline_run.points):
            recs = [r for r in baseline_run.records if r.snr_idx == i]
            expect = np.mean(
                [0.0 if (r.verdicts["hard"] and not r.forced) else 1.0 for r in recs]
            )
            assert point["R5"].rollback_rate == pytest.approx(expect)

    def test_combined_streams_select_whole_vectors(self, baseline_run):
        assert all(r.prop1_ok for r in baseline_run.records if r.prop1_ok is not None)

    def test_silent_scenario_wiring(self, silent_run):
        # Prop-2 witness ran on every 50th slot and never failed; the monitor
        # ran on every slot.
        checked = [r for r in silent_run.records if r.prop2_ok is not None]
        assert checked and all(r.prop2_ok for r in checked)
        assert all(r.monitor_pass is not None for r in silent_run.records)

    def test_tau_rederivation_matches_aggregation(self, baseline_run):
        curve = rederive_bler_for_tau(baseline_run, SMALL.tau)
        for (snr, bler), point in zip(curve, baseline_run.points):
            assert bler == pytest.approx(point["R5"].bler)

    def test_hard_failure_scenario_forced_rollback(self):
        from rollbackrx.bench.scenarios import Scenario
        from rollbackrx.surrogate import HardFailureMode

        sc = Scenario(
            id=99, name="64-QAM", channel_profile="TDL-C", doppler_hz=5.0,
            delay_spread_s=300e-9, modulation=ModulationScheme.QAM64,
            dmrs_additional_positions=1, surrogate=HardFailureMode(),
        )
        cfg = replace(SMALL, snr_db=(12.0,), slots_per_point=3)
        run = run_scenario(sc, cfg)
        p = run.points[0]
        assert p["R5"].forced_rollback_rate == 1.0
        assert p["R5"].rollback_rate == 1.0
        # The combined stream inherits R1 on every slot.
        assert p["R5"].bler == p["R1"].bler
        assert p["R3"].bler == 1.0
        assert all(r.prop1_ok for r in run.records)


class TestMonitor:
    def test_genie_passes_at_operating_point(self):
        ctx = SimContext(BY_ID[13], replace(SMALL, snr_db=(14.0,)))
        profile = ctx.magnitude_profile(14.0)
        from rollbackrx.grid import assemble_tx_grid
        from rollbackrx.channel import apply_channel, realize_channel
        from rollbackrx.surrogate import DEFAULT_GENIE_ALPHA, _genie_llrs

        ok = 0
        n = 20
        for j in range(n):
            ss = np.random.SeedSequence([7, j])
            kids = ss.spawn(4)
            rng = np.random.default_rng(kids[0])
            coded = rng.integers(0, 2, ctx.slot.n_coded_bits)
            tx, _ = assemble_tx_grid(coded, ctx.slot, kids[1])
            ch = realize_channel(
                ctx.profile, BY_ID[13].delay_spread_s, 5.0, ctx.slot, kids[2]
            )
            ch.noise_var = 10 ** (-1.4)
            rx = apply_channel(tx, ch, kids[3])
            llrs = _genie_llrs(rx, ch, DEFAULT_GENIE_ALPHA)
            ok += silent_failure_monitor(llrs, profile, ctx.slot.n_coded_bits)
        assert ok >= n - 1

    def test_length_and_finiteness_fail(self):
        ctx = SimContext(BY_ID[13], replace(SMALL, snr_db=(14.0,)))
        profile = ctx.magnitude_profile(14.0)
        n = ctx.slot.n_coded_bits
        assert not silent_failure_monitor(np.ones(n - 1), profile, n)
        bad = np.ones(n)
        bad[0] = np.nan
        assert not silent_failure_monitor(bad, profile, n)


class TestLatency:
    def test_protocol_and_fraction(self):
        comps = build_latency_components(BY_ID[1], replace(DEFAULT_CFG, n_prb=13))
        stats = latency_bench(comps, reps=5, warmup=2)
        for name, s in stats.items():
            assert set(s) == {"mean", "median", "std", "min", "max"}
            assert s["min"] <= s["median"] <= s["max"]
        frac = detector_fraction(stats)
        assert 0.0 < frac < 0.05

    def test_warmup_excluded_from_stats(self):
        calls = []

        def fn():
            calls.append(1)

        stats = latency_bench({"x": fn}, reps=7, warmup=3)
        assert len(calls) == 10  # warmup + timed
        assert stats["x"]["mean"] >= 0.0

    def test_reps_validation(self):
        with pytest.raises(ValueError):
            latency_bench({"x": lambda: None}, reps=0)


class TestResultsIo:
    def test_roundtrip(self, tmp_path, baseline_run):
        csv_path, manifest_path = write_results([baseline_run], tmp_path)
        rows = read_results(csv_path)
        assert len(rows) == sum(len(p) for p in baseline_run.points)
        first = rows[0]
        assert first["scenario_id"] == 1
        assert first["receiver"] == "R0"
        assert isinstance(first["bler"], float)
        manifest = json.loads(manifest_path.read_text())
        assert manifest["config"]["base_seed"] == SMALL.base_seed
        assert manifest["scenarios"][0]["name"] == "Baseline"

    def test_byte_identical_rewrites(self, tmp_path, baseline_run):
        p1, _ = write_results([baseline_run], tmp_path / "a")
        p2, _ = write_results([baseline_run], tmp_path / "b")
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("scenario_id,receiver\n1,R0\n")
        with pytest.raises(ParseError) as exc:
            read_results(bad)
        assert "scenario_name" in str(exc.value)

    def test_malformed_value_line_number(self, tmp_path, baseline_run):
        csv_path, _ = write_results([baseline_run], tmp_path)
        lines = csv_path.read_text().splitlines()
        parts = lines[1].split(",")
        parts[3] = "not-a-number"
        lines[1] = ",".join(parts)
        csv_path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ParseError) as exc:
            read_results(csv_path)
        assert exc.value.line == 2

    def test_empty_file(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(ParseError):
            read_results(empty)


class TestTauSweep:
    def test_reuses_cached_runs_and_structure(self, silent_run):
        rows, runs = tau_sweep(
            [BY_ID[13]], SMALL, taus=(0.01, 0.5), runs={13: silent_run}
        )
        assert 13 in runs
        receivers = [(r.receiver, r.tau) for r in rows]
        assert ("R1", None) in receivers and ("R3", None) in receivers
        assert ("R5", 0.01) in receivers and ("R5", 0.5) in receivers
        # tau = 1.0 would trust everywhere: R5 == R3 per slot.
        curve_r3 = [p["R3"].bler for p in silent_run.points]
        curve_tau1 = [b for _, b in rederive_bler_for_tau(silent_run, 1.0)]
        assert curve_tau1 == pytest.approx(curve_r3)
