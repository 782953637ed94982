"""Command-line front end for the benchmark.

Exit codes: 0 success, 1 property violation or partial scenario failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from dataclasses import replace
from pathlib import Path

from . import props
from .bench import (
    DEFAULT_TAUS,
    ParseError,
    SweepConfig,
    build_latency_components,
    detector_fraction,
    latency_bench,
    load_registry,
    run_operating_snr,
    run_scenario,
    tau_sweep,
    write_latency_table,
    write_results,
    write_tau_table,
)
from .grid import ConfigError

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", default=None,
                   help="scenario/sweep YAML (default: bundled registry)")
    p.add_argument("--out", metavar="DIR", default="results",
                   help="output directory for CSV and manifest files")
    p.add_argument("--seed", type=int, default=None, metavar="U64",
                   help="base seed overriding the config file")
    p.add_argument("--slots", type=int, default=None, metavar="N",
                   help="slots per SNR point")
    p.add_argument("--snr", default=None, metavar="LIST",
                   help="comma-separated SNR list in dB, e.g. -2,0,2")
    p.add_argument("--receivers", default=None, metavar="LIST",
                   help="comma-separated receiver subset, e.g. R0,R1,R5")
    p.add_argument("--tau", type=float, default=None, metavar="F",
                   help="hard-disagreement threshold")
    p.add_argument("--jobs", type=int, default=None, metavar="N",
                   help="parallel slot workers (output independent of N)")
    p.add_argument("--scenario", default=None, metavar="IDS",
                   help="comma-separated scenario ids (default: per command)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rollbackrx",
        description="Link-level detect-and-rollback receiver benchmark",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list-scenarios", help="print the scenario registry")
    p.add_argument("--config", metavar="PATH", default=None,
                   help="scenario/sweep YAML (default: bundled registry)")

    p = sub.add_parser("run", help="run scenarios and write results CSV + manifest")
    _add_common(p)

    p = sub.add_parser("tau-sweep", help="operating SNR of R5 across thresholds")
    _add_common(p)
    p.add_argument("--taus", default=None, metavar="LIST",
                   help="comma-separated thresholds (default 0.01,0.05,0.1,0.2,0.5)")

    p = sub.add_parser("pcw", help="confidently-wrong fraction versus SNR")
    _add_common(p)

    p = sub.add_parser("latency", help="per-component latency table")
    _add_common(p)
    p.add_argument("--reps", type=int, default=100, metavar="N",
                   help="timed repetitions per component")
    p.add_argument("--warmup", type=int, default=10, metavar="N",
                   help="discarded warmup repetitions")

    p = sub.add_parser("props", help="run the bounded-output and bounded-residual suites")
    p.add_argument("--slots", type=int, default=10_000, metavar="N",
                   help="randomized slots for the bounded-output suite")
    p.add_argument("--residual-slots", type=int, default=1000, metavar="N",
                   help="slots for the bounded-residual suite")
    p.add_argument("--trials", type=int, default=1000, metavar="N",
                   help="residual draws per slot")
    p.add_argument("--seed", type=int, default=0, metavar="U64",
                   help="suite seed")
    p.add_argument("--mutant", action="store_true",
                   help="negative control: run with a stream-mixing combiner")
    return ap


def _load(args) -> tuple[list, SweepConfig]:
    try:
        scenarios, cfg = load_registry(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    except (ConfigError, KeyError) as exc:
        print(f"error: bad config: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["base_seed"] = args.seed
    if getattr(args, "slots", None) is not None:
        overrides["slots_per_point"] = args.slots
    if getattr(args, "snr", None):
        overrides["snr_db"] = tuple(float(x) for x in args.snr.split(","))
    if getattr(args, "receivers", None):
        overrides["receivers"] = tuple(args.receivers.split(","))
    if getattr(args, "tau", None) is not None:
        overrides["tau"] = args.tau
    if getattr(args, "jobs", None) is not None:
        overrides["jobs"] = args.jobs
    try:
        cfg = replace(cfg, **overrides)
        # Re-run validation on the merged config.
        cfg = SweepConfig(**{f: getattr(cfg, f) for f in cfg.__dataclass_fields__})
    except ConfigError as exc:
        print(f"error: bad flags: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    return scenarios, cfg


def _select(scenarios, spec: str | None, default_ids=None):
    if spec is None:
        if default_ids is None:
            return scenarios
        wanted = list(default_ids)
    else:
        try:
            wanted = [int(x) for x in spec.split(",")]
        except ValueError:
            print(f"error: bad --scenario list: {spec!r}", file=sys.stderr)
            raise SystemExit(EXIT_CONFIG)
    by_id = {s.id: s for s in scenarios}
    missing = [i for i in wanted if i not in by_id]
    if missing:
        print(f"error: unknown scenario ids: {missing}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)
    return [by_id[i] for i in wanted]


def cmd_list_scenarios(args) -> int:
    try:
        scenarios, _ = load_registry(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_CONFIG
    from .bench.scenarios import surrogate_to_dict

    print(f"{'id':>3}  {'name':<16} {'axis':<13} {'channel':<7} "
          f"{'doppler':>8} {'delay':>8} {'mod':<6} {'dmrs':>4}  surrogate")
    for s in scenarios:
        mode = surrogate_to_dict(s.surrogate)["mode"]
        print(
            f"{s.id:>3}  {s.name:<16} {s.axis:<13} {s.channel_profile:<7} "
            f"{s.doppler_hz:>6.0f}Hz {s.delay_spread_s*1e9:>6.0f}ns "
            f"{s.modulation.name:<6} {s.dmrs_additional_positions:>4}  {mode}"
        )
    return EXIT_OK


def cmd_run(args) -> int:
    scenarios, cfg = _load(args)
    chosen = _select(scenarios, args.scenario)
    runs, failed = [], []
    for sc in chosen:
        try:
            runs.append(run_scenario(sc, cfg))
        except Exception as exc:  # noqa: BLE001 - per-scenario isolation
            traceback.print_exc()
            failed.append((sc.id, sc.name, str(exc)))
    if runs:
        csv_path, manifest_path = write_results(runs, args.out)
        print(f"wrote {csv_path} and {manifest_path}")
        print(f"{'scenario':<18} {'receiver':<6} {'operating SNR (dB)'}")
        for run in runs:
            for recv in run.cfg.receivers:
                op = run_operating_snr(run, recv)
                print(f"{run.scenario.name:<18} {recv:<6} {op}")
    for sid, name, err in failed:
        print(f"error: scenario {sid} ({name}) failed: {err}", file=sys.stderr)
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_tau_sweep(args) -> int:
    scenarios, cfg = _load(args)
    chosen = _select(scenarios, args.scenario, default_ids=(13, 10))
    taus = DEFAULT_TAUS
    if args.taus:
        taus = tuple(float(x) for x in args.taus.split(","))
    rows, _ = tau_sweep(chosen, cfg, taus=taus)
    path = write_tau_table(rows, args.out)
    print(f"wrote {path}")
    print(f"{'scenario':<18} {'tau':>6} {'receiver':<8} {'operating SNR (dB)'}")
    for r in rows:
        tau_s = f"{r.tau:.2f}" if r.tau is not None else "-"
        print(f"{r.scenario_name:<18} {tau_s:>6} {r.receiver:<8} {r.operating_snr}")
    return EXIT_OK


def cmd_pcw(args) -> int:
    scenarios, cfg = _load(args)
    chosen = _select(scenarios, args.scenario, default_ids=(13, 1))
    cfg = replace(cfg, receivers=("R1", "R3"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "pcw_curve.csv"
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["scenario_id", "scenario_name", "snr_db", "pcw"])
        for sc in chosen:
            run = run_scenario(sc, cfg)
            for snr_db, point in zip(cfg.snr_db, run.points):
                pcw = point["R3"].pcw
                writer.writerow([sc.id, sc.name, repr(float(snr_db)),
                                 "" if pcw is None else repr(pcw)])
                print(f"{sc.name:<18} {snr_db:>6.1f} dB  pcw={pcw}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_latency(args) -> int:
    scenarios, cfg = _load(args)
    chosen = _select(scenarios, args.scenario, default_ids=(1,))
    components = build_latency_components(chosen[0], cfg)
    stats = latency_bench(components, reps=args.reps, warmup=args.warmup)
    frac = detector_fraction(stats)
    path = write_latency_table(stats, args.out, frac)
    print(f"{'component':<18} {'mean':>8} {'median':>8} {'std':>8} {'min':>8} {'max':>8}  (ms)")
    for name, s in stats.items():
        print(f"{name:<18} {s['mean']:>8.3f} {s['median']:>8.3f} {s['std']:>8.3f} "
              f"{s['min']:>8.3f} {s['max']:>8.3f}")
    print(f"detector fraction of pipeline: {frac:.4f}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_props(args) -> int:
    combiner = props.mixing_combiner if args.mutant else None
    kwargs = {} if combiner is None else {"combiner": combiner}
    s1 = props.run_bounded_output_suite(n_slots=args.slots, seed=args.seed, **kwargs)
    print(f"bounded-output suite: checked={s1.checked} failures={s1.failures} "
          f"{'OK' if s1.ok else 'VIOLATION: ' + s1.detail}")
    s2 = props.run_bounded_residual_suite(
        n_slots=args.residual_slots, residual_trials=args.trials, seed=args.seed
    )
    print(f"bounded-residual suite: checked={s2.checked} failures={s2.failures} "
          f"{'OK' if s2.ok else 'VIOLATION: ' + s2.detail}")
    return EXIT_OK if (s1.ok and s2.ok) else EXIT_VIOLATION


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    handlers = {
        "list-scenarios": cmd_list_scenarios,
        "run": cmd_run,
        "tau-sweep": cmd_tau_sweep,
        "pcw": cmd_pcw,
        "latency": cmd_latency,
        "props": cmd_props,
    }
    try:
        return handlers[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # config-validation helpers exit with a code
        return int(exc.code) if exc.code is not None else EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
