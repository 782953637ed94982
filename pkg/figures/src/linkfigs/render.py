"""The seven benchmark figures, rendered as deterministic SVG.

Conventions: BLER axes are logarithmic, SNR axes linear in dB; receivers
that never reach 10% BLER are drawn as bars at sweep-max + 2 dB with a
"fail" annotation.
"""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .schema import (
    SchemaError,
    operating_snr_db,
    read_latency,
    read_results,
    read_tau_table,
)

plt.rcParams["svg.hashsalt"] = "linkfigs"
_SAVE_KW = {"metadata": {"Date": None}, "bbox_inches": "tight"}

RECEIVER_ORDER = ["R0", "R1", "R3", "R5", "R5c", "R5or", "R5and"]
_COLORS = {
    "R0": "tab:gray",
    "R1": "tab:blue",
    "R3": "tab:orange",
    "R5": "tab:green",
    "R5c": "tab:red",
    "R5or": "tab:purple",
    "R5and": "tab:brown",
}

FIGURES = {
    1: ("bler_grid", "BLER versus SNR, one panel per scenario"),
    2: ("latency_breakdown", "per-component latency bars"),
    3: ("operating_snr", "10% BLER operating SNR per receiver per scenario"),
    4: ("silent_failure", "BLER curves on the out-of-distribution DMRS scenario"),
    5: ("pcw_vs_snr", "confidently-wrong bit fraction versus SNR"),
    6: ("high_doppler", "BLER curves on the 500 Hz Doppler scenario"),
    7: ("tau_sensitivity", "R5 operating SNR versus the disagreement threshold"),
}


def _by_scenario(rows):
    out = defaultdict(lambda: defaultdict(list))
    names = {}
    for r in rows:
        out[r["scenario_id"]][r["receiver"]].append((r["snr_db"], r["bler"]))
        names[r["scenario_id"]] = r["scenario_name"]
    for sid in out:
        for recv in out[sid]:
            out[sid][recv].sort()
    return out, names


def _receivers_present(curves: dict) -> list[str]:
    present = [r for r in RECEIVER_ORDER if r in curves]
    extras = sorted(set(curves) - set(present))
    return present + extras


def _plot_bler_panel(ax, curves: dict, title: str):
    for recv in _receivers_present(curves):
        snr, bler = zip(*curves[recv])
        floor = 1e-4
        ax.semilogy(snr, [max(b, floor) for b in bler], marker="o", ms=3,
                    label=recv, color=_COLORS.get(recv))
    ax.axhline(0.1, color="k", lw=0.6, ls=":")
    ax.set_title(title, fontsize=9)
    ax.set_ylim(1e-3, 1.5)
    ax.grid(True, which="both", alpha=0.25)


def render_bler_grid(in_dir: Path, out_path: Path):
    rows = read_results(in_dir / "results.csv")
    grouped, names = _by_scenario(rows)
    sids = sorted(grouped)
    ncols = 4 if len(sids) > 4 else max(len(sids), 1)
    nrows = math.ceil(len(sids) / ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(3.2 * ncols, 2.6 * nrows), squeeze=False
    )
    for ax in axes.ravel()[len(sids):]:
        ax.axis("off")
    for ax, sid in zip(axes.ravel(), sids):
        _plot_bler_panel(ax, grouped[sid], f"{sid}: {names[sid]}")
    # One legend entry per receiver present anywhere in the CSV.
    seen: dict[str, object] = {}
    for ax in axes.ravel()[: len(sids)]:
        for handle, label in zip(*ax.get_legend_handles_labels()):
            seen.setdefault(label, handle)
    order = [r for r in RECEIVER_ORDER if r in seen] + sorted(
        set(seen) - set(RECEIVER_ORDER)
    )
    fig.legend([seen[r] for r in order], order, loc="lower center",
               ncol=len(order), fontsize=8)
    fig.supxlabel("SNR (dB)")
    fig.supylabel("BLER")
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def render_latency(in_dir: Path, out_path: Path):
    rows = [r for r in read_latency(in_dir / "latency.csv")
            if r["component"] != "detector_fraction_of_pipeline"]
    names = [r["component"] for r in rows]
    means = [r["mean_ms"] for r in rows]
    stds = [r["std_ms"] or 0.0 for r in rows]
    fig, ax = plt.subplots(figsize=(6, 0.5 * len(names) + 1.5))
    ax.barh(names, means, xerr=stds, color="tab:blue", alpha=0.8)
    for y, m in enumerate(means):
        ax.text(m, y, f" {m:.2f} ms", va="center", fontsize=8)
    ax.set_xlabel("per-slot latency (ms)")
    ax.invert_yaxis()
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def render_operating_snr(in_dir: Path, out_path: Path):
    rows = read_results(in_dir / "results.csv")
    grouped, names = _by_scenario(rows)
    slots = {r["scenario_id"]: r["slots"] for r in rows}
    sids = sorted(grouped)
    sweep_max = max(r["snr_db"] for r in rows)
    fail_bar = sweep_max + 2.0
    receivers = _receivers_present({recv: None for sid in sids for recv in grouped[sid]})
    width = 0.8 / len(receivers)
    fig, ax = plt.subplots(figsize=(max(8, 0.8 * len(sids)), 4.2))
    for j, recv in enumerate(receivers):
        xs, ys, fails = [], [], []
        for i, sid in enumerate(sids):
            if recv not in grouped[sid]:
                continue
            op = operating_snr_db(grouped[sid][recv], slots[sid])
            xs.append(i + (j - len(receivers) / 2 + 0.5) * width)
            if op is None:
                ys.append(fail_bar)
                fails.append(len(ys) - 1)
            else:
                ys.append(op)
        bars = ax.bar(xs, ys, width=width, label=recv, color=_COLORS.get(recv))
        for k in fails:
            ax.annotate(
                "fail",
                (xs[k], ys[k]),
                ha="center", va="bottom", fontsize=6, rotation=90,
            )
    ax.axhline(fail_bar, color="k", lw=0.6, ls=":")
    ax.set_xticks(range(len(sids)))
    ax.set_xticklabels([f"{sid}: {names[sid]}" for sid in sids],
                       rotation=45, ha="right", fontsize=7)
    ax.set_ylabel("operating SNR at 10% BLER (dB)")
    ax.legend(fontsize=8, ncol=len(receivers))
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def _render_single_scenario(in_dir: Path, out_path: Path, want_name_parts):
    rows = read_results(in_dir / "results.csv")
    grouped, names = _by_scenario(rows)
    match = [
        sid for sid in grouped
        if all(p.lower() in names[sid].lower() for p in want_name_parts)
    ]
    if not match:
        raise SchemaError(
            f"no scenario matching {' '.join(want_name_parts)!r} in results.csv"
        )
    sid = match[0]
    fig, ax = plt.subplots(figsize=(5, 3.6))
    _plot_bler_panel(ax, grouped[sid], f"{sid}: {names[sid]}")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("BLER")
    ax.legend(fontsize=8)
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def render_silent_failure(in_dir: Path, out_path: Path):
    _render_single_scenario(in_dir, out_path, ("addpos 2",))


def render_high_doppler(in_dir: Path, out_path: Path):
    _render_single_scenario(in_dir, out_path, ("500",))


def render_pcw(in_dir: Path, out_path: Path):
    rows = [r for r in read_results(in_dir / "results.csv")
            if r["receiver"] == "R3" and r["pcw"] is not None]
    if not rows:
        raise SchemaError("no R3 rows with pcw values in results.csv")
    by_sid = defaultdict(list)
    names = {}
    for r in rows:
        by_sid[r["scenario_id"]].append((r["snr_db"], r["pcw"]))
        names[r["scenario_id"]] = r["scenario_name"]
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for sid in sorted(by_sid):
        pts = sorted(by_sid[sid])
        ax.plot(*zip(*pts), marker="o", ms=3, label=f"{sid}: {names[sid]}")
    ax.axhline(0.07, color="k", lw=0.6, ls=":")
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("confidently-wrong bit fraction")
    ax.set_ylim(bottom=0)
    ax.legend(fontsize=8)
    ax.grid(alpha=0.25)
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


def render_tau_sensitivity(in_dir: Path, out_path: Path):
    rows = read_tau_table(in_dir / "tau_sweep.csv")
    sweep_top = max(
        (r["operating_snr_db"] for r in rows if r["operating_snr_db"] is not None),
        default=18.0,
    )
    fail_y = math.ceil(sweep_top) + 2.0
    sids = sorted({r["scenario_id"] for r in rows})
    fig, axes = plt.subplots(1, len(sids), figsize=(4.2 * len(sids), 3.4), squeeze=False)
    for ax, sid in zip(axes.ravel(), sids):
        sub = [r for r in rows if r["scenario_id"] == sid]
        name = sub[0]["scenario_name"]
        r5 = sorted(
            (r["tau"], fail_y if r["failed"] else r["operating_snr_db"], r["failed"])
            for r in sub if r["receiver"] == "R5" and r["tau"] is not None
        )
        taus = [t for t, _, _ in r5]
        vals = [v for _, v, _ in r5]
        ax.plot(taus, vals, marker="s", color="tab:green", label="R5")
        for t, v, failed in r5:
            if failed:
                ax.annotate("fail", (t, v), ha="center", va="bottom", fontsize=7)
        for recv, color in (("R1", "tab:blue"), ("R3", "tab:orange")):
            ref = [r for r in sub if r["receiver"] == recv]
            if ref:
                y = fail_y if ref[0]["failed"] else ref[0]["operating_snr_db"]
                ax.axhline(y, color=color, lw=0.8, ls="--", label=recv)
        ax.set_xscale("log")
        ax.set_xlabel("disagreement threshold")
        ax.set_title(name, fontsize=9)
        ax.grid(alpha=0.25)
        ax.legend(fontsize=8)
    axes.ravel()[0].set_ylabel("operating SNR at 10% BLER (dB)")
    fig.savefig(out_path, **_SAVE_KW)
    plt.close(fig)


_RENDERERS = {
    1: render_bler_grid,
    2: render_latency,
    3: render_operating_snr,
    4: render_silent_failure,
    5: render_pcw,
    6: render_high_doppler,
    7: render_tau_sensitivity,
}


def render_figure(fig_id: int, in_dir, out_dir) -> Path:
    if fig_id not in FIGURES:
        raise SchemaError(f"unknown figure id {fig_id}; valid: {sorted(FIGURES)}")
    in_dir, out_dir = Path(in_dir), Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    slug, _ = FIGURES[fig_id]
    out_path = out_dir / f"fig{fig_id}_{slug}.svg"
    _RENDERERS[fig_id](in_dir, out_path)
    return out_path
