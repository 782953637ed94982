"""figures: render benchmark figures from a results directory."""

from __future__ import annotations

import argparse
import sys

from .render import FIGURES, render_figure
from .schema import SchemaError


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="figures",
        description="Render benchmark figures (SVG) from CSV outputs",
        epilog="figure ids: "
        + "; ".join(f"{i}={slug}" for i, (slug, _) in sorted(FIGURES.items())),
    )
    ap.add_argument("--in", dest="in_dir", required=True, metavar="DIR",
                    help="directory holding results.csv (and tau_sweep.csv, latency.csv)")
    ap.add_argument("--out", dest="out_dir", required=True, metavar="DIR",
                    help="output directory for SVG files")
    ap.add_argument("--fig", type=int, default=None, metavar="N",
                    help="render a single figure id (default: all with available inputs)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    ids = [args.fig] if args.fig is not None else sorted(FIGURES)
    explicit = args.fig is not None
    rendered, skipped = [], []
    for fig_id in ids:
        try:
            path = render_figure(fig_id, args.in_dir, args.out_dir)
            rendered.append(path)
            print(f"fig {fig_id}: wrote {path}")
        except FileNotFoundError as exc:
            if explicit:
                print(f"error: fig {fig_id}: missing input: {exc}", file=sys.stderr)
                return 1
            skipped.append((fig_id, f"missing input: {exc.filename}"))
        except SchemaError as exc:
            if explicit:
                print(f"error: fig {fig_id}: {exc}", file=sys.stderr)
                return 1
            skipped.append((fig_id, str(exc)))
    for fig_id, why in skipped:
        print(f"fig {fig_id}: skipped ({why})")
    if not rendered:
        print("error: nothing rendered", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
