"""Command-line figure rendering: one subcommand per figure id."""

import argparse
import sys

from .render import FIGURES, FigureSpec, SchemaError, render


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gcplots", description="Render figures from geocascade output files"
    )
    sub = parser.add_subparsers(dest="figure", required=True)
    for fig_id in FIGURES:
        p = sub.add_parser(fig_id)
        p.add_argument("--input", nargs="+", required=True, help="input file(s)")
        p.add_argument("--output", required=True, help="output image path")
        p.add_argument("--labels", nargs="+", help="one legend label per input")
        p.add_argument("--title")
        if fig_id == "fig6":
            p.add_argument(
                "--alpha-upper-json",
                required=True,
                help="threshold sidecar written by the sweep --lambdas run",
            )
        if fig_id == "snapshot":
            p.add_argument("--ra", type=float, required=True, help="attack radius")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    spec = FigureSpec(
        figure=args.figure,
        inputs=args.input,
        output=args.output,
        labels=args.labels or [],
        alpha_upper_json=getattr(args, "alpha_upper_json", None),
        attack_radius=getattr(args, "ra", None),
        title=args.title,
    )
    try:
        render(spec)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {spec.output}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
