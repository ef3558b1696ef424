"""Command line: ``bandit-plot curves|scan --csv FILE --out FILE.png [--agents a,b]``."""

from __future__ import annotations

import argparse
import sys

from .figures import FigureError, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bandit-plot", description=__doc__)
    sub = parser.add_subparsers(dest="kind", metavar="curves|scan")
    for kind, blurb in (
        ("curves", "mean cumulative regret vs round, with standard-error bands"),
        ("scan", "final regret vs axis value per agent"),
    ):
        p = sub.add_parser(kind, help=blurb)
        p.add_argument("--csv", required=True, help="input CSV from the simulator")
        p.add_argument("--out", required=True, help="output image path (.png)")
        p.add_argument("--agents", default="", help="comma-separated agent filter")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.kind:
        parser.print_usage(sys.stderr)
        return 1
    agents = tuple(a.strip() for a in args.agents.split(",") if a.strip())
    spec = FigureSpec(csv_path=args.csv, kind=args.kind, out_path=args.out, agents=agents)
    try:
        out = render(spec)
    except FigureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
