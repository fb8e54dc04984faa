"""Command-line interface for figure rendering.

Exit codes: 0 success, 2 for unreadable specs, manifests or CSV inputs.
"""

from __future__ import annotations

import argparse
import sys

from .rendering import load_spec, render_all, render_figure


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rislink-figures",
        description="Render figures from simulator CSV tables",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    render = commands.add_parser("render", help="render one figure from a spec file")
    render.add_argument("--spec", required=True, help="path to a FigureSpec JSON file")
    everything = commands.add_parser(
        "render-all", help="render the default figure for every manifest output"
    )
    everything.add_argument("--manifest", required=True, help="path to manifest.json")
    everything.add_argument(
        "--out", help="output directory (default: the manifest's directory)"
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "render":
            written = render_figure(load_spec(args.spec))
        else:
            written = render_all(args.manifest, args.out)
        for path in written:
            print(path)
    except (OSError, ValueError) as exc:
        print(f"figure error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
