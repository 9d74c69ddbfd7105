"""Command line entry point: render snapshot CSVs to figures."""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from . import __version__
from .reader import SnapshotParseError
from .render import STRIDE_DEFAULT, PlotJob, render

USAGE_ERROR = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print("swarmviz: error: %s" % message, file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="swarmviz", description=__doc__)
    parser.add_argument("--version", action="version", version="swarmviz %s" % __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    ren = sub.add_parser("render", help="render one snapshot (or an overlaid pair)")
    ren.add_argument("--in", dest="inpath", required=True, help="snapshot CSV")
    ren.add_argument("--overlay", default=None, help="second 1D snapshot drawn as a line")
    ren.add_argument("--field", default="rho",
                     help="rho, u1, l, rhou, rhol (1D); rho or l (2D)")
    ren.add_argument("--out", required=True, help="output image path")
    ren.add_argument("--stride", type=int, default=STRIDE_DEFAULT,
                     help="arrow subsampling stride (2D)")
    ren.add_argument("--vmin", type=float, default=None)
    ren.add_argument("--vmax", type=float, default=None)
    ren.add_argument("--dpi", type=int, default=100)
    ren.add_argument("--title", default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    inputs = (args.inpath,) if args.overlay is None else (args.inpath, args.overlay)
    try:
        job = PlotJob(
            inputs=inputs,
            out=args.out,
            field=args.field,
            stride=args.stride,
            vmin=args.vmin,
            vmax=args.vmax,
            dpi=args.dpi,
            title=args.title,
        )
        path = render(job)
    except (SnapshotParseError, ValueError, OSError) as exc:
        print("swarmviz: error: %s" % exc, file=sys.stderr)
        return USAGE_ERROR
    print("wrote %s" % path)
    return 0


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
