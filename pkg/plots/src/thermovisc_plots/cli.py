"""plots render --run DIR --kind KIND --out FILE [--normalize]"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotJob, RenderResult, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots", description="render figures from thermovisc run artifacts"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one figure from a run directory")
    p.add_argument("--run", required=True, help="run directory (sweep root for sweep-grid)")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--out", required=True, help="output image file")
    p.add_argument("--normalize", action="store_true", help="scale peak values to 1.0")
    args = parser.parse_args(argv)

    try:
        result: RenderResult = render(
            PlotJob(run_dir=args.run, kind=args.kind, out_path=args.out,
                    normalize=args.normalize)
        )
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.path} ({result.panels} panel(s))")
    return 0


if __name__ == "__main__":
    sys.exit(main())
