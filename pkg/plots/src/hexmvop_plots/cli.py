"""hexmvop-plot <kind> <in.csv> <out.png> [--title ...] [--type k]"""
import argparse
import sys

from .render import SchemaError, render


def main(argv=None):
    ap = argparse.ArgumentParser(prog="hexmvop-plot")
    ap.add_argument("kind", choices=("zeros", "density", "decay", "heatmap"))
    ap.add_argument("in_csv")
    ap.add_argument("out_png")
    ap.add_argument("--title", default=None)
    ap.add_argument("--type", type=int, default=0, dest="lozenge_type",
                    help="lozenge_type row selector for heatmaps")
    args = ap.parse_args(argv)
    try:
        render(args.kind, args.in_csv, args.out_png, title=args.title,
               lozenge_type=args.lozenge_type)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out_png)
    return 0


if __name__ == "__main__":
    sys.exit(main())
