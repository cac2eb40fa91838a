"""Command line entry point.

Usage:
    fluxbound study --config cfg.json [--out table.csv] [--format csv]
    fluxbound study --table1

Flags mirror the config keys and override the file; --table1 is a
preset sweeping flux orders 1-3 on the 20x20 and 40x40 meshes.
"""

import argparse
import sys

from .study import StudyConfig, emit_table, load_config, run_study


def _parse_p2_list(text):
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"--p2 expects comma-separated integers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fluxbound",
        description="Guaranteed energy-error bounds for nonsymmetric "
                    "diffusion via flux majorant minimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    study = sub.add_parser(
        "study", help="run an efficiency-index study and print a table")
    study.add_argument("--config", help="JSON config file")
    study.add_argument("--out", help="write the table here instead of stdout")
    study.add_argument("--format", choices=("csv", "markdown"), default="csv")
    study.add_argument("--table1", action="store_true",
                       help="preset: p1=1, flux orders 1-3, 20x20 and 40x40 meshes")
    study.add_argument("--nx", type=int, help="single mesh size n (n x n cells)")
    study.add_argument("--p1", type=int, help="scalar order, 1 or 2")
    study.add_argument("--p2", type=_parse_p2_list,
                       help="comma-separated flux order labels, e.g. 1,2,3")
    study.add_argument("--k1", type=int, help="x wave number of the exact solution")
    study.add_argument("--k2", type=int, help="y wave number of the exact solution")
    study.add_argument("--eps", type=float, help="relative stagnation tolerance")
    study.add_argument("--imax", type=int, help="maximum number of flux solves")
    return parser


def _config_from_args(args):
    if args.config:
        config = load_config(args.config)
    else:
        config = StudyConfig()
    if args.table1:
        config.mesh_sizes = [20, 40]
        config.p1 = 1
        config.p2 = [1, 2, 3]
        config.k1 = 1
        config.k2 = 1
    for key in ("p1", "p2", "k1", "k2", "eps", "imax"):
        value = getattr(args, key)
        if value is not None:
            setattr(config, key, value)
    if args.nx is not None:
        config.mesh_sizes = [args.nx]
    config.validate()
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    config = _config_from_args(args)
    rows = run_study(config)
    table = emit_table(rows, format=args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(table)
    else:
        sys.stdout.write(table)
    failed = [row for row in rows if row.failed]
    for row in failed:
        print(f"row (n={row.n}, p2={row.p2}) failed: {row.error}",
              file=sys.stderr)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
