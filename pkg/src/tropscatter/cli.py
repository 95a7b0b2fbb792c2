"""Command-line front end.

Subcommands::

    tropscatter walls     --scene S.scene.json --out D.diagram.json [--svg D.svg]
    tropscatter potential --scene S.scene.json --at "x,y" [--lines]
    tropscatter period    --scene S.scene.json --at "x,y" [--max-order M] [--collapse]
    tropscatter check     --scene S.scene.json [--samples N --seed S --max-order M]

Exit codes: 0 success, 1 usage error, 2 domain error (degenerate input,
point on a wall, failed check, unreadable document).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import __version__
from .checks import run_checks
from .errors import (
    DegenerateScene,
    MalformedDocument,
    PointOnWall,
    TraceThroughVertex,
    TropScatterError,
)
from .nilring import format_rational, parse_rational
from .period import collapsed_period, default_mmax, descendants, period
from .potential import enumerate_broken_lines, potential_at
from .render import RenderSpec, auto_viewport, render_svg
from .scatter import build_diagram, validate_generic
from .sceneio import descendants_csv, emit, parse
from .toric import Scene

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _point(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}")
    try:
        return tuple(parse_rational(p.strip()) for p in parts)
    except TropScatterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _scene(args) -> Scene:
    return parse(_read_text(args.scene), expect="scene")


def _witness(kind: str, **fields) -> str:
    return json.dumps({"error": kind, **fields}, sort_keys=True)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_walls(args) -> int:
    d = build_diagram(_scene(args))
    _write_text(args.out, emit(d))
    if args.svg:
        lines = ()
        extra = ()
        if args.lines_at is not None:
            lines = tuple(enumerate_broken_lines(d, args.lines_at))
            extra = (args.lines_at,)
        spec = RenderSpec(auto_viewport(d, extra), label_walls=args.labels, lines=lines)
        _write_text(args.svg, render_svg(d, spec))
    orders: dict = {}
    for w in d.walls:
        orders[w.order] = orders.get(w.order, 0) + 1
    summary = ", ".join(f"order {o}: {n}" for o, n in sorted(orders.items()))
    print(f"{len(d.walls)} walls ({summary or 'none'})")
    return EXIT_OK


def cmd_potential(args) -> int:
    d = build_diagram(_scene(args))
    sys.stdout.write(emit(potential_at(d, args.at, lines=args.lines)))
    return EXIT_OK


def cmd_period(args) -> int:
    scene = _scene(args)
    d = build_diagram(scene)
    mmax = args.max_order if args.max_order is not None else default_mmax(scene.k)
    if mmax < 2:
        raise UsageError("--max-order must be at least 2")
    series = period(potential_at(d, args.at).value, mmax)
    table = descendants(series, scene.k)
    if args.collapse:
        collapsed = collapsed_period(series, scene.k)
        per = collapsed.per_subset()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["m", "n", "|Delta|", "sum", "per_subset"])
        for (m, n) in sorted(collapsed.coeff):
            writer.writerow([m, n, m + n, format_rational(collapsed.coeff[(m, n)]), format_rational(per[(m, n)])])
        sys.stdout.write(buf.getvalue())
    elif args.descendants:
        sys.stdout.write(emit(table))
    else:
        sys.stdout.write(emit(series))
    if args.csv:
        _write_text(args.csv, descendants_csv(table))
    return EXIT_OK


def cmd_check(args) -> int:
    if args.diagram is not None:
        d = parse(_read_text(args.diagram), expect="diagram")
        validate_generic(d.scene, d)
    elif args.scene is not None:
        d = build_diagram(_scene(args))
    else:
        raise UsageError("check needs --scene or --diagram")
    witness = run_checks(d, samples=args.samples, seed=args.seed, mmax=args.max_order)
    if witness is not None:
        print(_witness("check_failed", **witness), file=sys.stderr)
        return EXIT_DOMAIN
    print(f"ok: {len(d.walls)} walls, {len(d.joints)} joints consistent")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tropscatter", description="Tropical wall structures, potentials and periods.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("walls", help="build the wall structure of a scene")
    p.add_argument("--scene", required=True, help="scene document ('-' for stdin)")
    p.add_argument("--out", required=True, help="diagram document to write ('-' for stdout)")
    p.add_argument("--svg", help="also render the walls to this SVG file")
    p.add_argument("--labels", action="store_true", help="label walls with their functions in the SVG")
    p.add_argument("--lines-at", type=_point, metavar="X,Y", help="draw the broken lines ending at this point")
    p.set_defaults(func=cmd_walls)

    p = sub.add_parser("potential", help="evaluate the potential at a point")
    p.add_argument("--scene", required=True)
    p.add_argument("--at", required=True, type=_point, metavar="X,Y")
    p.add_argument("--lines", action="store_true", help="include the broken lines")
    p.set_defaults(func=cmd_potential)

    p = sub.add_parser("period", help="quantum period and descendant numbers")
    p.add_argument("--scene", required=True)
    p.add_argument("--at", required=True, type=_point, metavar="X,Y")
    p.add_argument("--max-order", type=int, help="largest power of 1/hbar (default 3(k+2))")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--collapse", action="store_true", help="print sums over |I| = n as CSV")
    mode.add_argument("--descendants", action="store_true", help="print the descendant table document")
    p.add_argument("--csv", help="write the descendant table as CSV to this file")
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("check", help="consistency checks of a wall structure")
    p.add_argument("--scene")
    p.add_argument("--diagram", help="check this diagram document instead ('-' for stdin)")
    p.add_argument("--samples", type=_positive, help="number of chamber samples (default: all chambers)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-order", type=int, help="period order for the chamber-invariance check")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"tropscatter: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateScene as exc:
        print(_witness("degenerate_scene", message=str(exc), witness=exc.witness), file=sys.stderr)
        return EXIT_DOMAIN
    except PointOnWall as exc:
        wall = None
        if exc.wall is not None:
            wall = {"base": [format_rational(c) for c in exc.wall.base], "dir": list(exc.wall.dir),
                    "fun": repr(exc.wall.fun)}
        print(_witness("point_on_wall", message=str(exc), wall=wall), file=sys.stderr)
        return EXIT_DOMAIN
    except TraceThroughVertex as exc:
        vertex = [format_rational(c) for c in exc.vertex] if exc.vertex is not None else None
        print(_witness("trace_through_vertex", message=str(exc), vertex=vertex), file=sys.stderr)
        return EXIT_DOMAIN
    except MalformedDocument as exc:
        print(_witness("malformed_document", message=str(exc), line=exc.line, column=exc.column),
              file=sys.stderr)
        return EXIT_DOMAIN
    except TropScatterError as exc:
        print(_witness(type(exc).__name__, message=str(exc)), file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
