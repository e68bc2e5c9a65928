"""Command-line interface.

Exit status: 0 on success, 1 on usage or parse errors, 2 on domain errors
(for example RATIO_ONE or REFUSED).
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys

from . import __version__
from .adele import from_fseries
from .digits import (
    DigitStream,
    PAdicRational,
    TailFlag,
    check_prime,
    digit_count,
    format_point,
    format_rational,
    parse_point,
    parse_rational,
    project,
)
from .errors import DomainError, ParseError
from .frames import fseries_frame, frame_report, standard_frame
from .fseries import FSeriesSpec, classify, closed_form, parse_spec, partial_sum
from .hydra import WORKERS_ENV, chi3_map, correspondence_search, map_from_json, numen_closed_form
from .measures import measure_table

COMMANDS = (
    "eval",
    "classify",
    "closed-form",
    "frame-report",
    "hydra-chi",
    "hydra-search",
    "measure-check",
    "adele",
    "digits",
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(obj, out) -> None:
    out.write(json.dumps(obj) + "\n")


def _point(text: str, p: int | None) -> PAdicRational:
    return parse_point(text, p)


def _stream(text: str, p: int) -> DigitStream:
    """``squares:j``: digit ``j`` at square positions, 0 elsewhere."""
    name, _, arg = text.partition(":")
    if name != "squares":
        raise ParseError(f"unknown stream {name!r}", 0)
    try:
        j = int(arg or "1")
    except ValueError:
        raise ParseError(f"bad digit {arg!r}", len(name) + 1) from None
    if not 0 < j < p:
        raise ParseError(f"digit {j} outside [1, {p})", len(name) + 1)

    def gen(n):
        r = int(n**0.5)
        while r * r > n:
            r -= 1
        while (r + 1) ** 2 <= n:
            r += 1
        return j if r * r == n else 0

    profile = {i: TailFlag.FINITELY_MANY for i in range(p)}
    profile[0] = TailFlag.INFINITELY_MANY
    profile[j] = TailFlag.INFINITELY_MANY
    return DigitStream(p, gen, profile, name=f"squares:{j}")


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {path}: {exc.msg}", exc.pos) from None


def _map(args):
    if args.map:
        return map_from_json(_load_json(args.map))
    return chi3_map()


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_eval(args, out):
    spec = parse_spec(args.series)
    z = _point(args.z, spec.p)
    _emit({"series": str(spec), "z": format_point(z), "N": args.N,
           "partial_sum": format_rational(partial_sum(spec, z, args.N))}, out)


def cmd_classify(args, out):
    spec = parse_spec(args.series)
    _emit(classify(spec, _point(args.z, spec.p)).to_json(), out)


def cmd_closed_form(args, out):
    spec = parse_spec(args.series)
    _emit(closed_form(spec, _point(args.z, spec.p)).to_json(), out)


def cmd_frame_report(args, out):
    spec = parse_spec(args.series)
    if args.frame == "standard":
        if args.q is None:
            raise UsageError("the standard frame needs --q")
        frame = standard_frame(spec.p, args.q)
    else:
        frame = fseries_frame(spec)
    points = [_point(z, spec.p) for z in args.z] or [PAdicRational(spec.p, (), (0,))]
    _emit(frame_report(frame, spec, points), out)


def cmd_hydra_chi(args, out):
    H = _map(args)
    if args.z is None:
        raise UsageError("hydra-chi needs --z")
    z = _point(args.z, H.p)
    row = {"z": format_point(z), "z_value": format_rational(z.to_rational())}
    row.update(numen_closed_form(H, z).to_json())
    _emit(row, out)


def cmd_hydra_search(args, out):
    H = _map(args)
    workers = args.workers
    result = correspondence_search(
        H, args.pre_max, args.per_max, args.verify_steps, start=args.resume, workers=workers
    )
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["z", "preperiod", "period", "chi", "kind", "cycle"])
    for hit in result.hits:
        writer.writerow(hit.csv_row())
    sys.stderr.write(
        f"# examined={result.examined} skipped_no_place={result.skipped_no_place} "
        f"skipped_ratio_one={result.skipped_ratio_one} cursor={result.cursor}\n"
    )


def cmd_measure_check(args, out):
    c = parse_rational(args.c)
    rows = measure_table(args.p, c, args.N, args.depth)
    worst = max(r["error"] for r in rows)
    if args.format == "json":
        _emit({
            "p": args.p, "c": format_rational(c), "N": args.N,
            "rows": [{"z": format_rational(r["z"].to_rational()), "closed": format_rational(r["closed"]),
                      "direct": repr(r["direct"].real), "error": repr(r["error"])} for r in rows],
            "max_error": repr(worst),
        }, out)
        return
    out.write(f"{'z':>12}  {'closed':>24}  {'direct':>26}  {'abs_error':>10}\n")
    for r in rows:
        z = format_rational(r["z"].to_rational())
        out.write(f"{z:>12}  {format_rational(r['closed']):>24}  {r['direct'].real:>26.17g}  {r['error']:>10.3e}\n")
    out.write(f"max_abs_error {worst:.3e}\n")


def cmd_adele(args, out):
    spec = parse_spec(args.series)
    if (args.z is None) == (args.stream is None):
        raise UsageError("adele needs exactly one of --z and --stream")
    z = _point(args.z, spec.p) if args.z is not None else _stream(args.stream, spec.p)
    _emit(from_fseries(spec, z, args.tail_policy).to_json(args.precision), out)


def cmd_digits(args, out):
    p = check_prime(args.p) if args.p is not None else None
    z = _point(args.z, p)
    row = {
        "text": format_point(z),
        "p": z.p,
        "pre": list(z.pre),
        "per": list(z.per),
        "value": format_rational(z.to_rational()),
        "natural": z.is_natural,
    }
    if args.n is not None:
        m = project(z, args.n)
        row["n"] = args.n
        row["project"] = str(m)
        row["counts"] = [digit_count(z.p, j, m) for j in range(z.p)]
    _emit(row, out)


HANDLERS = {
    "eval": cmd_eval,
    "classify": cmd_classify,
    "closed-form": cmd_closed_form,
    "frame-report": cmd_frame_report,
    "hydra-chi": cmd_hydra_chi,
    "hydra-search": cmd_hydra_search,
    "measure-check": cmd_measure_check,
    "adele": cmd_adele,
    "digits": cmd_digits,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pqadic", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pqadic {__version__}")
    parser.add_argument("--config", help="JSON file whose keys override the flags")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def series(sp, required=True):
        sp.add_argument("--series", required=required, help="e.g. p=2,d=2,q=1,3")

    sp = sub.add_parser("eval", help="partial sum of an F-series")
    series(sp)
    sp.add_argument("--z", required=True)
    sp.add_argument("--N", type=int, default=32)

    sp = sub.add_parser("classify", help="places where the series converges")
    series(sp)
    sp.add_argument("--z", required=True)

    sp = sub.add_parser("closed-form", help="exact A + B/(1-r)")
    series(sp)
    sp.add_argument("--z", required=True)

    sp = sub.add_parser("frame-report", help="frame places and values on sample points")
    series(sp)
    sp.add_argument("--frame", choices=("fseries", "standard"), default="fseries")
    sp.add_argument("--q", type=int, help="second prime of the standard frame")
    sp.add_argument("--z", action="append", default=[])

    sp = sub.add_parser("hydra-chi", help="numen closed form at a rational point")
    sp.add_argument("--map", help="map definition JSON (default: the 3x+1 numen)")
    sp.add_argument("--z")

    sp = sub.add_parser("hydra-search", help="integer numen values at rational points")
    sp.add_argument("--map", help="map definition JSON (default: the 3x+1 numen)")
    sp.add_argument("--pre-max", type=int, default=2)
    sp.add_argument("--per-max", type=int, default=4)
    sp.add_argument("--verify-steps", type=int, default=2**16)
    sp.add_argument("--resume", type=int, default=0, help="enumeration cursor to start from")
    sp.add_argument("--workers", type=int, default=None, help=f"default: ${WORKERS_ENV} or 1")

    sp = sub.add_parser("measure-check", help="character-sum identity table")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--c", required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--depth", type=int, default=None, help="residues mod p^depth (default N)")
    sp.add_argument("--format", choices=("plain", "json"), default="plain")

    sp = sub.add_parser("adele", help="adelic packaging of a series value")
    series(sp)
    sp.add_argument("--z")
    sp.add_argument("--stream", help="irrational input, e.g. squares:1")
    sp.add_argument("--tail-policy", choices=("zero", "infinity"), default="zero")
    sp.add_argument("--precision", type=int, default=12)

    sp = sub.add_parser("digits", help="digit data of a point")
    sp.add_argument("--z", required=True)
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", type=int)
    return parser


def _apply_config(args, path: str) -> None:
    data = _load_json(path)
    if not isinstance(data, dict):
        raise ParseError("config file must hold a JSON object", 0)
    for key, value in data.items():
        attr = key.replace("-", "_")
        if attr == "command" or not hasattr(args, attr):
            raise UsageError(f"config key {key!r} does not apply to {args.command}")
        setattr(args, attr, value)


_NEGATIVE = re.compile(r"^-\d")


def _glue_negatives(argv) -> list[str]:
    """Attach values like ``-2/3`` to the preceding flag so argparse keeps them."""
    out = []
    for tok in argv:
        if out and _NEGATIVE.match(tok) and out[-1].startswith("--") and "=" not in out[-1]:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(_glue_negatives(list(argv)))
        if not args.command:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        if args.config:
            _apply_config(args, args.config)
        HANDLERS[args.command](args, out)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return 1
    except ParseError as exc:
        err.write(f"error: {exc.code}: {exc}\n")
        return 1
    except DomainError as exc:
        err.write(f"error: {exc.code}: {exc}\n")
        return 2
    return 0


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
