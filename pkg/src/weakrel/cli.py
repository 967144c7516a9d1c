"""Command-line interface: sweep, fixtures, cv-study, pointer.

Exit code 0 iff the emitted report has failure count 0 and no errors
occurred; config errors exit 2, relation failures exit 1.  A JSON config
file can preload any flag (``--config``); explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError
from .harness import (
    POINTER_FIXTURES,
    ReportSet,
    SweepConfig,
    VALID_FORMATS,
    VALID_MODES,
    VALID_RELATIONS,
    emit_report,
    run_cv_study,
    run_fixtures,
    run_pointer_study,
    run_sweep,
)
from .version import __version__


def _parse_int_list(text: str) -> tuple[int, ...]:
    """Comma list with ranges: '2,4,6' or '2-8' or '2-4,7'."""
    out: list[int] = []
    for piece in text.split(","):
        piece = piece.strip()
        if not piece:
            continue
        if "-" in piece[1:]:
            lo, hi = piece.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(piece))
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list: {text!r}")
    return tuple(out)


def _parse_float_list(text: str) -> tuple[float, ...]:
    values = tuple(float(p) for p in text.split(",") if p.strip())
    if not values:
        raise argparse.ArgumentTypeError(f"empty float list: {text!r}")
    return values


def _parse_relations(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakrel",
        description="Numerical certification of weak-measurement uncertainty "
                    "and complementarity relations.")
    parser.add_argument("--version", action="version", version=f"weakrel {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file preloading any flag of this subcommand")
        p.add_argument("--format", dest="fmt", choices=VALID_FORMATS,
                       help="report format (default json)")
        p.add_argument("--out", help="report output path")

    sweep = sub.add_parser("sweep", help="randomized relation sweep")
    sweep.add_argument("--relations", type=_parse_relations,
                       help=f"comma list from {','.join(VALID_RELATIONS)}")
    sweep.add_argument("--dims", type=_parse_int_list, help="e.g. 2-8 or 2,4,8")
    sweep.add_argument("--trials", type=int, help="trials per dimension")
    sweep.add_argument("--seed", type=int, help="master seed")
    sweep.add_argument("--tolerance", type=float, help="relation slack tolerance")
    sweep.add_argument("--psibar-mode", choices=VALID_MODES, dest="psibar_mode")
    sweep.add_argument("--hbar", type=float)
    common(sweep)

    fixtures = sub.add_parser("fixtures", help="run every pinned fixture")
    common(fixtures)

    cv = sub.add_parser("cv-study", help="window-projector product study")
    cv.add_argument("--grid-points", type=int, dest="grid_points")
    cv.add_argument("--widths", type=_parse_float_list,
                    help="comma list of window widths, used for both domains")
    cv.add_argument("--state", help="CV test state, e.g. gaussian or gaussian:0.5")
    cv.add_argument("--hbar", type=float)
    common(cv)

    pointer = sub.add_parser("pointer", help="pointer-model convergence study")
    pointer.add_argument("--g-ladder", type=_parse_float_list, dest="g_ladder")
    pointer.add_argument("--meter-points", type=int, dest="meter_points")
    pointer.add_argument("--fixture", choices=POINTER_FIXTURES)
    pointer.add_argument("--hbar", type=float)
    common(pointer)
    return parser


def _apply_config_file(args: argparse.Namespace) -> None:
    """Fill unset flags from the JSON config file, if one was given."""
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config: cannot read {args.config!r}: {exc}") from exc
    if not isinstance(values, dict):
        raise ConfigError("config: top-level JSON value must be an object")
    for key, value in values.items():
        attr = key.replace("-", "_")
        if attr == "format":
            attr = "fmt"
        if not hasattr(args, attr):
            raise ConfigError(f"config: unknown field {key!r} for this subcommand")
        if getattr(args, attr) is None:
            if isinstance(value, list):
                value = tuple(value)
            setattr(args, attr, value)


def _picked(args: argparse.Namespace, names: tuple[str, ...]) -> dict:
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_file(args)
        if args.command == "sweep":
            config = SweepConfig(**_picked(args, (
                "relations", "dims", "trials", "seed", "tolerance",
                "psibar_mode", "hbar", "fmt", "out")))
            report_set = run_sweep(config)
        elif args.command == "fixtures":
            report_set = run_fixtures()
        elif args.command == "cv-study":
            kwargs = _picked(args, ("grid_points", "widths", "state", "hbar"))
            report_set = run_cv_study(**kwargs)
        else:
            kwargs = _picked(args, ("g_ladder", "meter_points", "fixture", "hbar"))
            report_set = run_pointer_study(**kwargs)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    _summarize(report_set)
    if args.out or (report_set.config and report_set.config.out):
        path = emit_report(report_set, fmt=getattr(args, "fmt", None) or None,
                           path=args.out)
        print(f"report written to {path}")
    return 0 if report_set.failure_count == 0 else 1


def _summarize(report_set: ReportSet) -> None:
    agg = report_set.aggregates
    print(f"{report_set.kind}: {agg['report_count']} reports, "
          f"{agg['failure_count']} failures, min slack {agg['min_slack']:.3e}, "
          f"tightness rate {agg['tightness_rate']:.3f}, "
          f"{report_set.wall_clock_seconds:.2f} s")


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
