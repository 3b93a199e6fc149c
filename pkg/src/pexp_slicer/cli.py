"""Command-line front end: ``pexp-slicer {check|slice|vcs|graph|oracle} FILE``.

FILE is a program file, or ``fixture:NAME`` for one of the bundled fixtures.
Exit codes: 0 success, 1 semantic failure (an invalid VC, or a slice that
fails verification), 2 usage, parse or domain errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .expectation import ExpectationRangeError, format_expectation
from .lang import Mode, ParseError, parse_expectation, parse_program, pretty_print
from .lang.exprs import UnboundVariableError, format_fraction
from .lang.syntax import MissingAnnotationError, loops
from .semantics import DomainEscapeError, NonConvergenceError, simulate, wlp_eval, wp_eval
from .slicegraph import build_slice_graph, export_dot, export_json, min_slice
from .slicing import greedy_slice, verify_slice
from .vcgen import EntailmentChecker, discharge, vcg

JSON_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    mode: Mode | None = None  # None: the mode declared in the file
    tolerance: Fraction = Fraction(1, 10**9)
    max_iter: int = 100_000
    skip_weight: Fraction = Fraction(1, 2)
    allow_trivial_loop_slices: bool = False
    seed: int = 0
    output_format: str = "text"
    greedy: bool = False
    post: str | None = None
    samples: int = 0
    color: bool = False
    transformer: str | None = None  # None: wp in total mode, wlp in partial mode

    def __post_init__(self):
        if self.tolerance <= 0:
            raise UsageError("--tolerance must be positive")
        if self.max_iter < 1:
            raise UsageError("--max-iter must be at least 1")
        if self.skip_weight <= 0:
            raise UsageError("--skip-weight must be positive")
        if self.samples < 0:
            raise UsageError("--samples must be non-negative")


@dataclass
class Problem:
    prog: object
    space: object
    pre: object
    post: object
    mode: Mode

    @property
    def total(self) -> bool:
        return self.mode is Mode.TOTAL


def read_source(name: str) -> str:
    if name.startswith("fixture:"):
        res = resources.files("pexp_slicer") / "fixtures" / f"{name[len('fixture:'):]}.pexp"
        if not res.is_file():
            raise UsageError(f"no bundled fixture {name!r}")
        return res.read_text()
    try:
        with open(name, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {name}: {exc.strerror}") from None


def load(name: str, config: RunConfig) -> Problem:
    r = parse_program(read_source(name))
    post = parse_expectation(config.post) if config.post else r.spec[1]
    mode = config.mode or r.mode
    if mode is Mode.TOTAL:
        for w in loops(r.prog):
            w.require_total()
    return Problem(r.prog, r.space, r.spec[0], post, mode)


def _emit(out, text: str):
    out = out or sys.stdout
    out.write(text if text.endswith("\n") else text + "\n")


def _dump(obj) -> str:
    return json.dumps(dict(version=JSON_VERSION, **obj), indent=2)


# ------------------------------------------------------------------ commands


def cmd_check(name: str, config: RunConfig, out=None) -> int:
    pb = load(name, config)
    report = discharge(vcg(pb.pre, pb.prog, pb.post, pb.total), pb.space)
    if config.output_format == "json":
        _emit(out, _dump(dict(mode=pb.mode.value, **report.to_json())))
    else:
        _emit(out, report.format(config.color))
    return EXIT_OK if report.valid else EXIT_FAIL


def cmd_slice(name: str, config: RunConfig, out=None, err=None) -> int:
    pb = load(name, config)
    check = EntailmentChecker(pb.space)
    if not discharge(vcg(pb.pre, pb.prog, pb.post, pb.total), pb.space, check).valid:
        (err or sys.stderr).write("warning: the program does not meet its specification; any portion is a slice\n")
    if config.greedy:
        res = greedy_slice(pb.prog, pb.pre, pb.post, pb.mode, pb.space, config.allow_trivial_loop_slices, check)
    else:
        sg = build_slice_graph(
            pb.prog, pb.pre, pb.post, pb.mode, pb.space, config.skip_weight, config.allow_trivial_loop_slices, check
        )
        res = min_slice(sg)
    ok = verify_slice(res.prog, pb.pre, pb.post, pb.prog, pb.mode, pb.space, check)
    if config.output_format == "json":
        payload = {
            "mode": pb.mode.value,
            "strategy": "greedy" if config.greedy else "graph",
            "slice": pretty_print(res.prog),
            "weight": None if res.weight is None else format_fraction(res.weight),
            "verified": ok,
            "removals": [r.to_json() for r in res.removals],
        }
        _emit(out, _dump(payload))
    else:
        lines = [pretty_print(res.prog), ""]
        if res.weight is not None:
            lines.append(f"weight: {format_fraction(res.weight)}")
        lines.append(f"verified: {'yes' if ok else 'NO'}")
        if res.removals:
            lines.append("")
            lines += [str(r) for r in res.removals]
        _emit(out, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_vcs(name: str, config: RunConfig, out=None) -> int:
    pb = load(name, config)
    vcs = vcg(pb.pre, pb.prog, pb.post, pb.total)
    if config.output_format == "text":
        _emit(out, "\n".join(str(v) for v in vcs))
    else:
        _emit(out, _dump({"mode": pb.mode.value, "vcs": vcs.to_json()}))
    return EXIT_OK


def cmd_graph(name: str, config: RunConfig, out=None) -> int:
    pb = load(name, config)
    sg = build_slice_graph(
        pb.prog, pb.pre, pb.post, pb.mode, pb.space, config.skip_weight, config.allow_trivial_loop_slices
    )
    _emit(out, export_json(sg) if config.output_format == "json" else export_dot(sg))
    return EXIT_OK


def cmd_oracle(name: str, config: RunConfig, out=None) -> int:
    """wp or wlp of the post, one row per state."""
    pb = load(name, config)
    kind = config.transformer or ("wp" if pb.total else "wlp")
    fn = wp_eval if kind == "wp" else wlp_eval
    table = fn(pb.prog, pb.post, pb.space, float(config.tolerance), config.max_iter)
    sampled = None
    if config.samples:
        sampled = [_sample_post(pb, s, config) for s in pb.space.enumerate()]
    if config.output_format == "json":
        rows = []
        for k, (s, v) in enumerate(table.items()):
            row = {"state": {n: format_fraction(x) for n, x in s.items()}, "value": _num(v)}
            if sampled is not None:
                row["sampled"] = format_fraction(sampled[k])
            rows.append(row)
        payload = {
            "transformer": kind,
            "post": format_expectation(pb.post),
            "exact": table.exact,
            "rows": rows,
        }
        _emit(out, _dump(payload))
        return EXIT_OK
    csv = table.to_csv().splitlines()
    if sampled is not None:
        csv = [csv[0] + ",sampled"] + [line + "," + format_fraction(q) for line, q in zip(csv[1:], sampled)]
    _emit(out, "\n".join(csv))
    return EXIT_OK


def _num(v):
    return format_fraction(v) if isinstance(v, Fraction) else float(v)


def _sample_post(pb: Problem, s, config: RunConfig) -> Fraction:
    from .expectation import evaluate

    counts = simulate(pb.prog, s, config.samples, config.seed)
    hit = sum(n * evaluate(pb.post, t, check_range=False) for t, n in counts.items())
    return Fraction(hit) / config.samples


COMMANDS = {"check": cmd_check, "slice": cmd_slice, "vcs": cmd_vcs, "graph": cmd_graph, "oracle": cmd_oracle}
FORMATS = {
    "check": ("text", "json"),
    "slice": ("text", "json"),
    "vcs": ("json", "text"),
    "graph": ("dot", "json"),
    "oracle": ("csv", "json"),
}


# ------------------------------------------------------------------ parsing


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pexp-slicer", description="Slice probabilistic programs against expectation specifications.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "check": "discharge the verification conditions",
        "slice": "print a slice and a removal report",
        "vcs": "dump the verification conditions",
        "graph": "export the slice graph",
        "oracle": "tabulate wp/wlp of the post-expectation",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("file", help="program file, or fixture:NAME")
        p.add_argument("--mode", choices=["partial", "total"], help="override the mode declared in the file")
        p.add_argument("--format", choices=FORMATS[name], default=FORMATS[name][0])
        p.add_argument("--post", help="override the post-expectation")
        p.add_argument("--tolerance", type=_fraction, default=Fraction(1, 10**9))
        p.add_argument("--max-iter", type=int, default=100_000)
        p.add_argument("--seed", type=int, default=0)
        if name in ("slice", "graph"):
            p.add_argument("--skip-weight", type=_fraction, default=Fraction(1, 2))
            p.add_argument("--allow-trivial-loop-slices", action="store_true")
        if name == "slice":
            p.add_argument("--greedy", action="store_true", help="greedy removal instead of the slice graph")
        if name == "oracle":
            p.add_argument("--samples", type=int, default=0, help="add a sampled estimate from N runs per state")
            p.add_argument("--transformer", choices=["wp", "wlp"], help="default: wp in total mode, wlp in partial mode")
    return parser


def _color(stream) -> bool:
    env = os.environ.get("PEXP_COLOR")
    if env is not None:
        return env == "1"
    return hasattr(stream, "isatty") and stream.isatty()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config = RunConfig(
            mode=Mode(args.mode) if args.mode else None,
            tolerance=args.tolerance,
            max_iter=args.max_iter,
            skip_weight=getattr(args, "skip_weight", Fraction(1, 2)),
            allow_trivial_loop_slices=getattr(args, "allow_trivial_loop_slices", False),
            seed=args.seed,
            output_format=args.format,
            greedy=getattr(args, "greedy", False),
            post=args.post,
            samples=getattr(args, "samples", 0),
            transformer=getattr(args, "transformer", None),
            color=_color(sys.stdout),
        )
        return COMMANDS[args.command](args.file, config)
    except (UsageError, ParseError, MissingAnnotationError, UnboundVariableError, ExpectationRangeError, DomainEscapeError) as exc:
        sys.stderr.write(f"pexp-slicer: error: {exc}\n")
        return EXIT_USAGE
    except NonConvergenceError as exc:
        sys.stderr.write(f"pexp-slicer: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
