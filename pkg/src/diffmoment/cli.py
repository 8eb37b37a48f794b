"""Command-line front end.

Every subcommand is a thin sequential driver over the library; reports
and expressions are exchanged as JSON so stages can be scripted
independently.  Exit status: 0 pass, 1 fail, 2 degenerate, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import catalog
from .difflab import FieldSyntaxError, parse_field, random_polynomial_field
from .generators import SpecSyntaxError, enumerate_specs, expand, parse
from .momentlab import (FormatError, ZeroMassError, grid_metadata_path, grid_to_pointmass, random_image, read_grid,
                        read_image_csv)
from .translator import DERIVATIVES, MOMENTS, InvariantExpr, to_derivatives, to_moments
from .verifier import (check_linear_relation, conjecture_spec, screen_projective, verify_derivative_invariance,
                       verify_moment_invariance)

EXIT_INPUT_ERROR = 3
RANDOM_IMAGES = 5
RANDOM_IMAGE_POINTS = 30
RANDOM_FIELDS = 5
FIELD_DEGREE = 3


class InputError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _input_rng(seed: int) -> np.random.Generator:
    # Inputs draw from their own child stream so adding or removing
    # explicit inputs never shifts the transforms sampled for a seed.
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])


def _spec_expr(text: str, dim: int | None, to: str) -> InvariantExpr:
    spec = parse(text, dim)
    e = to_moments(expand(spec), spec)
    if e.meta.get("zero"):
        raise InputError(f"{text} translates to the zero expression")
    return to_derivatives(e) if to == DERIVATIVES else e


def _load_expr(args, default_to: str) -> InvariantExpr:
    if getattr(args, "spec", None):
        return _spec_expr(args.spec, args.dim, args.to or default_to)
    if not args.expr:
        raise InputError("one of --expr or --spec is required")
    if args.expr.startswith("catalog:"):
        try:
            e = catalog.get(args.expr[len("catalog:"):])
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    else:
        try:
            e = InvariantExpr.loads(Path(args.expr).read_text())
        except (OSError, ValueError, KeyError) as exc:
            raise InputError(f"cannot read expression {args.expr}: {exc}") from None
    if args.to == DERIVATIVES and e.form == MOMENTS:
        e = to_derivatives(e)
    elif args.to == MOMENTS and e.form == DERIVATIVES:
        raise InputError("derivative-form expressions cannot be turned back into moments")
    return e


def _images(args, e: InvariantExpr):
    if args.image:
        imgs = []
        for path in args.image:
            is_grid = grid_metadata_path(path).exists()
            imgs.append(grid_to_pointmass(read_grid(path)) if is_grid else read_image_csv(path))
        for img in imgs:
            if img.dim != e.dim:
                raise InputError(f"image dimension {img.dim} does not match expression dimension {e.dim}")
        return imgs
    rng = _input_rng(args.seed)
    return [random_image(rng, RANDOM_IMAGE_POINTS, e.dim) for _ in range(RANDOM_IMAGES)]


def _fields(args, dim: int):
    if args.field:
        flds = [parse_field(text, dim) for text in args.field]
        return flds
    rng = _input_rng(args.seed)
    return [random_polynomial_field(rng, dim, FIELD_DEGREE) for _ in range(RANDOM_FIELDS)]


def _report(report, args) -> int:
    _emit(report.table() if args.format == "text" else report.dumps(), args.out)
    return report.exit_code


# --------------------------------------------------------------------------

def cmd_generate(args) -> int:
    specs = enumerate_specs(args.dim, args.max_points, args.max_order, args.affine_only)
    if args.format == "text":
        _emit("".join(f"{s}\n" for s in specs), args.out)
    else:
        _emit(_dump({"dim": args.dim, "max_points": args.max_points, "max_order": args.max_order,
                     "affine_only": args.affine_only, "specs": [s.to_json() for s in specs]}), args.out)
    return 0


def cmd_expand(args) -> int:
    spec = parse(args.spec, args.dim)
    p = expand(spec)
    if args.format == "json":
        _emit(_dump({"spec": str(spec), "dim": p.dim, "polynomial": p.render()}), args.out)
    else:
        _emit(p.render() + "\n", args.out)
    return 0


def cmd_translate(args) -> int:
    if args.spec:
        e = _spec_expr(args.spec, args.dim, args.to)
    else:
        e = _load_expr(args, args.to)
    _emit(e.render() + "\n" if args.format == "text" else e.dumps(), args.out)
    return 0


def cmd_verify(args) -> int:
    e = _load_expr(args, MOMENTS)
    if args.group == "projective":
        return cmd_screen(args, e)
    if e.form == MOMENTS:
        report = verify_moment_invariance(e, _images(args, e), args.group, args.trials, args.seed,
                                          args.tol if args.tol is not None else 1e-9)
    else:
        report = verify_derivative_invariance(e, _fields(args, e.dim), args.group, args.trials, args.points,
                                              args.seed, args.tol if args.tol is not None else 1e-9, args.exact)
    return _report(report, args)


def cmd_screen(args, e: InvariantExpr | None = None) -> int:
    if e is None:
        if args.conjecture is not None:
            spec = conjecture_spec(args.conjecture)
            e = to_derivatives(to_moments(expand(spec), spec))
        else:
            e = _load_expr(args, DERIVATIVES)
    if e.form != DERIVATIVES:
        e = to_derivatives(e)
    report = screen_projective(e, _fields(args, e.dim), args.trials, args.points, args.seed,
                               args.tol if args.tol is not None else 1e-6)
    return _report(report, args)


def cmd_relation(args) -> int:
    report = check_linear_relation(args.order, args.dim or 2, args.trials, args.seed,
                                   tol=args.tol if args.tol is not None else 1e-9)
    return _report(report, args)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="diffmoment", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="json"):
        sp.add_argument("--dim", type=int, default=None, help="dimension (inferred from g arity when omitted)")
        sp.add_argument("--out", help="write output here instead of stdout")
        sp.add_argument("--format", choices=("json", "text"), default=fmt)

    def run_opts(sp, trials, tol_help):
        sp.add_argument("--expr", help="expression JSON file, or catalog:NAME")
        sp.add_argument("--spec", help="generating-function spec to translate first")
        sp.add_argument("--to", choices=(MOMENTS, DERIVATIVES), default=None)
        sp.add_argument("--field", action="append", help="polynomial field literal (repeatable)")
        sp.add_argument("--trials", type=int, default=trials)
        sp.add_argument("--points", type=int, default=10, help="evaluation points per field and transform")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--tol", type=float, default=None, help=tol_help)

    sp = sub.add_parser("generate", help="list primitive invariant specs")
    common(sp, "text")
    sp.set_defaults(dim=2)
    sp.add_argument("--max-points", type=int, default=3)
    sp.add_argument("--max-order", type=int, default=2)
    sp.add_argument("--affine-only", action="store_true", help="only products of g")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("expand", help="expand a spec into a coordinate polynomial")
    common(sp, "text")
    sp.add_argument("--spec", required=True)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("translate", help="translate a spec to moments or derivatives")
    common(sp)
    sp.add_argument("--spec")
    sp.add_argument("--expr")
    sp.add_argument("--to", choices=(MOMENTS, DERIVATIVES), default=MOMENTS)
    sp.set_defaults(func=cmd_translate)

    sp = sub.add_parser("verify", help="check invariance under a transform group")
    common(sp)
    run_opts(sp, 100, "relative tolerance (default 1e-9)")
    sp.add_argument("--group", choices=("rotation", "similarity", "affine", "projective"), default="affine")
    sp.add_argument("--image", action="append", help="point-mass CSV, or a density grid CSV with a .json sidecar (repeatable)")
    sp.add_argument("--exact", action="store_true", help="rational maps and points; equality must be exact")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("screen", help="screen a differential invariant under projective maps")
    common(sp)
    run_opts(sp, 50, "relative tolerance (default 1e-6)")
    sp.add_argument("--conjecture", type=int, metavar="M", help="screen g(1..M)*g(2..M+1) in M dimensions")
    sp.set_defaults(func=lambda a: cmd_screen(a))

    sp = sub.add_parser("relation", help="check the same-order linear relations")
    common(sp)
    sp.add_argument("--order", type=int, default=2)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=None)
    sp.set_defaults(func=cmd_relation)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "tol", None) is not None and args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT_ERROR
    try:
        return args.func(args)
    except (SpecSyntaxError, FieldSyntaxError, FormatError, ZeroMassError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
