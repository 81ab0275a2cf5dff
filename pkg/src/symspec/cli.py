"""Command line entry point: ``symspec <command> ...``.

Exit codes: 0 pass, 1 bound or residual failure, 2 usage error,
3 hypothesis not met.  Reports go to stdout as JSON unless ``--out`` is
given.  ``SYMSPEC_SEED`` fixes the random sampling.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bounds import affine_bound_report, cross_corollary_report, linear_bound_report
from .errors import (
    BackendMismatch,
    HypothesisNotMet,
    InvalidInput,
    SymSpecError,
    UnsupportedHypersurface,
    UnsupportedSpace,
)
from .hypersurface import build_hypersurface
from .spectral import harmonic_forms, rigidity_conditions, spectrum
from .symmetric_space import build_space
from .virtual_immersion import ImmersionContext, acs_sample, verify_fundamental

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_HYPOTHESIS = 0, 1, 2, 3


def _rng():
    seed = os.environ.get("SYMSPEC_SEED")
    return np.random.default_rng(int(seed) if seed not in (None, "") else None)


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _mesh(args):
    space = build_space(args.space)
    return space, build_hypersurface(space, args.surface, args.res)


def cmd_verify(args):
    space = build_space(args.space)
    rng = _rng()
    report = verify_fundamental(space, args.samples, args.fd_step, rng)
    acs = acs_sample(space, args.acs_samples, rng)
    out = report.to_dict()
    out["acs_max"] = acs
    out["passed"] = bool(report.passed and acs < 1e-10)
    _emit(json.dumps(out, sort_keys=True, indent=2), args.out)
    return EXIT_OK if out["passed"] else EXIT_FAIL


def cmd_spectrum(args):
    _, mesh = _mesh(args)
    rep = spectrum(mesh, k=args.k)
    _emit(rep.to_json(), args.out)
    if args.csv:
        _emit(rep.to_csv(), args.csv)
    agree = rep.sturm_index == rep.index and rep.sturm_nullity == rep.nullity
    return EXIT_OK if agree else EXIT_FAIL


def cmd_bound(args):
    space, mesh = _mesh(args)
    ctx = ImmersionContext(space)
    if args.affine:
        rep = affine_bound_report(space, mesh, ctx, mode=args.affine)
    elif args.cross:
        rep = cross_corollary_report(space, mesh, ctx)
    else:
        rep = linear_bound_report(space, mesh, ctx)
    _emit(rep.to_json(), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_rigidity(args):
    space, mesh = _mesh(args)
    basis = harmonic_forms(mesh)
    if not 0 <= args.form < basis.b1:
        raise SystemExit(f"--form must be in [0, {basis.b1})")
    res = rigidity_conditions(mesh, basis.sharp[args.form], ImmersionContext(space))
    res.update({"catalog_id": mesh.catalog_id, "form": args.form})
    _emit(json.dumps(res, sort_keys=True, indent=2), args.out)
    return EXIT_OK


def cmd_export(args):
    _, mesh = _mesh(args)
    _emit(mesh.to_csv() if args.format == "csv" else mesh.to_json(), args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="symspec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, surface=True):
        sp.add_argument("--space", required=True, help="space spec: JSON file or inline JSON")
        if surface:
            sp.add_argument("--surface", required=True, help="catalog hypersurface id")
            sp.add_argument("--res", type=int, nargs="+", default=None, help="grid resolution per axis")
        sp.add_argument("--out", default=None, help="write the report here instead of stdout")

    v = sub.add_parser("verify", help="check the structural identities on random samples")
    common(v, surface=False)
    v.add_argument("--samples", type=int, default=500)
    v.add_argument("--fd-step", type=float, default=1e-3)
    v.add_argument("--acs-samples", type=int, default=1000)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("spectrum", help="eigenvalues, index and nullity of -J")
    common(s)
    s.add_argument("--k", type=int, default=None, help="keep the lowest k eigenvalues")
    s.add_argument("--csv", default=None, help="also write eigenvalues as CSV (k,lambda)")
    s.set_defaults(func=cmd_spectrum)

    b = sub.add_parser("bound", help="index bound report")
    common(b)
    g = b.add_mutually_exclusive_group()
    g.add_argument("--affine", choices=["generic", "product"], default=None)
    g.add_argument("--cross", action="store_true", help="rank-one sphere corollary")
    b.set_defaults(func=cmd_bound)

    r = sub.add_parser("rigidity", help="rigidity residuals for one harmonic basis form")
    common(r)
    r.add_argument("--form", type=int, required=True)
    r.set_defaults(func=cmd_rigidity)

    e = sub.add_parser("export-mesh", help="dump mesh vertices, normals and curvatures")
    common(e)
    e.add_argument("--format", choices=["json", "csv"], default="json")
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except HypothesisNotMet as exc:
        _emit(json.dumps({"hypothesis_not_met": exc.hypothesis, "detail": str(exc)}, sort_keys=True), None)
        return EXIT_HYPOTHESIS
    except (InvalidInput, UnsupportedSpace, UnsupportedHypersurface, BackendMismatch, SystemExit) as exc:
        sys.stderr.write(f"symspec: {exc}\n")
        return EXIT_USAGE
    except SymSpecError as exc:
        sys.stderr.write(f"symspec: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
