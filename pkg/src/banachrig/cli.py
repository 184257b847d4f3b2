"""``rig`` command line: build, verify, example31, mbasis, auerbach, adjoint, sweep.

Exit status: 0 when every check passes, 1 when some check fails, 2 for
usage, configuration or I/O errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import adjoint, banach, mbasis, rigging, suite
from .banach import SpaceSpec
from .errors import ConfigError, RigError
from .report import VerificationReport, digest, emit, timed

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _load_config(args, default_suite=None) -> suite.RunConfig:
    raw = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(args.config, f"cannot read config: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(args.config, f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("$", "config must be a JSON object")
    raw = dict(raw)
    if args.seed is not None:
        raw["rng_seed"] = args.seed
    if default_suite is not None:
        raw["suite"] = default_suite
    elif not raw.get("suite"):
        raw["suite"] = suite.FULL_SUITE
    raw.setdefault("rng_seed", 0)
    return suite.parse_config(raw)


def _finish(args, reports, config_digest="") -> int:
    text = emit(reports, args.format, args.out, config_digest, timing=args.timing)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    for r in reports:
        print(r.summary(), file=sys.stderr)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_suite(args, checks=None) -> int:
    cfg = _load_config(args, checks)
    return _finish(args, suite.run_suite(cfg), cfg.digest)


def cmd_example31(args) -> int:
    return _finish(args, [mbasis.example31()], digest({"example31": True}))


def cmd_auerbach(args) -> int:
    cfg = _load_config(args, [])
    space = cfg.space
    rng = np.random.default_rng(cfg.rng_seed)
    with timed() as clock:
        system, info = mbasis.auerbach_basis(space, rng, starts=args.starts)
        prods = mbasis.norm_products(system).products
        dev = float(np.max(np.abs(prods - 1.0)))
        ok = dev <= mbasis.AUERBACH_TOL and not info["warning"]
    measured = {f"product_{i}": v for i, v in enumerate(prods, start=1)}
    measured.update({"max_product_deviation": dev, "det": info["det"],
                     "biorthogonality_residual": system.biorthogonality_residual()})
    rep = VerificationReport("auerbach", ok, measured=measured, tolerance=mbasis.AUERBACH_TOL,
                             provenance={"max_product_deviation": "derived"},
                             witnesses={} if ok else {"xs": system.xs},
                             inputs_digest=digest(cfg.to_dict()),
                             details={"system": system.to_dict(), "sweeps": info["sweeps"]},
                             wall_time=clock[0])
    return _finish(args, [rep], cfg.digest)


def cmd_adjoint(args) -> int:
    grid = adjoint.build_grid(args.n)
    if args.matrix:
        try:
            A = adjoint.read_matrix_csv(args.matrix)
        except (OSError, ValueError) as exc:
            raise ConfigError(args.matrix, str(exc)) from None
        if A.shape[0] != grid.n:
            raise ConfigError(args.matrix, f"matrix is {A.shape[0]}x{A.shape[0]}, grid has n={grid.n}")
    else:
        A = adjoint.random_operator(grid.n, np.random.default_rng(args.seed or 0))
    reports = [adjoint.laplacian_spectrum_check(grid)]
    for dual in adjoint.DUALITIES:
        r = adjoint.check_remark21(grid, args.p, A, args.samples, args.seed or 0, dual)
        r.check = f"remark21_{dual}"
        reports.append(r)
    A2 = adjoint.adjoint_star(grid, args.p, adjoint.adjoint_star(grid, args.p, A))
    err = float(np.linalg.norm(A2 - A) / np.linalg.norm(A))
    reports.append(VerificationReport(
        "double_adjoint", err <= 1e-9, measured={"rel_error": err}, tolerance=1e-9,
        provenance={"rel_error": "derived"}, witnesses={} if err <= 1e-9 else {"rel_error": err},
        inputs_digest=digest({"n": grid.n, "A": A})))
    return _finish(args, reports, digest({"n": args.n, "p": str(args.p), "A": A}))


def _parse_range(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def cmd_sweep(args) -> int:
    cfg = _load_config(args, [])
    values = _parse_range(args.range)
    rng = np.random.default_rng(cfg.rng_seed)
    reports, rows = [], []
    if args.over == "N":
        header = ("N", "cond_G2", "trace_T12", "c_B_to_H2", "c_H1_to_B")
        for N in values:
            space = SpaceSpec(N, cfg.space.p)
            seed = rigging.make_seed(space, cfg.seed_kind, rng)
            triple = rigging.build_triple(seed, args.sequence)
            try:
                rep = rigging.embedding_constants(seed, triple.g2, triple.g1, rng=rng)
            except RigError as exc:
                rep = VerificationReport(f"embedding_constants_N{N}", False,
                                         witnesses={"error": str(exc)},
                                         inputs_digest=digest(seed.to_dict()))
                reports.append(rep)
                rows.append((N, triple.g2.cond, math.nan, math.nan, math.nan))
                continue
            rep.check = f"embedding_constants_N{N}"
            rep.measured["cond_g2"] = triple.g2.cond
            rep.measured["trace_t12"] = float(np.sum(triple.spectral()[0]))
            reports.append(rep)
            rows.append((N, triple.g2.cond, rep.measured["trace_t12"], rep.measured["c_B_to_H2"],
                         rep.measured["c_H1_to_B"]))
    else:
        p = cfg.space.p if 2.0 <= cfg.space.p < math.inf else 4.0
        header = ("n", "H01->Lp", "Lp->Lq", "Lq->H-1", "H01->H-1")
        for n in values:
            rep = adjoint.embedding_chain_report(adjoint.build_grid(n), p, ns=(), rng=rng)
            rep.check = f"embedding_chain_n{n}"
            reports.append(rep)
            m = rep.measured
            rows.append((n, m["h01_to_lp_upper"], m["lp_to_lq_upper"], m["lq_to_hm1_upper"],
                         m["h01_to_hm1_upper"]))
    print(" ".join(f"{h:>12}" for h in header), file=sys.stderr)
    for row in rows:
        print(" ".join(f"{v:>12.6g}" if isinstance(v, float) else f"{v:>12}" for v in row),
              file=sys.stderr)
    return _finish(args, reports, cfg.digest)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rig", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override rng_seed")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--timing", action="store_true", help="include wall times in JSON")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(name, help_, required=True):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("config", nargs=None if required else "?", help="JSON run configuration")
        return p

    with_config("build", "build the rigging for the configured space", required=False) \
        .set_defaults(func=lambda a: cmd_suite(a, ["build", "embedding_constants"]))
    with_config("verify", "run the configured suite (all checks when none listed)") \
        .set_defaults(func=cmd_suite)
    sub.add_parser("example31", parents=[common], help="the R^2 norm-product example") \
        .set_defaults(func=cmd_example31)
    with_config("mbasis", "M-basis construction diagnostics", required=False) \
        .set_defaults(func=lambda a: cmd_suite(a, ["thm31"]))
    p = with_config("auerbach", "Auerbach basis of the configured space", required=False)
    p.add_argument("--starts", type=int, default=8)
    p.set_defaults(func=cmd_auerbach)
    p = sub.add_parser("adjoint", parents=[common], help="discrete Laplacian adjoint checks")
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--p", type=banach.parse_exponent, default=2.0)
    p.add_argument("--matrix", default=None, help="CSV: n followed by n*n row-major entries")
    p.add_argument("--samples", type=int, default=200)
    p.set_defaults(func=cmd_adjoint)
    p = with_config("sweep", "N- or n-sweeps with trend tables", required=False)
    p.add_argument("--over", choices=("N", "n"), default="N")
    p.add_argument("--range", default="2:12", help="lo:hi or comma list")
    p.add_argument("--sequence", choices=rigging.SEQUENCES, default="literal")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
