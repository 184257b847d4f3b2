"""Run configurations, the check registry and the suite runner."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import adjoint, banach, mbasis, rigging
from .banach import SpaceSpec
from .errors import ConditioningError, ConfigError, RigError
from .report import VerificationReport, digest, timed

ALL_PS = [1.0, 1.5, 2.0, 3.0, math.inf]


@dataclass
class RunConfig:
    space: SpaceSpec
    seed_kind: str = "random"
    rng_seed: int | None = None
    suite: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(), "seed_kind": self.seed_kind,
                "rng_seed": self.rng_seed, "suite": self.suite}

    @property
    def digest(self) -> str:
        return digest(self.to_dict())


def _ps(values, path):
    try:
        return [banach.parse_exponent(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from None


def parse_config(raw: dict) -> RunConfig:
    """Validate a config mapping; errors name the offending field path."""
    if not isinstance(raw, dict):
        raise ConfigError("$", "config must be a JSON object")
    unknown = set(raw) - {"space", "seed_kind", "rng_seed", "suite"}
    if unknown:
        raise ConfigError(f"$.{sorted(unknown)[0]}", "unknown field")
    sp = raw.get("space", {"dim": 4, "p": 2})
    if not isinstance(sp, dict):
        raise ConfigError("space", "must be an object")
    try:
        space = SpaceSpec(sp.get("dim", 4), sp.get("p", 2), sp.get("weights"))
    except (TypeError, ValueError) as exc:
        raise ConfigError("space", str(exc)) from None
    kind = raw.get("seed_kind", "random")
    if kind not in rigging.SEED_KINDS:
        raise ConfigError("seed_kind", f"expected one of {rigging.SEED_KINDS}, got {kind!r}")
    rng_seed = raw.get("rng_seed")
    if rng_seed is not None and (not isinstance(rng_seed, int) or isinstance(rng_seed, bool)
                                 or not 0 <= rng_seed < 2**64):
        raise ConfigError("rng_seed", "must be a 64-bit unsigned integer")
    suite = raw.get("suite", [])
    if not isinstance(suite, list):
        raise ConfigError("suite", "must be a list")
    entries = []
    for i, entry in enumerate(suite):
        path = f"suite[{i}]"
        if isinstance(entry, str):
            entry = {"check": entry}
        if not isinstance(entry, dict) or "check" not in entry:
            raise ConfigError(path, "each entry needs a 'check' name")
        name = entry["check"]
        if name not in CHECKS:
            raise ConfigError(f"{path}.check", f"unknown check {name!r}")
        params = {k: v for k, v in entry.items() if k != "check"}
        _, defaults, randomized = CHECKS[name]
        for key, val in params.items():
            if key not in defaults:
                raise ConfigError(f"{path}.{key}", f"unknown parameter for {name}")
            if key in ("tol", "samples", "pairs", "operators", "n") and not (
                    isinstance(val, (int, float)) and val > 0):
                raise ConfigError(f"{path}.{key}", "must be positive")
            if key == "ps":
                _ps(val, f"{path}.{key}")
        if randomized and rng_seed is None:
            raise ConfigError("rng_seed", f"required by randomized check {name!r}")
        entries.append({"check": name, **params})
    return RunConfig(space, kind, rng_seed, entries)


@dataclass
class Context:
    config: RunConfig
    rng: np.random.Generator


def _summary(name, ok, measured, tol, provenance, witnesses, inputs, details, wall):
    return VerificationReport(name, ok, measured=measured, tolerance=tol, provenance=provenance,
                              witnesses={} if ok else (witnesses or {"note": "see details"}),
                              inputs_digest=digest(inputs), details=details, wall_time=wall)


def _cells(prm):
    return [(p, N, k) for p in _ps(prm["ps"], "ps") for N in prm["Ns"] for k in prm["kinds"]]


# --- checks ----------------------------------------------------------------------


def check_example31(ctx, prm):
    return [mbasis.example31()]


def check_holder(ctx, prm):
    rng, worst, witness = ctx.rng, -math.inf, None
    with timed() as clock:
        ps = _ps(prm["ps"], "ps")
        per = max(1, prm["samples"] // len(ps))
        for p in ps:
            for _ in range(per):
                n = int(rng.integers(1, 9))
                w = rng.uniform(0.1, 2.0, n) if prm["weighted"] else None
                sp = SpaceSpec(n, p, w)
                x, f = rng.standard_normal(n), rng.standard_normal(n)
                bound = banach.dual_norm(sp, f) * banach.norm(sp, x)
                excess = abs(banach.pairing(sp, f, x)) / bound - 1.0 if bound > 0 else -1.0
                if excess > worst:
                    worst, witness = excess, {"p": banach.format_exponent(p), "x": x, "f": f}
    ok = worst <= prm["tol"]
    return [_summary("holder", ok, {"max_excess": worst, "samples": per * len(ps)}, prm["tol"],
                     {"max_excess": "trivial"}, witness, prm, {}, clock[0])]


def check_duality_map(ctx, prm):
    rng, worst, witness = ctx.rng, 0.0, None
    with timed() as clock:
        for p in _ps(prm["ps"], "ps"):
            for _ in range(prm["samples"]):
                n = int(rng.integers(1, 9))
                sp = SpaceSpec(n, p)
                x = rng.standard_normal(n) * rng.lognormal(0, 2)
                nx = banach.norm(sp, x)
                f = banach.duality_map(sp, x)
                e = max(abs(banach.pairing(sp, f, x) - nx**2) / nx**2,
                        abs(banach.dual_norm(sp, f) - nx) / nx)
                if e > worst:
                    worst, witness = e, {"p": banach.format_exponent(p), "x": x}
    ok = worst <= prm["tol"]
    return [_summary("duality_map", ok, {"max_rel_error": worst}, prm["tol"],
                     {"max_rel_error": "derived"}, witness, prm, {}, clock[0])]


def check_build(ctx, prm):
    cfg = ctx.config
    with timed() as clock:
        seed = rigging.make_seed(cfg.space, cfg.seed_kind, ctx.rng)
        triple = rigging.build_triple(seed, prm["sequence"])
        spec_rep = rigging.t12_spectrum_report(triple)
    m = {"g2_cond": triple.g2.cond, "g1_cond": triple.g1.cond,
         "t12_trace": spec_rep.measured["trace"], "t12_min_eigenvalue": spec_rep.measured["min_eigenvalue"]}
    details = {"seed": seed.to_dict(), "g2": triple.g2.matrix, "g1": triple.g1.matrix,
               "t12": triple.t12, "sequence": prm["sequence"]}
    return [_summary("build", spec_rep.passed, m, spec_rep.tolerance, {"t12_min_eigenvalue": "paper"},
                     spec_rep.witnesses, {"config": cfg.to_dict(), **prm}, details, clock[0])]


def check_embedding(ctx, prm):
    cells = _cells(prm)
    per = max(1, math.ceil(prm["samples"] / len(cells)))
    worst, total, fails, witness = 0.0, 0, 0, None
    with timed() as clock:
        for p, N, kind in cells:
            seed = rigging.make_seed(SpaceSpec(N, p), kind, ctx.rng)
            rep = rigging.embedding_inequality_check(seed, rigging.build_h2(seed), per, ctx.rng, prm["tol"])
            total += per
            worst = max(worst, rep.measured["max_ratio"])
            if not rep.passed:
                fails += 1
                witness = witness or {"p": banach.format_exponent(p), "N": N, "kind": kind, **rep.witnesses}
    return [_summary("embedding_inequality", fails == 0,
                     {"max_ratio": worst, "samples": total, "cells": len(cells), "failures": fails},
                     prm["tol"], {"max_ratio": "paper"}, witness, prm, {}, clock[0])]


def check_lax(ctx, prm):
    worst, worst_lower, count, fails, witness = 0.0, 0.0, 0, 0, None
    max_asym = 0.0
    with timed() as clock:
        for p, N, kind in _cells(prm):
            space = SpaceSpec(N, p)
            g2 = rigging.build_h2(rigging.make_seed(space, kind, ctx.rng))
            for _ in range(prm["operators"]):
                A = rigging.random_g2_selfadjoint(g2, ctx.rng)
                rep = rigging.lax_check(space, g2, A, starts=prm["starts"], rng=ctx.rng, tol=prm["tol"])
                count += 1
                worst = max(worst, rep.measured["ratio"])
                max_asym = max(max_asym, rep.measured["g2_asymmetry"])
                lo = rep.measured["norm_b_lower"]
                worst_lower = max(worst_lower, rep.measured["norm_h2"] / lo if lo > 0 else 0.0)
                if not rep.passed:
                    fails += 1
                    witness = witness or {"p": banach.format_exponent(p), "N": N, "A": A}
    m = {"max_ratio": worst, "max_ratio_vs_lower": worst_lower, "operators": count,
         "failures": fails, "max_g2_asymmetry": max_asym}
    return [_summary("lax", fails == 0, m, prm["tol"], {"max_ratio": "paper"}, witness, prm,
                     {"note": "max_ratio uses the certified upper bound of ||A||_B"}, clock[0])]


def check_t12(ctx, prm):
    seqs = rigging.SEQUENCES if prm["sequence"] == "both" else [prm["sequence"]]
    out = []
    for seq in seqs:
        min_eig, worst, cells, fails, singular, witness = math.inf, 0.0, 0, 0, 0, None
        with timed() as clock:
            for p, N, kind in _cells(prm):
                seed = rigging.make_seed(SpaceSpec(N, p), kind, ctx.rng)
                triple = rigging.build_triple(seed, seq)
                cells += 1
                spectrum = rigging.t12_spectrum_report(triple)
                min_eig = min(min_eig, spectrum.measured["min_eigenvalue"])
                try:
                    rep = rigging.sqrt_identities_check(triple, prm["pairs"], ctx.rng, prm["tol"])
                except ConditioningError as exc:
                    singular += 1
                    fails += 1
                    witness = witness or {"p": banach.format_exponent(p), "N": N, "kind": kind,
                                          "error": str(exc)}
                    continue
                r = max(rep.measured["residual_h1"], rep.measured["residual_h2"])
                worst = max(worst, r)
                if not (rep.passed and spectrum.passed):
                    fails += 1
                    witness = witness or {"p": banach.format_exponent(p), "N": N, "kind": kind,
                                          **rep.witnesses, **spectrum.witnesses}
        ok = fails == 0 and min_eig > 0
        out.append(_summary(f"t12_{seq}", ok,
                            {"min_eigenvalue": min_eig, "max_residual": worst, "cells": cells,
                             "failures": fails, "singular": singular},
                            prm["tol"], {"min_eigenvalue": "paper", "max_residual": "paper"},
                            witness, {**prm, "sequence": seq}, {"sequence": seq}, clock[0]))
    return out


def check_embedding_constants(ctx, prm):
    cfg = ctx.config
    out = []
    for N in prm["Ns"] or [cfg.space.dim]:
        space = SpaceSpec(N, cfg.space.p, cfg.space.weights if N == cfg.space.dim else None)
        seed = rigging.make_seed(space, cfg.seed_kind, ctx.rng)
        g2 = rigging.build_h2(seed)
        g1 = rigging.build_h1(seed, g2, prm["sequence"])
        rep = rigging.embedding_constants(seed, g2, g1, rng=ctx.rng)
        rep.check = f"embedding_constants_N{N}"
        out.append(rep)
    return out


def check_auerbach(ctx, prm):
    worst, fails, witness, info_all = 0.0, 0, None, {}
    with timed() as clock:
        for p in _ps(prm["ps"], "ps"):
            for N in prm["Ns"]:
                system, info = mbasis.auerbach_basis(SpaceSpec(N, p), ctx.rng, starts=prm["starts"])
                dev = float(np.max(np.abs(mbasis.norm_products(system).products - 1.0)))
                resid = system.biorthogonality_residual()
                worst = max(worst, dev)
                info_all[f"p={banach.format_exponent(p)},N={N}"] = {"det": info["det"], "dev": dev}
                if dev > prm["tol"] or resid > mbasis.BIORTHO_TOL or info["warning"]:
                    fails += 1
                    witness = witness or {"p": banach.format_exponent(p), "N": N, "xs": system.xs}
        had, _ = mbasis.auerbach_basis(SpaceSpec(2, math.inf), ctx.rng, starts=prm["starts"])
        had_prod = mbasis.norm_products(had).products
        had_ok = np.array_equal(had.xs, [[1.0, 1.0], [1.0, -1.0]]) and np.allclose(had_prod, 1.0, atol=prm["tol"])
    ok = fails == 0 and had_ok
    m = {"max_product_deviation": worst, "failures": fails,
         "hadamard_product_1": had_prod[0], "hadamard_product_2": had_prod[1],
         "hadamard_recovered": float(had_ok)}
    return [_summary("auerbach", ok, m, prm["tol"],
                     {"max_product_deviation": "derived", "hadamard_product_1": "derived"},
                     witness or {"hadamard_xs": had.xs}, prm, {"runs": info_all}, clock[0])]


def _orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def _random_minimal(space, rng):
    while True:
        xs = np.array([x / banach.norm(space, x) for x in rng.standard_normal((space.dim, space.dim))])
        if np.linalg.cond(xs) < 1e6:
            return xs


def check_thm31(ctx, prm):
    cfg, rng, reps = ctx.config, ctx.rng, []
    n = prm["dim"] or cfg.space.dim
    # Hilbert case: orthonormal systems in l^2 with H2 from the standard seed
    hil = SpaceSpec(n, 2.0)
    tri = rigging.build_triple(rigging.standard_seed(hil))
    worst_bi, worst_prod = 0.0, 0.0
    with timed() as clock:
        for xs in (np.eye(n), _orthogonal(rng, n).T):
            system, diag = mbasis.thm31_construct(mbasis.Thm31Config(hil, xs, tri, "projected"), rng=rng)
            worst_bi = max(worst_bi, diag["biorthogonality_residual"])
            worst_prod = max(worst_prod, float(np.max(np.abs(diag["products"] - 1.0))))
    ok = worst_bi <= mbasis.BIORTHO_TOL and worst_prod <= 1e-8
    reps.append(_summary("thm31_hilbert", ok, {"biorthogonality_residual": worst_bi,
                                              "max_product_deviation": worst_prod},
                         1e-8, {"max_product_deviation": "trivial"}, {"dim": n}, {"dim": n}, {},
                         clock[0]))
    # the R^2 example system
    sp2 = SpaceSpec(2, 2.0)
    xs = np.array([[1.0, 0.0], [1.0, 1.0]]) / np.array([[1.0], [math.sqrt(2.0)]])
    tri2 = rigging.build_triple(rigging.standard_seed(sp2))
    for mode in prm["modes"]:
        rep = mbasis.thm31_report(mbasis.Thm31Config(sp2, xs, tri2, mode), rng=rng, label=f"example31_{mode}")
        pr = [rep.measured["product_1"], rep.measured["product_2"]]
        lo = [rep.measured["least_product_1"], rep.measured["least_product_2"]]
        rep.measured["oracle_gap"] = float(max(abs(a - b) for a, b in zip(pr, lo)))
        reps.append(rep)
    # random minimal systems on the configured space
    space = cfg.space
    tri3 = rigging.build_triple(rigging.make_seed(space, cfg.seed_kind, rng))
    for mode in prm["modes"]:
        worst, prods = 0.0, []
        with timed() as clock:
            for _ in range(prm["systems"]):
                conf = mbasis.Thm31Config(space, _random_minimal(space, rng), tri3, mode)
                _, diag = mbasis.thm31_construct(conf, rng=rng)
                worst = max(worst, diag["biorthogonality_residual"])
                prods.extend(diag["products"])
        ok = mode == "literal" or worst <= mbasis.BIORTHO_TOL
        reps.append(_summary(f"thm31_random_{mode}", ok,
                             {"max_biorthogonality_residual": worst, "max_product": max(prods),
                              "min_product": min(prods)},
                             mbasis.BIORTHO_TOL, {"max_product": "measured"}, {"mode": mode},
                             {"config": cfg.to_dict(), **prm}, {"mode": mode}, clock[0]))
    return reps


def check_adjoint(ctx, prm):
    rng = ctx.rng
    grid = adjoint.build_grid(prm["n"])
    reps = [adjoint.laplacian_spectrum_check(grid)]
    with timed() as clock:
        m = {"min_margin_lp": math.inf, "min_margin_h2": math.inf, "max_selfadjoint_defect": 0.0,
             "max_solve_residual": 0.0, "min_singular_value": math.inf, "max_double_adjoint_error": 0.0}
        witness = None
        for p in _ps(prm["ps"], "ps"):
            for k in range(prm["operators"]):
                A = adjoint.random_operator(grid.n, rng)
                sub = int(rng.integers(2**63))
                for dual in adjoint.DUALITIES:
                    r = adjoint.check_remark21(grid, p, A, prm["samples"], sub, dual, prm["tol"])
                    m[f"min_margin_{dual}"] = min(m[f"min_margin_{dual}"], r.measured["accretivity_margin"])
                    if dual == prm["duality"] and not r.passed and witness is None:
                        witness = {"p": banach.format_exponent(p), "operator": k, **r.witnesses}
                m["max_selfadjoint_defect"] = max(m["max_selfadjoint_defect"], r.measured["selfadjoint_defect"])
                m["max_solve_residual"] = max(m["max_solve_residual"], r.measured["solve_residual"])
                m["min_singular_value"] = min(m["min_singular_value"], r.measured["smallest_singular_value"])
                A2 = adjoint.adjoint_star(grid, p, adjoint.adjoint_star(grid, p, A))
                m["max_double_adjoint_error"] = max(m["max_double_adjoint_error"],
                                                    float(np.linalg.norm(A2 - A) / np.linalg.norm(A)))
    tol = prm["tol"]
    accretive = m[f"min_margin_{prm['duality']}"] >= -tol
    ok = accretive and m["max_selfadjoint_defect"] <= tol and m["max_solve_residual"] <= tol \
        and m["max_double_adjoint_error"] <= tol
    if not ok and witness is None:
        witness = {"note": "double adjoint or defect bound exceeded"}
    reps.append(_summary("adjoint_lab", ok, m, tol,
                         {"min_margin_lp": "paper", "min_margin_h2": "derived",
                          "max_selfadjoint_defect": "paper", "max_solve_residual": "paper"},
                         witness, prm, {"duality": prm["duality"]}, clock[0]))
    return reps


def check_embedding_chain(ctx, prm):
    return [adjoint.embedding_chain_report(adjoint.build_grid(prm["n"]), prm["p"], prm["ns"],
                                           prm["samples"], rng=ctx.rng)]


# name -> (function, default parameters, uses randomness)
CHECKS = {
    "example31": (check_example31, {}, False),
    "holder": (check_holder, {"samples": 10000, "ps": ALL_PS, "weighted": True, "tol": 1e-12}, True),
    "duality_map": (check_duality_map, {"samples": 500, "ps": [1.5, 2.0, 3.0, 4.0], "tol": 1e-10}, True),
    "build": (check_build, {"sequence": "literal"}, True),
    "embedding": (check_embedding, {"samples": 10000, "ps": ALL_PS, "Ns": list(range(2, 17)),
                                    "kinds": list(rigging.SEED_KINDS), "tol": 1e-12}, True),
    "lax": (check_lax, {"operators": 100, "ps": ALL_PS, "Ns": list(range(2, 13)),
                        "kinds": ["random"], "starts": 2, "tol": 1e-8}, True),
    "t12": (check_t12, {"pairs": 1000, "ps": ALL_PS, "Ns": list(range(2, 17)),
                        "kinds": list(rigging.SEED_KINDS), "sequence": "both", "tol": 1e-8}, True),
    "embedding_constants": (check_embedding_constants, {"Ns": [], "sequence": "literal"}, True),
    "auerbach": (check_auerbach, {"ps": [1.0, 2.0, math.inf], "Ns": list(range(1, 7)),
                                  "starts": 4, "tol": 1e-6}, True),
    "thm31": (check_thm31, {"dim": 0, "systems": 10, "modes": list(mbasis.THM31_MODES)}, True),
    "adjoint": (check_adjoint, {"n": 64, "ps": [2.0, 3.0, 4.0], "operators": 20, "samples": 50,
                                "duality": "lp", "tol": 1e-9}, True),
    "embedding_chain": (check_embedding_chain, {"n": 64, "p": 4.0, "ns": [8, 16, 32, 64],
                                                        "samples": 1000}, True),
}

FULL_SUITE = list(CHECKS)


def _run_one(config: RunConfig, index: int, entry: dict, seq: np.random.SeedSequence):
    fn, defaults, _ = CHECKS[entry["check"]]
    prm = {**defaults, **{k: v for k, v in entry.items() if k != "check"}}
    ctx = Context(config, np.random.default_rng(seq))
    try:
        return fn(ctx, prm)
    except RigError as exc:
        return [VerificationReport(entry["check"], False, tolerance=0.0,
                                   witnesses={"error": f"{type(exc).__name__}: {exc}"},
                                   inputs_digest=digest(prm))]


def run_suite(config: RunConfig, threads: int | None = None) -> list[VerificationReport]:
    """Run every configured check; report order follows the config.

    Each check draws from its own stream spawned from ``rng_seed``, so output
    does not depend on scheduling. ``RIG_THREADS`` caps parallelism.
    """
    if threads is None:
        threads = int(os.environ.get("RIG_THREADS", "1") or 1)
    entries = config.suite
    if not entries:
        return []
    seqs = np.random.SeedSequence(config.rng_seed or 0).spawn(len(entries))
    jobs = [(config, i, e, s) for i, (e, s) in enumerate(zip(entries, seqs))]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            results = list(pool.map(lambda j: _run_one(*j), jobs))
    else:
        results = [_run_one(*j) for j in jobs]
    return [r for batch in results for r in batch]
