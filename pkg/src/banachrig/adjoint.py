"""Discrete Dirichlet Laplacian on (0, 1) and the adjoint ``A* = L A' L^{-1}``.

Grid functions live on ``n`` interior nodes with spacing ``h = 1/(n+1)``;
discrete L^p carries quadrature weights ``h``. The H0^1 Gram matrix is
``h L`` and the H^-1 Gram matrix ``h L^{-1}``, with ``L = tridiag(-1, 2, -1)/h^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from . import banach
from .banach import SpaceSpec
from .report import VerificationReport, digest, timed

DUALITIES = ("lp", "h2")


@dataclass(frozen=True, eq=False)
class GridModel:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two interior nodes")

    @property
    def h(self) -> float:
        return 1.0 / (self.n + 1)

    @cached_property
    def L(self) -> np.ndarray:
        n, h = self.n, self.h
        return (2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)) / h**2

    @cached_property
    def _chol(self):
        return linalg.cho_factor(self.L)

    def solve(self, B) -> np.ndarray:
        """``L^{-1} B``."""
        return linalg.cho_solve(self._chol, B)

    @cached_property
    def L_inv(self) -> np.ndarray:
        return self.solve(np.eye(self.n))

    def space(self, p) -> SpaceSpec:
        return SpaceSpec(self.n, p, (self.h,) * self.n)

    def h01_gram(self) -> np.ndarray:
        return self.h * self.L

    def hm1_gram(self) -> np.ndarray:
        return self.h * self.L_inv

    def h01_inner(self, u, v) -> float:
        """Sum of forward-difference products: the discrete Dirichlet form."""
        du = np.diff(np.concatenate([[0.0], u, [0.0]]))
        dv = np.diff(np.concatenate([[0.0], v, [0.0]]))
        return float(np.sum(du * dv) / self.h)

    def hm1_inner(self, u, v) -> float:
        return float(self.h * np.asarray(u) @ self.solve(np.asarray(v)))

    def closed_form_eigenvalues(self) -> np.ndarray:
        k = np.arange(1, self.n + 1)
        return 2.0 / self.h**2 * (1.0 - np.cos(k * math.pi / (self.n + 1)))


def build_grid(n: int) -> GridModel:
    return GridModel(int(n))


def laplacian_spectrum_check(grid: GridModel, tol: float = 1e-10) -> VerificationReport:
    with timed() as clock:
        ev = linalg.eigvalsh(grid.L)
        ref = grid.closed_form_eigenvalues()
        rel = float(np.max(np.abs(ev - ref) / ref))
        ok = rel <= tol
    return VerificationReport(
        "laplacian_spectrum", ok,
        measured={"max_rel_error": rel, "lambda_min": ev[0], "lambda_max": ev[-1]},
        tolerance=tol, provenance={"max_rel_error": "derived"},
        witnesses={} if ok else {"eigenvalues": ev},
        inputs_digest=digest({"n": grid.n}), details={"n": grid.n}, wall_time=clock[0],
    )


def dual_transpose(grid: GridModel, A) -> np.ndarray:
    """``A'`` for the h-weighted pairing: ``W^{-1} A^T W``, which is ``A^T`` on a uniform grid."""
    w = np.full(grid.n, grid.h)
    return (np.asarray(A, dtype=float).T * w[None, :]) / w[:, None]


def adjoint_star(grid: GridModel, p, A) -> np.ndarray:
    """``A* = L A' L^{-1}`` acting on discrete L^p.

    The formula does not depend on p; the argument names the space A acts on.
    """
    banach.parse_exponent(p)
    A = np.asarray(A, dtype=float)
    if A.shape != (grid.n, grid.n):
        raise ValueError(f"operator of shape {A.shape} on a grid with {grid.n} nodes")
    At = dual_transpose(grid, A)
    # L At L^{-1} = L (L^{-1} At^T)^T since L is symmetric
    return grid.L @ grid.solve(At.T).T


def _duality(grid, space, x, kind):
    if kind == "lp":
        return banach.duality_map(space, x)
    # H^-1 induced functional, scaled to act as a duality for the L^p norm:
    # y -> ||x||_p^2 / ||x||_{-1}^2 (y, x)_{-1}
    Linv_x = grid.solve(x)
    hm1 = grid.h * float(x @ Linv_x)
    return banach.norm(space, x) ** 2 / hm1 * Linv_x


def check_remark21(grid: GridModel, p, A, samples: int = 200, seed: int = 0,
                   duality: str = "lp", tol: float = 1e-9) -> VerificationReport:
    """Accretivity, selfadjointness and bounded inverse of ``A* A``.

    (1) ``<A*A x, x*> >= -tol ||A x||_p^2`` on random x and on the extreme
        singular directions of A*A, with x* the chosen duality functional
        (``"lp"``: the L^p duality map; ``"h2"``: the H^-1 induced one);
    (2) ``||(A*A)* - A*A||_F <= tol ||A*A||_F``;
    (3) ``(I + A*A) x = b`` solved with relative residual ``<= tol``.
    """
    if duality not in DUALITIES:
        raise ValueError(f"unknown duality {duality!r}; expected one of {DUALITIES}")
    A = np.asarray(A, dtype=float)
    space = grid.space(p)
    rng = np.random.default_rng(seed)
    n = grid.n
    with timed() as clock:
        As = adjoint_star(grid, p, A)
        M = As @ A
        X = list(rng.standard_normal((samples, n)))
        _, _, Vt = np.linalg.svd(M)
        X += [Vt[0], Vt[-1]]
        margins = []
        for x in X:
            ax2 = banach.norm(space, A @ x) ** 2
            val = banach.pairing(space, _duality(grid, space, x, duality), M @ x)
            margins.append(val / ax2 if ax2 > 0 else 0.0)
        margins = np.array(margins)
        worst = int(np.argmin(margins))
        ok1 = bool(margins[worst] >= -tol)

        Ms = adjoint_star(grid, p, M)
        nm = np.linalg.norm(M)
        sa = float(np.linalg.norm(Ms - M) / nm) if nm > 0 else 0.0
        ok2 = sa <= tol

        K = np.eye(n) + M
        Bm = rng.standard_normal((n, samples))
        Xs = np.linalg.solve(K, Bm)
        res = float(np.max(np.linalg.norm(K @ Xs - Bm, axis=0) / np.linalg.norm(Bm, axis=0)))
        smin = float(linalg.svdvals(K)[-1])
        ok3 = res <= tol and smin > 0
    witnesses = {}
    if not ok1:
        witnesses["accretivity_x"] = X[worst]
    if not ok2:
        witnesses["selfadjoint_defect"] = sa
    if not ok3:
        witnesses["residual"] = res
    return VerificationReport(
        "remark21", ok1 and ok2 and ok3,
        measured={"accretivity_margin": margins[worst], "selfadjoint_defect": sa,
                  "solve_residual": res, "smallest_singular_value": smin,
                  "accretive": float(ok1), "selfadjoint": float(ok2), "invertible": float(ok3)},
        tolerance=tol,
        provenance={"accretivity_margin": "paper", "selfadjoint_defect": "paper",
                    "solve_residual": "paper", "smallest_singular_value": "measured"},
        witnesses=witnesses,
        inputs_digest=digest({"n": n, "p": banach.format_exponent(space.p), "A": A,
                              "samples": samples, "seed": seed, "duality": duality}),
        details={"n": n, "p": banach.format_exponent(space.p), "duality": duality},
        wall_time=clock[0],
    )


def embedding_chain(grid: GridModel, p, *, starts: int = 4, rng=None) -> dict:
    """Certified intervals of the embedding constants at one grid size.

    Keys: ``h01_to_lp``, ``lp_to_lq``, ``lq_to_hm1`` and the composite
    ``h01_to_hm1``; each maps to ``(lower, upper)``.
    """
    p = banach.parse_exponent(p)
    if not (2.0 <= p < math.inf):
        raise ValueError("embedding chain needs p in [2, inf)")
    q = p / (p - 1.0)
    rng = np.random.default_rng(0) if rng is None else rng
    n, h = grid.n, grid.h
    R1 = linalg.cholesky(grid.h01_gram(), lower=False)       # ||u||_{H0^1} = ||R1 u||
    Rm = linalg.cholesky(grid.hm1_gram(), lower=False)       # ||u||_{H^-1} = ||Rm u||
    R1inv = linalg.solve_triangular(R1, np.eye(n), lower=False)
    b1 = banach.mixed_norm_bounds(h ** (1.0 / p) * R1inv, 2.0, p, starts=starts, rng=rng)
    # ||u||_q <= |Omega_h|^{1/q - 1/p} ||u||_p, attained by constants
    mu = n * h
    holder = mu ** (1.0 / q - 1.0 / p)
    const = np.ones(n)
    sp, sq = grid.space(p), grid.space(q)
    attained = banach.norm(sq, const) / banach.norm(sp, const)
    b2 = banach.NormBounds(min(attained, holder), holder)
    b3 = banach.mixed_norm_bounds(Rm / h ** (1.0 / q), q, 2.0, starts=starts, rng=rng)
    lam_min = linalg.eigvalsh(grid.L)[0]
    c4 = 1.0 / lam_min
    return {"h01_to_lp": (b1.lower, b1.upper), "lp_to_lq": (b2.lower, b2.upper),
            "lq_to_hm1": (b3.lower, b3.upper), "h01_to_hm1": (c4, c4)}


def embedding_chain_report(grid: GridModel, p, ns=(8, 16, 32, 64), samples: int = 1000,
                           rng=None) -> VerificationReport:
    """Embedding constants at ``grid.n`` plus their trend over ``ns``.

    Also brute-checks the L^p -> L^q Hölder bound on random vectors.
    """
    p = banach.parse_exponent(p)
    rng = np.random.default_rng(0) if rng is None else rng
    with timed() as clock:
        chain = embedding_chain(grid, p, rng=rng)
        trend = {int(m): embedding_chain(build_grid(m), p, rng=rng) for m in ns}
        q = p / (p - 1.0)
        sp, sq = grid.space(p), grid.space(q)
        U = rng.standard_normal((samples, grid.n))
        ratio = max(banach.norm(sq, u) / banach.norm(sp, u) for u in U)
        ok = ratio <= 1.0 + 1e-10 and chain["lp_to_lq"][1] <= 1.0 + 1e-10 \
            and all(math.isfinite(v[1]) for v in chain.values())
    measured = {f"{k}_upper": v[1] for k, v in chain.items()}
    measured.update({f"{k}_lower": v[0] for k, v in chain.items()})
    measured["lp_to_lq_sampled"] = ratio
    return VerificationReport(
        "embedding_chain", ok, measured=measured, tolerance=1e-10,
        provenance={"lp_to_lq_upper": "derived", "lp_to_lq_sampled": "derived"},
        witnesses={} if ok else {"chain": chain},
        inputs_digest=digest({"n": grid.n, "p": banach.format_exponent(p), "ns": list(ns)}),
        details={"n": grid.n, "p": banach.format_exponent(p),
                 "trend": {str(m): {k: list(v) for k, v in c.items()} for m, c in trend.items()}},
        wall_time=clock[0],
    )


def read_matrix_csv(path) -> np.ndarray:
    """Matrix file: comma/newline separated; the first field is n, then n*n entries row-major."""
    with open(path) as fh:
        text = fh.read().replace("\n", ",")
    fields = [f.strip() for f in text.split(",") if f.strip()]
    if not fields:
        raise ValueError(f"{path}: empty matrix file")
    first = fields[0]
    if first.lower() == "n":  # literal header line "n" followed by the size
        fields = fields[1:]
    n = int(float(fields[0]))
    vals = [float(v) for v in fields[1:]]
    if len(vals) != n * n:
        raise ValueError(f"{path}: expected {n * n} entries after n={n}, found {len(vals)}")
    return np.array(vals).reshape(n, n)


def random_operator(n: int, rng) -> np.ndarray:
    return rng.standard_normal((n, n)) / math.sqrt(n)
