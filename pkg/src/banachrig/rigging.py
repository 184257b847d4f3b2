"""Hilbert riggings H1 ⊂ B ⊂ H2 of a finite l^p model.

A seed is a spanning list of vectors ``x_n`` with duality functionals ``f_n``
and weights ``t_n = 2**-(n+1) / ||f_n||^2`` (zero-based ``n``). From it:

* ``(u, v)_2 = sum_n t_n f_n(u) f_n(v)``                    -> :func:`build_h2`
* ``T12 u = sum_n t_n (u, e_n)_2 e_n``                      -> :func:`build_t12`
* ``(u, v)_1 = sum_n t_n^-1 (u, e_n)_2 (e_n, v)_2``         -> :func:`build_h1`

where ``e_n`` is either the seed itself (``sequence="literal"``) or its
Gram-Schmidt orthonormalisation in H2 (``sequence="orthonormal"``). The
square-root identities linking H1 and H2 through T12 hold exactly only in the
orthonormal case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import linalg

from . import banach
from .banach import SpaceSpec
from .errors import ConditioningError, DegenerateSeedError, DimensionError, PreconditionError
from .report import VerificationReport, digest, timed

SEED_KINDS = ("standard", "random", "perturbed")
SEQUENCES = ("literal", "orthonormal")
GRAM_RCOND = 1e-14
SELFADJOINT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RiggingSeed:
    """Rows of ``xs`` are the seed vectors, rows of ``fs`` their duality functionals."""

    space: SpaceSpec
    xs: np.ndarray
    fs: np.ndarray
    ts: np.ndarray

    @classmethod
    def from_vectors(cls, space: SpaceSpec, xs) -> "RiggingSeed":
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if xs.shape[1] != space.dim:
            raise DimensionError(f"seed vectors of length {xs.shape[1]} in dimension {space.dim}")
        if xs.shape[0] < space.dim:
            raise DegenerateSeedError(f"{xs.shape[0]} vectors cannot span dimension {space.dim}")
        fs = np.array([banach.duality_map(space, x) for x in xs])
        dn = np.array([banach.dual_norm(space, f) for f in fs])
        if np.any(dn == 0):
            raise DegenerateSeedError("seed contains the zero vector")
        ts = 2.0 ** -(np.arange(len(xs)) + 1.0) / dn**2
        return cls(space, xs, fs, ts)

    def __len__(self):
        return len(self.xs)

    def extend(self, x) -> "RiggingSeed":
        return RiggingSeed.from_vectors(self.space, np.vstack([self.xs, x]))

    def to_dict(self) -> dict:
        return {"space": self.space.to_dict(), "xs": self.xs, "fs": self.fs, "ts": self.ts}


def _unit(space, x):
    return x / banach.norm(space, x)


def standard_seed(space: SpaceSpec) -> RiggingSeed:
    return RiggingSeed.from_vectors(space, [_unit(space, e) for e in np.eye(space.dim)])


def _spread_peaks(space, rng, base, delta):
    """Vectors for p = inf whose max-modulus coordinates are all distinct."""
    n = space.dim
    perm = rng.permutation(n)
    xs = []
    for k in range(n):
        x = base + delta * rng.uniform(-1.0, 0.0, n)
        x[perm[k]] = (1.0 + 0.5 * delta) * (np.abs(base[perm[k]]) or 1.0) * rng.choice([-1.0, 1.0])
        xs.append(_unit(space, x))
    return np.array(xs)


def random_seed(space: SpaceSpec, rng, attempts: int = 200) -> RiggingSeed:
    """Random unit vectors, redrawn until the duality functionals span the dual."""
    n = space.dim
    for _ in range(attempts):
        if math.isinf(space.p):
            xs = _spread_peaks(space, rng, np.zeros(n), 0.9)
        else:
            xs = np.array([_unit(space, rng.standard_normal(n)) for _ in range(n)])
        seed = RiggingSeed.from_vectors(space, xs)
        if _gram_ok(seed):
            return seed
    raise DegenerateSeedError(f"no nondegenerate random seed after {attempts} draws")


def perturbed_seed(space: SpaceSpec, rng, delta: float = 0.05, attempts: int = 200) -> RiggingSeed:
    """Near-repeats of one common vector: a deliberately ill-conditioned seed."""
    n = space.dim
    for _ in range(attempts):
        if math.isinf(space.p):
            xs = _spread_peaks(space, rng, np.ones(n), delta)
        elif space.p == 1.0:
            # a sign-carrying common vector would make every sgn pattern equal
            common = np.eye(n)[0]
            xs = np.array([_unit(space, common + delta * rng.standard_normal(n)) for _ in range(n)])
        else:
            common = np.ones(n)
            xs = np.array([_unit(space, common + delta * rng.standard_normal(n)) for _ in range(n)])
        seed = RiggingSeed.from_vectors(space, xs)
        if _gram_ok(seed):
            return seed
    raise DegenerateSeedError(f"no nondegenerate perturbed seed after {attempts} draws")


def make_seed(space: SpaceSpec, kind: str, rng=None) -> RiggingSeed:
    if kind == "standard":
        return standard_seed(space)
    rng = np.random.default_rng(0) if rng is None else rng
    if kind == "random":
        return random_seed(space, rng)
    if kind == "perturbed":
        return perturbed_seed(space, rng)
    raise ValueError(f"unknown seed kind {kind!r}; expected one of {SEED_KINDS}")


@dataclass(frozen=True, eq=False)
class GramForm:
    """Inner product ``(u, v) = u^T G v`` on coordinates."""

    matrix: np.ndarray

    def inner(self, u, v) -> float:
        return float(np.asarray(u) @ self.matrix @ np.asarray(v))

    def norm(self, u) -> float:
        return math.sqrt(max(self.inner(u, u), 0.0))

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return linalg.eigvalsh(self.matrix)

    @property
    def cond(self) -> float:
        ev = self.eigenvalues
        return float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf

    @cached_property
    def factor(self) -> np.ndarray:
        """Upper-triangular ``R`` with ``G = R^T R``."""
        try:
            return linalg.cholesky(self.matrix, lower=False)
        except linalg.LinAlgError:
            lam = float(self.eigenvalues[0])
            raise ConditioningError(f"Gram matrix is not numerically positive definite "
                                    f"(eigenvalue {lam:.3g})", lam) from None

    def whiten(self, A) -> np.ndarray:
        """``R A R^{-1}``: G-selfadjoint operators become symmetric matrices."""
        R = self.factor
        return linalg.solve_triangular(R, (R @ A).T, trans="T", lower=False).T

    def unwhiten(self, S) -> np.ndarray:
        """``R^{-1} S R``."""
        R = self.factor
        return linalg.solve_triangular(R, S @ R, lower=False)


def _gram_matrix(seed: RiggingSeed) -> np.ndarray:
    F = seed.fs * seed.space.w  # pairing vectors
    G = (F.T * seed.ts) @ F
    return 0.5 * (G + G.T)


def _gram_ok(seed: RiggingSeed) -> bool:
    ev = linalg.eigvalsh(_gram_matrix(seed))
    return ev[0] > GRAM_RCOND * ev[-1]


def build_h2(seed: RiggingSeed) -> GramForm:
    G = _gram_matrix(seed)
    ev = linalg.eigvalsh(G)
    if not ev[0] > GRAM_RCOND * ev[-1]:
        raise DegenerateSeedError(
            f"seed functionals do not span the dual (eigenvalues {ev[0]:.3g} .. {ev[-1]:.3g})")
    return GramForm(G)


def _whitened_orthonormal(seed: RiggingSeed, g2: GramForm) -> tuple[np.ndarray, np.ndarray]:
    """Modified Gram-Schmidt (with re-orthogonalisation) of the whitened seed, in order."""
    X = g2.factor @ seed.xs.T
    kept, ts = [], []
    scale = np.max(np.linalg.norm(X, axis=0))
    for k in range(X.shape[1]):
        v = X[:, k].copy()
        for _ in range(2):
            for q in kept:
                v -= (q @ v) * q
        nv = np.linalg.norm(v)
        if nv > 1e-10 * scale and len(kept) < seed.space.dim:
            kept.append(v / nv)
            ts.append(seed.ts[k])
    return np.array(kept).T, np.array(ts)


def h2_orthonormal(seed: RiggingSeed, g2: GramForm) -> tuple[np.ndarray, np.ndarray]:
    """In-order Gram-Schmidt of the seed in H2; returns (vectors as rows, their t_n)."""
    Q, ts = _whitened_orthonormal(seed, g2)
    return linalg.solve_triangular(g2.factor, Q, lower=False).T, ts


def _whitened_sequence(seed, g2, sequence):
    """Columns ``R e_n`` of the chosen sequence and its weights."""
    if sequence == "literal":
        return g2.factor @ seed.xs.T, seed.ts
    if sequence == "orthonormal":
        return _whitened_orthonormal(seed, g2)
    raise ValueError(f"unknown sequence {sequence!r}; expected one of {SEQUENCES}")


def build_t12(seed: RiggingSeed, g2: GramForm, sequence: str = "literal") -> np.ndarray:
    """Matrix of ``u -> sum_n t_n (u, e_n)_2 e_n``.

    Assembled as ``R^{-1} (sum t_n ê_n ê_n^T) R`` with ``ê_n = R e_n`` so that
    g2-selfadjointness holds up to a single similarity's rounding.
    """
    Et, ts = _whitened_sequence(seed, g2, sequence)
    return g2.unwhiten((Et * ts) @ Et.T)


def build_h1(seed: RiggingSeed, g2: GramForm, sequence: str = "literal") -> GramForm:
    """Gram matrix of ``(u, v)_1 = sum_n t_n^-1 (u, e_n)_2 (e_n, v)_2``."""
    Et, ts = _whitened_sequence(seed, g2, sequence)
    sv = linalg.svdvals(Et)
    if len(sv) < seed.space.dim or not sv[-1] > 1e-12 * sv[0]:
        raise DegenerateSeedError("H1 form is degenerate: the sequence does not span")
    R = g2.factor
    M = R.T @ Et
    G1 = (M / ts) @ M.T
    return GramForm(0.5 * (G1 + G1.T))


@dataclass(frozen=True, eq=False)
class RiggingTriple:
    seed: RiggingSeed
    g2: GramForm
    g1: GramForm
    t12: np.ndarray
    sequence: str = "literal"
    _spectral: dict = field(default_factory=dict, repr=False)

    @property
    def space(self) -> SpaceSpec:
        return self.seed.space

    def spectral(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenpairs of the whitened T12 (symmetric by construction)."""
        if "pair" not in self._spectral:
            Et, ts = _whitened_sequence(self.seed, self.g2, self.sequence)
            self._spectral["pair"] = linalg.eigh((Et * ts) @ Et.T)
        return self._spectral["pair"]

    def t12_power(self, a: float) -> np.ndarray:
        """The g2-selfadjoint power ``T12**a`` through the whitened spectrum."""
        lam, V = self.spectral()
        if lam[0] <= 0 or lam[0] < 1e-15 * lam[-1]:
            raise ConditioningError(f"T12 is numerically singular (eigenvalue {lam[0]:.3g})", lam[0])
        return self.g2.unwhiten((V * lam**a) @ V.T)


def build_triple(seed: RiggingSeed, sequence: str = "literal") -> RiggingTriple:
    g2 = build_h2(seed)
    return RiggingTriple(seed, g2, build_h1(seed, g2, sequence), build_t12(seed, g2, sequence), sequence)


def t12_spectrum_report(triple: RiggingTriple) -> VerificationReport:
    with timed() as clock:
        lam, _ = triple.spectral()
        trace_eig = float(np.sum(lam))
        trace_mat = float(np.trace(triple.t12))
        rel = abs(trace_eig - trace_mat) / abs(trace_eig)
        asym = _asymmetry(triple.g2, triple.t12)
        ok = lam[0] > 0 and rel <= 1e-10 and asym <= SELFADJOINT_TOL
    return VerificationReport(
        "t12_spectrum", ok,
        measured={"min_eigenvalue": lam[0], "max_eigenvalue": lam[-1], "trace": trace_eig,
                  "trace_matrix": trace_mat, "trace_rel_diff": rel, "g2_asymmetry": asym},
        tolerance=1e-10,
        provenance={"min_eigenvalue": "paper", "trace_rel_diff": "derived", "g2_asymmetry": "derived"},
        witnesses={} if ok else {"eigenvalues": lam},
        inputs_digest=digest(triple.seed.to_dict()),
        details={"sequence": triple.sequence},
        wall_time=clock[0],
    )


def sqrt_identities_check(triple: RiggingTriple, samples: int = 1000, rng=None,
                          tol: float = 1e-8) -> VerificationReport:
    """Max relative residuals of the two square-root identities on random pairs.

    ``(T^{1/2}u, T^{1/2}v)_1`` vs ``(u, v)_2`` normalised by ``||u||_2 ||v||_2``;
    ``(T^{-1/2}u, T^{-1/2}v)_2`` vs ``(u, v)_1`` normalised by ``||u||_1 ||v||_1``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    n = triple.space.dim
    with timed() as clock:
        S, Si = triple.t12_power(0.5), triple.t12_power(-0.5)
        G1, G2 = triple.g1.matrix, triple.g2.matrix
        U = rng.standard_normal((samples, n))
        V = rng.standard_normal((samples, n))
        U[0] = V[0] = 0.0
        lhs1 = np.einsum("ij,ij->i", (U @ S.T) @ G1, V @ S.T)
        rhs1 = np.einsum("ij,ij->i", U @ G2, V)
        lhs2 = np.einsum("ij,ij->i", (U @ Si.T) @ G2, V @ Si.T)
        rhs2 = np.einsum("ij,ij->i", U @ G1, V)
        n2 = np.sqrt(np.einsum("ij,ij->i", U @ G2, U) * np.einsum("ij,ij->i", V @ G2, V))
        n1 = np.sqrt(np.einsum("ij,ij->i", U @ G1, U) * np.einsum("ij,ij->i", V @ G1, V))
        r1 = np.abs(lhs1 - rhs1) / np.where(n2 > 0, n2, 1.0)
        r2 = np.abs(lhs2 - rhs2) / np.where(n1 > 0, n1, 1.0)
        worst = int(np.argmax(np.maximum(r1, r2)))
        ok = bool(max(r1.max(), r2.max()) <= tol)
    return VerificationReport(
        "sqrt_identities", ok,
        measured={"residual_h1": r1.max(), "residual_h2": r2.max(),
                  "min_t12_eigenvalue": triple.spectral()[0][0]},
        tolerance=tol,
        provenance={"residual_h1": "paper", "residual_h2": "paper", "min_t12_eigenvalue": "paper"},
        witnesses={} if ok else {"u": U[worst], "v": V[worst]},
        inputs_digest=digest({"seed": triple.seed.to_dict(), "samples": samples}),
        details={"sequence": triple.sequence, "samples": samples, "dim": n},
        wall_time=clock[0],
    )


def embedding_constants(seed: RiggingSeed, g2: GramForm, g1: GramForm, *, starts: int = 6,
                        rng=None) -> VerificationReport:
    """Best constants of B -> H2 and H1 -> B as certified intervals."""
    space = seed.space
    rng = np.random.default_rng(0) if rng is None else rng
    d = space.iso()
    with timed() as clock:
        b_h2 = banach.mixed_norm_bounds(g2.factor / d[None, :], space.p, 2.0, starts=starts, rng=rng)
        # data-driven bound: ||u||_2^2 = sum t f(u)^2 <= sum t ||f||^2 ||u||^2
        dn = np.array([banach.dual_norm(space, f) for f in seed.fs])
        cap = math.sqrt(float(np.sum(seed.ts * dn**2)))
        b_h2 = banach.NormBounds(min(b_h2.lower, cap), min(b_h2.upper, cap))
        R1inv = linalg.solve_triangular(g1.factor, np.eye(space.dim), lower=False)
        h1_b = banach.mixed_norm_bounds(d[:, None] * R1inv, 2.0, space.p, starts=starts, rng=rng)
        ok = b_h2.upper <= 1.0 + 1e-10 and math.isfinite(h1_b.upper)
    return VerificationReport(
        "embedding_constants", ok,
        measured={"c_B_to_H2": b_h2.upper, "c_B_to_H2_lower": b_h2.lower,
                  "c_H1_to_B": h1_b.upper, "c_H1_to_B_lower": h1_b.lower},
        tolerance=1e-10,
        provenance={"c_B_to_H2": "paper", "c_H1_to_B": "measured"},
        witnesses={} if ok else {"bounds": [b_h2.lower, b_h2.upper, h1_b.lower, h1_b.upper]},
        inputs_digest=digest(seed.to_dict()),
        details={"dim": space.dim, "p": banach.format_exponent(space.p)},
        wall_time=clock[0],
    )


def embedding_inequality_check(seed: RiggingSeed, g2: GramForm, samples: int, rng,
                               tol: float = 1e-12) -> VerificationReport:
    """``||u||_H2 <= ||u||_B (1 + tol)`` on random u."""
    space = seed.space
    U = rng.standard_normal((samples, space.dim)) * rng.lognormal(0.0, 2.0, (samples, 1))
    with timed() as clock:
        h2 = np.sqrt(np.einsum("ij,ij->i", U @ g2.matrix, U))
        b = np.array([banach.norm(space, u) for u in U])
        ratio = h2 / b
        worst = int(np.argmax(ratio))
        ok = bool(np.all(h2 <= b * (1.0 + tol)))
    return VerificationReport(
        "embedding_inequality", ok,
        measured={"max_ratio": ratio[worst], "samples": samples},
        tolerance=tol,
        provenance={"max_ratio": "paper"},
        witnesses={} if ok else {"u": U[worst]},
        inputs_digest=digest(seed.to_dict()),
        details={"dim": space.dim, "p": banach.format_exponent(space.p)},
        wall_time=clock[0],
    )


def _asymmetry(g2: GramForm, A) -> float:
    W = g2.whiten(np.asarray(A, dtype=float))
    nrm = np.linalg.norm(W)
    return float(np.linalg.norm(W - W.T) / nrm) if nrm > 0 else 0.0


def selfadjoint_tolerance(g2: GramForm) -> float:
    """Asymmetry floor: whitening round trips lose about eps * cond(G2)."""
    return max(SELFADJOINT_TOL, 64 * np.finfo(float).eps * g2.cond)


def symmetrize(g2: GramForm, A) -> np.ndarray:
    """g2-selfadjoint part ``(A + G^{-1} A^T G) / 2``."""
    W = g2.whiten(np.asarray(A, dtype=float))
    return g2.unwhiten(0.5 * (W + W.T))


def random_g2_selfadjoint(g2: GramForm, rng) -> np.ndarray:
    n = g2.matrix.shape[0]
    S = rng.standard_normal((n, n))
    return g2.unwhiten(0.5 * (S + S.T))


def lax_check(space: SpaceSpec, g2: GramForm, A, *, starts: int = 2, rng=None,
              tol: float = 1e-8) -> VerificationReport:
    """``||A||_H2 <= ||A||_B`` (M = 1) for a g2-selfadjoint operator A."""
    A = np.asarray(A, dtype=float)
    asym = _asymmetry(g2, A)
    if asym > selfadjoint_tolerance(g2):
        raise PreconditionError(f"operator is not g2-selfadjoint (relative asymmetry {asym:.3e})")
    with timed() as clock:
        W = g2.whiten(A)
        h2 = float(np.max(np.abs(linalg.eigvalsh(0.5 * (W + W.T)))))
        bounds = banach.operator_norm_bounds(space, A, starts=starts, rng=rng)
        ratio = h2 / bounds.upper if bounds.upper > 0 else (0.0 if h2 == 0 else math.inf)
        ok = h2 <= bounds.upper * (1.0 + tol)
    return VerificationReport(
        "lax", ok,
        measured={"norm_h2": h2, "norm_b_upper": bounds.upper, "norm_b_lower": bounds.lower,
                  "ratio": ratio, "g2_asymmetry": asym},
        tolerance=tol,
        provenance={"ratio": "paper", "norm_b_upper": "derived"},
        witnesses={} if ok else {"A": A},
        inputs_digest=digest({"space": space.to_dict(), "A": A}),
        details={"dim": space.dim, "p": banach.format_exponent(space.p)},
        wall_time=clock[0],
    )
