"""Finite-dimensional l^p models: norms, duals, duality maps, distances, operator norms.

Vectors, functionals and operators are plain numpy arrays. A functional ``f``
acts by the weighted pairing ``f(x) = sum_k w_k f_k x_k``, so the dual of the
weighted l^p space is the weighted l^q space with the same weights. For
``p = inf`` the norm is ``max_k |x_k|`` (weights act as a measure and drop out
of the sup), whose dual is the weighted l^1 norm.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import optimize

from . import kernels
from .errors import DegenerateBasisError, DimensionError

INF = math.inf
BASIS_COND_LIMIT = 1e12


def parse_exponent(p) -> float:
    """Accept floats, ints and the strings ``"inf"``/``"infinity"``."""
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return INF
        p = float(p)
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise ValueError(f"exponent must lie in [1, inf], got {p}")
    return p


def format_exponent(p: float):
    return "inf" if math.isinf(p) else p


@dataclass(frozen=True)
class SpaceSpec:
    """The space R^dim with the (weighted) l^p norm."""

    dim: int
    p: float
    weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", parse_exponent(self.p))
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if len(w) != self.dim:
                raise DimensionError(f"{len(w)} weights for a space of dimension {self.dim}")
            if not all(v > 0 and math.isfinite(v) for v in w):
                raise ValueError("weights must be positive and finite")
            object.__setattr__(self, "weights", None if all(v == 1.0 for v in w) else w)

    @property
    def q(self) -> float:
        return kernels.conjugate(self.p)

    @property
    def w(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.dim)
        return np.asarray(self.weights)

    def dual(self) -> "SpaceSpec":
        return SpaceSpec(self.dim, self.q, self.weights)

    def iso(self) -> np.ndarray:
        """Diagonal of the isometry onto unweighted l^p: ``x -> iso * x``."""
        if self.weights is None or math.isinf(self.p):
            return np.ones(self.dim)
        return self.w ** (1.0 / self.p)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "p": format_exponent(self.p),
            "weights": None if self.weights is None else list(self.weights),
        }


def _vec(space: SpaceSpec, x, what="vector") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (space.dim,):
        raise DimensionError(f"{what} of shape {x.shape} in a space of dimension {space.dim}")
    return x


def _mat(space: SpaceSpec, A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.shape != (space.dim, space.dim):
        raise DimensionError(f"operator of shape {A.shape} on a space of dimension {space.dim}")
    return A


def norm(space: SpaceSpec, x) -> float:
    x = _vec(space, x)
    return kernels.lp_norm(space.iso() * x, space.p)


def dual_norm(space: SpaceSpec, f) -> float:
    return norm(space.dual(), _vec(space, f, "functional"))


def pairing(space: SpaceSpec, f, x) -> float:
    return float(np.sum(space.w * _vec(space, f, "functional") * _vec(space, x)))


def duality_map(space: SpaceSpec, x) -> np.ndarray:
    """A functional ``x*`` with ``x*(x) = ||x||^2`` and ``||x*|| = ||x||``.

    For p in {1, inf} the map is set-valued; the selection is
    ``||x||_1 sgn(x)`` (sgn 0 = 0) for p = 1, and a point mass on the first
    coordinate attaining the max for p = inf.
    """
    x = _vec(space, x)
    p = space.p
    nx = norm(space, x)
    if nx == 0.0:
        return np.zeros(space.dim)
    if p == 1.0:
        return nx * np.sign(x)
    if math.isinf(p):
        k = int(np.argmax(np.abs(x)))
        out = np.zeros(space.dim)
        out[k] = nx * np.sign(x[k]) / space.w[k]
        return out
    if p == 2.0:
        return x.copy()
    return nx ** (2.0 - p) * np.abs(x) ** (p - 1.0) * np.sign(x)


def _stack(space: SpaceSpec, basis) -> np.ndarray:
    basis = [_vec(space, b, "basis vector") for b in basis]
    if not basis:
        return np.zeros((space.dim, 0))
    return np.column_stack(basis)


def best_approximation(space: SpaceSpec, x, basis: Sequence) -> tuple[float, np.ndarray]:
    """Distance from ``x`` to span(basis) and the minimising coefficients.

    p = 2 is a weighted least-squares projection, p in {1, inf} a linear
    program, and other p a smooth convex minimisation of ``sum w |r|^p``.
    """
    x = _vec(space, x)
    B = _stack(space, basis)
    k = B.shape[1]
    nx = norm(space, x)
    if k == 0 or nx == 0.0:
        return nx, np.zeros(k)
    p, w = space.p, space.w
    # scale-free problem: solve for x / ||x||
    xs = x / nx
    sw = np.sqrt(w)
    c0 = np.linalg.lstsq(B * sw[:, None], xs * sw, rcond=None)[0]
    if p == 2.0:
        c = c0
    elif p == 1.0 or math.isinf(p):
        c = _lp_linprog(B, xs, w if p == 1.0 else None)
        if c is None:
            c = c0
    else:
        c = _smooth_descent(B, xs, w, p, c0)
    c = c * nx
    d = norm(space, x - B @ c)
    if d > nx:
        return nx, np.zeros(k)
    return d, c


def _lp_linprog(B, x, w):
    n, k = B.shape
    if w is not None:
        # min sum w s,  -s <= x - Bc <= s
        cost = np.concatenate([np.zeros(k), w])
        eye = np.eye(n)
        A_ub = np.block([[-B, -eye], [B, -eye]])
        b_ub = np.concatenate([-x, x])
        bounds = [(None, None)] * k + [(0, None)] * n
    else:
        # min t,  -t <= x - Bc <= t
        cost = np.concatenate([np.zeros(k), [1.0]])
        one = np.ones((n, 1))
        A_ub = np.block([[-B, -one], [B, -one]])
        b_ub = np.concatenate([-x, x])
        bounds = [(None, None)] * k + [(0, None)]
    res = optimize.linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
    return res.x[:k] if res.status == 0 else None


def _smooth_descent(B, x, w, p, c0):
    def fun(c):
        r = x - B @ c
        a = np.abs(r)
        val = np.sum(w * a**p) / p
        grad = -B.T @ (w * a ** (p - 1.0) * np.sign(r))
        return val, grad

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = optimize.minimize(fun, c0, jac=True, method="BFGS",
                                options={"gtol": 1e-12, "maxiter": 2000})
    c = res.x
    return c if fun(c)[0] <= fun(c0)[0] else c0


def dist_to_subspace(space: SpaceSpec, x, basis: Sequence) -> float:
    return best_approximation(space, x, basis)[0]


@dataclass(frozen=True)
class NormBounds:
    lower: float
    upper: float

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    @property
    def value(self) -> float:
        return self.upper


def _identity_norm(n: int, a: float, b: float) -> float:
    """||I||_{l^a -> l^b} on R^n."""
    return float(n) ** max(0.0, 1.0 / b - 1.0 / a)


def _ascent_starts(A: np.ndarray, rng, starts: int) -> list[np.ndarray]:
    n = A.shape[1]
    out = [np.linalg.svd(A)[2][0], np.ones(n)]
    out += [rng.standard_normal(n) for _ in range(starts)]
    return out


def mixed_norm_bounds(A, p_in: float, p_out: float, *, starts: int = 6,
                      rng=None, maxiter: int = 500) -> NormBounds:
    """Certified bounds on ``||A||`` from unweighted l^p_in to l^p_out.

    Exact when p_in = 1, p_out = inf or p_in = p_out = 2. Otherwise the lower
    bound is the best feasible ratio seen by multi-start power ascent and the
    upper bound comes from norm equivalence through l^2.
    """
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")
    m, n = A.shape
    if p_in == 1.0:
        v = max(kernels.lp_norm(A[:, j], p_out) for j in range(n))
        return NormBounds(v, v)
    if math.isinf(p_out):
        q_in = kernels.conjugate(p_in)
        v = max(kernels.lp_norm(A[i], q_in) for i in range(m))
        return NormBounds(v, v)
    s = float(np.linalg.norm(A, 2))
    if p_in == 2.0 and p_out == 2.0:
        return NormBounds(s, s)
    upper = _identity_norm(n, p_in, 2.0) * s * _identity_norm(m, 2.0, p_out)
    rng = np.random.default_rng(0) if rng is None else rng
    lower = 0.0
    for x0 in _ascent_starts(A, rng, starts):
        lower = max(lower, kernels.power_ascent(A, p_in, p_out, x0, maxiter)[0])
    return NormBounds(min(lower, upper), upper)


def _interpolated_upper(space: SpaceSpec, A) -> tuple[np.ndarray, float, bool]:
    A = _mat(space, A)
    if not np.all(np.isfinite(A)):
        raise ValueError("operator has non-finite entries")
    d = space.iso()
    At = (d[:, None] * A) / d[None, :]
    n1 = float(np.max(np.sum(np.abs(At), axis=0)))
    ninf = float(np.max(np.sum(np.abs(At), axis=1)))
    p = space.p
    if p == 1.0:
        return At, n1, True
    if math.isinf(p):
        return At, ninf, True
    n2 = float(np.linalg.norm(At, 2))
    if p == 2.0:
        return At, n2, True
    upper = n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p)
    if p < 2.0:
        theta = 2.0 * (1.0 - 1.0 / p)
        upper = min(upper, n1 ** (1.0 - theta) * n2**theta)
    else:
        theta = 1.0 - 2.0 / p
        upper = min(upper, n2 ** (1.0 - theta) * ninf**theta)
    return At, upper, False


def operator_norm_bounds(space: SpaceSpec, A, *, starts: int = 6, rng=None) -> NormBounds:
    """Certified interval for ``||A||_{B -> B}``.

    Exact for p in {1, 2, inf}. For other p the upper bound is the smallest
    Riesz-Thorin interpolant among the (1, inf), (1, 2) and (2, inf) pairs,
    and the lower bound the best multi-start power-ascent ratio.
    """
    At, upper, exact = _interpolated_upper(space, A)
    if exact:
        return NormBounds(upper, upper)
    rng = np.random.default_rng(0) if rng is None else rng
    lower = 0.0
    for x0 in _ascent_starts(At, rng, starts):
        lower = max(lower, kernels.power_ascent(At, space.p, space.p, x0)[0])
    return NormBounds(min(lower, upper), upper)


def operator_norm(space: SpaceSpec, A) -> float:
    """``||A||_{B -> B}``; for p outside {1, 2, inf} the certified upper bound."""
    return _interpolated_upper(space, A)[1]


def sbasis_expand(basis: Sequence, x) -> np.ndarray:
    """Coefficients of ``x`` in a finite basis (columns ``basis[k]``)."""
    B = np.column_stack([np.asarray(b, dtype=float) for b in basis])
    x = np.asarray(x, dtype=float)
    if B.shape[0] != B.shape[1] or x.shape != (B.shape[0],):
        raise DimensionError(f"{B.shape[1]} basis vectors of length {B.shape[0]}, x of shape {x.shape}")
    cond = np.linalg.cond(B)
    if not np.isfinite(cond) or cond > BASIS_COND_LIMIT:
        raise DegenerateBasisError(f"basis matrix is singular (condition number {cond:.3g})")
    return np.linalg.solve(B, x)
