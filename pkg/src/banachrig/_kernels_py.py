"""Pure-Python (numpy) kernels. Same signatures as the compiled ``_kernels``.

All kernels work on *unweighted* l^p coordinates; callers map weighted
spaces onto this setting through the diagonal isometry ``x -> w**(1/p) * x``.
"""
import math

import numpy as np


def conjugate(p):
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_norm(x, p):
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return 0.0
    if math.isinf(p):
        return float(np.max(np.abs(x)))
    if p == 1.0:
        return float(np.sum(np.abs(x)))
    if p == 2.0:
        return float(np.sqrt(np.dot(x, x)))
    scale = np.max(np.abs(x))
    if scale == 0.0:
        return 0.0
    return float(scale * np.sum((np.abs(x) / scale) ** p) ** (1.0 / p))


def dual_preimage(c, p):
    """Maximiser of ``<c, x>`` over the closed unit ball of l^p.

    Ties (p = 1) go to the lowest index; zero coordinates map to +1 when
    p is infinite. The zero vector maps to zero.
    """
    c = np.asarray(c, dtype=float)
    out = np.zeros_like(c)
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0.0:
        return out
    if p == 1.0:
        k = int(np.argmax(np.abs(c)))
        out[k] = 1.0 if c[k] > 0 else -1.0
        return out
    if math.isinf(p):
        out[:] = np.where(c < 0, -1.0, 1.0)
        return out
    q = conjugate(p)
    out = np.sign(c) * (np.abs(c) / scale) ** (q - 1.0)
    return out / lp_norm(out, p)


def power_ascent(A, p_in, p_out, x0, maxiter=200, tol=1e-13):
    """Monotone ascent on ``||A x||_{p_out} / ||x||_{p_in}``.

    Every iterate is feasible, so the returned value is a certified lower
    bound of the mixed operator norm. Returns ``(value, x_best, iterations)``.
    """
    A = np.asarray(A, dtype=float)
    x = np.asarray(x0, dtype=float)
    nx = lp_norm(x, p_in)
    if nx == 0.0:
        return 0.0, x.copy(), 0
    x = x / nx
    q_out = conjugate(p_out)
    best, x_best, prev = -1.0, x, -1.0
    it = 0
    for it in range(1, maxiter + 1):
        y = A @ x
        val = lp_norm(y, p_out)
        if val > best:
            best, x_best = val, x
        if val <= prev * (1.0 + tol):
            break
        prev = val
        g = A.T @ dual_preimage(y, q_out)
        x_new = dual_preimage(g, p_in)
        if not np.any(x_new):
            break
        x = x_new
    return float(max(best, 0.0)), x_best, it
