import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize_scalar

from banachrig import banach
from banachrig.banach import INF, SpaceSpec
from banachrig.errors import DegenerateBasisError, DimensionError

PS = [1.0, 1.5, 2.0, 3.0, INF]
vec3 = arrays(np.float64, 3, elements=st.floats(-1e3, 1e3, allow_nan=False))


def sp(p, n=2, weights=None):
    return SpaceSpec(n, p, weights)


# norms ------------------------------------------------------------------

@pytest.mark.parametrize("p,x,expected", [
    (2, [3, 4], 5.0),
    (1, [1, -2, 3], 6.0),
    (4, [1, 1], 2 ** 0.25),
])
def test_norm_examples(p, x, expected):
    assert banach.norm(sp(p, len(x)), x) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("p,f,expected", [
    (2, [0, 1], 1.0),
    (1, [2, -5], 5.0),
    (4, [2 ** -0.5, 2 ** -0.5], 2 ** 0.25),
])
def test_dual_norm_examples(p, f, expected):
    assert banach.dual_norm(sp(p), f) == pytest.approx(expected, rel=1e-14)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        banach.norm(sp(2, 3), [1.0, 2.0])


def test_parse_exponent():
    assert banach.parse_exponent("inf") == INF
    assert banach.parse_exponent(1.5) == 1.5
    with pytest.raises(ValueError):
        banach.parse_exponent(0.5)


def test_weighted_norm_is_quadrature():
    s = SpaceSpec(3, 2.0, [0.5, 0.25, 0.25])
    assert banach.norm(s, [2, 2, 2]) == pytest.approx(2.0)
    assert banach.norm(SpaceSpec(3, INF, [0.5, 0.25, 0.25]), [1, -7, 2]) == 7.0


@settings(max_examples=80, deadline=None)
@given(x=vec3, a=st.floats(-1e3, 1e3, allow_nan=False), p=st.sampled_from(PS))
def test_norm_scaling(x, a, p):
    s = sp(p, 3)
    assert banach.norm(s, a * x) == pytest.approx(abs(a) * banach.norm(s, x), rel=1e-12, abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(x=vec3, f=vec3, p=st.sampled_from(PS))
def test_holder(x, f, p):
    s = sp(p, 3)
    assert abs(banach.pairing(s, f, x)) <= banach.dual_norm(s, f) * banach.norm(s, x) * (1 + 1e-12) + 1e-300


# duality map --------------------------------------------------------------

def test_duality_map_examples(backend):
    np.testing.assert_allclose(banach.duality_map(sp(2), [3, 4]), [3, 4])
    s = sp(4)
    xs = banach.duality_map(s, [1, 1])
    np.testing.assert_allclose(xs, [2 ** -0.5, 2 ** -0.5], rtol=1e-15)
    assert banach.pairing(s, xs, [1, 1]) == pytest.approx(math.sqrt(2))
    assert banach.dual_norm(s, xs) == pytest.approx(2 ** 0.25)


@pytest.mark.parametrize("p", PS)
def test_duality_map_zero(p):
    assert np.all(banach.duality_map(sp(p, 3), np.zeros(3)) == 0)


def test_duality_map_endpoint_selection():
    np.testing.assert_array_equal(banach.duality_map(sp(1, 3), [2, 0, -1]), [3, 0, -3])
    np.testing.assert_array_equal(banach.duality_map(sp(INF, 3), [1, -2, 2]), [0, -2, 0])


@settings(max_examples=150, deadline=None)
@given(x=vec3, p=st.sampled_from(PS), w=st.sampled_from([None, [0.2, 0.3, 0.5]]))
def test_duality_map_identities(x, p, w):
    s = SpaceSpec(3, p, w)
    nx = banach.norm(s, x)
    if nx < 1e-100:
        return
    xs = banach.duality_map(s, x)
    assert abs(banach.pairing(s, xs, x) - nx ** 2) <= 1e-10 * nx ** 2
    assert abs(banach.dual_norm(s, xs) - nx) <= 1e-10 * nx


# distances ------------------------------------------------------------------

def test_dist_examples():
    assert banach.dist_to_subspace(sp(2), [0, 1], [[1, 0]]) == pytest.approx(1.0)
    assert banach.dist_to_subspace(sp(2), [1, 1], [[1, 0]]) == pytest.approx(1.0)
    # grid oracle for the second example
    c = np.linspace(-3, 3, 60001)
    assert np.min(np.hypot(1 - c, 1)) == pytest.approx(1.0)


@pytest.mark.parametrize("p", PS)
def test_dist_membership(p):
    assert banach.dist_to_subspace(sp(p, 3), [1, 2, 0], [[1, 0, 0], [0, 1, 0]]) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0, 4.0, INF])
def test_dist_one_dimensional_oracle(p, rng):
    # Brent's method on the scalar problem min_c ||x - c b||
    s = sp(p, 4)
    for _ in range(5):
        x, b = rng.standard_normal(4), rng.standard_normal(4)
        ref = minimize_scalar(lambda c: banach.norm(s, x - c * b), bracket=(-10, 10),
                              tol=1e-12).fun
        assert banach.dist_to_subspace(s, x, [b]) == pytest.approx(ref, rel=1e-7)


def test_dist_hilbert_projection(rng):
    w = rng.uniform(0.5, 2.0, 5)
    s = SpaceSpec(5, 2.0, w)
    B = rng.standard_normal((2, 5))
    x = rng.standard_normal(5)
    # closed form: weighted normal equations
    G = (B * w) @ B.T
    c = np.linalg.solve(G, (B * w) @ x)
    ref = math.sqrt(np.sum(w * (x - c @ B) ** 2))
    assert banach.dist_to_subspace(s, x, B) == pytest.approx(ref, rel=1e-8)


# operator norms --------------------------------------------------------------

def _brute(A, p, rng, trials=20000):
    X = rng.standard_normal((trials, A.shape[1])) ** 3
    return max(np.linalg.norm(A @ x, p) / np.linalg.norm(x, p) for x in X)


def test_operator_norm_examples(rng):
    A = np.array([[1.0, 2.0], [0.0, 3.0]])
    assert banach.operator_norm(sp(2), np.eye(2)) == pytest.approx(1.0)
    assert banach.operator_norm(sp(1), A) == pytest.approx(5.0)
    assert banach.operator_norm(sp(INF), A) == pytest.approx(3.0)
    assert 4.9 < _brute(A, 1, rng) <= 5.0 * (1 + 1e-12)
    assert 2.9 < _brute(A, np.inf, rng) <= 3.0 * (1 + 1e-12)


@pytest.mark.parametrize("p", PS)
def test_operator_norm_bounds_bracket_samples(backend, p, rng):
    A = rng.standard_normal((4, 4))
    s = sp(p, 4)
    b = banach.operator_norm_bounds(s, A, rng=rng)
    assert b.lower <= b.upper * (1 + 1e-12)
    X = rng.standard_normal((2000, 4))
    sampled = max(banach.norm(s, A @ x) / banach.norm(s, x) for x in X)
    assert sampled <= b.upper * (1 + 1e-12)
    if p in (1.0, 2.0, INF):
        assert b.exact


def test_operator_norm_p2_is_spectral(backend, rng):
    A = rng.standard_normal((5, 5))
    b = banach.operator_norm_bounds(sp(2, 5), A, rng=rng)
    s = np.linalg.svd(A, compute_uv=False)[0]
    assert b.lower == pytest.approx(s, rel=1e-12) and b.upper == pytest.approx(s, rel=1e-12)


def test_operator_norm_weighted_p1():
    w = np.array([1.0, 4.0])
    A = np.array([[1.0, 2.0], [0.0, 3.0]])
    # column sums in the weighted measure: ||A e_j||_w / ||e_j||_w
    ref = max(np.sum(w * np.abs(A[:, j])) / w[j] for j in range(2))
    assert banach.operator_norm(SpaceSpec(2, 1.0, w), A) == pytest.approx(ref)


def test_mixed_norm_exact_cases(rng):
    A = rng.standard_normal((3, 4))
    b = banach.mixed_norm_bounds(A, 1.0, 3.0, rng=rng)
    assert b.exact
    assert b.value == pytest.approx(max(np.linalg.norm(A[:, j], 3) for j in range(4)))


# S-basis ---------------------------------------------------------------------

def test_sbasis_examples():
    np.testing.assert_allclose(banach.sbasis_expand(np.eye(2), [2, -1]), [2, -1])
    np.testing.assert_allclose(banach.sbasis_expand([[1, 0], [1, 1]], [0, 1]), [-1, 1])
    with pytest.raises(DegenerateBasisError):
        banach.sbasis_expand([[1, 0], [1, 0]], [0, 1])
