import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from banachrig import banach, rigging
from banachrig.banach import INF, SpaceSpec
from banachrig.errors import ConditioningError, DegenerateSeedError, PreconditionError

PS = [1.0, 1.5, 2.0, 3.0, INF]


def std_triple(n=2, sequence="literal"):
    return rigging.build_triple(rigging.standard_seed(SpaceSpec(n, 2.0)), sequence)


# H2 ------------------------------------------------------------------------

def test_h2_single_term():
    g = rigging.build_h2(rigging.RiggingSeed.from_vectors(SpaceSpec(1, 2.0), [[1.0]]))
    np.testing.assert_allclose(g.matrix, [[0.5]])


def test_h2_standard_n2():
    g = rigging.build_h2(rigging.standard_seed(SpaceSpec(2, 2.0)))
    np.testing.assert_allclose(g.matrix, np.diag([0.5, 0.25]), atol=1e-16)


def test_h2_degenerate_seed():
    s = SpaceSpec(2, 2.0)
    with pytest.raises(DegenerateSeedError):
        rigging.build_h2(rigging.RiggingSeed.from_vectors(s, [[1, 0], [2, 0]]))
    with pytest.raises(DegenerateSeedError):
        rigging.RiggingSeed.from_vectors(s, [[1, 0]])


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("kind", rigging.SEED_KINDS)
def test_seed_kinds_nondegenerate(p, kind, rng):
    for n in (2, 5, 9):
        seed = rigging.make_seed(SpaceSpec(n, p), kind, rng)
        assert np.all(rigging.build_h2(seed).eigenvalues > 0)
        assert np.allclose([banach.norm(seed.space, x) for x in seed.xs], 1.0)


@pytest.mark.parametrize("p", PS)
def test_embedding_inequality(p, rng):
    for n in (2, 7, 16):
        for kind in rigging.SEED_KINDS:
            seed = rigging.make_seed(SpaceSpec(n, p), kind, rng)
            rep = rigging.embedding_inequality_check(seed, rigging.build_h2(seed), 200, rng)
            assert rep.passed, rep.measured


def test_monotone_refinement(rng):
    s = SpaceSpec(3, 3.0)
    seed = rigging.random_seed(s, rng)
    x_new = rng.standard_normal(3)
    big = seed.extend(x_new)
    g_small, g_big = rigging.build_h2(seed), rigging.build_h2(big)
    for u in rng.standard_normal((50, 3)):
        gain = g_big.norm(u) ** 2 - g_small.norm(u) ** 2
        f = big.fs[-1]
        assert gain == pytest.approx(big.ts[-1] * banach.pairing(s, f, u) ** 2, rel=1e-9, abs=1e-15)


# embedding constants --------------------------------------------------------

def test_embedding_constant_standard():
    t = std_triple()
    rep = rigging.embedding_constants(t.seed, t.g2, t.g1)
    assert rep.measured["c_B_to_H2"] == pytest.approx(2 ** -0.5, rel=1e-10)
    assert rep.passed


def test_embedding_constants_n1():
    seed = rigging.RiggingSeed.from_vectors(SpaceSpec(1, 3.0), [[1.0]])
    g2 = rigging.build_h2(seed)
    rep = rigging.embedding_constants(seed, g2, rigging.build_h1(seed, g2))
    assert 0 < rep.measured["c_B_to_H2"] < math.inf and 0 < rep.measured["c_H1_to_B"] < math.inf


@pytest.mark.parametrize("p", PS)
def test_embedding_constant_at_most_one(p, rng):
    for kind in rigging.SEED_KINDS:
        t = rigging.build_triple(rigging.make_seed(SpaceSpec(4, p), kind, rng), "orthonormal")
        rep = rigging.embedding_constants(t.seed, t.g2, t.g1, rng=rng)
        assert rep.measured["c_B_to_H2"] <= 1 + 1e-10


# T12 and H1 -----------------------------------------------------------------

def test_t12_zero():
    t = std_triple()
    np.testing.assert_array_equal(t.t12 @ np.zeros(2), 0)


def test_t12_defining_sum(rng):
    t = std_triple()
    for u in rng.standard_normal((10, 2)):
        direct = sum(tn * t.g2.inner(u, e) ** 2 for tn, e in zip(t.seed.ts, t.seed.xs))
        assert t.g2.inner(t.t12 @ u, u) == pytest.approx(direct, rel=1e-13)


@pytest.mark.parametrize("kind", rigging.SEED_KINDS)
@pytest.mark.parametrize("sequence", rigging.SEQUENCES)
def test_t12_positive(kind, sequence, rng):
    t = rigging.build_triple(rigging.make_seed(SpaceSpec(5, 1.5), kind, rng), sequence)
    U = rng.standard_normal((1000, 5))
    assert np.all(np.einsum("ij,ij->i", (U @ t.t12.T) @ t.g2.matrix, U) > 0)
    rep = rigging.t12_spectrum_report(t)
    assert rep.measured["min_eigenvalue"] > 0 and rep.measured["trace_rel_diff"] <= 1e-10


def test_h1_standard_n2(rng):
    t = std_triple()
    for u in rng.standard_normal((10, 2)):
        ref = 2 * t.g2.inner(u, [1, 0]) ** 2 + 4 * t.g2.inner(u, [0, 1]) ** 2
        assert t.g1.inner(u, u) == pytest.approx(ref, rel=1e-13)
    assert t.g1.inner(np.zeros(2), np.zeros(2)) == 0


def test_orthonormal_trace():
    # an H2-orthonormal sequence gives trace sum t_n
    for n in (2, 5, 9):
        t = rigging.build_triple(rigging.standard_seed(SpaceSpec(n, 2.0)), "orthonormal")
        assert np.sum(t.spectral()[0]) == pytest.approx(1 - 2.0 ** -n, rel=1e-12)


def test_sqrt_identities_orthonormal_standard():
    rep = rigging.sqrt_identities_check(std_triple(2, "orthonormal"), samples=200)
    assert rep.measured["residual_h1"] <= 1e-12 and rep.measured["residual_h2"] <= 1e-12


def test_sqrt_identities_literal_closed_form():
    # literal sequence, l2 standard seed: T^{1/2} = diag(1/2, 1/4), G1 = diag(1/2, 1/4),
    # so (T^{1/2}u, T^{1/2}v)_1 has Gram diag(1/8, 1/64) instead of G2 = diag(1/2, 1/4)
    t = std_triple(2, "literal")
    S = t.t12_power(0.5)
    np.testing.assert_allclose(S, np.diag([0.5, 0.25]), atol=1e-15)
    np.testing.assert_allclose(S.T @ t.g1.matrix @ S, np.diag([1 / 8, 1 / 64]), atol=1e-15)
    rep = rigging.sqrt_identities_check(t, samples=200)
    assert not rep.passed and rep.witnesses


def test_sqrt_identities_zero_pair():
    rep = rigging.sqrt_identities_check(std_triple(3, "orthonormal"), samples=1)
    assert rep.measured["residual_h1"] == 0 and rep.measured["residual_h2"] == 0


@pytest.mark.parametrize("p", PS)
def test_sqrt_identities_random_orthonormal(p, rng):
    for n in (2, 8, 16):
        t = rigging.build_triple(rigging.random_seed(SpaceSpec(n, p), rng), "orthonormal")
        assert rigging.sqrt_identities_check(t, 300, rng).passed


def test_t12_power_singular():
    # near-repeated seed: G2 passes its rank test, the literal T12 squares its conditioning
    seed = rigging.perturbed_seed(SpaceSpec(8, 1.5), np.random.default_rng(0))
    t = rigging.build_triple(seed, "literal")
    with pytest.raises(ConditioningError) as exc:
        t.t12_power(-0.5)
    assert exc.value.eigenvalue is not None


# selfadjointness and Lax ----------------------------------------------------

def test_symmetrize_examples(rng):
    eye = rigging.GramForm(np.eye(2))
    np.testing.assert_allclose(rigging.symmetrize(eye, [[0, 1], [0, 0]]), [[0, 0.5], [0.5, 0]])
    g2 = rigging.build_h2(rigging.random_seed(SpaceSpec(4, 3.0), rng))
    A = rigging.random_g2_selfadjoint(g2, rng)
    np.testing.assert_allclose(rigging.symmetrize(g2, A), A, atol=1e-14 * np.abs(A).max() * g2.cond)
    B = rigging.symmetrize(g2, rng.standard_normal((4, 4)))
    assert rigging._asymmetry(g2, B) <= rigging.selfadjoint_tolerance(g2)


def test_lax_identity():
    t = std_triple()
    rep = rigging.lax_check(t.space, t.g2, np.eye(2))
    assert rep.passed and rep.measured["ratio"] == pytest.approx(1.0)


def test_lax_t12_standard():
    t = std_triple(4)
    assert rigging.lax_check(t.space, t.g2, t.t12).passed


def test_lax_rejects_non_selfadjoint():
    t = std_triple()
    with pytest.raises(PreconditionError, match="asymmetry"):
        rigging.lax_check(t.space, t.g2, [[0.0, 1.0], [0.0, 0.0]])


@pytest.mark.parametrize("p", PS)
def test_lax_random(backend, p, rng):
    for n in (2, 6, 12):
        s = SpaceSpec(n, p)
        g2 = rigging.build_h2(rigging.random_seed(s, rng))
        for _ in range(5):
            A = rigging.random_g2_selfadjoint(g2, rng)
            assert rigging.lax_check(s, g2, A, rng=rng).passed


@settings(max_examples=40, deadline=None)
@given(S=arrays(np.float64, (3, 3), elements=st.floats(-10, 10, allow_nan=False)),
       p=st.sampled_from(PS))
def test_lax_property(S, p):
    s = SpaceSpec(3, p)
    g2 = rigging.build_h2(rigging.standard_seed(s))
    A = g2.unwhiten(0.5 * (S + S.T))
    assert rigging.lax_check(s, g2, A).passed
