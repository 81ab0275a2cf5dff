import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import E, space
from symspec.errors import InvalidInput, NotASubalgebra
from symspec.lie_core import (
    LieAlgebraData,
    adjoint,
    bracket,
    center_of_subalgebra,
    closure_residual,
    inner,
    orthonormalize,
    skew_expm,
    so_basis,
)


def so_algebra(n, scale=0.5):
    return LieAlgebraData(np.array(so_basis(n)), ((0, n),), (scale,))


# -- bracket ------------------------------------------------------------------

def test_bracket_E12_E23_is_E13():
    assert np.array_equal(bracket(E(3, 1, 2), E(3, 2, 3)), E(3, 1, 3))


def test_bracket_E12_E13_is_minus_E23():
    assert np.array_equal(bracket(E(3, 1, 2), E(3, 1, 3)), -E(3, 2, 3))


def test_bracket_self_is_zero(rng):
    A = rng.standard_normal((4, 4))
    assert np.allclose(bracket(A, A), 0.0)


@pytest.mark.parametrize("A,B", [(np.eye(2), np.eye(3)), (np.ones(3), np.ones(3)), (np.ones((2, 3)), np.ones((2, 3)))])
def test_bracket_shape_errors(A, B):
    with pytest.raises(InvalidInput):
        bracket(A, B)


# -- inner --------------------------------------------------------------------

def test_inner_examples():
    alg = so_algebra(3)
    assert inner(alg, E(3, 1, 2), E(3, 1, 2)) == pytest.approx(1.0, abs=1e-15)
    assert inner(alg, E(3, 1, 2), E(3, 2, 3)) == 0.0
    assert inner(alg, E(3, 1, 3), np.zeros((3, 3))) == 0.0


def test_catalog_basis_is_orthonormal():
    for n in range(2, 7):
        alg = so_algebra(n)
        assert np.allclose(alg.gram, np.eye(alg.dim), atol=1e-15)


# -- adjoint ------------------------------------------------------------------

def test_adjoint_identity(rng):
    X = E(3, 1, 3)
    assert np.array_equal(adjoint(np.eye(3), X), X)


def test_adjoint_quarter_turn_sends_E13_to_E23_up_to_sign():
    # rotation by pi/2 in the (1,2)-plane: e1 -> e2, e2 -> -e1
    g = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    Y = adjoint(g, E(3, 1, 3))
    assert np.allclose(Y, E(3, 2, 3)) or np.allclose(Y, -E(3, 2, 3))
    assert inner(so_algebra(3), Y, Y) == pytest.approx(1.0, abs=1e-14)


def test_adjoint_is_homomorphism(rng):
    alg = so_algebra(4)
    g = skew_expm(alg.matrix(rng.standard_normal(alg.dim)))
    X, Y = alg.matrix(rng.standard_normal((2, alg.dim)))
    lhs = adjoint(g, bracket(X, Y))
    rhs = bracket(adjoint(g, X), adjoint(g, Y))
    assert np.abs(lhs - rhs).max() < 1e-12


def test_adjoint_rejects_singular():
    with pytest.raises(InvalidInput):
        adjoint(np.zeros((3, 3)), E(3, 1, 2))


def test_adjoint_matrix_matches_conjugation(rng):
    alg = so_algebra(5)
    g = skew_expm(alg.matrix(rng.standard_normal(alg.dim)))
    x = rng.standard_normal(alg.dim)
    direct = alg.coords(g @ alg.matrix(x) @ g.T)
    assert np.abs(alg.adjoint_matrix(g) @ x - direct).max() < 1e-13


# -- center -------------------------------------------------------------------

def test_center_so2_in_so3_is_everything():
    alg = so_algebra(3)
    z = center_of_subalgebra(alg, [E(3, 2, 3)])
    assert len(z) == 1


@pytest.mark.parametrize("n", [4, 5, 6])
def test_isotropy_of_higher_spheres_is_centerless(n):
    P = space({"family": "sphere", "n": n})
    assert len(center_of_subalgebra(P.algebra, P.h_basis)) == 0


def test_center_of_product_isotropy():
    P = space({"family": "product", "factors": [{"family": "sphere", "n": 3}, {"family": "sphere", "n": 4}]})
    assert len(center_of_subalgebra(P.algebra, P.h_basis)) == 1


def test_center_rejects_non_subalgebra():
    alg = so_algebra(3)
    with pytest.raises(NotASubalgebra):
        center_of_subalgebra(alg, [E(3, 1, 2), E(3, 1, 3)])


def test_center_is_orthonormal_and_central():
    alg = so_algebra(4)
    h = [E(4, 1, 2)]
    z = center_of_subalgebra(alg, h)
    assert len(z) == 1
    assert inner(alg, z[0], z[0]) == pytest.approx(1.0)


# -- orthonormalize -------------------------------------------------------------

def test_orthonormalize_examples():
    alg = so_algebra(3)
    out = orthonormalize(alg, [E(3, 1, 2), 2 * E(3, 1, 2)])
    assert len(out) == 1 and np.allclose(out[0], E(3, 1, 2))
    out = orthonormalize(alg, [E(3, 1, 2), E(3, 1, 3)])
    assert len(out) == 2 and np.allclose(out[0], E(3, 1, 2)) and np.allclose(out[1], E(3, 1, 3))
    assert orthonormalize(alg, []) == []


def test_orthonormalize_output_is_orthonormal(rng):
    alg = so_algebra(5)
    vecs = list(alg.matrix(rng.standard_normal((6, alg.dim))))
    Q = orthonormalize(alg, vecs)
    G = np.array([[inner(alg, a, b) for b in Q] for a in Q])
    assert len(Q) == 6 and np.abs(G - np.eye(6)).max() < 1e-12


# -- type invariants -------------------------------------------------------------

@pytest.mark.parametrize("name", ["S2", "S3", "T3", "S2xS2", "S3xS2"])
def test_algebra_invariants(name):
    from conftest import CATALOG_SPACES
    res = space(CATALOG_SPACES[name]).algebra.validate()
    assert res["skew"] == 0.0
    assert res["gram_min_eig"] > 0
    assert res["gram_asym"] < 1e-15
    assert res["closure"] < 1e-12
    assert res["ad_invariance"] < 1e-12


def test_closure_residual_detects_open_span():
    alg = so_algebra(3)
    assert closure_residual(alg, [E(3, 1, 2), E(3, 1, 3)]) == pytest.approx(1.0)
    assert closure_residual(alg, so_basis(3)) < 1e-14


coeffs = arrays(np.float64, 10, elements=st.floats(-3, 3, allow_nan=False))


@settings(max_examples=200, deadline=None)
@given(coeffs, coeffs, coeffs)
def test_jacobi_identity(x, y, z):
    alg = so_algebra(5)
    X, Y, Z = alg.matrix(x), alg.matrix(y), alg.matrix(z)
    cyc = bracket(bracket(X, Y), Z) + bracket(bracket(Y, Z), X) + bracket(bracket(Z, X), Y)
    norm = lambda A: np.sqrt(max(inner(alg, A, A), 0.0))
    assert norm(cyc) <= 1e-10 * max(norm(X) * norm(Y) * norm(Z), 1e-300) + 1e-13


@settings(max_examples=100, deadline=None)
@given(coeffs, coeffs, coeffs)
def test_bi_invariance(x, y, z):
    alg = so_algebra(5)
    X, Y, Z = alg.matrix(x), alg.matrix(y), alg.matrix(z)
    assert abs(inner(alg, bracket(Z, X), Y) + inner(alg, X, bracket(Z, Y))) < 1e-12 * (1 + np.abs(x).sum() ** 3)


@settings(max_examples=50, deadline=None)
@given(coeffs, coeffs, coeffs)
def test_adjoint_composition(a, b, x):
    alg = so_algebra(5)
    g, h = skew_expm(alg.matrix(a)), skew_expm(alg.matrix(b))
    X = alg.matrix(x)
    assert np.abs(adjoint(g @ h, X) - adjoint(g, adjoint(h, X))).max() < 1e-12 * (1 + np.abs(X).max())
