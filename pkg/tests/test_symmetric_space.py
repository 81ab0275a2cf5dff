import json

import numpy as np
import pytest

from conftest import CATALOG_SPACES, E, S2, S3, T3, space
from symspec.errors import InvalidInput, UnsupportedSpace
from symspec.lie_core import skew_expm
from symspec.symmetric_space import (
    SpacePoint,
    build_space,
    calibrate_scale,
    identity_point,
    parse_space_spec,
    random_point,
    rank_of,
    sphere_lift,
    sphere_position,
    sphere_tangent,
    sphere_tangent_coords,
    tangent_frame,
)


def test_sphere3_pair():
    P = space(S2)
    assert P.d == 3 and P.dim_M == 2 and P.dim_h == 1
    assert np.allclose(P.h_basis[0], E(3, 2, 3))
    assert np.allclose(P.m_basis[0], E(3, 1, 2)) and np.allclose(P.m_basis[1], E(3, 1, 3))


def test_flat_torus2_pair():
    P = space({"family": "flat_torus", "n": 2})
    assert P.d == 2 and P.dim_h == 0 and P.dim_M == 2
    assert np.abs(P.algebra.structure_constants).max() == 0.0


def test_product_dimensions():
    P = space({"family": "product", "factors": [S2, S2]})
    assert P.d == 6 and P.dim_M == 4 and P.rank == 2


@pytest.mark.parametrize("spec,err", [
    ({"family": "hyperbolic", "n": 3}, UnsupportedSpace),
    ({"family": "sphere", "n": 1}, InvalidInput),
    ({"family": "sphere"}, InvalidInput),
    ({"family": "sphere", "n": 3.5}, InvalidInput),
    ({"family": "product", "factors": [S2]}, InvalidInput),
    ({"n": 3}, InvalidInput),
    ("not json at all", InvalidInput),
])
def test_build_errors(spec, err):
    with pytest.raises(err):
        build_space(spec)


def test_spec_from_file_and_string(tmp_path):
    f = tmp_path / "s.json"
    f.write_text(json.dumps(S3))
    assert parse_space_spec(str(f)) == S3
    assert parse_space_spec(json.dumps(S3)) == S3
    assert build_space(str(f)).label == "S3"


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_calibrate_sphere_is_half(n):
    assert calibrate_scale(space({"family": "sphere", "n": n})) == pytest.approx(0.5, abs=1e-15)


def test_calibrate_torus_and_product():
    # torus factors are so(2) blocks; unit-length generators with 2*pi period need lambda = 1/2
    assert calibrate_scale(space(T3)) == pytest.approx(0.5, abs=1e-15)
    lam = calibrate_scale(space({"family": "product", "factors": [S2, T3]}))
    assert isinstance(lam, tuple) and np.allclose(lam, (0.5, 0.5))


@pytest.mark.parametrize("name", sorted(CATALOG_SPACES))
def test_calibration_idempotent(name):
    P = space(CATALOG_SPACES[name])
    lam = np.atleast_1d(calibrate_scale(P))
    assert np.allclose(lam, np.atleast_1d(P.algebra.scale) if np.ndim(P.algebra.scale) == 0 or len(set(P.algebra.block_scales)) > 1 else P.algebra.scale, atol=1e-12)
    assert np.allclose(np.atleast_1d(calibrate_scale(P)), lam, atol=1e-12)


def test_calibrated_sphere_has_unit_sectional_curvature():
    P = space(S3)
    X, Y = P.m_basis[0], P.m_basis[1]
    Z = X @ Y - Y @ X
    assert P.algebra.inner(Z, Z) == pytest.approx(1.0, abs=1e-14)


def test_calibrated_circle_has_period_2pi():
    P = space(T3)
    for J in P.m_basis:
        assert np.allclose(skew_expm(2 * np.pi * J), np.eye(J.shape[0]), atol=1e-12)
        assert P.algebra.inner(J, J) == pytest.approx(1.0)


@pytest.mark.parametrize("spec,r", [
    ({"family": "sphere", "n": 3}, 1), ({"family": "sphere", "n": 5}, 1),
    ({"family": "flat_torus", "n": 3}, 3), ({"family": "flat_torus", "n": 1}, 1),
    ({"family": "product", "factors": [S3, S2]}, 2),
    ({"family": "product", "factors": [T3, S2]}, 4),
])
def test_rank(spec, r):
    assert rank_of(space(spec)) == r


@pytest.mark.parametrize("name", sorted(CATALOG_SPACES))
def test_cartan_relations(name):
    P = space(CATALOG_SPACES[name])
    res = P.cartan_residuals()
    assert res["dimension"] == 0 and res["orthogonality"] < 1e-12
    assert max(res["mm_in_h"], res["hm_in_m"], res["hh_in_h"]) < 1e-10
    assert P.mm_spans_h()


@pytest.mark.parametrize("name", sorted(CATALOG_SPACES))
def test_isotropy_preserves_m(name, rng):
    P = space(CATALOG_SPACES[name])
    if P.dim_h == 0:
        return
    alg = P.algebra
    hs = skew_expm(alg.matrix(rng.standard_normal((50, P.dim_h)) @ P.h_coords * 3))
    Ad = alg.adjoint_matrix(hs)
    moved = Ad @ P.m_coords.T                      # (50, d, k)
    leak = np.einsum("ij,njk->nik", P.proj_h, moved)
    assert np.abs(leak).max() < 1e-10


def test_tangent_frame_identity_and_orthonormal(rng):
    P = space(S2)
    fr = tangent_frame(identity_point(P))
    assert np.allclose(fr[0].matrix, E(3, 1, 2)) and np.allclose(fr[1].matrix, E(3, 1, 3))
    for name in CATALOG_SPACES:
        Q = space(CATALOG_SPACES[name])
        F = np.array([v.value for v in tangent_frame(random_point(Q, rng))])
        assert np.abs(F @ Q.algebra.gram @ F.T - np.eye(Q.dim_M)).max() < 1e-12


def test_torus_frame_is_fixed(rng):
    P = space(T3)
    F = np.array([v.value for v in tangent_frame(random_point(P, rng))])
    assert np.allclose(F, np.eye(3), atol=1e-14)


def test_point_lift_is_reorthonormalized(rng):
    P = space(S3)
    g = skew_expm(P.algebra.matrix(rng.standard_normal(P.d))) + 1e-7 * rng.standard_normal((4, 4))
    pt = SpacePoint(P, g)
    assert np.abs(pt.lift.T @ pt.lift - np.eye(4)).max() < 1e-12
    with pytest.raises(InvalidInput):
        SpacePoint(P, np.eye(3))


def test_sphere_helpers_roundtrip(rng):
    P = space({"family": "sphere", "n": 5})
    p = rng.standard_normal(5)
    p /= np.linalg.norm(p)
    pt = sphere_lift(P, p, rng)
    assert np.allclose(sphere_position(pt), p) and np.linalg.det(pt.lift) > 0
    X = rng.standard_normal(4)
    v = sphere_tangent(pt, X)
    assert abs(v @ p) < 1e-14
    assert np.allclose(sphere_tangent_coords(pt, v), X)
