import pytest

from conftest import S2, S2xS2, S3, T3, mesh_of, space, spectrum_of
from symspec.bounds import (
    BoundReport,
    affine_bound_report,
    cross_corollary_report,
    isometry_dimension,
    linear_bound_report,
)
from symspec.errors import HypothesisNotMet, InvalidInput


def report(fn, spec, cid, **kw):
    return fn(space(spec), mesh_of(spec, cid), spec=spectrum_of(spec, cid), **kw)


@pytest.mark.parametrize("spec,cid,d,binom,b1,ext", [
    (S2, "great_circle", 3, 3, 1, 3),
    (S3, "clifford_torus", 6, 15, 2, 9),
    (T3, "subtorus", 3, 3, 2, 1),
    (S3, "equator", 6, 15, 0, 4),
    (S2xS2, "circle_x_sphere", 6, 15, 1, 3),
])
def test_linear_bound(spec, cid, d, binom, b1, ext):
    rep = report(linear_bound_report, spec, cid)
    assert (rep.d, rep.binom_const, rep.b1, rep.extended_index) == (d, binom, b1, ext)
    assert rep.linear_bound_rhs == pytest.approx(b1 / binom)
    assert rep.linear_pass and rep.passed
    assert rep.dim_isom == d and rep.residual_summary["sturm_agrees"]


def test_linear_summary_has_grid_diagnostics():
    rep = report(linear_bound_report, S3, "clifford_torus")
    assert rep.residual_summary["hodge_kernel_dim"] == 2
    assert rep.residual_summary["acs_max_on_mesh"] < 1e-12


def test_affine_product():
    rep = report(affine_bound_report, S2xS2, "circle_x_sphere", mode="product")
    assert rep.affine_D == 3 and rep.affine_rhs < 0 and rep.affine_pass
    assert rep.empirical_D is None                          # analytic backend
    assert rep.center_dim == 2


def test_affine_generic_rank_hypothesis():
    with pytest.raises(HypothesisNotMet) as exc:
        report(affine_bound_report, S3, "clifford_torus", mode="generic")
    assert exc.value.hypothesis == "rank"


def test_affine_generic_genericity_hypothesis():
    with pytest.raises(HypothesisNotMet) as exc:
        report(affine_bound_report, T3, "subtorus", mode="generic")
    assert exc.value.hypothesis == "genericity"


def test_affine_product_on_non_product():
    with pytest.raises(HypothesisNotMet) as exc:
        report(affine_bound_report, T3, "subtorus", mode="product")
    assert exc.value.hypothesis == "product"


def test_affine_unknown_mode():
    with pytest.raises(InvalidInput):
        report(affine_bound_report, S2xS2, "circle_x_sphere", mode="sideways")


@pytest.mark.parametrize("spec,cid,rhs,index", [
    (S3, "clifford_torus", 2 / 15, 5),
    (S3, "equator", 0.0, 1),
    (S2, "great_circle", 0.0, 1),
])
def test_cross_corollary(spec, cid, rhs, index):
    rep = report(cross_corollary_report, spec, cid)
    assert rep.cross_rhs == pytest.approx(rhs) and rep.index == index
    assert rep.cross_pass and rep.passed and rep.mode == "cross"


def test_cross_rejects_non_sphere():
    with pytest.raises(InvalidInput):
        report(cross_corollary_report, T3, "subtorus")


def test_isometry_dimension():
    assert isometry_dimension(space(S3)) == 6
    assert isometry_dimension(space(T3)) == 3
    assert isometry_dimension(space(S2xS2)) == 6


@pytest.mark.parametrize("fn,spec,cid,kw", [
    (linear_bound_report, S3, "clifford_torus", {}),
    (affine_bound_report, S2xS2, "circle_x_sphere", {"mode": "product"}),
    (cross_corollary_report, S2, "great_circle", {}),
])
def test_json_roundtrip_is_byte_identical(fn, spec, cid, kw):
    text = report(fn, spec, cid, **kw).to_json()
    again = BoundReport.from_json(text)
    assert again.to_json() == text
    assert again.passed
