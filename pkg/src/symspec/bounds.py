"""Index bounds from b1 for catalog hypersurfaces, packaged as reports."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from .errors import HypothesisNotMet, InvalidInput
from .hypersurface import affine_constant_a, affine_constant_b, genericity_check
from .lie_core import center_of_subalgebra
from .spectral import harmonic_forms, rigidity_conditions, rigidity_passes, spectrum
from .virtual_immersion import ImmersionContext, acs_batch

PASS_SLACK = 1e-12


@dataclass
class BoundReport:
    space_tag: dict
    catalog_id: str
    d: int
    binom_const: int
    b1: int
    index: int
    nullity: int
    extended_index: int
    linear_bound_rhs: float
    linear_pass: bool
    dim_isom: int | None = None
    isom_binom_const: int | None = None
    mode: str = "linear"
    affine_D: int | None = None
    affine_rhs: float | None = None
    affine_pass: bool | None = None
    cross_rhs: float | None = None
    cross_pass: bool | None = None
    center_dim: int | None = None
    empirical_D: int | None = None
    rigidity_budget: int | None = None
    residual_summary: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.mode == "cross":
            return bool(self.cross_pass)
        if self.mode.startswith("affine"):
            return bool(self.affine_pass)
        return bool(self.linear_pass)

    def to_dict(self):
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BoundReport":
        return cls(**json.loads(text))


def isometry_dimension(space) -> int:
    """dim Isom(M) for catalog spaces (equal to dim g for every entry here)."""
    total = 0
    for f in space.factors:
        total += f.n * (f.n - 1) // 2 if f.family == "sphere" else f.n
    return total


def _base_report(space, mesh, ctx, spec=None):
    ctx = ctx or ImmersionContext(space)
    spec = spec or spectrum(mesh)
    d = ctx.d
    binom = comb(d, 2)
    ext = spec.index + spec.nullity
    rhs = mesh.b1 / binom
    dim_isom = isometry_dimension(space)
    summary = {
        "backend": spec.backend,
        "resolution": list(spec.resolution),
        "nullity_tol": spec.tol,
        "sturm_agrees": spec.sturm_index == spec.index and spec.sturm_nullity == spec.nullity,
    }
    if mesh.backend == "grid":
        basis = harmonic_forms(mesh)
        summary["hodge_kernel_dim"] = basis.kernel_dim
        acs = [np.abs(acs_batch(space, mesh.Ad, s, mesh.unit_normal)).max() for s in basis.sharp]
        summary["acs_max_on_mesh"] = float(max(acs)) if acs else 0.0
    return BoundReport(
        space_tag=space.family_tag, catalog_id=mesh.catalog_id, d=d, binom_const=binom, b1=mesh.b1,
        index=spec.index, nullity=spec.nullity, extended_index=ext, linear_bound_rhs=rhs,
        linear_pass=bool(ext >= rhs - PASS_SLACK), dim_isom=dim_isom, isom_binom_const=comb(dim_isom, 2),
        residual_summary=summary,
    )


def linear_bound_report(space, mesh, ctx=None, spec=None) -> BoundReport:
    """ind_0 >= b1 / binom(d, 2)."""
    return _base_report(space, mesh, ctx, spec)


def _rigidity_counts(space, mesh, ctx):
    """(forms passing all rigidity conditions, forms in H_1) over the harmonic basis."""
    if mesh.backend != "grid":
        return None, None
    basis = harmonic_forms(mesh)
    full = h1 = 0
    for s in basis.sharp:
        res = rigidity_conditions(mesh, s, ctx)
        full += rigidity_passes(res)
        h1 += res["res_a"] < 1e-6 and res["R_omega_N_max"] < 1e-10
    return int(full), int(h1)


def affine_bound_report(space, mesh, ctx=None, mode="generic", spec=None) -> BoundReport:
    """index >= (b1 - D) / binom(d, 2) with D from the rank or product constant."""
    ctx = ctx or ImmersionContext(space)
    if mode == "generic":
        if space.rank < 2:
            raise HypothesisNotMet("rank", f"{space.label} has rank {space.rank} < 2")
        holds, gap, _ = genericity_check(mesh)
        if not holds:
            raise HypothesisNotMet("genericity", f"no vertex with distinct principal curvatures (best gap {gap:g})")
        D = affine_constant_a(space)
    elif mode == "product":
        try:
            D = affine_constant_b(space)
        except InvalidInput as exc:
            raise HypothesisNotMet("product", str(exc)) from exc
    else:
        raise InvalidInput(f"unknown affine mode {mode!r}")
    rep = _base_report(space, mesh, ctx, spec)
    rep.mode = f"affine-{mode}"
    rep.affine_D = int(D)
    rep.affine_rhs = (rep.b1 - D) / rep.binom_const
    rep.affine_pass = bool(rep.index >= rep.affine_rhs - PASS_SLACK)
    rep.center_dim = len(center_of_subalgebra(space.algebra, space.h_basis))
    full, h1 = _rigidity_counts(space, mesh, ctx)
    rep.empirical_D = full
    rep.rigidity_budget = None if h1 is None else h1 + rep.center_dim
    return rep


def cross_corollary_report(space, mesh, ctx=None, spec=None) -> BoundReport:
    """index >= b1 / binom(d, 2) on a sphere of dimension > 2; index >= b1 - 1 on S^2."""
    if space.family_tag["family"] != "sphere" or space.factors[0].dim_M < 2:
        raise InvalidInput(f"{space.label} is not a rank-one sphere")
    rep = _base_report(space, mesh, ctx, spec)
    rep.mode = "cross"
    rep.center_dim = len(center_of_subalgebra(space.algebra, space.h_basis))
    if space.dim_M > 2:
        if rep.center_dim != 0:
            raise InvalidInput(f"isotropy algebra of {space.label} has a center")
        rep.cross_rhs = rep.b1 / rep.binom_const
    else:
        rep.cross_rhs = float(rep.b1 - 1)
    rep.cross_pass = bool(rep.index >= rep.cross_rhs - PASS_SLACK)
    return rep
