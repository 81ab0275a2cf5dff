"""Jacobi operator spectra, harmonic 1-forms, test sections and rigidity checks.

Grid entries have a flat induced metric ``diag(G_aa)`` in their periodic
parameters, so normal sections u N reduce to scalar fields and

    -J u = -sum_a G^{aa} d_a^2 u - (|A|^2 + Ric(N, N)) u,

discretized with the periodic second difference.  The quadratic form uses
forward (edge) differences, which makes it equal to ``w f^T (-J_h) f``
exactly, with ``w`` the constant vertex weight.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from . import eigensolver
from .errors import BackendMismatch, TopologyMismatch
from .lie_core import center_of_subalgebra
from .virtual_immersion import ImmersionContext, acs_batch, omega_batch, sff_batch

NULLITY_C = 10.0
NULLITY_FLOOR = 1e-9
ANALYTIC_CUTOFF = 60.0
HODGE_REL_TOL = 1e-8
RIGIDITY_TOL = 1e-6


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    index: int
    nullity: int
    tol: float
    backend: str
    resolution: tuple
    catalog_id: str = ""
    sturm_index: int | None = None
    sturm_nullity: int | None = None

    @property
    def extended_index(self) -> int:
        return self.index + self.nullity

    def to_dict(self, with_eigenvalues=True):
        out = {
            "catalog_id": self.catalog_id, "backend": self.backend, "resolution": list(self.resolution),
            "index": self.index, "nullity": self.nullity, "extended_index": self.extended_index, "tol": self.tol,
            "sturm_index": self.sturm_index, "sturm_nullity": self.sturm_nullity,
        }
        if with_eigenvalues:
            out["eigenvalues"] = [float(x) for x in self.eigenvalues]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "lambda"])
        for k, lam in enumerate(self.eigenvalues):
            w.writerow([k, repr(float(lam))])
        return buf.getvalue()


def _counts(eigs, tol):
    return int(np.sum(eigs < -tol)), int(np.sum(np.abs(eigs) <= tol))


# ---------------------------------------------------------------------------
# Jacobi operator
# ---------------------------------------------------------------------------

def _require_grid(mesh):
    if mesh.backend != "grid":
        raise BackendMismatch(f"{mesh.catalog_id} only has an analytic spectrum")


def _flat_data(mesh):
    """Constant inverse-metric diagonal and constant potential of a grid entry."""
    _require_grid(mesh)
    G = mesh.metric
    if np.abs(G - G[0]).max() > 1e-12 or np.abs(G[0] - np.diag(np.diag(G[0]))).max() > 1e-12:
        raise BackendMismatch("grid backend needs a constant diagonal induced metric")
    inv = 1.0 / np.diag(G[0])
    return inv, mesh.potential


def _second_difference(n, h):
    main = np.full(n, -2.0)
    off = np.ones(n - 1)
    D = sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="lil")
    D[0, n - 1] = 1.0
    D[n - 1, 0] = 1.0
    return D.tocsr() / h**2


def _forward_difference(n, h):
    D = sp.diags([-np.ones(n), np.ones(n - 1)], [0, 1], shape=(n, n), format="lil")
    D[n - 1, 0] = 1.0
    return D.tocsr() / h


def _axis_op(op, shape, a):
    mats = [sp.identity(n, format="csr") for n in shape]
    mats[a] = op
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def jacobi_operator_sparse(mesh):
    inv, pot = _flat_data(mesh)
    L = sum(inv[a] * _axis_op(_second_difference(n, mesh.spacing[a]), mesh.grid_shape, a)
            for a, n in enumerate(mesh.grid_shape))
    return (-L - sp.diags(pot)).tocsr()


def jacobi_operator(mesh) -> np.ndarray:
    """Dense matrix of -J on vertex values (symmetric)."""
    return jacobi_operator_sparse(mesh).toarray()


def nullity_tol(mesh) -> float:
    inv, pot = _flat_data(mesh)
    h = max(mesh.spacing)
    return max(NULLITY_FLOOR, NULLITY_C * h * h * max(inv.max(), np.abs(pot).max()))


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

def _lattice(dim, radius):
    r = np.arange(-radius, radius + 1)
    return np.stack(np.meshgrid(*([r] * dim), indexing="ij"), axis=-1).reshape(-1, dim)


def analytic_eigenvalues(mesh, cutoff=ANALYTIC_CUTOFF) -> np.ndarray:
    """Closed-form spectrum of -J below ``cutoff`` (with multiplicity).

    Periodic axes carry Fourier modes ``G^{aa} m^2``; a (polar, periodic) pair
    spanning a unit round sphere carries ``l(l+1)`` with multiplicity 2l+1.
    """
    pot = mesh.potential
    if np.ptp(pot) > 1e-12:
        raise BackendMismatch("closed-form spectrum needs a constant potential")
    V0 = float(pot[0])
    axes = list(mesh.axes)
    sphere = "polar" in axes
    periodic = [a for a, kind in enumerate(axes) if kind == "periodic"]
    if sphere:
        periodic.remove(axes.index("polar") + 1)
    G = mesh.metric[0]
    coef = np.array([1.0 / G[a, a] for a in periodic])
    budget = cutoff + V0
    radius = int(math.isqrt(int(budget / max(coef.min(), 1e-300)) + 1)) + 1 if coef.size else 0
    base = (_lattice(len(periodic), radius) ** 2 @ coef) if coef.size else np.zeros(1)
    base = base[base <= budget]
    if sphere:
        vals = []
        l = 0
        while l * (l + 1) <= budget:
            s = base + l * (l + 1)
            vals.extend(np.repeat(s[s <= budget], 2 * l + 1))
            l += 1
        base = np.array(vals)
    return np.sort(base - V0)


def spectrum(mesh, k=None, method="auto", cutoff=ANALYTIC_CUTOFF) -> SpectralReport:
    """Eigenvalues of -J with index and nullity.

    Grid backend: dense Householder + implicit QL, counts cross-checked by
    Sturm sequences.  Analytic backend: closed-form enumeration below
    ``cutoff``.  ``k`` keeps only the lowest ``k`` eigenvalues in the report.
    """
    if mesh.backend == "analytic":
        eigs = analytic_eigenvalues(mesh, cutoff)
        tol = NULLITY_FLOOR
        ind, nul = _counts(eigs, tol)
        rep = SpectralReport(eigs, ind, nul, tol, "analytic", tuple(mesh.grid_shape), mesh.catalog_id, ind, nul)
    else:
        A = jacobi_operator(mesh)
        d, e = eigensolver.tridiagonalize(A, method=method)
        del A
        eigs = eigensolver.eigvalsh_tridiagonal(d, e)
        tol = nullity_tol(mesh)
        ind, nul = _counts(eigs, tol)
        below, upto = eigensolver.sturm_count(d, e, [-tol, np.nextafter(tol, np.inf)])
        rep = SpectralReport(eigs, ind, nul, tol, "grid", tuple(mesh.grid_shape), mesh.catalog_id,
                             int(below), int(upto - below))
    if k is not None:
        rep.eigenvalues = rep.eigenvalues[:k]
    return rep


# ---------------------------------------------------------------------------
# harmonic forms
# ---------------------------------------------------------------------------

@dataclass
class HarmonicBasis:
    """L2-orthonormal harmonic 1-forms.

    ``forms[i]`` holds the covector components on du_a per vertex and
    ``sharp[i]`` the dual vector field in m-coordinates.
    """

    forms: np.ndarray
    sharp: np.ndarray
    b1: int
    residuals: np.ndarray
    kernel_dim: int
    gram: np.ndarray = field(repr=False, default=None)


def hodge_laplacian_1(shape, spacing, metric_diag):
    """(K, star1) for periodic cubical 1-cochains with a constant diagonal metric.

    ``K = star1 d0 star0^-1 d0^T star1 + d1^T star2 d1`` is the symmetric
    stiffness form; harmonic cochains are its kernel.
    """
    dim = len(shape)
    n0 = int(np.prod(shape))
    h = np.asarray(spacing, dtype=float)
    g = np.asarray(metric_diag, dtype=float)
    edge = h * np.sqrt(g)
    vol = float(np.prod(edge))
    fwd = [_axis_op(_forward_difference(n, 1.0), shape, a) for a, n in enumerate(shape)]
    d0 = sp.vstack(fwd, format="csr")                       # edges grouped by direction
    star0 = vol
    star1 = np.concatenate([np.full(n0, vol / edge[a] ** 2) for a in range(dim)])
    blocks, star2 = [], []
    for a in range(dim):
        for b in range(a + 1, dim):
            row = [None] * dim
            row[b] = fwd[a]
            row[a] = -fwd[b]
            blocks.append([r if r is not None else sp.csr_matrix((n0, n0)) for r in row])
            star2.append(np.full(n0, vol / (edge[a] * edge[b]) ** 2))
    S1 = sp.diags(star1)
    K = S1 @ d0 @ d0.T @ S1 / star0
    if blocks:
        d1 = sp.bmat(blocks, format="csr")
        K = K + d1.T @ sp.diags(np.concatenate(star2)) @ d1
    return K.tocsr(), star1


def _kernel_dim(K, star1, expect, tol_rel=HODGE_REL_TOL):
    n = K.shape[0]
    Sm = sp.diags(1.0 / np.sqrt(star1))
    Ks = (Sm @ K @ Sm).tocsr()
    scale = float(abs(Ks).sum(axis=1).max())
    want = min(n - 1, expect + 3)
    if n <= 600:
        ev = np.linalg.eigvalsh(Ks.toarray())
    else:
        ev = eigsh(Ks, k=want, sigma=-1e-3 * scale, which="LM", return_eigenvectors=False)
    return int(np.sum(np.abs(ev) < tol_rel * scale)), Ks, scale


def harmonic_forms(mesh) -> HarmonicBasis:
    """Coordinate forms du_a, L2-normalized, verified against the discrete Hodge Laplacian."""
    inv, _ = _flat_data(mesh)
    g = 1.0 / inv
    dim, V = mesh.dim, mesh.n_vertices
    area = mesh.area
    forms = np.zeros((dim, V, dim))
    for a in range(dim):
        forms[a, :, a] = 1.0 / math.sqrt(inv[a] * area)
    raised = forms * inv                                          # omega^a = G^{aa} omega_a
    sharp = np.einsum("iva,vak->ivk", raised, mesh.coord_tangents)
    gram = np.einsum("v,ivk,jvk->ij", mesh.metric_weights, sharp, sharp)

    K, star1 = hodge_laplacian_1(mesh.grid_shape, mesh.spacing, g)
    kdim, _, scale = _kernel_dim(K, star1, mesh.b1)
    residuals = []
    for a in range(dim):
        # cochain value on an a-edge is the integral of omega along it
        coch = np.concatenate([forms[a, :, c] * mesh.spacing[c] for c in range(dim)])
        residuals.append(float(np.abs(K @ coch).max() / (scale * max(np.abs(coch).max(), 1e-300))))
    if kdim != mesh.b1:
        raise TopologyMismatch(f"discrete Hodge kernel has dimension {kdim}, expected b1 = {mesh.b1}")
    return HarmonicBasis(forms, sharp, mesh.b1, np.array(residuals), kdim, gram)


# ---------------------------------------------------------------------------
# test sections, Q and the ACS identity
# ---------------------------------------------------------------------------

def test_sections(mesh, sharp, ctx: ImmersionContext) -> np.ndarray:
    """f_ij = <Omega(omega#) ^ Omega(N), theta_i ^ theta_j>, shape (n_pairs, V)."""
    pair = mesh.space
    sharp = np.asarray(sharp, dtype=float)
    a = omega_batch(pair, mesh.Ad, sharp)
    b = omega_batch(pair, mesh.Ad, mesh.unit_normal)
    return ctx.wedge(a, b).T


def q_form(mesh, f) -> float:
    """sum_v w (|grad f|^2 - (|A|^2 + Ric) f^2) with forward differences."""
    inv, pot = _flat_data(mesh)
    f = np.asarray(f, dtype=float)
    F = f.reshape(mesh.grid_shape)
    w = mesh.metric_weights.reshape(mesh.grid_shape)
    grad2 = np.zeros_like(F)
    for a, h in enumerate(mesh.spacing):
        grad2 += inv[a] * ((np.roll(F, -1, axis=a) - F) / h) ** 2
    return float(np.sum(w * (grad2 - pot.reshape(mesh.grid_shape) * F * F)))


def q_form_matrix(mesh, f) -> float:
    f = np.asarray(f, dtype=float)
    w = mesh.metric_weights
    return float(np.dot(w * f, jacobi_operator_sparse(mesh) @ f))


def acs_integral_identity(mesh, sharp, ctx: ImmersionContext) -> dict:
    """Both sides of sum_{i<j} Q(X_ij, X_ij) = int ACS(omega#, N) and their gap."""
    f = test_sections(mesh, sharp, ctx)
    lhs = sum(q_form(mesh, fij) for fij in f)
    acs_vals = acs_batch(mesh.space, mesh.Ad, np.asarray(sharp, dtype=float), mesh.unit_normal)
    rhs = float(np.sum(mesh.metric_weights * acs_vals))
    return {"lhs": float(lhs), "rhs": rhs, "residual": float(abs(lhs - rhs))}


# ---------------------------------------------------------------------------
# rigidity
# ---------------------------------------------------------------------------

def _grid_derivatives(mesh, field_):
    """Central differences of a per-vertex field along each grid axis: (dim, V, ...)."""
    F = field_.reshape(mesh.grid_shape + field_.shape[1:])
    out = []
    for a, h in enumerate(mesh.spacing):
        out.append(((np.roll(F, -1, axis=a) - np.roll(F, 1, axis=a)) / (2 * h)).reshape(field_.shape))
    return np.array(out)


def _frame_derivatives(mesh, field_):
    """Derivatives along the orthonormal Sigma frame e_b: (V, n-1, ...)."""
    D = _grid_derivatives(mesh, field_)                    # (a, V, ...)
    w, U = np.linalg.eigh(mesh.metric)
    G_isqrt = np.einsum("vij,vj,vkj->vik", U, 1 / np.sqrt(w), U)
    return np.einsum("vba,av...->vb...", G_isqrt, D)


def rigidity_conditions(mesh, sharp, ctx: ImmersionContext | None = None) -> dict:
    """Residuals of the three rigidity conditions for the field omega#.

    res_a: |[S_N, nabla omega#]| in the orthonormal Sigma frame.
    res_b: distance of Ad_g^{-1} II(omega#, N) from the center of h.
    res_c: |D_x II(omega#, N) + R(omega#, N) x| over frame directions x.
    Also the normalized sectional curvature of the plane (omega#, N) and the
    size of -J applied to the test sections.
    """
    pair = mesh.space
    alg = pair.algebra
    ctx = ctx or ImmersionContext(pair)
    sharp = np.asarray(sharp, dtype=float)
    N = mesh.unit_normal
    frame = mesh.tangent_frame_sigma                        # (V, n-1, k)
    Ad = mesh.Ad
    V = mesh.n_vertices

    # (a) nabla omega# as a matrix in the Sigma frame
    amb = omega_batch(pair, Ad, sharp)                      # (V, d)
    Damb = _frame_derivatives(mesh, amb)                    # (V, b, d)
    pulled = np.einsum("vji,vbj->vbi", Ad, Damb)
    nab = np.einsum("vbk,vck->vbc", pair.m_part(pulled), frame)
    S = _orthonormal_shape(mesh)
    comm = S @ nab - nab @ S
    res_a = float(np.abs(comm).max())

    # (b) distance from z(h)
    brk = alg.bracket_coords(pair.lift_m(sharp), pair.lift_m(N))  # in h, g-coords
    Z = np.array([alg.coords(z) for z in center_of_subalgebra(alg, pair.h_basis)]).reshape(-1, pair.d)
    proj = brk @ Z.T @ Z if Z.size else np.zeros_like(brk)
    res_b = float(np.linalg.norm(brk - proj, axis=-1).max())

    # (c) D_x II(omega#, N) + Ad_g [[omega#, N], x]
    II = sff_batch(pair, Ad, sharp, N)
    DII = _frame_derivatives(mesh, II)                      # (V, b, d)
    xs = pair.lift_m(frame)                                 # (V, b, d)
    RX = np.einsum("vij,vbj->vbi", Ad, alg.bracket_coords(brk[:, None, :], xs))
    res_c = float(np.linalg.norm(DII + RX, axis=-1).max())

    num = np.einsum("vi,vi->v", brk, brk)
    den = np.einsum("vk,vk->v", sharp, sharp) * np.einsum("vk,vk->v", N, N) - np.einsum("vk,vk->v", sharp, N) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        K = np.where(den > 1e-300, num / np.where(den > 0, den, 1.0), 0.0)

    f = test_sections(mesh, sharp, ctx)
    J = jacobi_operator_sparse(mesh)
    jac = float(max(np.abs(J @ fij).max() for fij in f)) if f.size else 0.0
    return {
        "res_a": res_a, "res_b": res_b, "res_c": res_c,
        "sectional_max": float(K.max()), "sectional_min": float(K.min()),
        "R_omega_N_max": float(num.max()),
        "jacobi_residual": jac, "vertices": V,
    }


def _orthonormal_shape(mesh):
    w, U = np.linalg.eigh(mesh.metric)
    G_isqrt = np.einsum("vij,vj,vkj->vik", U, 1 / np.sqrt(w), U)
    return G_isqrt @ mesh.shape_tensor @ G_isqrt


def rigidity_passes(res: dict, tol=RIGIDITY_TOL) -> bool:
    return max(res["res_a"], res["res_b"], res["res_c"]) < tol
