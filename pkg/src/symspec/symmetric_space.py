"""Catalog symmetric pairs (g, h, m), metric calibration, and coset points.

Catalog families
----------------
``sphere(n)``
    S^{n-1} = SO(n)/SO(n-1), base point e_1.  The algebra basis is
    ``E_ij`` (i < j) in lexicographic order, so m = span{E_1j} comes first.
``flat_torus(n)``
    T^n = SO(2)^n with trivial isotropy; each circle has length 2*pi.
``product(a, b)``
    Block-diagonal direct sum.

Tangent vectors at a point ``[[g]]`` are given by m-coordinates ``X``
(the vector ``[[g, X]]``).  For spheres, the associated vector of R^n is
``v = g X^T e_1``, i.e. ``g`` applied to the first row of ``X``; with this
convention the canonical one-form is ``(p, v) -> p v^T - v p^T``.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CalibrationFailure, InvalidInput, UnsupportedSpace
from .lie_core import (
    RANK_TOL,
    LieAlgebraData,
    closure_residual,
    elementary_skew,
    skew_expm,
    so_basis,
)

SPHERE_CURVATURE = 1.0
CIRCLE_LENGTH = 2 * np.pi


# ---------------------------------------------------------------------------
# space specs
# ---------------------------------------------------------------------------

def parse_space_spec(spec):
    """Accept a dict, a JSON string, or a path to a JSON file."""
    if isinstance(spec, dict):
        return _normalize_spec(spec)
    if isinstance(spec, (str, os.PathLike)):
        text = str(spec)
        if os.path.isfile(text):
            with open(text) as fh:
                return _normalize_spec(json.load(fh))
        try:
            return _normalize_spec(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"space spec is neither a file nor JSON: {text!r}") from exc
    raise InvalidInput(f"cannot interpret space spec {spec!r}")


def _normalize_spec(spec):
    if not isinstance(spec, dict) or "family" not in spec:
        raise InvalidInput(f"space spec needs a 'family' key: {spec!r}")
    fam = spec["family"]
    if fam in ("sphere", "flat_torus"):
        if "n" not in spec:
            raise InvalidInput(f"{fam} spec needs 'n'")
        n = spec["n"]
        if isinstance(n, bool) or not isinstance(n, int):
            raise InvalidInput(f"'n' must be an integer, got {n!r}")
        if fam == "sphere" and n < 2:
            raise InvalidInput("sphere(n) needs n >= 2")
        if fam == "flat_torus" and n < 1:
            raise InvalidInput("flat_torus(n) needs n >= 1")
        return {"family": fam, "n": n}
    if fam == "product":
        factors = spec.get("factors")
        if not isinstance(factors, list) or len(factors) != 2:
            raise InvalidInput("product spec needs exactly two 'factors'")
        return {"family": "product", "factors": [_normalize_spec(f) for f in factors]}
    raise UnsupportedSpace(f"unknown family {fam!r}")


def space_label(spec) -> str:
    spec = parse_space_spec(spec)
    if spec["family"] == "product":
        return "x".join(space_label(f) for f in spec["factors"])
    if spec["family"] == "sphere":
        return f"S{spec['n'] - 1}"
    return f"T{spec['n']}"


# ---------------------------------------------------------------------------
# pairs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Factor:
    """One irreducible-or-flat factor of a (product) catalog space."""

    family: str
    n: int
    matrix_block: tuple
    alg_slice: tuple
    m_index: tuple

    @property
    def dim_M(self) -> int:
        return len(self.m_index)

    @property
    def curvature(self) -> float:
        return SPHERE_CURVATURE if self.family == "sphere" and self.dim_M >= 2 else 0.0

    @property
    def is_cross(self) -> bool:
        return self.family == "sphere" and self.dim_M >= 2


@dataclass(frozen=True, eq=False)
class SymmetricPair:
    """Cartan data for M = G/H.

    ``h_coords`` and ``m_coords`` hold orthonormal bases of h and m as rows of
    coefficient vectors over ``algebra.basis``.
    """

    algebra: LieAlgebraData
    h_coords: np.ndarray
    m_coords: np.ndarray
    family_tag: dict
    factors: tuple
    rank: int = field(default=-1)

    @property
    def dim_M(self) -> int:
        return self.m_coords.shape[0]

    @property
    def dim_h(self) -> int:
        return self.h_coords.shape[0]

    @property
    def d(self) -> int:
        return self.algebra.dim

    @property
    def h_basis(self):
        return list(self.algebra.matrix(self.h_coords))

    @property
    def m_basis(self):
        return list(self.algebra.matrix(self.m_coords))

    @property
    def label(self) -> str:
        return space_label(self.family_tag)

    @cached_property
    def proj_m(self) -> np.ndarray:
        return self.m_coords.T @ self.m_coords

    @cached_property
    def proj_h(self) -> np.ndarray:
        return self.h_coords.T @ self.h_coords

    def lift_m(self, X):
        """m-coordinates -> g-coordinates."""
        return np.asarray(X, dtype=float) @ self.m_coords

    def m_part(self, v):
        """g-coordinates -> m-coordinates of the m-component."""
        return np.asarray(v, dtype=float) @ self.m_coords.T

    def h_part(self, v):
        return np.asarray(v, dtype=float) @ self.h_coords.T

    def cartan_residuals(self) -> dict:
        """Residuals of the Cartan relations and of h + m = g."""
        alg = self.algebra
        H, M = self.h_coords, self.m_coords
        out = {
            "dimension": abs(self.dim_h + self.dim_M - alg.dim),
            "orthogonality": float(np.abs(H @ alg.gram @ M.T).max()) if H.size and M.size else 0.0,
        }

        def leak(A, B, P_out):
            if not (A.size and B.size):
                return 0.0
            br = alg.bracket_coords(A[:, None], B[None, :])
            return float(np.abs(br @ P_out).max())

        out["mm_in_h"] = leak(M, M, self.proj_m)
        out["hm_in_m"] = leak(H, M, self.proj_h)
        out["hh_in_h"] = leak(H, H, self.proj_m)
        return out

    def mm_spans_h(self) -> bool:
        if self.dim_h == 0:
            return True
        br = self.algebra.bracket_coords(self.m_coords[:, None], self.m_coords[None, :]).reshape(-1, self.d)
        s = np.linalg.svd(br @ self.h_coords.T, compute_uv=False)
        return int(np.sum(s > RANK_TOL * max(s.max(), 1.0))) == self.dim_h


def _raw_factor(spec):
    fam, n = spec["family"], spec["n"]
    if fam == "sphere":
        basis = so_basis(n)
        m_local = list(range(n - 1))
        return n, basis, m_local
    # flat torus: one so(2) block per circle, generator of rot(theta)
    N = 2 * n
    basis = [elementary_skew(N, 2 * k + 1, 2 * k) for k in range(n)]
    return N, basis, list(range(n))


def _flatten(spec):
    if spec["family"] == "product":
        out = []
        for f in spec["factors"]:
            out.extend(_flatten(f))
        return out
    return [spec]


def _assemble(spec, scales=None):
    """Block-diagonal algebra for a (possibly product) spec."""
    leaves = _flatten(spec)
    raws = [_raw_factor(s) for s in leaves]
    N = sum(r[0] for r in raws)
    basis, blocks, factors, m_idx = [], [], [], []
    off_mat = off_alg = 0
    m_count = 0
    for leaf, (n_mat, fb, m_local) in zip(leaves, raws):
        for B in fb:
            E = np.zeros((N, N))
            E[off_mat:off_mat + n_mat, off_mat:off_mat + n_mat] = B
            basis.append(E)
        blocks.append((off_mat, off_mat + n_mat))
        m_glob = [off_alg + i for i in m_local]
        factors.append(Factor(leaf["family"], leaf["n"], (off_mat, off_mat + n_mat),
                              (off_alg, off_alg + len(fb)), tuple(range(m_count, m_count + len(m_glob)))))
        m_idx.extend(m_glob)
        m_count += len(m_glob)
        off_mat += n_mat
        off_alg += len(fb)
    if scales is None:
        scales = [1.0] * len(blocks)
    alg = LieAlgebraData(np.array(basis), tuple(blocks), tuple(scales))
    return alg, m_idx, factors


def _pair_from(spec, alg, m_idx, factors, rank=-1):
    d = alg.dim
    eye = np.eye(d)
    h_idx = [i for i in range(d) if i not in set(m_idx)]
    return SymmetricPair(alg, eye[h_idx].reshape(len(h_idx), d), eye[m_idx].reshape(len(m_idx), d),
                         spec, tuple(factors), rank)


def _raw_trace(A, B):
    return -float(np.trace(A @ B))


def _factor_scale(pair, factor):
    """lambda for one factor from the trace form, independent of stored scales."""
    M = [pair.algebra.matrix(pair.m_coords[i]) for i in factor.m_index]
    if factor.is_cross:
        ks = []
        for a in range(len(M)):
            for b in range(a + 1, len(M)):
                X, Y = M[a], M[b]
                Z = X @ Y - Y @ X
                area = _raw_trace(X, X) * _raw_trace(Y, Y) - _raw_trace(X, Y) ** 2
                if area <= 0:
                    raise CalibrationFailure("degenerate tangent plane")
                ks.append(_raw_trace(Z, Z) / area)
        ks = np.array(ks)
        if ks.min() <= 0 or np.ptp(ks) > 1e-10 * ks.max():
            raise CalibrationFailure(f"{factor.family}({factor.n}) is not of constant positive curvature")
        return float(ks[0] / SPHERE_CURVATURE)
    # flat factor: each generator's one-parameter subgroup must close up at 2*pi
    lam = []
    for J in M:
        if np.abs(skew_expm(CIRCLE_LENGTH * J) - np.eye(J.shape[0])).max() > 1e-10:
            raise CalibrationFailure("flat generator does not have period 2*pi")
        lam.append(1.0 / _raw_trace(J, J))
    if np.ptp(lam) > 1e-12:
        raise CalibrationFailure("flat generators have unequal periods")
    return float(lam[0])


def calibrate_scale(pair: SymmetricPair):
    """Multiplier lambda on ``-trace`` making the immersion match the target geometry.

    Unit spheres: Gauss-equation sectional curvature 1.  Flat factors: every
    circle subgroup has length 2*pi.  Returns one float for a single factor
    and a tuple of per-factor values for products.
    """
    scales = tuple(_factor_scale(pair, f) for f in pair.factors)
    return scales[0] if len(scales) == 1 else scales


def build_space(spec) -> SymmetricPair:
    """Build and calibrate a catalog pair; checks every Cartan invariant."""
    spec = parse_space_spec(spec)
    raw_alg, m_idx, factors = _assemble(spec)
    raw = _pair_from(spec, raw_alg, m_idx, factors)
    lam = calibrate_scale(raw)
    scales = (lam,) if np.isscalar(lam) else lam
    alg, m_idx, factors = _assemble(spec, scales)
    # rescale basis to unit length (catalog bases are already orthogonal)
    norms = np.sqrt(np.diag(alg.gram))
    alg = LieAlgebraData(alg.basis / norms[:, None, None], alg.blocks, alg.block_scales)
    if not alg.is_orthonormal:
        raise CalibrationFailure("calibrated basis is not orthonormal")
    pair = _pair_from(spec, alg, m_idx, factors)
    res = pair.cartan_residuals()
    if res["dimension"] or res["orthogonality"] > 1e-12 or max(res["mm_in_h"], res["hm_in_m"], res["hh_in_h"]) > 1e-10:
        raise UnsupportedSpace(f"Cartan relations fail: {res}")
    if not pair.mm_spans_h():
        raise UnsupportedSpace("[m, m] does not span h")
    return _pair_from(spec, alg, m_idx, factors, rank=rank_of(pair))


# ---------------------------------------------------------------------------
# rank
# ---------------------------------------------------------------------------

def _commuting_complement(pair, chosen):
    """Basis (m-coords) of {y in m : [y, a] = 0 for a in chosen, y orthogonal to chosen}."""
    k = pair.dim_M
    alg = pair.algebra
    rows = []
    for a in chosen:
        # y -> [y, a], as a (d x k) matrix
        A = alg.bracket_coords(pair.m_coords, pair.lift_m(a)).T
        rows.append(A)
    ortho = np.array(chosen)
    op = np.vstack(rows + [ortho]) if rows else ortho
    _, s, Vt = np.linalg.svd(op, full_matrices=True)
    nz = int(np.sum(s > RANK_TOL * max(1.0, s.max() if s.size else 0.0)))
    return Vt[nz:k]


def rank_of(pair: SymmetricPair, restarts: int = 20, seed: int = 0) -> int:
    """Dimension of a maximal abelian subspace of m (greedy, best of ``restarts``)."""
    if pair.dim_M == 0:
        return 0
    rng = np.random.default_rng(seed)
    best = 0
    for _ in range(restarts):
        x = rng.standard_normal(pair.dim_M)
        chosen = [x / np.linalg.norm(x)]
        while True:
            comp = _commuting_complement(pair, chosen)
            if comp.shape[0] == 0:
                break
            y = rng.standard_normal(comp.shape[0]) @ comp
            chosen.append(y / np.linalg.norm(y))
        best = max(best, len(chosen))
    return best


# ---------------------------------------------------------------------------
# points and vectors
# ---------------------------------------------------------------------------

def _polar(g):
    U, _, Vt = np.linalg.svd(g)
    return U @ Vt


class SpacePoint:
    """A point ``[[g]]`` of M carried by its lift ``g`` (re-orthonormalized)."""

    __slots__ = ("pair", "lift", "_ad")

    def __init__(self, pair: SymmetricPair, lift):
        g = np.asarray(lift, dtype=float)
        N = pair.algebra.matrix_size
        if g.shape != (N, N):
            raise InvalidInput(f"lift must be {N}x{N}, got {g.shape}")
        self.pair = pair
        self.lift = _polar(g)
        self.lift.setflags(write=False)
        self._ad = None

    @property
    def Ad(self) -> np.ndarray:
        """``Ad_g`` on g-coordinates (orthogonal)."""
        if self._ad is None:
            self._ad = self.pair.algebra.adjoint_matrix(self.lift)
        return self._ad

    def __repr__(self):
        return f"SpacePoint({self.pair.label})"


def identity_point(pair: SymmetricPair) -> SpacePoint:
    return SpacePoint(pair, np.eye(pair.algebra.matrix_size))


def random_lifts(pair: SymmetricPair, rng, n: int) -> np.ndarray:
    """``n`` random elements of the identity component of G."""
    c = rng.uniform(-np.pi, np.pi, size=(n, pair.d))
    return skew_expm(pair.algebra.matrix(c))


def random_point(pair: SymmetricPair, rng) -> SpacePoint:
    return SpacePoint(pair, random_lifts(pair, rng, 1)[0])


@dataclass(frozen=True, eq=False)
class AmbientVector:
    """Element of V = g (coefficients over the algebra basis) attached to a point."""

    value: np.ndarray
    at: SpacePoint

    @property
    def matrix(self) -> np.ndarray:
        return self.at.pair.algebra.matrix(self.value)

    @property
    def norm(self) -> float:
        return float(np.sqrt(self.at.pair.algebra.inner_coords(self.value, self.value)))

    def __add__(self, other):
        return AmbientVector(self.value + _value(other), self.at)

    def __sub__(self, other):
        return AmbientVector(self.value - _value(other), self.at)


def _value(v):
    return v.value if isinstance(v, AmbientVector) else np.asarray(v, dtype=float)


def tangent_frame(point: SpacePoint):
    """``{Ad_g X_i}`` for the orthonormal m-basis ``{X_i}``."""
    vals = point.pair.m_coords @ point.Ad.T
    return [AmbientVector(v, point) for v in vals]


# ---------------------------------------------------------------------------
# sphere conveniences (single sphere factor only)
# ---------------------------------------------------------------------------

def _require_sphere(pair):
    if pair.family_tag["family"] != "sphere":
        raise InvalidInput("operation defined for sphere(n) spaces only")
    return pair.family_tag["n"]


def sphere_lift(pair: SymmetricPair, p, rng=None) -> SpacePoint:
    """A point whose lift sends e_1 to the unit vector ``p`` (det +1)."""
    n = _require_sphere(pair)
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p)
    rng = np.random.default_rng(0) if rng is None else rng
    A = np.column_stack([p, rng.standard_normal((n, n - 1))])
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, -1] *= -1
    return SpacePoint(pair, Q)


def sphere_position(point: SpacePoint) -> np.ndarray:
    _require_sphere(point.pair)
    return point.lift[:, 0].copy()


def sphere_tangent(point: SpacePoint, X) -> np.ndarray:
    """Vector of R^n represented by the m-coordinates ``X`` at ``point``."""
    _require_sphere(point.pair)
    return point.lift[:, 1:] @ np.asarray(X, dtype=float)


def sphere_tangent_coords(point: SpacePoint, v) -> np.ndarray:
    """Inverse of :func:`sphere_tangent` (drops the radial component)."""
    _require_sphere(point.pair)
    return point.lift[:, 1:].T @ np.asarray(v, dtype=float)
