"""The canonical virtual immersion of a symmetric space and its identity checks.

At ``p = [[g]]`` the one-form sends the tangent vector ``[[g, X]]`` to
``Ad_g X`` in V = g.  Tangent space ``Ad_g m``, normal space ``Ad_g h``,

    II(X, Y)     = Ad_g [X, Y]
    S_eta(X)     = -Ad_g [X, eta]
    R_perp(X, Y) eta = Ad_g [[X, Y], eta]
    <R(X, Y)Z, W> = <[X, Y], [Z, W]>

with X, Y given as m-coordinates and eta pulled back to h.  Curvature uses
the convention in which the unit sphere has R(X, Y, X, Y) = +1 for an
orthonormal pair.

All public functions take one point.  The ``_batch`` helpers do the same
work on stacks of ``Ad_g`` matrices and are what :func:`verify_fundamental`
uses.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.linalg import expm

from .errors import InvalidInput
from .symmetric_space import AmbientVector, SpacePoint, SymmetricPair, random_lifts

NORMAL_TOL = 1e-8
ALGEBRAIC_TOL = 1e-10
FD_RATIO = (3.5, 4.5)
# below this a finite-difference residual is round-off: the identity holds exactly
FD_EXACT_FLOOR = 1e-9


@dataclass(frozen=True, eq=False)
class ImmersionContext:
    """V = g with the orthonormal basis theta_i and the induced basis of wedge^2 V."""

    pair: SymmetricPair
    d: int = field(init=False)
    wedge_basis: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "d", self.pair.d)
        object.__setattr__(self, "wedge_basis", tuple(combinations(range(self.pair.d), 2)))

    @property
    def n_pairs(self) -> int:
        return len(self.wedge_basis)

    def wedge(self, a, b) -> np.ndarray:
        """Coordinates of ``a ^ b`` on ``theta_i ^ theta_j`` (i < j); stackable."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        i, j = np.array(self.wedge_basis, dtype=int).T.reshape(2, -1)
        return a[..., i] * b[..., j] - a[..., j] * b[..., i]

    def wedge_inner(self, a, b, c, e) -> float:
        return float(np.dot(self.wedge(a, b), self.wedge(c, e)))


# ---------------------------------------------------------------------------
# batched kernels (Ad: (..., d, d); vectors in m-, h- or g-coordinates)
# ---------------------------------------------------------------------------

def _apply(Ad, v):
    return np.einsum("...ij,...j->...i", Ad, v)


def _pull(Ad, v):
    return np.einsum("...ji,...j->...i", Ad, v)


def _bracket_m(pair, X, Y):
    return pair.algebra.bracket_coords(pair.lift_m(X), pair.lift_m(Y))


def omega_batch(pair, Ad, X):
    return _apply(Ad, pair.lift_m(X))


def split_batch(pair, Ad, v):
    pulled = _pull(Ad, v)
    tangent = _apply(Ad, pulled @ pair.proj_m)
    return tangent, v - tangent


def sff_batch(pair, Ad, X, Y):
    return _apply(Ad, _bracket_m(pair, X, Y))


def shape_batch(pair, Ad, eta, X):
    """``S_eta X`` as a vector of V; ``eta`` in V-coordinates."""
    return -_apply(Ad, pair.algebra.bracket_coords(pair.lift_m(X), _pull(Ad, eta)))


def normal_curvature_batch(pair, Ad, X, Y, eta):
    return _apply(Ad, pair.algebra.bracket_coords(_bracket_m(pair, X, Y), _pull(Ad, eta)))


def curvature_batch(pair, X, Y, Z, W):
    return np.einsum("...i,...i->...", _bracket_m(pair, X, Y), _bracket_m(pair, Z, W))


def reference_curvature(pair: SymmetricPair, X, Y, Z, W):
    """Constant-curvature model, factor by factor, independent of brackets.

    Each factor of curvature K contributes ``K (<X,Z><Y,W> - <X,W><Y,Z>)``
    evaluated on that factor's m-coordinates.
    """
    X, Y, Z, W = (np.asarray(v, dtype=float) for v in (X, Y, Z, W))
    total = np.zeros(np.broadcast_shapes(X.shape, Y.shape, Z.shape, W.shape)[:-1])
    for f in pair.factors:
        if f.curvature == 0.0:
            continue
        idx = list(f.m_index)
        x, y, z, w = X[..., idx], Y[..., idx], Z[..., idx], W[..., idx]
        dot = lambda a, b: np.einsum("...i,...i->...", a, b)
        total = total + f.curvature * (dot(x, z) * dot(y, w) - dot(x, w) * dot(y, z))
    return total


def _sq(v):
    return np.einsum("...i,...i->...", v, v)


def acs_batch(pair, Ad, x, y, frame=None, curvature=None):
    """The ACS quantity, transcribed term by term.

    ``frame`` holds an orthonormal basis of T_pM as rows of m-coordinates
    (default: the standard one); ``curvature(X, Y, Z, W)`` defaults to the
    bracket formula.
    """
    k = pair.dim_M
    frame = np.eye(k) if frame is None else np.asarray(frame, dtype=float)
    curvature = curvature or (lambda *v: curvature_batch(pair, *v))
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(x.shape, y.shape, Ad.shape[:-2] + (k,))
    x = np.broadcast_to(x, shape)
    y = np.broadcast_to(y, shape)
    Ad_e = Ad[..., None, :, :]
    E = np.broadcast_to(frame, shape[:-1] + frame.shape)

    def trace_term(v):
        vv = np.broadcast_to(v[..., None, :], E.shape)
        ii = sff_batch(pair, Ad_e, E, vv)
        return np.sum(_sq(ii) - curvature(E, vv, E, vv), axis=-1)

    mixed = _sq(sff_batch(pair, Ad, x, y)) - curvature(x, y, x, y)
    return _sq(y) * trace_term(x) + _sq(x) * trace_term(y) - mixed - _sq(sff_batch(pair, Ad, y, y))


# ---------------------------------------------------------------------------
# single-point API
# ---------------------------------------------------------------------------

def _vec(v):
    return v.value if isinstance(v, AmbientVector) else np.asarray(v, dtype=float)


def _m(pair, X):
    X = np.asarray(X, dtype=float)
    if X.shape != (pair.dim_M,):
        raise InvalidInput(f"expected {pair.dim_M} m-coordinates, got shape {X.shape}")
    return X


def _normal(point, eta):
    eta = _vec(eta)
    if eta.shape != (point.pair.d,):
        raise InvalidInput(f"expected a vector of V (length {point.pair.d}), got shape {eta.shape}")
    tangent, _ = split_batch(point.pair, point.Ad, eta)
    if np.linalg.norm(tangent) > NORMAL_TOL * max(1.0, np.linalg.norm(eta)):
        raise InvalidInput("eta is not normal at this point")
    return eta


def omega(point: SpacePoint, X) -> AmbientVector:
    """``Ad_g X`` for the m-coordinates ``X``."""
    return AmbientVector(omega_batch(point.pair, point.Ad, _m(point.pair, X)), point)


def split(v: AmbientVector):
    """(tangent, normal) parts of ``v`` at its base point."""
    t, n = split_batch(v.at.pair, v.at.Ad, _vec(v))
    return AmbientVector(t, v.at), AmbientVector(n, v.at)


def second_fundamental_form(point: SpacePoint, X, Y) -> AmbientVector:
    p = point.pair
    return AmbientVector(sff_batch(p, point.Ad, _m(p, X), _m(p, Y)), point)


def shape_operator(point: SpacePoint, eta, X) -> AmbientVector:
    p = point.pair
    return AmbientVector(shape_batch(p, point.Ad, _normal(point, eta), _m(p, X)), point)


def curvature(point: SpacePoint, X, Y, Z, W) -> float:
    """``<R(X, Y)Z, W> = <[X, Y], [Z, W]>`` (independent of the point)."""
    p = point.pair
    return float(curvature_batch(p, *(_m(p, v) for v in (X, Y, Z, W))))


def normal_curvature(point: SpacePoint, X, Y, eta) -> AmbientVector:
    p = point.pair
    return AmbientVector(normal_curvature_batch(p, point.Ad, _m(p, X), _m(p, Y), _normal(point, eta)), point)


def acs(point: SpacePoint, x, y, frame=None, curvature=None) -> float:
    p = point.pair
    return float(acs_batch(p, point.Ad, _m(p, x), _m(p, y), frame=frame, curvature=curvature))


def random_orthonormal_pairs(pair, rng, n):
    """``n`` orthonormal pairs of m-coordinates."""
    A = rng.standard_normal((n, pair.dim_M, 2))
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diagonal(R, axis1=-2, axis2=-1))[:, None, :]
    return Q[..., 0], Q[..., 1]


def acs_sample(pair: SymmetricPair, n_samples: int, rng=None) -> float:
    """Largest |ACS| over random points and orthonormal pairs."""
    rng = np.random.default_rng() if rng is None else rng
    if pair.dim_M < 2:
        return 0.0
    Ad = pair.algebra.adjoint_matrix(random_lifts(pair, rng, n_samples))
    x, y = random_orthonormal_pairs(pair, rng, n_samples)
    return float(np.abs(acs_batch(pair, Ad, x, y)).max())


# ---------------------------------------------------------------------------
# residual report
# ---------------------------------------------------------------------------

@dataclass
class ResidualReport:
    """Per-identity maximal residuals; serializes with sorted keys."""

    space: str
    entries: dict = field(default_factory=dict)

    def add_algebraic(self, name, residual, n):
        self.entries[name] = {"kind": "algebraic", "max_residual": float(residual), "n_samples": int(n),
                              "fd_step": None, "passed": bool(residual < ALGEBRAIC_TOL)}

    def add_fd(self, name, res_h, res_h2, h, n):
        exact = max(res_h, res_h2) < FD_EXACT_FLOOR
        ratio = res_h / res_h2 if res_h2 > 0 else float("inf")
        ok = exact or FD_RATIO[0] <= ratio <= FD_RATIO[1]
        self.entries[name] = {
            "kind": "finite_difference", "max_residual": float(res_h), "n_samples": int(n), "fd_step": float(h),
            "max_residual_half_step": float(res_h2), "ratio": None if exact else float(ratio),
            "constant": float(res_h / h**2), "exact": bool(exact), "passed": bool(ok),
        }

    @property
    def passed(self) -> bool:
        return all(e["passed"] for e in self.entries.values())

    def to_dict(self):
        return {"space": self.space, "passed": self.passed, "identities": self.entries}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _poly(c, t):
    return c[0] + t * c[1] + t * t * c[2]


class _Curves:
    """Lifts ``g exp(t X)`` for a batch of base points and m-directions."""

    def __init__(self, pair, g, X):
        self.pair = pair
        self.g = g
        w, V = np.linalg.eigh(1j * pair.algebra.matrix(pair.lift_m(X)))
        self._w, self._V = w, V

    def lift(self, t):
        e = np.exp(-1j * t * self._w)
        ex = ((self._V * e[..., None, :]) @ np.conj(np.swapaxes(self._V, -1, -2))).real
        return self.g @ ex

    def Ad(self, t):
        return self.pair.algebra.adjoint_matrix(self.lift(t))


def _covariant(pair, curves, h, F, Ad0):
    """Levi-Civita derivative at t=0 of the field F(t) along the curve (m-coords)."""
    Op = omega_batch(pair, curves.Ad(h), _poly(F, h))
    Om = omega_batch(pair, curves.Ad(-h), _poly(F, -h))
    return pair.m_part(_pull(Ad0, (Op - Om) / (2 * h)))


def _D_II(pair, curves, h, F, G, Ad0):
    """``(D_X II)(F, G)`` at t = 0 along the curve with velocity X."""
    IIp = sff_batch(pair, curves.Ad(h), _poly(F, h), _poly(G, h))
    IIm = sff_batch(pair, curves.Ad(-h), _poly(F, -h), _poly(G, -h))
    dF = _covariant(pair, curves, h, F, Ad0)
    dG = _covariant(pair, curves, h, G, Ad0)
    return (IIp - IIm) / (2 * h) - sff_batch(pair, Ad0, dF, G[0]) - sff_batch(pair, Ad0, F[0], dG)


def _nabla_R(pair, curves, h, fields, Ad0):
    Rp = curvature_batch(pair, *(_poly(F, h) for F in fields))
    Rm = curvature_batch(pair, *(_poly(F, -h) for F in fields))
    out = (Rp - Rm) / (2 * h)
    vals = [F[0] for F in fields]
    for i, F in enumerate(fields):
        args = list(vals)
        args[i] = _covariant(pair, curves, h, F, Ad0)
        out = out - curvature_batch(pair, *args)
    return out


def _dexp(A, B):
    """Directional derivative of ``exp`` at ``A`` along ``B`` (block-matrix trick)."""
    A, B = np.broadcast_arrays(A, B)
    n = A.shape[-1]
    big = np.zeros(A.shape[:-2] + (2 * n, 2 * n))
    big[..., :n, :n] = big[..., n:, n:] = A
    big[..., :n, n:] = B
    full = expm(big)
    return full[..., :n, :n], full[..., :n, n:]


def _d_omega(pair, g, X, Y, Q, h):
    """Tangent part of dOmega(d_s, d_t): exact inner derivative, central outer difference.

    Chart ``g exp(sX + tY + s^2 Q0 + st Q1 + t^2 Q2)``; the quadratic terms
    keep the coordinate lines off geodesics so the truncation error is generic.
    """
    alg = pair.algebra
    Xm, Ym = alg.matrix(pair.lift_m(X)), alg.matrix(pair.lift_m(Y))
    Qm = alg.matrix(pair.lift_m(Q))

    def omega_partial(s, t, which):
        A = s * Xm + t * Ym + s * s * Qm[0] + s * t * Qm[1] + t * t * Qm[2]
        B = Xm + 2 * s * Qm[0] + t * Qm[1] if which == "s" else Ym + s * Qm[1] + 2 * t * Qm[2]
        e, de = _dexp(A, B)
        kk = g @ e
        xi = np.swapaxes(kk, -1, -2) @ g @ de
        return _apply(alg.adjoint_matrix(kk), alg.coords(xi) @ pair.proj_m)

    d_s = (omega_partial(h, 0.0, "t") - omega_partial(-h, 0.0, "t")) / (2 * h)
    d_t = (omega_partial(0.0, h, "s") - omega_partial(0.0, -h, "s")) / (2 * h)
    tangent, _ = split_batch(pair, alg.adjoint_matrix(g), d_s - d_t)
    return np.linalg.norm(tangent, axis=-1)


def verify_fundamental(pair: SymmetricPair, n_samples: int = 500, fd_step: float = 1e-3, rng=None) -> ResidualReport:
    """Check every structural identity on random samples.

    Algebraic identities must hold to 1e-10.  Finite-difference identities are
    evaluated at ``fd_step`` and ``fd_step / 2`` on the same samples and must
    show a residual ratio in [3.5, 4.5], unless both residuals are at
    round-off level (the identity then holds exactly, e.g. on flat tori).
    """
    if n_samples < 1:
        raise InvalidInput("n_samples must be >= 1")
    if not fd_step > 0:
        raise InvalidInput("fd_step must be positive")
    rng = np.random.default_rng() if rng is None else rng
    alg, k, n = pair.algebra, pair.dim_M, n_samples
    report = ResidualReport(pair.label)

    g = random_lifts(pair, rng, n)
    Ad = alg.adjoint_matrix(g)
    X, Y, Z, W = rng.standard_normal((4, n, k))
    eta_h, zeta_h = rng.standard_normal((2, n, pair.dim_h))
    eta = _apply(Ad, eta_h @ pair.h_coords)
    zeta = _apply(Ad, zeta_h @ pair.h_coords)
    norm = lambda v: np.linalg.norm(v, axis=-1)
    mx = lambda v: float(np.max(np.abs(v))) if np.size(v) else 0.0

    OX = omega_batch(pair, Ad, X)
    report.add_algebraic("isometry", mx(norm(OX) - norm(X)), n)
    report.add_algebraic("isometry_polarized", mx(np.einsum("ni,ni->n", OX, omega_batch(pair, Ad, Y)) - np.einsum("ni,ni->n", X, Y)), n)

    IIxy = sff_batch(pair, Ad, X, Y)
    report.add_algebraic("sff_normal", mx(norm(split_batch(pair, Ad, IIxy)[0])), n)
    report.add_algebraic("sff_skew", mx(norm(IIxy + sff_batch(pair, Ad, Y, X))), n)

    S_eta_X = shape_batch(pair, Ad, eta, X)
    wein = np.einsum("ni,ni->n", S_eta_X, omega_batch(pair, Ad, Y)) - np.einsum("ni,ni->n", IIxy, eta)
    report.add_algebraic("weingarten", mx(wein), n)

    ii = lambda A, B: sff_batch(pair, Ad, A, B)
    dot = lambda a, b: np.einsum("ni,ni->n", a, b)
    gauss = dot(ii(Y, W), ii(X, Z)) - dot(ii(X, W), ii(Y, Z))
    report.add_algebraic("gauss", mx(gauss - reference_curvature(pair, X, Y, Z, W)), n)
    report.add_algebraic("curvature_bracket_form", mx(curvature_batch(pair, X, Y, Z, W) - reference_curvature(pair, X, Y, Z, W)), n)
    report.add_algebraic("sectional_equals_sff_sq", mx(curvature_batch(pair, X, Y, X, Y) - _sq(IIxy)), n)
    bianchi = dot(ii(X, Y), ii(Z, W)) + dot(ii(Y, Z), ii(X, W)) + dot(ii(Z, X), ii(Y, W))
    report.add_algebraic("bianchi_cyclic", mx(bianchi), n)
    Ad_other = alg.adjoint_matrix(random_lifts(pair, rng, n))
    report.add_algebraic("curvature_ad_invariant",
                         mx(dot(sff_batch(pair, Ad_other, X, Y), sff_batch(pair, Ad_other, Z, W)) - dot(ii(X, Y), ii(Z, W))), n)

    # Ricci: shape operators as k x k matrices in the frame Ad_g m_a
    E = np.eye(k)
    frame = omega_batch(pair, Ad[:, None], E[None])                      # (n, k, d)
    S_eta = np.einsum("nbd,nad->nab", shape_batch(pair, Ad[:, None], eta[:, None], E[None]), frame)
    S_zeta = np.einsum("nbd,nad->nab", shape_batch(pair, Ad[:, None], zeta[:, None], E[None]), frame)
    comm = np.swapaxes(S_eta, 1, 2) @ S_zeta - np.swapaxes(S_zeta, 1, 2) @ S_eta
    lhs = dot(normal_curvature_batch(pair, Ad, X, Y, eta), zeta)
    rhs = -np.einsum("na,nab,nb->n", Y, comm, X)
    report.add_algebraic("ricci", mx(lhs - rhs), n)
    report.add_algebraic("normal_curvature_normal", mx(norm(split_batch(pair, Ad, normal_curvature_batch(pair, Ad, X, Y, eta))[0])), n)

    if k >= 2:
        x, y = random_orthonormal_pairs(pair, rng, n)
        report.add_algebraic("acs", mx(acs_batch(pair, Ad, x, y)), n)

    # finite-difference identities, same samples at h and h/2
    fd_Y, fd_Z, fd_W, fd_V = (rng.standard_normal((3, n, k)) * np.array([1.0, 0.5, 0.25])[:, None, None]
                              for _ in range(4))
    fd_X = rng.standard_normal((3, n, k)) * np.array([1.0, 0.5, 0.25])[:, None, None]
    chart_Q = 0.5 * rng.standard_normal((3, n, k))
    curves_X = _Curves(pair, g, X)
    curves_Y = _Curves(pair, g, fd_Y[0])
    results = {"d_omega_tangency": [], "locsym_dII": [], "codazzi": [], "nabla_R": []}
    for h in (fd_step, fd_step / 2):
        results["d_omega_tangency"].append(mx(_d_omega(pair, g, X, Y, chart_Q, h)))
        dII = _D_II(pair, curves_X, h, fd_Y, fd_Z, Ad)
        expect = _apply(Ad, alg.bracket_coords(pair.lift_m(X), _bracket_m(pair, fd_Y[0], fd_Z[0])))
        results["locsym_dII"].append(mx(norm(dII - expect)))
        fX = fd_X.copy()
        fX[0] = X
        dII_swap = _D_II(pair, curves_Y, h, fX, fd_Z, Ad)
        diff = split_batch(pair, Ad, dII - dII_swap)[1]
        results["codazzi"].append(mx(norm(diff)))
        results["nabla_R"].append(mx(_nabla_R(pair, curves_X, h, (fd_Y, fd_Z, fd_W, fd_V), Ad)))
    for name, (r1, r2) in results.items():
        report.add_fd(name, r1, r2, fd_step, n)
    return report
