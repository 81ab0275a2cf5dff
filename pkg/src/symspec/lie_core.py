"""Matrix Lie algebra kernel.

Elements of an algebra are handled in two interchangeable forms: square
matrices (for brackets and conjugation) and coefficient vectors over the
algebra's basis (for everything metric).  The invariant form is a
block-wise multiple of the negative trace form,

    <A, B> = sum_b  scale_b * (-trace(A_bb B_bb)),

with one scale per diagonal block so that products of spaces keep their
factor metrics.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidInput, NotASubalgebra

RANK_TOL = 1e-10
DROP_TOL = 1e-12


def bracket(A, B):
    """Commutator ``AB - BA`` (works on stacks of matrices too)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2] or A.shape[-2:] != B.shape[-2:]:
        raise InvalidInput(f"bracket needs square matrices of equal size, got {A.shape} and {B.shape}")
    return A @ B - B @ A


def elementary_skew(n, i, j):
    """``E_ij = e_i e_j^T - e_j e_i^T`` with 0-based indices."""
    E = np.zeros((n, n))
    E[i, j] = 1.0
    E[j, i] = -1.0
    return E


def skew_expm(X):
    """Matrix exponential of real skew-symmetric matrices (stackable).

    Uses the Hermitian eigendecomposition of ``iX``; results are orthogonal
    to machine precision.
    """
    X = np.asarray(X, dtype=float)
    w, V = np.linalg.eigh(1j * X)
    phase = np.exp(-1j * w)
    out = (V * phase[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))
    return out.real


@dataclass(frozen=True, eq=False)
class LieAlgebraData:
    """A real matrix Lie algebra with a block-wise invariant inner product.

    ``basis`` has shape ``(dim, N, N)``.  ``blocks`` lists the ``(start, stop)``
    matrix index ranges of the diagonal blocks and ``block_scales`` the
    multiplier of ``-trace`` on each.
    """

    basis: np.ndarray
    blocks: tuple
    block_scales: tuple

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float)
        if basis.ndim != 3 or basis.shape[1] != basis.shape[2]:
            raise InvalidInput(f"basis must have shape (dim, N, N), got {basis.shape}")
        if len(self.blocks) != len(self.block_scales):
            raise InvalidInput("one scale per block required")
        if any(s <= 0 for s in self.block_scales):
            raise InvalidInput("block scales must be positive")
        basis.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "blocks", tuple(tuple(int(x) for x in b) for b in self.blocks))
        object.__setattr__(self, "block_scales", tuple(float(s) for s in self.block_scales))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def matrix_size(self) -> int:
        return self.basis.shape[1]

    @property
    def scale(self):
        """The common trace-form multiplier, or the per-block tuple if they differ."""
        scales = set(self.block_scales)
        if len(scales) == 1:
            return self.block_scales[0]
        return self.block_scales

    @cached_property
    def weight(self) -> np.ndarray:
        W = np.zeros((self.matrix_size, self.matrix_size))
        for (a, b), s in zip(self.blocks, self.block_scales):
            W[a:b, a:b] = s
        return W

    @cached_property
    def gram(self) -> np.ndarray:
        return self.inner(self.basis[:, None], self.basis[None, :])

    @cached_property
    def _coord_map(self) -> np.ndarray:
        dual = -self.weight * np.swapaxes(self.basis, -1, -2)
        return np.einsum("kl,lac->kac", np.linalg.inv(self.gram), dual)

    @cached_property
    def structure_constants(self) -> np.ndarray:
        """``C[i, j, k]``: coefficient of basis k in ``[B_i, B_j]``."""
        return self.coords(bracket(self.basis[:, None], self.basis[None, :]))

    @cached_property
    def is_orthonormal(self) -> bool:
        return bool(np.allclose(self.gram, np.eye(self.dim), atol=1e-12))

    # -- conversions -------------------------------------------------------

    def inner(self, A, B):
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        return -np.sum(self.weight * A * np.swapaxes(B, -1, -2), axis=(-2, -1))

    def coords(self, A) -> np.ndarray:
        """Coefficients of (the projection of) ``A`` on the basis."""
        return np.einsum("...ac,kac->...k", np.asarray(A, dtype=float), self._coord_map)

    def matrix(self, c) -> np.ndarray:
        return np.einsum("...k,kab->...ab", np.asarray(c, dtype=float), self.basis)

    def inner_coords(self, x, y):
        return np.einsum("...i,ij,...j->...", x, self.gram, y)

    def bracket_coords(self, x, y):
        return np.einsum("...i,...j,ijk->...k", x, y, self.structure_constants)

    def ad(self, x) -> np.ndarray:
        """Matrix of ``ad_x`` acting on coefficient vectors."""
        return np.einsum("...i,ijk->...kj", x, self.structure_constants)

    def adjoint_matrix(self, g) -> np.ndarray:
        """Matrix of ``Ad_g`` on coefficient vectors; ``g`` may be a stack."""
        g = np.asarray(g, dtype=float)
        ginv = np.linalg.inv(g)
        conj = g[..., None, :, :] @ self.basis @ ginv[..., None, :, :]
        # conj[..., j] is Ad_g B_j; coords give column j
        return np.swapaxes(self.coords(conj), -1, -2)

    def validate(self, rng=None, n_samples=20) -> dict:
        """Residuals of the type invariants (skewness, SPD gram, closure, Ad-invariance)."""
        rng = np.random.default_rng(0) if rng is None else rng
        B = self.basis
        scale = max(1.0, float(np.abs(B).max()))
        skew = float(np.abs(B + np.swapaxes(B, -1, -2)).max()) / scale
        eig = np.linalg.eigvalsh(0.5 * (self.gram + self.gram.T))
        brackets = bracket(B[:, None], B[None, :])
        recon = self.matrix(self.coords(brackets))
        norm = max(1.0, float(np.abs(brackets).max()))
        closure = float(np.abs(brackets - recon).max()) / norm
        X, Y, Z = (rng.standard_normal((3, n_samples, self.dim)))
        lhs = self.inner_coords(self.bracket_coords(Z, X), Y) + self.inner_coords(X, self.bracket_coords(Z, Y))
        invariance = float(np.abs(lhs).max()) if self.dim else 0.0
        return {
            "skew": skew,
            "gram_min_eig": float(eig.min()) if eig.size else 1.0,
            "gram_asym": float(np.abs(self.gram - self.gram.T).max()) if self.dim else 0.0,
            "closure": closure,
            "ad_invariance": invariance,
        }


def inner(alg: LieAlgebraData, A, B) -> float:
    """Invariant inner product ``scale * (-trace(AB))`` (block-wise)."""
    return float(alg.inner(A, B))


def adjoint(g, X):
    """``g X g^{-1}``."""
    g = np.asarray(g, dtype=float)
    X = np.asarray(X, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1] or X.shape != g.shape:
        raise InvalidInput(f"adjoint needs square matrices of equal size, got {g.shape} and {X.shape}")
    if np.linalg.cond(g) > 1e12:
        raise InvalidInput("group element is not invertible")
    return g @ X @ np.linalg.inv(g)


def _orthonormalize_coords(gram, vecs, tol=DROP_TOL):
    out = []
    for v in np.atleast_2d(vecs):
        norm0 = np.sqrt(max(float(v @ gram @ v), 0.0))
        if norm0 == 0.0:
            continue
        w = v.astype(float).copy()
        for _ in range(2):
            for q in out:
                w -= (q @ gram @ w) * q
        res = np.sqrt(max(float(w @ gram @ w), 0.0))
        if res < tol * max(1.0, norm0):
            continue
        out.append(w / res)
    return np.array(out).reshape(len(out), gram.shape[0])


def orthonormalize(alg: LieAlgebraData, vectors):
    """Orthonormal spanning list (Gram-Schmidt for the invariant form)."""
    vectors = list(vectors)
    if not vectors:
        return []
    C = alg.coords(np.array(vectors, dtype=float))
    Q = _orthonormalize_coords(alg.gram, C)
    return list(alg.matrix(Q))


def closure_residual(alg: LieAlgebraData, vectors) -> float:
    """Largest relative distance of a pairwise bracket from ``span(vectors)``."""
    vectors = list(vectors)
    if not vectors:
        return 0.0
    Q = _orthonormalize_coords(alg.gram, alg.coords(np.array(vectors, dtype=float)))
    if len(Q) == 0:
        return 0.0
    br = alg.bracket_coords(Q[:, None], Q[None, :]).reshape(-1, alg.dim)
    proj = (br @ alg.gram @ Q.T) @ Q
    res = np.sqrt(np.maximum(alg.inner_coords(br - proj, br - proj), 0.0))
    return float(res.max())


def center_of_subalgebra(alg: LieAlgebraData, h_basis):
    """Orthonormal basis (as matrices) of the center of ``span(h_basis)``."""
    h_basis = list(h_basis)
    if not h_basis:
        return []
    if closure_residual(alg, h_basis) > RANK_TOL:
        raise NotASubalgebra("span of the given matrices is not closed under the bracket")
    Q = _orthonormalize_coords(alg.gram, alg.coords(np.array(h_basis, dtype=float)))
    k = len(Q)
    if k == 0:
        return []
    L = np.linalg.cholesky(alg.gram)
    # column i: stacked coordinates of [q_i, q_j] over j, made Euclidean
    br = alg.bracket_coords(Q[:, None], Q[None, :]) @ L
    op = br.reshape(k, -1).T
    _, s, Vt = np.linalg.svd(op, full_matrices=True)
    smax = s.max() if s.size else 0.0
    if smax <= 1e-14:
        kernel = np.eye(k)
    else:
        nz = int(np.sum(s > RANK_TOL * smax))
        kernel = Vt[nz:]
    return list(alg.matrix(kernel @ Q))


def so_basis(n):
    """``[E_ij for i < j]`` in lexicographic order (0-based)."""
    return [elementary_skew(n, i, j) for i in range(n) for j in range(i + 1, n)]
