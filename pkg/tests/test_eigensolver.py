import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import eigvalsh_tridiagonal as scipy_tridiag

from symspec import eigensolver
from symspec.errors import InvalidInput


def random_symmetric(rng, n):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 97, 300])
@pytest.mark.parametrize("method", ["householder", "lapack"])
def test_matches_numpy(rng, n, method):
    A = random_symmetric(rng, n)
    ours = eigensolver.eigvalsh(A, method=method)
    ref = np.linalg.eigvalsh(A)
    assert np.abs(ours - ref).max() < 1e-12 * max(1.0, np.abs(ref).max()) * n


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(0, 2**32 - 1))
def test_tridiagonal_ql_matches_scipy(n, seed):
    r = np.random.default_rng(seed)
    d, e = r.standard_normal(n), r.standard_normal(n - 1)
    ours = eigensolver.eigvalsh_tridiagonal(d, e)
    assert np.abs(ours - scipy_tridiag(d, e)).max() < 1e-12 * (1.0 + 3 * np.abs(np.concatenate([d, e])).max())


def test_second_difference_spectrum():
    # Dirichlet second difference: eigenvalues 2 - 2 cos(k pi / (n + 1))
    n = 200
    d, e = np.full(n, 2.0), np.full(n - 1, -1.0)
    exact = 2 - 2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
    assert np.abs(eigensolver.eigvalsh_tridiagonal(d, e) - exact).max() < 1e-13


def test_repeated_and_zero_eigenvalues():
    A = np.diag([0.0, 0.0, 1.0, 1.0, -3.0])
    Q, _ = np.linalg.qr(np.random.default_rng(1).standard_normal((5, 5)))
    ev = eigensolver.eigvalsh(Q @ A @ Q.T)
    assert np.allclose(ev, [-3, 0, 0, 1, 1], atol=1e-14)


def test_tridiagonalize_preserves_spectrum(rng):
    A = random_symmetric(rng, 50)
    for method in ("householder", "lapack", "auto"):
        d, e = eigensolver.tridiagonalize(A, method=method)
        assert np.allclose(np.sort(scipy_tridiag(d, e)), np.linalg.eigvalsh(A), atol=1e-12)


def test_sturm_counts(rng):
    A = random_symmetric(rng, 80)
    d, e = eigensolver.tridiagonalize(A)
    ev = np.linalg.eigvalsh(A)
    shifts = np.linspace(ev.min() - 1, ev.max() + 1, 37)
    expect = np.array([np.sum(ev < s) for s in shifts])
    assert np.array_equal(eigensolver.sturm_count(d, e, shifts), expect)
    assert eigensolver.sturm_count(d, e, 0.0) == int(np.sum(ev < 0))


def test_sturm_on_exact_eigenvalue():
    # eigenvalues of the 3x3 path Laplacian: 0, 1, 3 -> count strictly below 1 is 1
    d, e = np.array([1.0, 2.0, 1.0]), np.array([-1.0, -1.0])
    assert eigensolver.sturm_count(d, e, 1.0 + 1e-12) == 2
    assert eigensolver.sturm_count(d, e, 1.0 - 1e-12) == 1


def test_errors():
    with pytest.raises(InvalidInput):
        eigensolver.eigvalsh(np.ones((2, 3)))
    with pytest.raises(InvalidInput):
        eigensolver.tridiagonalize(np.eye(3), method="qr")
    with pytest.raises(InvalidInput):
        eigensolver.eigvalsh_tridiagonal(np.ones(3), np.ones(3))


def test_empty():
    assert eigensolver.eigvalsh_tridiagonal(np.zeros(0), np.zeros(0)).size == 0


FALLBACK_SCRIPT = """
import numpy as np
from symspec import _accel, eigensolver
assert not _accel.USE_NUMBA
r = np.random.default_rng(5)
A = r.standard_normal((120, 120)); A = A + A.T
d, e = eigensolver.tridiagonalize(A, method="householder")
ev = eigensolver.eigvalsh_tridiagonal(d, e)
assert np.abs(ev - np.linalg.eigvalsh(A)).max() < 1e-11
s = np.linspace(-20, 20, 11)
assert np.array_equal(eigensolver.sturm_count(d, e, s), [np.sum(ev < x) for x in s])
print("ok")
"""


def test_numpy_fallback_path():
    env = dict(os.environ, SYMSPEC_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", FALLBACK_SCRIPT], env=env, capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert out.stdout.strip() == "ok"
