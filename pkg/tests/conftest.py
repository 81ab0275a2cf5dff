import numpy as np
import pytest

from symspec.hypersurface import build_hypersurface
from symspec.spectral import spectrum
from symspec.symmetric_space import build_space

S2 = {"family": "sphere", "n": 3}
S3 = {"family": "sphere", "n": 4}
T3 = {"family": "flat_torus", "n": 3}
S2xS2 = {"family": "product", "factors": [S2, S2]}

CATALOG_SPACES = {
    "S2": S2,
    "S3": S3,
    "S4": {"family": "sphere", "n": 5},
    "T2": {"family": "flat_torus", "n": 2},
    "T3": T3,
    "S2xS2": S2xS2,
    "S3xS2": {"family": "product", "factors": [S3, S2]},
}

_SPACE_CACHE = {}


def space(spec):
    key = repr(spec)
    if key not in _SPACE_CACHE:
        _SPACE_CACHE[key] = build_space(spec)
    return _SPACE_CACHE[key]


_MESH_CACHE = {}
_SPECTRUM_CACHE = {}


def mesh_of(spec, catalog_id, res=None):
    key = (repr(spec), catalog_id, None if res is None else tuple(res))
    if key not in _MESH_CACHE:
        _MESH_CACHE[key] = build_hypersurface(space(spec), catalog_id, res)
    return _MESH_CACHE[key]


def spectrum_of(spec, catalog_id, res=None):
    """Full spectra are expensive at 64^2; share them across test modules."""
    key = (repr(spec), catalog_id, None if res is None else tuple(res))
    if key not in _SPECTRUM_CACHE:
        _SPECTRUM_CACHE[key] = spectrum(mesh_of(spec, catalog_id, res))
    return _SPECTRUM_CACHE[key]


def E(n, i, j):
    """E_ij with 1-based indices, built by hand."""
    m = np.zeros((n, n))
    m[i - 1, j - 1] = 1.0
    m[j - 1, i - 1] = -1.0
    return m


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria report one line each at the end of the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
