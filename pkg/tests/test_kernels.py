"""Compiled and numpy kernels must agree."""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from curvescope import _kernels

py = _kernels.get_backend("python")
try:
    cy = _kernels.get_backend("cython")
except ImportError:  # extension not built
    cy = None

needs_cython = pytest.mark.skipif(cy is None, reason="compiled kernels not built")
binary = arrays(np.bool_, st.tuples(st.integers(1, 20), st.integers(1, 20)))


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.get_backend("fortran")


def test_backend_names():
    assert _kernels.BACKEND in ("python", "cython")


def test_pure_fallback_env(monkeypatch):
    import importlib

    monkeypatch.setenv("CURVESCOPE_PURE_PYTHON", "1")
    name, impl = _kernels._select()
    assert name == "python" and impl is py
    importlib.reload(_kernels)
    monkeypatch.delenv("CURVESCOPE_PURE_PYTHON")
    importlib.reload(_kernels)


@needs_cython
class TestParity:
    @given(st.integers(0, 2**32 - 1), st.integers(3, 24), st.integers(3, 24))
    def test_nonmax(self, seed, m, n):
        rng = np.random.default_rng(seed)
        gx, gy = rng.standard_normal((2, m, n))
        gx[rng.random((m, n)) < 0.2] = 0.0
        mag = np.hypot(gx, gy)
        np.testing.assert_array_equal(py.nonmax_suppress(mag, gx, gy), cy.nonmax_suppress(mag, gx, gy))

    @given(binary, st.integers(0, 2**32 - 1))
    def test_hysteresis(self, weak, seed):
        strong = weak & (np.random.default_rng(seed).random(weak.shape) < 0.2)
        np.testing.assert_array_equal(py.hysteresis(strong, weak), cy.hysteresis(strong, weak))

    @given(binary)
    def test_zhang_suen(self, img):
        np.testing.assert_array_equal(py.zhang_suen(img), cy.zhang_suen(img))

    @given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.5), st.integers(1, 3))
    def test_dog_extrema(self, seed, thr, border):
        dog = np.random.default_rng(seed).standard_normal((5, 17, 19))
        np.testing.assert_array_equal(py.dog_extrema(dog, thr, border), cy.dog_extrema(dog, thr, border))

    def test_dog_extrema_plateau(self):
        dog = np.zeros((3, 8, 8))
        dog[1, 4, 4] = 1.0
        dog[1, 4, 5] = 1.0
        np.testing.assert_array_equal(py.dog_extrema(dog, 0.1, 1), cy.dog_extrema(dog, 0.1, 1))

    @given(st.integers(0, 2**32 - 1), st.floats(0, 2 * np.pi), st.floats(1.0, 6.0))
    def test_descriptor(self, seed, angle, width):
        img = np.random.default_rng(seed).random((40, 44))
        radius = int(round(width * np.sqrt(2) * 2.5))
        a = py.sift_descriptor(img, 20, 21, angle, width, radius, 4, 8)
        b = cy.sift_descriptor(img, 20, 21, angle, width, radius, 4, 8)
        assert a.shape == (128,)
        np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


class TestNonmax:
    def test_ridge_kept(self):
        mag = np.zeros((5, 5))
        mag[:, 2] = 1.0
        mag[:, 1] = mag[:, 3] = 0.5
        gx = np.ones((5, 5))
        gy = np.zeros((5, 5))
        out = py.nonmax_suppress(mag, gx, gy)
        assert out[1:4, 2].all() and out.sum() == 3

    def test_border_suppressed(self):
        mag = np.ones((4, 4))
        out = py.nonmax_suppress(mag, np.ones((4, 4)), np.zeros((4, 4)))
        assert not out[0].any() and not out[:, 0].any()


class TestHysteresis:
    def test_linked_weak_kept(self):
        weak = np.zeros((5, 5), dtype=bool)
        weak[1, 1:4] = True
        weak[3, 3] = True
        strong = np.zeros_like(weak)
        strong[1, 1] = True
        out = py.hysteresis(strong, weak)
        assert out[1, 1:4].all() and not out[3, 3]

    def test_diagonal_link(self):
        weak = np.eye(4, dtype=bool)
        strong = np.zeros_like(weak)
        strong[0, 0] = True
        assert py.hysteresis(strong, weak).sum() == 4
