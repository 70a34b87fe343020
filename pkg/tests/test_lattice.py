import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qca.errors import BoundaryError, SingularIntegral, SingularReduction
from qca.lattice import (
    ComplexAmp,
    LatticeShape,
    QuadraticBuilder,
    QuadraticForm,
    dft_modes,
    fresnel_1d,
    inverse_modes,
    mode_frequencies,
    real_mode_coordinates,
    reduce_quadratic,
    tridiagonal_det,
)


def damped_gaussian(a, b, eps):
    """Integral of exp(i(a x^2 + b x) - eps x^2) by a dense trapezoid sum."""
    lim = math.sqrt(40.0 / eps)
    x = np.linspace(-lim, lim, 400_001)
    return complex(integrate.trapezoid(np.exp(1j * (a * x * x + b * x) - eps * x * x), x))


class TestLatticeShape:
    def test_periodic_wraps(self):
        s = LatticeShape(3, 5)
        assert s.site(-1) == 4
        assert s.site(5) == 0

    def test_open_edge_raises(self):
        s = LatticeShape(3, 5, space_boundary="open")
        assert s.site(4) == 4
        with pytest.raises(BoundaryError):
            s.site(5)

    @pytest.mark.parametrize("kw", [dict(n_time=0, m_space=1), dict(n_time=1, m_space=0)])
    def test_rejects_empty(self, kw):
        with pytest.raises(ValueError):
            LatticeShape(**kw)

    def test_rejects_unknown_boundary(self):
        with pytest.raises(ValueError):
            LatticeShape(2, 2, time_boundary="twisted")


class TestComplexAmp:
    def test_roundtrip_and_json(self):
        z = ComplexAmp.from_complex(0.1 - 2.5j)
        assert complex(z) == 0.1 - 2.5j
        assert z.to_json() == {"re": "0.10000000000000001", "im": "-2.5"}
        assert z.modulus == pytest.approx(abs(0.1 - 2.5j))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            ComplexAmp(float("nan"), 0.0)


class TestFresnel:
    @pytest.mark.parametrize("a,b", [(1.0, 0.0), (-0.7, 0.3), (2.5, -1.1)])
    def test_matches_damped_quadrature(self, a, b):
        # damped integrals are smooth in eps; Richardson removes the O(eps) term
        eps = 0.02
        num = 2 * damped_gaussian(a, b, eps / 2) - damped_gaussian(a, b, eps)
        assert abs(num - complex(fresnel_1d(a, b))) < 1e-3

    def test_principal_branch(self):
        assert complex(fresnel_1d(1.0, 0.0)) == pytest.approx(math.sqrt(math.pi) * cmath.exp(1j * math.pi / 4))
        assert complex(fresnel_1d(-1.0, 0.0)) == pytest.approx(math.sqrt(math.pi) * cmath.exp(-1j * math.pi / 4))

    def test_zero_coefficient(self):
        with pytest.raises(SingularIntegral):
            fresnel_1d(0.0, 1.0)


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return a + a.T


class TestReduceQuadratic:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 6), st.integers(1, 4), st.integers(0, 2 ** 31))
    def test_matches_block_formula(self, n_int, n_keep, seed):
        rng = np.random.default_rng(seed)
        n = n_int + n_keep
        a = random_symmetric(rng, n)
        b = rng.normal(size=n)
        form = QuadraticForm(a, b, 0.3)
        interior = list(range(n_int))
        aii = a[:n_int, :n_int]
        eig = np.linalg.eigvalsh(aii)
        if np.min(np.abs(eig)) < 1e-3:
            return
        pref, resid = reduce_quadratic(form, interior)
        expect = (2 * math.pi) ** (n_int / 2) / math.sqrt(abs(np.linalg.det(aii)))
        expect *= cmath.exp(1j * math.pi / 4 * np.sum(np.sign(eig)))
        assert complex(pref) == pytest.approx(expect, rel=1e-8)
        aik = a[:n_int, n_int:]
        schur = a[n_int:, n_int:] - aik.T @ np.linalg.solve(aii, aik)
        assert np.allclose(resid.matrix, schur, atol=1e-8)
        lin = b[n_int:] - aik.T @ np.linalg.solve(aii, b[:n_int])
        assert np.allclose(resid.linear, lin, atol=1e-8)

    def test_zero_diagonal_pivots_in_pairs(self):
        # exp(i x y) over both x and y: 2 pi, with zero diagonals
        form = QuadraticForm(np.array([[0.0, 1.0], [1.0, 0.0]]), np.zeros(2))
        pref, resid = reduce_quadratic(form, [0, 1])
        assert complex(pref) == pytest.approx(2 * math.pi)
        assert resid.size == 0

    def test_singular_raises(self):
        form = QuadraticForm(np.array([[0.0, 0.0], [0.0, 1.0]]), np.zeros(2))
        with pytest.raises(SingularReduction):
            reduce_quadratic(form, [0])

    def test_builder_square(self):
        qb = QuadraticBuilder(["x", "y"])
        qb.add_square({"x": 1.0, "y": -1.0}, 0.5)
        form = qb.build()
        assert form.evaluate([3.0, 1.0]) == pytest.approx(0.5 * 4.0)


class TestModes:
    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=9))
    def test_inverse(self, row):
        row = np.array(row)
        back = inverse_modes(dft_modes(row).modes)
        assert np.allclose(back.real, row, atol=1e-12)
        assert np.allclose(back.imag, 0.0, atol=1e-12)

    def test_frequencies(self):
        assert np.allclose(mode_frequencies(4), [0.0, math.sqrt(2), 2.0, math.sqrt(2)])

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.floats(-5, 5), min_size=1, max_size=9))
    def test_real_coordinates_orthogonal(self, row):
        row = np.array(row)
        coords = real_mode_coordinates(row)
        assert len(coords) == len(row)
        c = np.array([v for _, _, v in coords])
        w = np.array([f for _, f, _ in coords])
        assert np.sum(c ** 2) == pytest.approx(np.sum(row ** 2), abs=1e-9)
        grad = np.sum((np.roll(row, -1) - row) ** 2)
        assert np.sum(w ** 2 * c ** 2) == pytest.approx(grad, abs=1e-9)


@pytest.mark.parametrize("size", [0, 1, 2, 5, 9])
def test_tridiagonal_det(size):
    m = np.diag(np.full(size, 1.3)) + np.diag(np.full(max(size - 1, 0), -1.0), 1) \
        + np.diag(np.full(max(size - 1, 0), -1.0), -1)
    expect = np.linalg.det(m) if size else 1.0
    assert tridiagonal_det(1.3, -1.0, size) == pytest.approx(expect)
