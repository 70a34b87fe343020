import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import chebyshev as C

from qca import bosonic
from qca.bosonic import HOParams
from qca.errors import CausticError, SingularReduction


def whole_matrix_kernel(params, x0, xn):
    """Kernel from one determinant and the classical path, no sequential elimination."""
    n, w = params.steps, params.w
    form = bosonic.action_form(params)
    a = form.matrix
    inner = a[1:n, 1:n]
    eig = np.linalg.eigvalsh(inner) if n > 1 else np.array([])
    rhs = -(a[1:n, 0] * x0 + a[1:n, n] * xn)
    xi = np.linalg.solve(inner, rhs) if n > 1 else np.array([])
    path = np.concatenate([[x0], xi, [xn]])
    s_cl = bosonic.action_1cell(params, path)
    pref = (2 * math.pi) ** ((n - 1) / 2) / math.sqrt(abs(np.prod(eig))) if n > 1 else 1.0
    pref *= cmath.exp(1j * math.pi / 4 * np.sum(np.sign(eig)))
    return bosonic.measure_factor(n) * pref * cmath.exp(1j * s_cl)


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("phi", [0.3, 0.7, 1.2])
def test_oracle_matches_whole_matrix(n, phi):
    p = HOParams.from_phi(n, phi)
    for x0, xn in [(0.0, 0.0), (1.0, -1.0), (-0.4, 0.9)]:
        k = complex(bosonic.kernel_ho_oracle(p, x0, xn))
        assert k == pytest.approx(whole_matrix_kernel(p, x0, xn), rel=1e-10)


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("phi", [0.3, 0.7, 1.2])
def test_closed_form_matches_oracle_up_to_gauge(n, phi):
    p = HOParams.from_phi(n, phi)
    for x0, xn in itertools.product([-1.0, 0.0, 1.0], repeat=2):
        orc = complex(bosonic.kernel_ho_oracle(p, x0, xn))
        closed = complex(bosonic.kernel_ho_closed(p, x0, xn))
        assert abs(orc / bosonic.gauge_phase(p, x0, xn) - closed) <= 1e-9 * abs(closed)


@pytest.mark.parametrize("w", [0.0, 2.0, 2.5, 3.1])
def test_non_oscillating_regimes(w):
    # W >= 2 and W = 0 go through the Chebyshev recurrence
    for n in (1, 2, 3, 5):
        p = HOParams(n, w)
        try:
            closed = complex(bosonic.kernel_ho_closed(p, 0.3, -0.5))
        except CausticError:
            continue
        orc = complex(bosonic.kernel_ho_oracle(p, 0.3, -0.5))
        assert abs(orc / bosonic.gauge_phase(p, 0.3, -0.5) - closed) <= 1e-9 * abs(closed)


@pytest.mark.parametrize("c", [-1.7, -0.4, 0.2, 0.95, 1.3])
def test_chebyshev_pair_against_numpy(c):
    for n in range(1, 12):
        u, t = bosonic.chebyshev_pair(c, n)
        # U_{n-1}(c) = T_n'(c) / n
        t_coef = [0] * n + [1]
        assert t == pytest.approx(C.chebval(c, t_coef))
        assert u == pytest.approx(C.chebval(c, C.chebder(t_coef)) / n)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 50), st.floats(0.05, 3.0))
def test_modulus(n, phi):
    p = HOParams.from_phi(n, phi)
    s_n = math.sin(n * phi)
    if abs(s_n) < 1e-6:
        return
    k = bosonic.kernel_ho_oracle(p, 0.2, -0.7)
    assert k.modulus == pytest.approx(math.sqrt(math.sin(phi) / (2 * math.pi * abs(s_n))), rel=1e-10)


@pytest.mark.parametrize("n1,n2", [(1, 1), (2, 3), (4, 1), (3, 5)])
def test_composition(n1, n2):
    phi = 0.7
    for build in (bosonic.closed_gaussian, bosonic.oracle_gaussian):
        k1 = build(HOParams.from_phi(n1, phi))
        k2 = build(HOParams.from_phi(n2, phi))
        k12 = build(HOParams.from_phi(n1 + n2, phi))
        for xi, xf in [(0.0, 0.0), (0.5, -1.2)]:
            assert bosonic.compose(k2, k1, xf, xi) == pytest.approx(k12(xf, xi), rel=1e-9)


def test_caustic_raises():
    with pytest.raises(CausticError):
        bosonic.kernel_ho_closed(HOParams.from_phi(3, math.pi / 3), 0.0, 0.0)


def test_free_particle_limit():
    # W = 0: the N-step free kernel exp(i (xN - x0)^2 / 2N) / sqrt(2 pi i N)
    n = 4
    k = complex(bosonic.kernel_ho_closed(HOParams(n, 0.0), 0.3, 1.1))
    expect = cmath.exp(1j * 0.8 ** 2 / (2 * n)) / cmath.sqrt(2j * math.pi * n)
    assert k == pytest.approx(expect)


def test_continuum_convergence():
    errs = []
    for n in (16, 64, 256, 1024):
        k = complex(bosonic.kernel_ho_physical(1.0, 1.0, n, 0.4, -0.3))
        ref = complex(bosonic.kernel_continuum_reference(1.0, 1.0, 0.4, -0.3))
        errs.append(abs(k - ref) / abs(ref))
    assert errs[-1] < 1e-3
    assert all(b < a for a, b in zip(errs, errs[1:]))


class TestMCell:
    @pytest.mark.parametrize("m,n", [(2, 2), (2, 3), (3, 2), (4, 3)])
    def test_modes_equal_direct(self, m, n):
        rng = np.random.default_rng(m * 10 + n)
        row0, rown = rng.normal(size=m), rng.normal(size=m)
        modes = complex(bosonic.kernel_mcell(row0, rown, n))
        direct = complex(bosonic.kernel_mcell_direct(row0, rown, n))
        gauge = bosonic.mcell_gauge_phase(row0, rown)
        assert abs(direct / gauge - modes) <= 1e-8 * abs(modes)

    @pytest.mark.parametrize("m,n", [(4, 2), (3, 3)])
    def test_caustic_modes_rejected(self, m, n):
        # W_n N hits a multiple of pi for some mode; both routes must refuse
        row = np.linspace(-1, 1, m)
        with pytest.raises(CausticError):
            bosonic.kernel_mcell(row, row[::-1], n)
        with pytest.raises(SingularReduction):
            bosonic.kernel_mcell_direct(row, row[::-1], n)

    def test_single_cell_is_free_particle(self):
        a = complex(bosonic.kernel_mcell([0.2], [0.9], 3))
        b = complex(bosonic.kernel_ho_closed(HOParams(3, 0.0), 0.2, 0.9))
        assert a == pytest.approx(b)


def test_params_validation():
    with pytest.raises(ValueError):
        HOParams(0, 1.0)
    with pytest.raises(ValueError):
        HOParams(2, -1.0)
    assert HOParams.from_phi(3, 0.7).phi == pytest.approx(0.7)
