import math

import numpy as np
import pytest

from qca import fermions as F
from qca.errors import GeneratorBudgetExceeded
from qca.grassmann import GrassmannPoly


def random_action(rng, n):
    return F.FermiAction(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))


class TestGaussian:
    @pytest.mark.parametrize("n", [0, 1, 2, 3, 4, 5])
    def test_det_equals_berezin(self, n):
        rng = np.random.default_rng(40 + n)
        for _ in range(5):
            a = random_action(rng, n)
            d = complex(F.det_amplitude(a))
            b = complex(F.berezin_amplitude(a))
            assert abs(d - b) <= 1e-12 * max(1.0, abs(d))

    def test_budget(self):
        a = F.FermiAction(np.eye(13))
        with pytest.raises(GeneratorBudgetExceeded):
            F.berezin_amplitude(a)
        assert complex(F.berezin_amplitude(F.FermiAction(np.eye(3)), budget=6)) == pytest.approx(1.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            F.FermiAction(np.ones((2, 3)))
        with pytest.raises(ValueError):
            F.FermiAction(np.eye(2), (((0, 1, 0, 3), 1.0),))
        with pytest.raises(ValueError):
            F.det_amplitude(F.FermiAction(np.eye(2), (((0, 1, 2, 3), 1.0),)))

    def test_restrict_relabels(self):
        p = GrassmannPoly.monomial(6, (1, 4), 2.0)
        r = F.restrict(p, (1, 4))
        assert r.n_gen == 2 and r.coefficient((0, 1)) == 2.0
        with pytest.raises(ValueError):
            F.restrict(p, (1, 2))


class TestQuartic:
    @pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2)])
    def test_first_order_matches_cofactor(self, n, m):
        h = 1e-4
        plus = complex(F.quartic_amplitude(F.fermi_action_quartic(n, m, h)))
        minus = complex(F.quartic_amplitude(F.fermi_action_quartic(n, m, -h)))
        fd = (plus - minus) / (2 * h)
        cof = F.quartic_first_order(F.fermi_action_quartic(n, m, 1.0))
        assert abs(fd - cof) < 1e-8

    def test_cofactor_equals_inverse_contractions(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            a, bb, c, d = rng.choice(4, 4)
            action = F.FermiAction(b, (((2 * a, 2 * bb + 1, 2 * c, 2 * d + 1), 1.0),)) \
                if len({a, c}) == 2 and len({bb, d}) == 2 else None
            if action is None:
                continue
            inv = np.linalg.inv(b)
            want = np.linalg.det(b) * (inv[bb, a] * inv[d, c] - inv[d, a] * inv[bb, c])
            assert F.quartic_first_order(action) == pytest.approx(want, rel=1e-10)
            h = 1e-5
            zp = complex(F.quartic_amplitude(F.FermiAction(b, (((2 * a, 2 * bb + 1, 2 * c, 2 * d + 1), h),))))
            zm = complex(F.quartic_amplitude(F.FermiAction(b, (((2 * a, 2 * bb + 1, 2 * c, 2 * d + 1), -h),))))
            assert (zp - zm) / (2 * h) == pytest.approx(want, rel=1e-7)

    def test_zero_coupling_is_determinant(self):
        a = F.fermi_action_quartic(2, 3, 0.0)
        assert complex(F.quartic_amplitude(a)) == pytest.approx(np.linalg.det(a.bilinear))

    def test_amplitude_is_polynomial_in_g(self):
        # the quartic terms are nilpotent, so Z(g) is a polynomial of degree <= N M / 2
        gs = np.linspace(-1, 1, 7)
        z = [complex(F.quartic_amplitude(F.fermi_action_quartic(2, 2, g))) for g in gs]
        fit = np.polyfit(gs, np.real(z), 2)
        assert np.allclose(np.polyval(fit, gs), np.real(z), atol=1e-12)

    @pytest.mark.parametrize("tb", F.TIME_BOUNDARIES)
    def test_equation_of_motion(self, tb):
        n, m = 3, 3
        for i in range(n):
            for j in range(m):
                res = F.quartic_update_residual(n, m, 0.7, i, j, tb)
                assert res.max_abs() < 1e-14


class TestOneCell:
    def test_update_rule(self):
        # dS/dthetabar(I) = 0 solved for theta(I+1) is theta(I-1) - 2iW theta(I)
        n, w = 6, 0.4
        mat = F.action_matrix_1cell(n, w, 0.0)
        upd = F.stationary_update(mat, 2, 3)
        assert upd == pytest.approx({1: 1.0, 2: -2j * w})

    @pytest.mark.parametrize("n", [2, 3, 4])
    @pytest.mark.parametrize("w,r", [(0.4, 0.0), (0.4, 1.0), (0.0, 0.5)])
    def test_det_matches_berezin(self, n, w, r):
        a = F.fermi_action_1cell(n, w, r)
        assert complex(F.det_amplitude(a)) == pytest.approx(complex(F.berezin_amplitude(a)), abs=1e-12)

    @pytest.mark.parametrize("n,w,r", [(3, 0.4, 0.0), (4, 0.4, 1.0), (5, 0.2, 0.5)])
    def test_fixed_boundary_kernel(self, n, w, r):
        # only thetabar sources couple to the boundary, so they shift away
        k = F.kernel_fermi_1cell(n, w, r)
        mat = F.action_matrix_1cell(n, w, r)
        inner = np.zeros((n - 1, n - 1), dtype=complex)
        for i in range(1, n):
            for j in range(1, n):
                # drop the periodic wrap: fixed ends
                if abs(i - j) <= 1:
                    inner[i - 1, j - 1] = mat[i, j]
        assert k.terms().keys() <= {0}
        assert k.body == pytest.approx(np.linalg.det(-1j * inner))


class TestMCell:
    def test_updates_are_chiral_rules(self):
        n, m = 4, 5
        mat = F.action_matrix_mcell(n, m, 0.0)

        def pair(i, j, s):
            return ((i % n) * m + j % m) * 2 + s

        up = F.stationary_update(mat, pair(1, 2, 0), pair(2, 2, 0))
        assert up == pytest.approx({pair(0, 2, 0): 1.0, pair(1, 3, 0): -1.0, pair(1, 1, 0): 1.0})
        up = F.stationary_update(mat, pair(1, 2, 1), pair(2, 2, 1))
        assert up == pytest.approx({pair(0, 2, 1): 1.0, pair(1, 3, 1): 1.0, pair(1, 1, 1): -1.0})

    @pytest.mark.parametrize("r,expect", [(0.0, 1.0), (0.5, 0.87890625), (1.0, 0.0)])
    def test_small_lattice_det(self, r, expect):
        a = F.fermi_action_mcell(2, 2, r)
        d = complex(F.det_amplitude(a))
        assert d == pytest.approx(complex(F.berezin_amplitude(a)), abs=1e-12)
        assert d == pytest.approx(expect, abs=1e-12)

    @pytest.mark.parametrize("n,m,r", [(2, 2, 0.0), (2, 3, 0.5), (3, 2, 1.0)])
    def test_periodic_time_has_zero_mode(self, n, m, r):
        a = F.fermi_action_mcell(n, m, r, "periodic")
        assert abs(complex(F.det_amplitude(a))) < 1e-12

    def test_labels(self):
        a = F.fermi_action_mcell(2, 3)
        assert a.labels[a.pair((1, 2, 1))] == (1, 2, 1)
        assert len(a.labels) == 12


class TestDoublers:
    def test_one_dimension(self):
        assert F.doubler_census(0.0, 1) == pytest.approx([0.0, math.pi])
        for r in (0.5, 1.0):
            assert F.doubler_census(r, 1) == pytest.approx([0.0])

    def test_two_dimensions(self):
        pts = F.doubler_census(0.0, 2)
        assert sorted(pts) == pytest.approx([(0, 0), (0, math.pi), (math.pi, 0), (math.pi, math.pi)])
        assert F.doubler_census(1.0, 2) == [(0.0, 0.0)]

    def test_symbol_zeros_on_dense_grid(self):
        # independent scan: |symbol| small only near the census points
        p = np.linspace(-math.pi, math.pi, 4001)
        for r, expect in ((0.0, {0.0, math.pi}), (1.0, {0.0})):
            mags = np.array([abs(F.dirac_symbol_1d(x, r)) for x in p])
            near = p[mags < 1e-2]
            assert {round(abs(x), 1) for x in near} == {round(e, 1) for e in expect}

    def test_validation(self):
        with pytest.raises(ValueError):
            F.doubler_census(-1.0, 1)
        with pytest.raises(ValueError):
            F.doubler_census(0.0, 3)
