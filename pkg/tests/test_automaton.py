import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qca import automaton
from qca.automaton import RuleSpec
from qca.errors import BoundaryError, EmptyHistory
from qca.lattice import LatticeShape


def shape(m, boundary="periodic"):
    return LatticeShape(1, m, space_boundary=boundary)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 40), st.integers(0, 2 ** 31))
def test_wave_integer_roundtrip(m, steps, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.integers(-50, 50, m), rng.integers(-50, 50, m)
    rule = RuleSpec("wave")
    hist = automaton.evolve(rule, a, b, steps, shape(m))
    assert hist.values.dtype == np.int64
    back = automaton.reverse(rule, hist.values[-2], hist.values[-1], steps, shape(m))
    assert np.array_equal(back.values, hist.values)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 9), st.integers(2, 13), st.integers(0, 2 ** 31))
def test_modular_wave_stays_in_range(m, modulus, seed):
    rng = np.random.default_rng(seed)
    rule = RuleSpec("wave", modulus=modulus)
    hist = automaton.evolve(rule, rng.integers(0, modulus, m), rng.integers(0, modulus, m), 25, shape(m))
    assert hist.values.min() >= 0 and hist.values.max() < modulus
    back = automaton.reverse(rule, hist.values[-2], hist.values[-1], 25, shape(m))
    assert np.array_equal(back.values, hist.values)


@pytest.mark.parametrize("kind", ["harmonic", "susy", "fermion-right", "fermion-left"])
def test_real_rules_roundtrip(kind):
    rng = np.random.default_rng(7)
    rule = RuleSpec(kind, w=0.6)
    a, b = rng.normal(size=6), rng.normal(size=6)
    hist = automaton.evolve(rule, a, b, 30, shape(6))
    back = automaton.reverse(rule, hist.values[-2], hist.values[-1], 30, shape(6))
    assert np.max(np.abs(back.values - hist.values)) < 1e-12


def test_harmonic_period_four():
    # W^2 = 2 gives X(I+1) = -X(I-1)
    rule = RuleSpec("harmonic", w=math.sqrt(2))
    hist = automaton.evolve(rule, [1.0], [0.0], 8)
    assert np.allclose(hist.values[:, 0], [1, 0, -1, 0, 1, 0, -1, 0, 1, 0], atol=1e-12)


def test_harmonic_matches_cosine():
    # X(I) = cos(I phi) with 1/2 W^2 = 1 - cos phi
    phi = 0.37
    w = 2 * math.sin(phi / 2)
    hist = automaton.evolve(RuleSpec("harmonic", w=w), [1.0], [math.cos(phi)], 50)
    assert np.allclose(hist.values[:, 0], np.cos(phi * np.arange(52)), atol=1e-10)


def test_light_cone():
    m = 31
    row1 = np.zeros(m, dtype=np.int64)
    row1[15] = 1
    hist = automaton.evolve(RuleSpec("wave"), np.zeros(m, dtype=np.int64), row1, 12, shape(m))
    for i, row in enumerate(hist.values[1:]):
        nz = np.nonzero(row)[0]
        assert nz.min() >= 15 - i and nz.max() <= 15 + i


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 10), st.integers(0, 2 ** 31))
def test_dalembert_solves_wave_rule(m, seed):
    rng = np.random.default_rng(seed)
    xl, xr = rng.integers(-9, 9, m), rng.integers(-9, 9, m)
    field = automaton.dalembert_field(xl, xr, 20, m)
    res = automaton.rule_residual(RuleSpec("wave"), field, shape(m))
    assert np.all(res == 0)


def test_open_boundary_rejects_neighbour_rules():
    with pytest.raises(BoundaryError):
        automaton.evolve(RuleSpec("wave"), [0, 1, 0], [1, 0, 0], 1, shape(3, "open"))


def test_open_boundary_allows_local_rules():
    hist = automaton.evolve(RuleSpec("harmonic", w=0.5), [1.0, 2.0], [0.0, 0.0], 3, shape(2, "open"))
    assert hist.filled_rows == 5


def test_spin_rule_tracks_bloch():
    b = (0.3, -0.2, 1.0)
    s0 = np.array([[1.0, 0.0, 0.0]])
    errs = []
    for dt in (0.02, 0.01):
        steps = int(round(1.0 / dt))
        hist = automaton.evolve(RuleSpec("spin", b=b, dt=dt), s0, None, steps - 1)
        exact = automaton.bloch_solution(s0[0], b, steps * dt)
        errs.append(np.max(np.abs(hist.values[-1, 0] - exact)))
    assert errs[1] < errs[0] / 3  # second order


def test_spin_roundtrip_with_coupling():
    rng = np.random.default_rng(3)
    v = rng.normal(size=(5, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    rule = RuleSpec("spin", b=(0, 0, 1), coupling=True, dt=0.05)
    hist = automaton.evolve(rule, v, None, 40, shape(5))
    back = automaton.reverse(rule, hist.values[-2], hist.values[-1], 40, shape(5))
    assert np.max(np.abs(back.values - hist.values)) < 1e-12


def test_susy_first_order_sectors():
    h = automaton.evolve_susy_first_order(0.4, [0.1, 0.2], [1.0, 0.9], [1.0, 0.5j], 10)
    for i in range(1, 10):
        assert h.x[i + 1] == pytest.approx(2 * h.p[i] + h.x[i - 1])
        assert h.theta[i + 1] == pytest.approx(-0.8j * h.theta[i] + h.theta[i - 1])


def test_rule_validation():
    with pytest.raises(ValueError):
        RuleSpec("nope")
    with pytest.raises(ValueError):
        RuleSpec("harmonic", modulus=5)
    with pytest.raises(ValueError):
        automaton.evolve(RuleSpec("wave"), [0, 0], None, 1)


def test_render_and_csv():
    hist = automaton.evolve(RuleSpec("wave"), [0, 0, 0], [0, 1, 0], 2, shape(3))
    pgm = automaton.render_pgm(hist).decode()
    assert pgm.startswith("P2\n3 4\n255\n")
    assert automaton.history_csv(hist).splitlines()[:2] == ["0,0,0", "0,1,0"]
    with pytest.raises(EmptyHistory):
        automaton.render_pgm(None)
