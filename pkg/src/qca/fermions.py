"""Fermionic automata: lattice actions, Berezin amplitudes and doublers.

Generator layout: pair ``p`` owns the conjugate generator ``2p`` and the
field generator ``2p + 1``.  A :class:`FermiAction` stores the exponent of
the integrand, ``exp(-sum thetabar_i B_ij theta_j + sum_q c_q m_q)``.  The
physics builders start from an action ``S = thetabar M theta`` and set
``B = -i M`` so that the integrand is ``exp(iS)``.

The measure integrates ``theta_p`` then ``thetabar_p`` for each pair in
ascending order, which gives ``int dthetabar dtheta exp(-thetabar a theta) = a``
and makes the Gaussian integral equal to ``det(B)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import GeneratorBudgetExceeded
from .grassmann import GrassmannPoly, integrate
from .lattice import ComplexAmp

GENERATOR_BUDGET = 24
ROOT_TOL = 1e-10


@dataclass(frozen=True)
class DiracRep:
    rho0: np.ndarray = field(default_factory=lambda: np.array([[0, -1j], [1j, 0]]))
    rho1: np.ndarray = field(default_factory=lambda: np.array([[0, 1j], [1j, 0]]))


@dataclass(frozen=True)
class FermiAction:
    """Bilinear matrix ``B`` plus quartic exponent terms over ``n`` pairs."""

    bilinear: np.ndarray
    quartic: tuple = ()
    labels: tuple = ()

    def __post_init__(self):
        b = np.array(self.bilinear, dtype=complex)
        n = b.shape[0]
        if b.shape != (n, n):
            raise ValueError("bilinear matrix must be square")
        b.setflags(write=False)
        object.__setattr__(self, "bilinear", b)
        labels = tuple(self.labels) if self.labels else tuple(range(n))
        if len(labels) != n:
            raise ValueError("one label per pair required")
        object.__setattr__(self, "labels", labels)
        quartic = tuple((tuple(int(g) for g in idx), complex(c)) for idx, c in self.quartic)
        for idx, _ in quartic:
            if len(idx) != 4 or len(set(idx)) != 4:
                raise ValueError("quartic terms need four distinct generators")
            if min(idx) < 0 or max(idx) >= 2 * n:
                raise ValueError("quartic generator outside the algebra")
        object.__setattr__(self, "quartic", quartic)

    @property
    def n_pairs(self) -> int:
        return self.bilinear.shape[0]

    @property
    def n_gen(self) -> int:
        return 2 * self.n_pairs

    def pair(self, label: Hashable) -> int:
        return self.labels.index(label)

    def with_quartic(self, quartic) -> "FermiAction":
        return FermiAction(self.bilinear, tuple(quartic), self.labels)

    def exponent(self) -> GrassmannPoly:
        n_gen = self.n_gen
        terms = GrassmannPoly.zero(n_gen)
        rows, cols = np.nonzero(self.bilinear)
        for i, j in zip(rows, cols):
            terms = terms + GrassmannPoly.monomial(n_gen, (2 * i, 2 * j + 1), -self.bilinear[i, j])
        for idx, c in self.quartic:
            terms = terms + GrassmannPoly.monomial(n_gen, idx, c)
        return terms


def conj_gen(p: int) -> int:
    return 2 * p


def field_gen(p: int) -> int:
    return 2 * p + 1


def measure_order(n_pairs: int) -> list:
    order = []
    for p in range(n_pairs):
        order += [field_gen(p), conj_gen(p)]
    return order


def det_amplitude(action: FermiAction) -> ComplexAmp:
    """Gaussian Berezin integral of the bilinear part: det(B)."""
    if action.quartic:
        raise ValueError("det_amplitude takes a purely bilinear action")
    if action.n_pairs == 0:
        return ComplexAmp(1.0, 0.0)
    return ComplexAmp.from_complex(np.linalg.det(action.bilinear))


def _check_budget(n_gen: int, budget: int | None):
    budget = GENERATOR_BUDGET if budget is None else budget
    if n_gen > budget:
        raise GeneratorBudgetExceeded(n_gen, budget)


def berezin_amplitude(action: FermiAction, budget: int | None = None) -> ComplexAmp:
    """Full expansion of the integrand followed by term-by-term integration."""
    _check_budget(action.n_gen, budget)
    integrand = action.exponent().exp()
    result = integrate(integrand, measure_order(action.n_pairs))
    return ComplexAmp.from_complex(result.body)


def quartic_amplitude(action: FermiAction, budget: int | None = None) -> ComplexAmp:
    """Exact integral including quartic terms."""
    return berezin_amplitude(action, budget)


def _minor_pair(b: np.ndarray, rows, cols) -> complex:
    """det(B) * det(Binv[cols, rows]) via Jacobi's identity, valid for singular B."""
    if len(set(rows)) < 2 or len(set(cols)) < 2:
        return 0j
    sign = 1.0
    if rows[0] > rows[1]:
        rows, sign = rows[::-1], -sign
    if cols[0] > cols[1]:
        cols, sign = cols[::-1], -sign
    keep_r = [i for i in range(b.shape[0]) if i not in rows]
    keep_c = [j for j in range(b.shape[1]) if j not in cols]
    sub = b[np.ix_(keep_r, keep_c)]
    minor = np.linalg.det(sub) if sub.size else 1.0
    return sign * (-1) ** (sum(rows) + sum(cols)) * complex(minor)


def quartic_first_order(action: FermiAction) -> complex:
    """d/dg at g = 0 for quartic couplings scaled by g, from single insertions.

    Each term c * thetabar_a theta_b thetabar_c theta_d contributes
    c det(B) [Binv_ba Binv_dc - Binv_da Binv_bc] (two Wick contractions),
    evaluated as a signed complementary minor so that singular B is fine.
    """
    b = action.bilinear
    total = 0j
    for idx, c in action.quartic:
        kinds = [g % 2 for g in idx]
        if kinds != [0, 1, 0, 1]:
            raise ValueError("cofactor formula expects conj, field, conj, field ordering")
        a, bb, cc, d = (g // 2 for g in idx)
        total += c * _minor_pair(b, (a, cc), (bb, d))
    return complex(total)


def restrict(poly: GrassmannPoly, generators: Sequence[int]) -> GrassmannPoly:
    """Relabel a polynomial supported on ``generators`` into a smaller algebra.

    Generators keep their relative order, so no signs arise.
    """
    gens = sorted(generators)
    allowed = 0
    for g in gens:
        allowed |= 1 << g
    if poly.support() & ~allowed:
        raise ValueError("polynomial depends on generators outside the restriction")
    out = {}
    for k, v in poly.terms().items():
        new = 0
        for pos, g in enumerate(gens):
            if k >> g & 1:
                new |= 1 << pos
        out[new] = out.get(new, 0) + v
    return GrassmannPoly(len(gens), out)


# one-cell actions


TIME_BOUNDARIES = ("periodic", "antiperiodic")


def _time_sign(time_boundary: str):
    if time_boundary not in TIME_BOUNDARIES:
        raise ValueError(f"unknown time boundary {time_boundary!r}")
    return -1.0 if time_boundary == "antiperiodic" else 1.0


def _wrap(i: int, n: int, twist: float):
    """Index on the time circle and the factor picked up crossing the seam."""
    return i % n, (twist if (i < 0 or i >= n) else 1.0)


def _wilson_1cell(n: int, w: float, r: float, i: int, add):
    """Row I of S = i thetabar(I)(1/2 D theta - r/2 Delta theta) - W thetabar theta."""
    add(i, i + 1, 1j * (0.5 - 0.5 * r))
    add(i, i - 1, 1j * (-0.5 - 0.5 * r))
    add(i, i, 1j * r - w)


def action_matrix_1cell(n: int, w: float, r: float, time_boundary: str = "periodic") -> np.ndarray:
    """M with S = sum thetabar_I M_IJ theta_J on a closed time circle."""
    if n < 2:
        raise ValueError("N must be >= 2")
    twist = _time_sign(time_boundary)
    m = np.zeros((n, n), dtype=complex)

    def add(i, j, v):
        jj, f = _wrap(j, n, twist)
        m[i % n, jj] += f * v

    for i in range(n):
        _wilson_1cell(n, w, r, i, add)
    return m


def fermi_action_1cell(n: int, w: float, r: float = 0.0, time_boundary: str = "periodic") -> FermiAction:
    m = action_matrix_1cell(n, w, r, time_boundary)
    return FermiAction(-1j * m, (), tuple(range(n)))


def stationary_update(m_action: np.ndarray, row: int, target: int) -> dict:
    """Solve dS/dthetabar(row) = 0 for theta(target); returns coefficients."""
    coeff = m_action[row, target]
    if coeff == 0:
        raise ValueError("target does not appear in the equation of motion")
    return {q: -m_action[row, q] / coeff for q in np.nonzero(m_action[row])[0] if q != target}


def kernel_fermi_1cell(n: int, w: float, r: float = 0.0) -> GrassmannPoly:
    """Fixed-boundary kernel as a polynomial in (theta(0), theta(N)).

    Interior pairs I = 1..N-1 are integrated; the action sums over the
    same rows, so the boundary fields enter only through hopping.
    """
    if n < 2:
        raise ValueError("N must be >= 2")
    n_int = n - 1
    n_gen = 2 * n_int + 2
    g0, gn = 2 * n_int, 2 * n_int + 1

    def fgen(i):
        if i == 0:
            return g0
        if i == n:
            return gn
        return field_gen(i - 1)

    expo_terms = []

    def add(i, j, v):
        expo_terms.append((conj_gen(i - 1), fgen(j), 1j * v))

    for i in range(1, n):
        _wilson_1cell(n, w, r, i, add)
    expo = GrassmannPoly.zero(n_gen)
    for a, b, c in expo_terms:
        expo = expo + GrassmannPoly.monomial(n_gen, (a, b), c)
    result = integrate(expo.exp(), measure_order(n_int))
    return restrict(result, (g0, gn))


# M-cell actions


def action_matrix_mcell(n: int, m: int, r: float = 0.0, time_boundary: str = "antiperiodic") -> np.ndarray:
    """Doublet action with Wilson cross terms on a closed lattice.

    Space is periodic.  Time defaults to antiperiodic: with periodic time
    the constant mode is an exact zero mode and the determinant vanishes.

    Pair order: (I, J, species) with species 0 = theta, 1 = theta-tilde.
    Row (I, J, 0):
        -i/2 theta*[theta(I+1)-theta(I-1) - r(tt(I+1)+tt(I-1)-2tt)]
        -i/2 theta*[theta(J+1)-theta(J-1) - r(tt(J+1)+tt(J-1)-2tt)]
    Row (I, J, 1):
        -i/2 tt*[tt(I+1)-tt(I-1) + r(theta(I+1)+theta(I-1)-2theta)]
        +i/2 tt*[tt(J+1)-tt(J-1) - r(theta(J+1)+theta(J-1)-2theta)]
    """
    if n < 2 or m < 2:
        raise ValueError("N and M must be >= 2")
    twist = _time_sign(time_boundary)
    size = 2 * n * m
    mat = np.zeros((size, size), dtype=complex)

    def put(row, i, j, s, v):
        ii, f = _wrap(i, n, twist)
        mat[row, (ii * m + j % m) * 2 + s] += f * v

    def diff(row, pref, i, j, s_main, s_wil, wsign, axis):
        di, dj = (1, 0) if axis == "t" else (0, 1)
        put(row, i + di, j + dj, s_main, pref)
        put(row, i - di, j - dj, s_main, -pref)
        put(row, i + di, j + dj, s_wil, pref * wsign * r)
        put(row, i - di, j - dj, s_wil, pref * wsign * r)
        put(row, i, j, s_wil, -2 * pref * wsign * r)

    for i in range(n):
        for j in range(m):
            row0, row1 = (i * m + j) * 2, (i * m + j) * 2 + 1
            diff(row0, -0.5j, i, j, 0, 1, -1, "t")
            diff(row0, -0.5j, i, j, 0, 1, -1, "x")
            diff(row1, -0.5j, i, j, 1, 0, +1, "t")
            diff(row1, +0.5j, i, j, 1, 0, -1, "x")
    return mat


def mcell_labels(n: int, m: int) -> tuple:
    return tuple((i, j, s) for i in range(n) for j in range(m) for s in range(2))


def fermi_action_mcell(n: int, m: int, r: float = 0.0, time_boundary: str = "antiperiodic") -> FermiAction:
    return FermiAction(-1j * action_matrix_mcell(n, m, r, time_boundary), (), mcell_labels(n, m))


def fermi_action_quartic(n: int, m: int, g: float, time_boundary: str = "antiperiodic") -> FermiAction:
    """Left-moving single species with a nearest-neighbour density coupling.

    S = sum -i/2 theta*(theta(I+1)-theta(I-1)) + i/2 theta*(theta(J+1)-theta(J-1))
        + (ig/2) theta*(J) theta(J) theta*(J+1) theta(J+1)
    Varying theta*(I,J) gives the nonlinear update with coupling g.
    """
    if n < 2 or m < 2:
        raise ValueError("N and M must be >= 2")
    twist = _time_sign(time_boundary)

    def p(i, j):
        return (i % n) * m + (j % m)

    size = n * m
    mat = np.zeros((size, size), dtype=complex)
    quartic = []
    for i in range(n):
        for j in range(m):
            row = p(i, j)
            for di, v in ((1, -0.5j), (-1, 0.5j)):
                _, f = _wrap(i + di, n, twist)
                mat[row, p(i + di, j)] += f * v
            mat[row, p(i, j + 1)] += 0.5j
            mat[row, p(i, j - 1)] += -0.5j
            a, b = p(i, j), p(i, j + 1)
            # exponent coefficient i * (ig/2)
            quartic.append(((conj_gen(a), field_gen(a), conj_gen(b), field_gen(b)), -0.5 * g))
    labels = tuple((i, j) for i in range(n) for j in range(m))
    return FermiAction(-1j * mat, tuple(quartic), labels)


def quartic_update_residual(n: int, m: int, g: float, i: int, j: int,
                            time_boundary: str = "antiperiodic") -> GrassmannPoly:
    """Equation of motion at (I, J) rearranged as theta(I+1,J) - rule(...).

    Computed by differentiating the action polynomial, so it checks the
    action against the update it is meant to produce.
    """
    from .grassmann import derivative

    action = fermi_action_quartic(n, m, g, time_boundary)
    twist = _time_sign(time_boundary)
    s_poly = action.exponent() * -1j  # exponent = iS
    n_gen = action.n_gen

    def pf(ii, jj):
        return (ii % n) * m + (jj % m)

    eom = derivative(s_poly, conj_gen(pf(i, j)))

    def th(ii, jj):
        return GrassmannPoly.generator(n_gen, field_gen(pf(ii, jj)), _wrap(ii, n, twist)[1])

    def ts(ii, jj):
        return GrassmannPoly.generator(n_gen, conj_gen(pf(ii, jj)))

    # dS/dtheta*(I,J) = -i/2 [theta(I+1) - theta(I-1) - theta(J+1) + theta(J-1) - g (...)]
    rule = (th(i, j + 1) - th(i, j - 1) + th(i - 1, j)
            + g * (th(i, j) * ts(i, j + 1) * th(i, j + 1))
            + g * (ts(i, j - 1) * th(i, j - 1) * th(i, j)))
    expected = (th(i + 1, j) - rule) * (-0.5j)
    return eom - expected


# doublers


def _sign_roots(f, grid: int) -> list:
    """Roots of a 2pi-periodic function on (-pi, pi] by bracketing and bisection."""
    pts = -math.pi + 2 * math.pi * np.arange(1, grid + 1) / grid
    vals = f(pts)
    roots = []
    for k in range(grid):
        a, fa = pts[k], vals[k]
        b = pts[k + 1] if k + 1 < grid else pts[0] + 2 * math.pi
        fb = vals[(k + 1) % grid]
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            lo, hi, flo = a, b, fa
            while hi - lo > ROOT_TOL * 1e-2:
                mid = 0.5 * (lo + hi)
                fm = float(f(np.array([mid]))[0])
                if fm == 0.0:
                    lo = hi = mid
                    break
                if (fm < 0) == (flo < 0):
                    lo, flo = mid, fm
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
    out = []
    for x in roots:
        x = math.remainder(x, 2 * math.pi)
        if abs(abs(x) - math.pi) < 1e-9:
            x = math.pi
        elif abs(x) < 1e-12:
            x = 0.0
        if not any(abs(x - y) < 1e-8 for y in out):
            out.append(x)
    return sorted(out)


def doubler_census(r: float, dim: int, grid: int = 256, tol: float = 1e-8) -> list:
    """Momenta where every component of the lattice Dirac operator vanishes.

    dim 1: components (sin p0, 2r sin^2(p0/2)).
    dim 2: components (sin p0, sin p1, r (cos p0 + cos p1 - 2)).
    """
    if r < 0:
        raise ValueError("r must be non-negative")
    if grid < 4:
        raise ValueError("grid too coarse")
    sin_roots = _sign_roots(np.sin, grid)
    if dim == 1:
        return [p for p in sin_roots if abs(2 * r * math.sin(p / 2) ** 2) < tol]
    if dim == 2:
        return [(p0, p1) for p0 in sin_roots for p1 in sin_roots
                if abs(r * (math.cos(p0) + math.cos(p1) - 2)) < tol]
    raise ValueError("dim must be 1 or 2")


def dirac_symbol_1d(p: float, r: float) -> complex:
    """Fourier symbol of the one-cell hopping with Wilson term (W = 0)."""
    return complex(math.sin(p), 2 * r * math.sin(p / 2) ** 2)
