"""Supersymmetric automata: first-order actions, variations and kernels.

Bosonic fields are numeric and fermionic fields are symbolic generators.
A supersymmetry variation is evaluated by substituting the shifted fields
into the action polynomial and subtracting; every shift carries one factor
of the Grassmann parameter, so the difference is exactly first order.

Wilson terms enter through the difference operator

    D_r f(I) = f(I+1) - f(I-1) - r (f(I+1) + f(I-1) - 2 f(I)).

For the two-species lattice, the fermionic Wilson piece couples theta to
the second difference of theta-tilde and vice versa.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .bosonic import measure_factor
from .errors import GeneratorBudgetExceeded
from .fermions import GENERATOR_BUDGET, kernel_fermi_1cell, restrict
from .grassmann import GrassmannPoly, integrate
from .lattice import ComplexAmp, QuadraticBuilder, _fresnel, reduce_quadratic

BOUNDARIES = ("periodic", "fixed")


def _lift(n_gen: int, values) -> list:
    return [GrassmannPoly.scalar(n_gen, complex(v)) for v in values]


def _sum(n_gen: int, polys) -> GrassmannPoly:
    out = GrassmannPoly.zero(n_gen)
    for p in polys:
        out = out + p
    return out


# one cell


@dataclass(frozen=True)
class SusyFields1Cell:
    """Numeric bosons and generator layout for the one-cell lattice.

    Periodic time: rows 0..N-1.  Fixed time: rows 0..N, actions summed over
    I = 1..N-1.  Generators: thetabar(I) = 2I, theta(I) = 2I+1, xi = last.
    """

    x: np.ndarray
    p: np.ndarray
    boundary: str = "periodic"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        if x.shape != p.shape or x.ndim != 1:
            raise ValueError("X and P must be vectors of equal length")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if x.size < (2 if self.boundary == "periodic" else 3):
            raise ValueError("lattice too short")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def rows(self) -> int:
        return self.x.size

    @property
    def n_gen(self) -> int:
        return 2 * self.rows + 1

    @property
    def xi(self) -> int:
        return 2 * self.rows

    def summed_rows(self):
        if self.boundary == "periodic":
            return range(self.rows)
        return range(1, self.rows - 1)

    def at(self, seq, i):
        return seq[i % self.rows] if self.boundary == "periodic" else seq[i]

    def theta(self) -> list:
        return [GrassmannPoly.generator(self.n_gen, 2 * i + 1) for i in range(self.rows)]

    def theta_bar(self) -> list:
        return [GrassmannPoly.generator(self.n_gen, 2 * i) for i in range(self.rows)]


def _d_r(f: SusyFields1Cell, seq, i: int, r: float):
    up, dn, mid = f.at(seq, i + 1), f.at(seq, i - 1), f.at(seq, i)
    return (up - dn) - (up + dn - mid * 2) * r


def _action_1cell(f: SusyFields1Cell, x, p, th, thb, w: float, r: float) -> GrassmannPoly:
    terms = []
    for i in f.summed_rows():
        terms.append(thb[i] * (_d_r(f, th, i, r) * 0.5j) - thb[i] * th[i] * w)
        terms.append(p[i] * _d_r(f, x, i, r) * 0.5 - p[i] * p[i] * 0.5 - x[i] * x[i] * (0.5 * w * w))
    return _sum(f.n_gen, terms)


def susy_action_1cell(fields: SusyFields1Cell, w: float, r: float = 0.0) -> GrassmannPoly:
    """i thetabar (1/2 D_r theta) - W thetabar theta + 1/2 P D_r X - 1/2 P^2 - W^2/2 X^2."""
    n = fields.n_gen
    return _action_1cell(fields, _lift(n, fields.x), _lift(n, fields.p),
                         fields.theta(), fields.theta_bar(), w, r)


def p_stationary(x, r: float = 0.0) -> np.ndarray:
    """P solving dS/dP = 0 on a periodic lattice: P = 1/2 D_r X."""
    x = np.asarray(x, dtype=float)
    up, dn = np.roll(x, -1), np.roll(x, 1)
    return 0.5 * ((up - dn) - r * (up + dn - 2 * x))


def susy_variation_1cell(fields: SusyFields1Cell, w: float, r: float = 0.0) -> GrassmannPoly:
    """S(shifted fields) - S for the transformation

    dX = xibar theta,  dP = xibar 1/2 D_r theta,
    dthetabar = xibar (i/2 D_r X - W X),  dtheta = 0.
    """
    n = fields.n_gen
    xi = GrassmannPoly.generator(n, fields.xi)
    x, p = _lift(n, fields.x), _lift(n, fields.p)
    th, thb = fields.theta(), fields.theta_bar()
    rows = range(fields.rows)
    interior = set(fields.summed_rows())

    def shift_where(i):
        # on a fixed lattice boundary rows vary too; they enter through neighbours
        return fields.boundary == "periodic" or 0 <= i < fields.rows

    x2, p2, thb2 = list(x), list(p), list(thb)
    for i in rows:
        if not shift_where(i):
            continue
        x2[i] = x[i] + xi * th[i]
        if i in interior:
            p2[i] = p[i] + xi * (_d_r(fields, th, i, r) * 0.5)
            bos = 0.5j * _d_r(fields, fields.x, i, r) - w * fields.x[i]
            thb2[i] = thb[i] + xi * bos
    before = _action_1cell(fields, x, p, th, thb, w, r)
    after = _action_1cell(fields, x2, p2, th, thb2, w, r)
    return after - before


# M cells


@dataclass(frozen=True)
class SusyFieldsMCell:
    """Numeric X, P, L on an N x M lattice, periodic in both directions.

    Generators: theta(I,J) = 2(I M + J), theta-tilde(I,J) = 2(I M + J) + 1,
    xi = last.
    """

    x: np.ndarray
    p: np.ndarray
    l: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=float) for a in (self.x, self.p, self.l)]
        if arrs[0].ndim != 2 or any(a.shape != arrs[0].shape for a in arrs):
            raise ValueError("X, P, L must be equal-shaped 2-D arrays")
        n, m = arrs[0].shape
        if n < 2 or m < 2:
            raise ValueError("need N, M >= 2")
        if 2 * n * m + 1 > 63:
            raise GeneratorBudgetExceeded(2 * n * m + 1, 63)
        for name, a in zip(("x", "p", "l"), arrs):
            object.__setattr__(self, name, a)

    @property
    def shape(self):
        return self.x.shape

    @property
    def n_gen(self) -> int:
        n, m = self.shape
        return 2 * n * m + 1

    @property
    def xi(self) -> int:
        return self.n_gen - 1

    def theta_fields(self):
        n, m = self.shape
        th = [[GrassmannPoly.generator(self.n_gen, 2 * (i * m + j)) for j in range(m)] for i in range(n)]
        tt = [[GrassmannPoly.generator(self.n_gen, 2 * (i * m + j) + 1) for j in range(m)] for i in range(n)]
        return th, tt


def _grid_lift(n_gen, arr):
    return [[GrassmannPoly.scalar(n_gen, complex(v)) for v in row] for row in arr]


def _at(grid, i, j):
    n, m = len(grid), len(grid[0])
    return grid[i % n][j % m]


def _diff(grid, i, j, axis, sign_wil=0.0, r=0.0, partner=None):
    """Central difference along ``axis`` with an optional Wilson term.

    Bosons: partner is None and the Wilson piece is -r * (second difference).
    Fermions: the second difference is taken of ``partner`` with sign ``sign_wil``.
    """
    di, dj = (1, 0) if axis == "t" else (0, 1)
    up, dn = _at(grid, i + di, j + dj), _at(grid, i - di, j - dj)
    out = up - dn
    if r:
        src = grid if partner is None else partner
        s_up, s_dn, s_mid = _at(src, i + di, j + dj), _at(src, i - di, j - dj), _at(src, i, j)
        wil = s_up + s_dn - s_mid * 2
        out = out + wil * ((-1.0 if partner is None else sign_wil) * r)
    return out


def _fermi_diffs(th, tt, i, j, r):
    """Wilson-substituted differences of the two species."""
    return {
        "th_t": _diff(th, i, j, "t", -1.0, r, tt),
        "th_x": _diff(th, i, j, "x", -1.0, r, tt),
        "tt_t": _diff(tt, i, j, "t", +1.0, r, th),
        "tt_x": _diff(tt, i, j, "x", -1.0, r, th),
    }


def _action_mcell(n_gen, shape, x, p, l, th, tt, r) -> GrassmannPoly:
    n, m = shape
    terms = []
    for i in range(n):
        for j in range(m):
            dxt = _diff(x, i, j, "t", r=r)
            dxx = _diff(x, i, j, "x", r=r)
            pij, lij = p[i][j], l[i][j]
            terms.append((pij * dxt * -1 + lij * dxx + pij * pij - lij * lij) * 0.5)
            d = _fermi_diffs(th, tt, i, j, r)
            terms.append(th[i][j] * d["th_t"] * 0.5j + th[i][j] * d["th_x"] * 0.5j
                         + tt[i][j] * d["tt_t"] * 0.5j - tt[i][j] * d["tt_x"] * 0.5j)
    return _sum(n_gen, terms)


def susy_action_mcell(fields: SusyFieldsMCell, r: float = 0.0) -> GrassmannPoly:
    n = fields.n_gen
    th, tt = fields.theta_fields()
    return _action_mcell(n, fields.shape, _grid_lift(n, fields.x), _grid_lift(n, fields.p),
                         _grid_lift(n, fields.l), th, tt, r)


def mcell_transformations(fields: SusyFieldsMCell, r: float = 0.0, reading: str = "mechanical"):
    """Shifts of (P, L, X, theta, theta-tilde) with Wilson terms substituted.

    Generated by applying the difference substitution to
        dP = i xi/2 (D_t theta - D_t tt),  dL = i xi/2 (D_x theta - D_x tt),
        dX = i (xi theta - xi tt),
        dtheta = -xi/2 (D_t X - D_x X),  dtt = xi/2 (D_t X + D_x X).

    ``reading="printed"`` closes the xi/2 bracket after the time difference,
    so the spatial parts become -xi D_x X and +xi D_x X; the bosonic shifts
    are the same in both readings.
    """
    if reading not in ("mechanical", "printed"):
        raise ValueError(f"unknown reading {reading!r}")
    n_gen = fields.n_gen
    nn, m = fields.shape
    xi = GrassmannPoly.generator(n_gen, fields.xi)
    th, tt = fields.theta_fields()
    xs = _grid_lift(n_gen, fields.x)
    out = {k: [[None] * m for _ in range(nn)] for k in ("p", "l", "x", "th", "tt")}
    for i in range(nn):
        for j in range(m):
            d = _fermi_diffs(th, tt, i, j, r)
            dxt = _diff(xs, i, j, "t", r=r)
            dxx = _diff(xs, i, j, "x", r=r)
            out["p"][i][j] = xi * (d["th_t"] - d["tt_t"]) * 0.5j
            out["l"][i][j] = xi * (d["th_x"] - d["tt_x"]) * 0.5j
            out["x"][i][j] = (xi * th[i][j] - xi * tt[i][j]) * 1j
            if reading == "mechanical":
                out["th"][i][j] = xi * (dxt - dxx) * -0.5
                out["tt"][i][j] = xi * (dxt + dxx) * 0.5
            else:
                out["th"][i][j] = xi * dxt * -0.5 - xi * dxx
                out["tt"][i][j] = xi * dxt * 0.5 + xi * dxx
    return out


def susy_variation_mcell(fields: SusyFieldsMCell, r: float = 0.0, reading: str = "mechanical",
                         boson_scale: float = 1.0) -> GrassmannPoly:
    """S(shifted fields) - S.

    ``boson_scale`` multiplies the shifts of P, L and X; the transformations
    as written correspond to 1.
    """
    n_gen = fields.n_gen
    nn, m = fields.shape
    th, tt = fields.theta_fields()
    x, p, l = (_grid_lift(n_gen, a) for a in (fields.x, fields.p, fields.l))
    d = mcell_transformations(fields, r, reading)
    scale = {"x": boson_scale, "p": boson_scale, "l": boson_scale, "th": 1.0, "tt": 1.0}

    def shifted(base, key):
        return [[base[i][j] + d[key][i][j] * scale[key] for j in range(m)] for i in range(nn)]

    before = _action_mcell(n_gen, fields.shape, x, p, l, th, tt, r)
    after = _action_mcell(n_gen, fields.shape, shifted(x, "x"), shifted(p, "p"), shifted(l, "l"),
                          shifted(th, "th"), shifted(tt, "tt"), r)
    return after - before


def random_fields_1cell(rng: np.random.Generator, n: int, boundary: str = "periodic") -> SusyFields1Cell:
    rows = n if boundary == "periodic" else n + 1
    return SusyFields1Cell(rng.normal(size=rows), rng.normal(size=rows), boundary)


def random_fields_mcell(rng: np.random.Generator, n: int, m: int) -> SusyFieldsMCell:
    return SusyFieldsMCell(rng.normal(size=(n, m)), rng.normal(size=(n, m)), rng.normal(size=(n, m)))


def susy_check(cells: str, n: int, m: int, w: float, r: float, trials: int, seed: int = 0) -> float:
    """Largest variation coefficient over random bosonic draws."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        if cells == "1":
            var = susy_variation_1cell(random_fields_1cell(rng, n), w, r)
        elif cells == "m":
            var = susy_variation_mcell(random_fields_mcell(rng, n, m), r)
        else:
            raise ValueError("cells must be '1' or 'm'")
        worst = max(worst, var.max_abs())
    return worst


# kernels


def _aux_norm(coeff: float) -> complex:
    """Normalize an auxiliary field so exp(i coeff P^2) integrates to one."""
    return 1.0 / _fresnel(coeff, 0.0)


def bosonic_form_1cell(n: int, w: float, r: float, with_p: bool = True):
    """First-order (or P-eliminated) bosonic action on rows 0..N, summed over I = 1..N-1."""
    labels = [("x", i) for i in range(n + 1)]
    if with_p:
        labels += [("p", i) for i in range(1, n)]
    qb = QuadraticBuilder(labels)
    for i in range(1, n):
        dx = {("x", i + 1): 1.0 - r, ("x", i - 1): -1.0 - r}
        dx[("x", i)] = dx.get(("x", i), 0.0) + 2 * r
        if with_p:
            qb.add_product({("p", i): 1.0}, dx, 0.5)
            qb.add_square({("p", i): 1.0}, -0.5)
        else:
            qb.add_square(dx, 0.125)
        qb.add_square({("x", i): 1.0}, -0.5 * w * w)
    return qb.build()


def _bosonic_amp(form, interior, boundary_values, n_x: int, aux_coeffs) -> complex:
    pref, resid = reduce_quadratic(form, interior)
    vec = np.array([boundary_values[lab] for lab in resid.var_labels])
    amp = complex(pref) * measure_factor(n_x) * cmath.exp(1j * resid.evaluate(vec))
    for c in aux_coeffs:
        amp *= _aux_norm(c)
    return amp


def kernel_susy_bosonic_1cell(n: int, w: float, r: float, x0: float, xn: float,
                              p_first: bool = False) -> ComplexAmp:
    """Bosonic factor of the one-cell kernel.

    X(1..N-1) carry the measure (2 pi i)^(-1/2) (plus one overall factor);
    each P(I) is normalized so its free Gaussian integrates to one.
    """
    if n < 2:
        raise ValueError("N must be >= 2")
    form = bosonic_form_1cell(n, w, r, with_p=True)
    xs = [("x", i) for i in range(1, n)]
    ps = [("p", i) for i in range(1, n)]
    interior = ps + xs if p_first else xs + ps
    vals = {("x", 0): x0, ("x", n): xn}
    return ComplexAmp.from_complex(_bosonic_amp(form, interior, vals, n, [-0.5] * (n - 1)))


def kernel_second_order_1cell(n: int, w: float, r: float, x0: float, xn: float) -> ComplexAmp:
    """Kernel of the action after P has been eliminated by its equation of motion."""
    form = bosonic_form_1cell(n, w, r, with_p=False)
    vals = {("x", 0): x0, ("x", n): xn}
    return ComplexAmp.from_complex(
        _bosonic_amp(form, [("x", i) for i in range(1, n)], vals, n, []))


def kernel_susy_1cell(n: int, w: float, r: float, x0: float, xn: float) -> GrassmannPoly:
    """Bosonic amplitude times the fermionic boundary polynomial in (theta(0), theta(N))."""
    bos = complex(kernel_susy_bosonic_1cell(n, w, r, x0, xn))
    return kernel_fermi_1cell(n, w, r) * bos


def susy_kernel_oracle_1cell(n: int, w: float, r: float, x0: float, xn: float) -> GrassmannPoly:
    """Brute-force route: P integrated first, and the fermions expanded from
    the full SUSY action polynomial rather than a prebuilt bilinear matrix."""
    bos = complex(kernel_susy_bosonic_1cell(n, w, r, x0, xn, p_first=True))
    fields = SusyFields1Cell(np.zeros(n + 1), np.zeros(n + 1), "fixed")
    s_f = susy_action_1cell(fields, w, r)
    n_gen = fields.n_gen
    interior = []
    for i in range(1, n):
        interior += [2 * i + 1, 2 * i]
    _budget(n_gen)
    res = integrate((s_f * 1j).exp(), interior)
    return restrict(res, (1, 2 * n + 1)) * bos


def _budget(n_gen: int):
    if n_gen > GENERATOR_BUDGET:
        raise GeneratorBudgetExceeded(n_gen, GENERATOR_BUDGET)


def bosonic_form_mcell(n: int, m: int, r: float):
    labels = [("x", i, j) for i in range(n + 1) for j in range(m)]
    labels += [(k, i, j) for k in ("p", "l") for i in range(1, n) for j in range(m)]
    qb = QuadraticBuilder(labels)
    for i in range(1, n):
        for j in range(m):
            dt = _combo_diff(i, j, (1, 0), r, m)
            dx = _combo_diff(i, j, (0, 1), r, m)
            qb.add_product({("p", i, j): 1.0}, dt, -0.5)
            qb.add_product({("l", i, j): 1.0}, dx, 0.5)
            qb.add_square({("p", i, j): 1.0}, 0.5)
            qb.add_square({("l", i, j): 1.0}, -0.5)
    return qb.build()


def _combo_diff(i, j, step, r, m):
    di, dj = step
    up, dn, mid = ("x", i + di, (j + dj) % m), ("x", i - di, (j - dj) % m), ("x", i, j)
    out = {}
    for lab, c in ((up, 1.0 - r), (dn, -1.0 - r), (mid, 2 * r)):
        out[lab] = out.get(lab, 0.0) + c
    return out


def kernel_susy_mcell(row0, rown, n: int, r: float) -> GrassmannPoly:
    """Bosonic Fresnel reduction over X, P, L times the fermionic boundary polynomial.

    Fermion generators of the boundary rows survive; the returned polynomial
    lives on theta(0,J), tt(0,J), theta(N,J), tt(N,J) in that layout order.
    """
    row0 = np.asarray(row0, dtype=float)
    rown = np.asarray(rown, dtype=float)
    m = row0.size
    if n < 2 or m < 2:
        raise ValueError("need N, M >= 2")
    n_gen = 2 * (n + 1) * m
    _budget(n_gen)
    form = bosonic_form_mcell(n, m, r)
    xs = [("x", i, j) for i in range(1, n) for j in range(m)]
    aux = [(k, i, j) for k in ("p", "l") for i in range(1, n) for j in range(m)]
    vals = {("x", 0, j): row0[j] for j in range(m)}
    vals.update({("x", n, j): rown[j] for j in range(m)})
    coeffs = [0.5] * (len(aux) // 2) + [-0.5] * (len(aux) // 2)
    bos = _bosonic_amp(form, xs + aux, vals, n * m, coeffs)

    def g(i, j, s):
        return 2 * (i * m + j) + s

    th = [[GrassmannPoly.generator(n_gen, g(i, j, 0)) for j in range(m)] for i in range(n + 1)]
    tt = [[GrassmannPoly.generator(n_gen, g(i, j, 1)) for j in range(m)] for i in range(n + 1)]
    terms = []
    for i in range(1, n):
        for j in range(m):
            d = _fermi_diffs_fixed(th, tt, i, j, r, m)
            terms.append(th[i][j] * d["th_t"] * 0.5j + th[i][j] * d["th_x"] * 0.5j
                         + tt[i][j] * d["tt_t"] * 0.5j - tt[i][j] * d["tt_x"] * 0.5j)
    s_f = _sum(n_gen, terms)
    interior = [g(i, j, s) for i in range(1, n) for j in range(m) for s in (1, 0)]
    res = integrate((s_f * 1j).exp(), interior)
    boundary = [g(i, j, s) for i in (0, n) for j in range(m) for s in (0, 1)]
    return restrict(res, boundary) * bos


def _fermi_diffs_fixed(th, tt, i, j, r, m):
    """Same differences with periodic space and explicit (non-wrapping) time rows."""
    def at(grid, ii, jj):
        return grid[ii][jj % m]

    def diff(grid, partner, sign, di, dj):
        up, dn = at(grid, i + di, j + dj), at(grid, i - di, j - dj)
        out = up - dn
        if r:
            wil = at(partner, i + di, j + dj) + at(partner, i - di, j - dj) - at(partner, i, j) * 2
            out = out + wil * (sign * r)
        return out

    return {
        "th_t": diff(th, tt, -1.0, 1, 0),
        "th_x": diff(th, tt, -1.0, 0, 1),
        "tt_t": diff(tt, th, +1.0, 1, 0),
        "tt_x": diff(tt, th, -1.0, 0, 1),
    }


# clock and shift


def clock_shift(m: int):
    """U = diag(exp(2 pi i k / M)), V the cyclic shift |k> -> |k+1>."""
    if m < 1:
        raise ValueError("M must be >= 1")
    k = np.arange(m)
    u = np.diag(np.exp(2j * np.pi * k / m))
    v = np.zeros((m, m), dtype=complex)
    v[(k + 1) % m, k] = 1.0
    return u, v


def clock_shift_residual(m: int) -> float:
    u, v = clock_shift(m)
    return float(np.max(np.abs(u @ v - np.exp(2j * np.pi / m) * v @ u)))
