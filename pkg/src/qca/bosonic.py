"""Path-integral quantization of the bosonic automata.

Conventions
-----------
The one-cell action is ``S = sum_{I=0}^{N-1} 1/2 (X(I+1)-X(I))^2 - 1/2 W^2 X(I)^2``
and the path measure is ``prod_I dX(I) / sqrt(2 pi i)`` with one extra
overall ``(2 pi i)^(-1/2)``, so that one time step gives
``(2 pi i)^(-1/2) exp(iS)`` and kernels compose with a plain ``dX``.

Brute-force integration of this action and the closed form differ by the
endpoint phase ``exp(i W^2 (X_N^2 - X_0^2) / 4)``.  Both kernels compose
exactly, so the phase is a pure gauge factor; it is exposed through
:func:`gauge_phase` rather than absorbed into the action.

The closed form is written with Chebyshev polynomials of ``c = 1 - W^2/2``
(``U_{N-1}(cos phi) = sin(N phi)/sin(phi)``, ``T_N(cos phi) = cos(N phi)``),
which stays finite at ``W = 0`` and ``W = 2``.  The square root takes the
branch continued through each caustic, i.e. a factor ``-i`` for every
negative eigenvalue of the interior Hessian.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import CausticError
from .lattice import (
    ComplexAmp,
    QuadraticBuilder,
    QuadraticForm,
    _fresnel,
    real_mode_coordinates,
    reduce_quadratic,
)

CAUSTIC_TOL = 1e-9


@dataclass(frozen=True)
class HOParams:
    """Discrete oscillator: ``steps`` time steps with coupling ``w``.

    ``phi`` (the product a0*omega) and ``w`` are tied by 1/2 W^2 = 1 - cos(phi).
    """

    steps: int
    w: float

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.w < 0 or not math.isfinite(self.w):
            raise ValueError("w must be finite and non-negative")

    @classmethod
    def from_phi(cls, steps: int, phi: float) -> "HOParams":
        return cls(steps, 2.0 * math.sin(phi / 2.0))

    @property
    def cos_phi(self) -> float:
        return 1.0 - 0.5 * self.w * self.w

    @property
    def phi(self) -> float:
        if self.w > 2.0:
            raise ValueError("w > 2 has no real phi")
        return 2.0 * math.asin(self.w / 2.0)


@dataclass(frozen=True)
class GaussianKernel:
    """K(x_f, x_i) = prefactor * exp(i (a x_f^2 + b x_f x_i + c x_i^2))."""

    prefactor: complex
    a: float
    b: float
    c: float

    def __call__(self, xf: float, xi: float) -> complex:
        return self.prefactor * cmath.exp(1j * (self.a * xf * xf + self.b * xf * xi + self.c * xi * xi))


def chebyshev_pair(c: float, n: int):
    """(U_{n-1}(c), T_n(c)) by the three-term recurrence."""
    u_prev, u = 0.0, 1.0  # U_{-1}, U_0
    t_prev, t = 1.0, c  # T_0, T_1
    for _ in range(n - 1):
        u_prev, u = u, 2 * c * u - u_prev
        t_prev, t = t, 2 * c * t - t_prev
    return u, t


def negative_modes(c: float, n: int) -> int:
    """Negative eigenvalues of tridiag(-1, 2c, -1) of size n-1."""
    k = np.arange(1, n)
    return int(np.sum(np.cos(np.pi * k / n) > c))


def _branch(n_neg: int) -> complex:
    # sqrt(1/i) continued through each caustic: exp(-i pi/4) * (-i)^n_neg
    return cmath.exp(-1j * math.pi / 4) * (-1j) ** (n_neg % 4)


def _chebyshev_data(params: HOParams):
    n, w = params.steps, params.w
    c = params.cos_phi
    if 0.0 < w < 2.0:
        phi = params.phi
        s_n = math.sin(n * phi)
        if abs(s_n) < CAUSTIC_TOL:
            raise CausticError(f"sin(N phi) = {s_n:.3g} at N={n}, phi={phi:.17g}")
        u, t = s_n / math.sin(phi), math.cos(n * phi)
    else:
        u, t = chebyshev_pair(c, n)
        if abs(u) < CAUSTIC_TOL:
            raise CausticError(f"U_(N-1) vanishes at N={n}, W={w}")
    n_neg = negative_modes(c, n)
    return u, t, n_neg


def closed_gaussian(params: HOParams) -> GaussianKernel:
    """Closed-form discrete oscillator kernel as Gaussian coefficients."""
    u, t, n_neg = _chebyshev_data(params)
    pref = _branch(n_neg) / math.sqrt(2 * math.pi * abs(u))
    return GaussianKernel(pref, t / (2 * u), -1.0 / u, t / (2 * u))


def kernel_ho_closed(params: HOParams, x0: float, xn: float) -> ComplexAmp:
    """sqrt(sin phi / (2 pi i sin N phi)) exp(i sin phi ((x0^2+xN^2) cos N phi - 2 x0 xN) / (2 sin N phi))."""
    return ComplexAmp.from_complex(closed_gaussian(params)(xn, x0))


def action_1cell(params: HOParams, trajectory) -> float:
    x = np.asarray(trajectory, dtype=float)
    if x.shape != (params.steps + 1,):
        raise ValueError("trajectory must have N+1 entries")
    kin = 0.5 * np.diff(x) ** 2
    pot = 0.5 * params.w ** 2 * x[:-1] ** 2
    return float(np.sum(kin - pot))


def action_form(params: HOParams) -> QuadraticForm:
    """The one-cell action as a quadratic form in X(0..N)."""
    n = params.steps
    qb = QuadraticBuilder(range(n + 1))
    for i in range(n):
        qb.add_square({i + 1: 1.0, i: -1.0}, 0.5)
        qb.add_square({i: 1.0}, -0.5 * params.w ** 2)
    return qb.build()


def measure_factor(n_integrals: int) -> complex:
    """(2 pi i)^(-n/2) on the principal branch."""
    return (2 * math.pi) ** (-n_integrals / 2) * cmath.exp(-1j * math.pi * n_integrals / 4)


def oracle_gaussian(params: HOParams) -> GaussianKernel:
    """Kernel from sequential Fresnel elimination of X(1)..X(N-1)."""
    n = params.steps
    form = action_form(params)
    pref, resid = reduce_quadratic(form, range(1, n))
    a = resid.matrix
    i0, i_n = resid.index(0), resid.index(n)
    return GaussianKernel(complex(pref) * measure_factor(n),
                          0.5 * a[i_n, i_n], a[i0, i_n], 0.5 * a[i0, i0])


def kernel_ho_oracle(params: HOParams, x0: float, xn: float) -> ComplexAmp:
    return ComplexAmp.from_complex(oracle_gaussian(params)(xn, x0))


def gauge_phase(params: HOParams, x0: float, xn: float) -> complex:
    """Factor relating the two kernels: oracle = closed * gauge_phase."""
    return cmath.exp(1j * params.w ** 2 * (xn * xn - x0 * x0) / 4)


def compose(late: GaussianKernel, early: GaussianKernel, xf: float, xi: float) -> complex:
    """Integral over the midpoint X of late(xf, X) * early(X, xi), in closed form."""
    quad = late.c + early.a
    lin = late.b * xf + early.b * xi
    outer = cmath.exp(1j * (late.a * xf * xf + early.c * xi * xi))
    return late.prefactor * early.prefactor * outer * _fresnel(quad, lin)


def kernel_mcell(row0, rown, steps: int) -> ComplexAmp:
    """M-cell wave-rule kernel as a product of one-cell oscillator kernels.

    Each real mode coordinate carries W_n = 2 sin(pi n / M); the zero mode
    is a free particle.
    """
    c0 = real_mode_coordinates(row0)
    cn = real_mode_coordinates(rown)
    if len(c0) != len(cn):
        raise ValueError("boundary rows differ in length")
    total = complex(1.0)
    for (n, w, a), (_, _, b) in zip(c0, cn):
        try:
            total *= closed_gaussian(HOParams(steps, w))(b, a)
        except CausticError as exc:
            raise CausticError(f"mode n={n}: {exc}") from None
    return ComplexAmp.from_complex(total)


def gradient_energy(row) -> float:
    x = np.asarray(row, dtype=float)
    return float(np.sum((np.roll(x, -1) - x) ** 2))


def mcell_gauge_phase(row0, rown) -> complex:
    """Product of per-mode gauge phases, exp(i (E(rowN) - E(row0)) / 4)."""
    return cmath.exp(1j * (gradient_energy(rown) - gradient_energy(row0)) / 4)


def mcell_action_form(m: int, steps: int) -> QuadraticForm:
    """Wave-rule action on rows 0..N of a periodic ring of M cells."""
    labels = [(i, j) for i in range(steps + 1) for j in range(m)]
    qb = QuadraticBuilder(labels)
    for i in range(steps):
        for j in range(m):
            qb.add_square({(i + 1, j): 1.0, (i, j): -1.0}, 0.5)
            jr = (j + 1) % m
            if jr != j:
                qb.add_square({(i, jr): 1.0, (i, j): -1.0}, -0.5)
    return qb.build()


def kernel_mcell_direct(row0, rown, steps: int) -> ComplexAmp:
    """Brute-force Fresnel reduction of the M-cell action over interior rows."""
    row0 = np.asarray(row0, dtype=float)
    rown = np.asarray(rown, dtype=float)
    m = row0.shape[0]
    form = mcell_action_form(m, steps)
    interior = [(i, j) for i in range(1, steps) for j in range(m)]
    pref, resid = reduce_quadratic(form, interior)
    x = np.empty(resid.size)
    for k, (i, j) in enumerate(resid.var_labels):
        x[k] = row0[j] if i == 0 else rown[j]
    value = complex(pref) * measure_factor(steps * m) * cmath.exp(1j * resid.evaluate(x))
    return ComplexAmp.from_complex(value)


def kernel_continuum_reference(omega: float, t: float, x0: float, xn: float) -> ComplexAmp:
    """Continuum oscillator kernel (unit mass, hbar = 1)."""
    if omega == 0.0:
        return ComplexAmp.from_complex(
            cmath.exp(-1j * math.pi / 4) / math.sqrt(2 * math.pi * t)
            * cmath.exp(1j * (xn - x0) ** 2 / (2 * t)))
    s = math.sin(omega * t)
    if abs(s) < CAUSTIC_TOL:
        raise CausticError(f"sin(omega T) = {s:.3g}")
    n_neg = int(math.floor(abs(omega * t) / math.pi))
    pref = _branch(n_neg) * math.sqrt(abs(omega / s) / (2 * math.pi))
    expo = omega * ((x0 * x0 + xn * xn) * math.cos(omega * t) - 2 * x0 * xn) / (2 * s)
    return ComplexAmp.from_complex(pref * cmath.exp(1j * expo))


def kernel_ho_physical(omega: float, t: float, steps: int, x0: float, xn: float) -> ComplexAmp:
    """N-step lattice kernel expressed in continuum units.

    Lattice spacing a0 = T/N, phi = omega*a0, positions rescaled by sqrt(a0).
    """
    a0 = t / steps
    params = HOParams.from_phi(steps, omega * a0)
    k = closed_gaussian(params)(xn / math.sqrt(a0), x0 / math.sqrt(a0))
    return ComplexAmp.from_complex(k / math.sqrt(a0))
