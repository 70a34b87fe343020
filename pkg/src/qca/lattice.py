"""Lattice primitives and the exact Gaussian (Fresnel) reduction engine.

Every bosonic path integral in the package is a product of oscillatory
Gaussian integrals.  ``reduce_quadratic`` performs them one variable at a
time by completing the square, which keeps the computation exact up to
floating point and makes the elimination order irrelevant.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import BoundaryError, SingularIntegral, SingularReduction

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class LatticeShape:
    n_time: int
    m_space: int
    time_boundary: str = "fixed"
    space_boundary: str = "periodic"

    def __post_init__(self):
        if self.n_time < 1 or self.m_space < 1:
            raise ValueError("lattice needs n_time >= 1 and m_space >= 1")
        if self.time_boundary not in ("fixed", "periodic"):
            raise ValueError(f"unknown time boundary {self.time_boundary!r}")
        if self.space_boundary not in ("periodic", "open"):
            raise ValueError(f"unknown space boundary {self.space_boundary!r}")

    def site(self, j: int) -> int:
        """Resolve a spatial index, wrapping on a periodic lattice."""
        if self.space_boundary == "periodic":
            return j % self.m_space
        if not 0 <= j < self.m_space:
            raise BoundaryError(f"site {j} outside open lattice of {self.m_space}")
        return j


@dataclass(frozen=True)
class ComplexAmp:
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError("amplitude components must be finite")

    @classmethod
    def from_complex(cls, z: complex) -> "ComplexAmp":
        z = complex(z)
        return cls(z.real, z.imag)

    @property
    def modulus(self) -> float:
        return math.hypot(self.re, self.im)

    @property
    def phase(self) -> float:
        return math.atan2(self.im, self.re)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __mul__(self, other) -> "ComplexAmp":
        return ComplexAmp.from_complex(complex(self) * complex(other))

    __rmul__ = __mul__

    def to_json(self) -> dict:
        return {"re": format(self.re, ".17g"), "im": format(self.im, ".17g")}


@dataclass(frozen=True)
class QuadraticForm:
    """S(x) = 1/2 x^T A x + b^T x + c over labelled real variables."""

    matrix: np.ndarray
    linear: np.ndarray
    constant: float = 0.0
    var_labels: tuple = field(default=())

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("matrix must be square")
        b = np.asarray(self.linear, dtype=float).reshape(n)
        labels = tuple(self.var_labels) if self.var_labels else tuple(range(n))
        if len(labels) != n:
            raise ValueError("one label per variable required")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "linear", b)
        object.__setattr__(self, "constant", float(self.constant))
        object.__setattr__(self, "var_labels", labels)

    @property
    def size(self) -> int:
        return len(self.var_labels)

    def index(self, label: Hashable) -> int:
        return self.var_labels.index(label)

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.matrix @ x + self.linear @ x + self.constant)


class QuadraticBuilder:
    """Accumulates squared linear combinations into a QuadraticForm.

    ``add_square({i: c_i, ...}, w)`` adds ``w * (sum c_i x_i)**2`` and
    ``add_product(u, v, w)`` adds ``w * (u.x)(v.x)``.
    """

    def __init__(self, labels: Sequence[Hashable]):
        self.labels = list(labels)
        self._pos = {lab: k for k, lab in enumerate(self.labels)}
        n = len(self.labels)
        self.a = np.zeros((n, n))
        self.b = np.zeros(n)
        self.c = 0.0

    def _vec(self, combo: dict) -> np.ndarray:
        v = np.zeros(len(self.labels))
        for lab, coef in combo.items():
            v[self._pos[lab]] += coef
        return v

    def add_square(self, combo: dict, weight: float) -> None:
        v = self._vec(combo)
        self.a += 2.0 * weight * np.outer(v, v)

    def add_product(self, left: dict, right: dict, weight: float) -> None:
        u, v = self._vec(left), self._vec(right)
        self.a += weight * (np.outer(u, v) + np.outer(v, u))

    def add_linear(self, combo: dict, weight: float) -> None:
        self.b += weight * self._vec(combo)

    def build(self) -> QuadraticForm:
        return QuadraticForm(self.a, self.b, self.c, tuple(self.labels))


@dataclass(frozen=True)
class ModeSpectrum:
    frequencies: np.ndarray
    modes: np.ndarray


def fresnel_1d(a: float, b: float) -> ComplexAmp:
    """Integral of exp(i(a x^2 + b x)) over the real line."""
    return ComplexAmp.from_complex(_fresnel(a, b))


def _fresnel(a: float, b: float) -> complex:
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("Fresnel coefficients must be finite")
    if a == 0.0:
        raise SingularIntegral("quadratic coefficient is zero")
    sgn = 1.0 if a > 0 else -1.0
    return math.sqrt(math.pi / abs(a)) * cmath.exp(1j * (sgn * math.pi / 4 - b * b / (4 * a)))


def reduce_quadratic(form: QuadraticForm, interior: Iterable[Hashable]):
    """Integrate exp(i*form) over the ``interior`` variables.

    Variables are eliminated in the order given.  Returns ``(prefactor,
    residual)`` where ``residual`` is a QuadraticForm on the remaining
    variables and ``prefactor * exp(i*residual)`` is the integral.

    A vanishing diagonal entry is not necessarily a singular integral (the
    wave action has zero diagonal on every interior cell); in that case the
    variable is eliminated jointly with the first later interior variable
    giving a nonsingular 2x2 block.  Only when no such partner exists is
    SingularReduction raised.
    """
    prefactor = complex(1.0)
    a = np.array(form.matrix, dtype=float)
    b = np.array(form.linear, dtype=float)
    c = form.constant
    labels = list(form.var_labels)
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    pending = list(interior)
    while pending:
        lab = pending.pop(0)
        k = labels.index(lab)
        if abs(a[k, k]) >= PIVOT_TOL * scale:
            block = [k]
        else:
            block = None
            for partner in pending:
                k2 = labels.index(partner)
                det2 = a[k, k] * a[k2, k2] - a[k, k2] ** 2
                if abs(det2) >= PIVOT_TOL * scale * scale:
                    block = [k, k2]
                    pending.remove(partner)
                    break
            if block is None:
                raise SingularReduction(lab, a[k, k])
        blk = a[np.ix_(block, block)]
        eig = np.linalg.eigvalsh(blk)
        inv = np.linalg.inv(blk)
        rows = a[block]
        bb = b[block]
        n = len(block)
        prefactor *= (2 * math.pi) ** (n / 2) / math.sqrt(abs(float(np.prod(eig))))
        prefactor *= cmath.exp(1j * math.pi / 4 * float(np.sum(np.sign(eig))))
        a = a - rows.T @ inv @ rows
        b = b - rows.T @ inv @ bb
        c -= 0.5 * float(bb @ inv @ bb)
        keep = [i for i in range(len(labels)) if i not in block]
        a = a[np.ix_(keep, keep)]
        b = b[keep]
        labels = [labels[i] for i in keep]
    return ComplexAmp.from_complex(prefactor), QuadraticForm(a, b, c, tuple(labels))


def dft_modes(row) -> ModeSpectrum:
    """Symmetric-normalized spatial Fourier modes of a real row.

    Inverse relation: x(J) = M**-1/2 * sum_n X_n exp(-2 pi i n J / M).
    """
    x = np.asarray(row, dtype=float)
    m = x.shape[0]
    if m < 1:
        raise ValueError("row must be non-empty")
    modes = np.sqrt(m) * np.fft.ifft(x)
    return ModeSpectrum(mode_frequencies(m), modes)


def inverse_modes(modes) -> np.ndarray:
    modes = np.asarray(modes, dtype=complex)
    m = modes.shape[0]
    return np.fft.fft(modes) / np.sqrt(m)


def mode_frequencies(m: int) -> np.ndarray:
    return 2.0 * np.sin(np.pi * np.arange(m) / m)


def real_mode_coordinates(row):
    """Orthogonal real coordinates of a row, paired with their frequencies.

    Modes n and M-n of a real row are conjugate; each such pair becomes the
    two real oscillators sqrt(2) Re X_n and sqrt(2) Im X_n.  The map is
    orthogonal, so sum x^2 and the spatial gradient energy are preserved.
    Returns a list of ``(n, W_n, coordinate)``.
    """
    spec = dft_modes(row)
    m = len(spec.modes)
    out = []
    for n in range(m // 2 + 1):
        partner = (m - n) % m
        w = float(spec.frequencies[n])
        if partner == n:
            out.append((n, w, float(spec.modes[n].real)))
        else:
            out.append((n, w, math.sqrt(2) * float(spec.modes[n].real)))
            out.append((n, w, math.sqrt(2) * float(spec.modes[n].imag)))
    return out


def tridiagonal_det(diag: float, off: float, size: int) -> float:
    """Determinant of the constant tridiagonal matrix by the three-term recurrence."""
    prev, cur = 1.0, diag
    if size == 0:
        return 1.0
    for _ in range(size - 1):
        prev, cur = cur, diag * cur - off * off * prev
    return cur
