"""Classical reversible cellular automata.

All rules share the second-order form

    X(I+1, J) = f(X(I, J-1), X(I, J), X(I, J+1)) + sign * X(I-1, J)

with ``sign = -1`` for the bosonic rules and ``+1`` for the fermionic,
supersymmetric and spin rules.  Running backward uses the same ``f``.
Fermionic rules are linear and act on complex c-number representatives.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BoundaryError, EmptyHistory
from .lattice import LatticeShape

BOSONIC = ("wave", "harmonic")
KINDS = ("wave", "harmonic", "spin", "susy", "fermion-right", "fermion-left")


@dataclass(frozen=True)
class RuleSpec:
    """Update rule.

    kind:
        ``wave``          f = X(J-1) + X(J+1)
        ``harmonic``      f = (2 - W^2) X(J)
        ``susy``          f = -2iW theta(J)          (fermionic oscillator)
        ``fermion-right`` f = theta(J-1) - theta(J+1)
        ``fermion-left``  f = -theta(J-1) + theta(J+1)
        ``spin``          f = 2 dt S(J) x (B + S(J-1) + S(J+1)), couplings optional
    """

    kind: str
    w: float = 0.0
    b: tuple = (0.0, 0.0, 0.0)
    coupling: bool = False
    dt: float = 1.0
    modulus: Optional[int] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown rule {self.kind!r}")
        if self.modulus is not None and self.kind != "wave":
            raise ValueError("modular arithmetic is only defined for the wave rule")
        if self.modulus is not None and self.modulus < 2:
            raise ValueError("modulus must be >= 2")

    @property
    def sign(self) -> int:
        return -1 if self.kind in BOSONIC else 1

    @property
    def uses_neighbours(self) -> bool:
        if self.kind == "spin":
            return self.coupling
        return self.kind in ("wave", "fermion-right", "fermion-left")


@dataclass
class FieldHistory:
    shape: LatticeShape
    values: np.ndarray

    @property
    def filled_rows(self) -> int:
        return self.values.shape[0]


@dataclass
class SpinHistory:
    shape: LatticeShape
    values: np.ndarray  # (rows, M, 3)

    @property
    def filled_rows(self) -> int:
        return self.values.shape[0]


@dataclass
class SusyHistory:
    p: np.ndarray
    x: np.ndarray
    theta: np.ndarray


def _neighbours(row: np.ndarray, shape: LatticeShape):
    if shape.space_boundary == "open":
        raise BoundaryError("rule references J-1 and J+1 beyond the edge of an open lattice")
    return np.roll(row, 1, axis=0), np.roll(row, -1, axis=0)


def update_term(rule: RuleSpec, row: np.ndarray, shape: LatticeShape) -> np.ndarray:
    """The f(...) contribution of one row."""
    kind = rule.kind
    if kind == "harmonic":
        return (2.0 - rule.w ** 2) * row
    if kind == "susy":
        return -2j * rule.w * row
    if kind == "spin":
        field = np.broadcast_to(np.asarray(rule.b, dtype=float), row.shape)
        if rule.coupling:
            left, right = _neighbours(row, shape)
            field = field + left + right
        return 2.0 * rule.dt * np.cross(row, field)
    left, right = _neighbours(row, shape)
    if kind == "wave":
        return left + right
    if kind == "fermion-right":
        return left - right
    return right - left


def _dtype_for(rule: RuleSpec, *rows):
    if rule.kind in ("susy", "fermion-right", "fermion-left"):
        return complex
    if rule.kind == "wave" and all(np.issubdtype(np.asarray(r).dtype, np.integer) for r in rows):
        return np.int64
    return float


def _prepare(rule: RuleSpec, first, second, shape: Optional[LatticeShape]):
    dtype = _dtype_for(rule, first, second)
    a = np.array(first, dtype=dtype)
    b = np.array(second, dtype=dtype)
    if rule.kind == "spin":
        a, b = np.atleast_2d(a), np.atleast_2d(b)
        if a.shape[-1] != 3:
            raise ValueError("spin rows need three components per site")
    else:
        a, b = np.atleast_1d(a), np.atleast_1d(b)
    if a.shape != b.shape:
        raise ValueError("initial rows differ in shape")
    if shape is None:
        shape = LatticeShape(1, a.shape[0])
    elif shape.m_space != a.shape[0]:
        raise ValueError("rows do not conform to the lattice width")
    if rule.modulus is not None:
        a, b = a % rule.modulus, b % rule.modulus
    return a, b, shape


def _run(rule, a, b, steps, shape, backward):
    if steps < 0:
        raise ValueError("steps must be non-negative")
    rows = [a, b]
    for _ in range(steps):
        prev, cur = rows[-2], rows[-1]
        f = update_term(rule, cur, shape)
        if backward and rule.sign == 1:
            nxt = prev - f
        else:
            nxt = f + rule.sign * prev
        if rule.modulus is not None:
            nxt = nxt % rule.modulus
        rows.append(nxt)
    values = np.array(rows)
    if backward:
        values = values[::-1].copy()
    out_shape = LatticeShape(max(1, values.shape[0] - 1), shape.m_space,
                             shape.time_boundary, shape.space_boundary)
    if rule.kind == "spin":
        return SpinHistory(out_shape, values)
    return FieldHistory(out_shape, values)


def evolve(rule: RuleSpec, row0, row1=None, steps: int = 0, shape: Optional[LatticeShape] = None):
    """Run the automaton forward ``steps`` times from rows 0 and 1.

    The returned history holds ``steps + 2`` rows.  For the spin rule
    ``row1`` may be omitted; it is then generated from ``row0`` by an exact
    rotation over one time step.
    """
    if row1 is None:
        if rule.kind != "spin":
            raise ValueError("second-order rules need two initial rows")
        row1 = seed_spin_row(rule, row0, shape)
    a, b, shape = _prepare(rule, row0, row1, shape)
    return _run(rule, a, b, steps, shape, backward=False)


def reverse(rule: RuleSpec, row_prev, row_last, steps: int = 0, shape: Optional[LatticeShape] = None):
    """Run the automaton backward from its final two rows.

    The history is returned in chronological order: the last two rows are
    the inputs and the first two are the recovered initial data.
    """
    a, b, shape = _prepare(rule, row_last, row_prev, shape)
    return _run(rule, a, b, steps, shape, backward=True)


def rotate(vectors, axis, angle):
    """Rodrigues rotation of row(s) of 3-vectors about a unit axis."""
    v = np.asarray(vectors, dtype=float)
    n = np.asarray(axis, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    return v * c + np.cross(n, v) * s + np.outer(v @ n, n).reshape(v.shape) * (1 - c)


def bloch_solution(s0, b, t):
    """Exact solution of dS/dt = S x B for constant B."""
    b = np.asarray(b, dtype=float)
    norm = float(np.linalg.norm(b))
    if norm == 0.0:
        return np.array(s0, dtype=float)
    return rotate(s0, b / norm, -norm * t)


def seed_spin_row(rule: RuleSpec, row0, shape: Optional[LatticeShape] = None):
    row0 = np.atleast_2d(np.asarray(row0, dtype=float))
    if not rule.coupling:
        return bloch_solution(row0, rule.b, rule.dt)
    shape = shape or LatticeShape(1, row0.shape[0])
    left, right = _neighbours(row0, shape)
    fields = np.asarray(rule.b, dtype=float) + left + right
    out = np.empty_like(row0)
    for j in range(row0.shape[0]):
        out[j] = bloch_solution(row0[j], fields[j], rule.dt)
    return out


def evolve_susy_first_order(w: float, p_rows, x_rows, theta_rows, steps: int) -> SusyHistory:
    """Discrete supersymmetric oscillator in first-order form.

    P(I+1) = -2 W^2 X(I) + P(I-1)
    X(I+1) = 2 P(I) + X(I-1)
    theta(I+1) = -2iW theta(I) + theta(I-1)
    """
    p = [float(v) for v in p_rows]
    x = [float(v) for v in x_rows]
    th = [complex(v) for v in theta_rows]
    if not (len(p) == len(x) == len(th) == 2):
        raise ValueError("each sector needs exactly two initial values")
    for i in range(1, steps + 1):
        p.append(-2.0 * w * w * x[i] + p[i - 1])
        x.append(2.0 * p[i] + x[i - 1])
        th.append(-2j * w * th[i] + th[i - 1])
    return SusyHistory(np.array(p), np.array(x), np.array(th))


def dalembert_field(left_mover, right_mover, n_rows: int, m: int) -> np.ndarray:
    """X(I, J) = X_L(I + J) + X_R(I - J) with both sequences read modulo M."""
    xl = np.asarray(left_mover)
    xr = np.asarray(right_mover)
    i = np.arange(n_rows)[:, None]
    j = np.arange(m)[None, :]
    return xl[(i + j) % len(xl)] + xr[(i - j) % len(xr)]


def rule_residual(rule: RuleSpec, values, shape: Optional[LatticeShape] = None) -> np.ndarray:
    """Residual X(I+1) - f(X(I)) - sign X(I-1) for every interior row."""
    values = np.asarray(values)
    shape = shape or LatticeShape(1, values.shape[1])
    res = [values[i + 1] - update_term(rule, values[i], shape) - rule.sign * values[i - 1]
           for i in range(1, values.shape[0] - 1)]
    return np.array(res)


def _render_values(history) -> np.ndarray:
    vals = np.asarray(history.values)
    if isinstance(history, SpinHistory):
        vals = vals[..., 2]
    if np.iscomplexobj(vals):
        vals = np.abs(vals)
    return vals.astype(float)


def render_pgm(history) -> bytes:
    """ASCII PGM (P2) image: one pixel per cell, min white, max black."""
    if history is None or history.filled_rows == 0:
        raise EmptyHistory("nothing to render")
    vals = _render_values(history)
    lo, hi = float(vals.min()), float(vals.max())
    if hi == lo:
        pix = np.full(vals.shape, 128, dtype=int)
    else:
        pix = np.rint(255.0 * (hi - vals) / (hi - lo)).astype(int)
    rows, cols = pix.shape
    out = io.StringIO()
    out.write(f"P2\n{cols} {rows}\n255\n")
    for r in pix:
        out.write(" ".join(str(int(v)) for v in r))
        out.write("\n")
    return out.getvalue().encode("ascii")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def history_csv(history) -> str:
    """One time row per line, comma separated.

    Spin rows flatten as x,y,z per site; complex rows as re,im per site.
    """
    vals = np.asarray(history.values)
    lines = []
    for row in vals:
        if np.iscomplexobj(row):
            flat = np.column_stack([row.real, row.imag]).ravel()
        else:
            flat = row.ravel()
        lines.append(",".join(_fmt(v) for v in flat))
    return "\n".join(lines) + "\n"
