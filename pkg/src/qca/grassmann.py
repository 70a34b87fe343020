"""Grassmann algebra with Berezin integration.

A polynomial is a set of monomials, each a bitmask over at most 63
generators with the generators written in ascending index order, and a
complex coefficient.  theta_g^2 = 0 is enforced by the encoding and the
product sign counts the transpositions needed to sort the concatenation.
"""

from __future__ import annotations

import math
from typing import Iterable, Mapping

import numpy as np

MAX_GENERATORS = 63
ZERO_TOL = 0.0


def _popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x.astype(np.uint64)).astype(np.int64)


def _reorder_sign(left: np.ndarray, right: np.ndarray, n_gen: int) -> np.ndarray:
    """(-1)^(pairs a in left, b in right with a > b), elementwise."""
    swaps = np.zeros(np.broadcast(left, right).shape, dtype=np.int64)
    right_b = np.broadcast_to(right, swaps.shape)
    left_b = np.broadcast_to(left, swaps.shape)
    for b in range(n_gen):
        has = ((right_b >> b) & 1).astype(bool)
        if has.any():
            swaps[has] += _popcount(left_b[has] >> (b + 1))
    return 1 - 2 * (swaps & 1)


def _combine(keys: np.ndarray, vals: np.ndarray):
    if keys.size == 0:
        return keys.astype(np.int64), vals.astype(complex)
    uniq, inv = np.unique(keys, return_inverse=True)
    re = np.bincount(inv, weights=vals.real, minlength=len(uniq))
    im = np.bincount(inv, weights=vals.imag, minlength=len(uniq))
    out = re + 1j * im
    keep = np.abs(out) > ZERO_TOL
    return uniq[keep], out[keep]


class GrassmannPoly:
    """Immutable polynomial over ``n_gen`` anticommuting generators."""

    __slots__ = ("n_gen", "keys", "vals")

    def __init__(self, n_gen: int, terms: Mapping[int, complex] | None = None, *, _arrays=None):
        if not 0 <= n_gen <= MAX_GENERATORS:
            raise ValueError(f"at most {MAX_GENERATORS} generators supported")
        self.n_gen = n_gen
        if _arrays is not None:
            keys, vals = _arrays
        else:
            items = dict(terms or {})
            keys = np.fromiter(items.keys(), dtype=np.int64, count=len(items))
            vals = np.fromiter((complex(v) for v in items.values()), dtype=complex, count=len(items))
            if keys.size and (keys.min() < 0 or keys.max() >= (1 << n_gen)):
                raise ValueError("monomial refers to a generator outside the algebra")
            keys, vals = _combine(keys, vals)
        keys.setflags(write=False)
        vals.setflags(write=False)
        self.keys = keys
        self.vals = vals

    # construction

    @classmethod
    def zero(cls, n_gen: int) -> "GrassmannPoly":
        return cls(n_gen, {})

    @classmethod
    def scalar(cls, n_gen: int, value: complex) -> "GrassmannPoly":
        return cls(n_gen, {0: value})

    @classmethod
    def generator(cls, n_gen: int, index: int, coeff: complex = 1.0) -> "GrassmannPoly":
        if not 0 <= index < n_gen:
            raise ValueError(f"generator {index} outside 0..{n_gen - 1}")
        return cls(n_gen, {1 << index: coeff})

    @classmethod
    def monomial(cls, n_gen: int, indices: Iterable[int], coeff: complex = 1.0) -> "GrassmannPoly":
        """Product of generators in the order given, times ``coeff``."""
        out = cls.scalar(n_gen, coeff)
        for g in indices:
            out = out * cls.generator(n_gen, g)
        return out

    @classmethod
    def linear(cls, n_gen: int, coeffs: Mapping[int, complex]) -> "GrassmannPoly":
        return cls(n_gen, {1 << g: c for g, c in coeffs.items()})

    def _new(self, keys, vals) -> "GrassmannPoly":
        keys, vals = _combine(np.asarray(keys, dtype=np.int64), np.asarray(vals, dtype=complex))
        return GrassmannPoly(self.n_gen, _arrays=(keys, vals))

    # inspection

    def terms(self) -> dict:
        return {int(k): complex(v) for k, v in zip(self.keys, self.vals)}

    def __len__(self) -> int:
        return int(self.keys.size)

    def coefficient(self, indices: Iterable[int]) -> complex:
        """Coefficient of the ascending-ordered monomial on ``indices``."""
        mask = 0
        for g in indices:
            mask |= 1 << g
        hit = np.nonzero(self.keys == mask)[0]
        return complex(self.vals[hit[0]]) if hit.size else 0j

    @property
    def body(self) -> complex:
        return self.coefficient(())

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.vals))) if self.vals.size else 0.0

    def degrees(self) -> np.ndarray:
        return _popcount(self.keys)

    def is_even(self) -> bool:
        return bool(np.all(self.degrees() % 2 == 0))

    def support(self) -> int:
        """Bitmask of every generator that appears."""
        return int(np.bitwise_or.reduce(self.keys)) if self.keys.size else 0

    # arithmetic

    def _coerce(self, other) -> "GrassmannPoly":
        if isinstance(other, GrassmannPoly):
            if other.n_gen != self.n_gen:
                raise ValueError("polynomials live in different algebras")
            return other
        return GrassmannPoly.scalar(self.n_gen, complex(other))

    def __add__(self, other) -> "GrassmannPoly":
        o = self._coerce(other)
        return self._new(np.concatenate([self.keys, o.keys]), np.concatenate([self.vals, o.vals]))

    __radd__ = __add__

    def __neg__(self) -> "GrassmannPoly":
        return GrassmannPoly(self.n_gen, _arrays=(self.keys.copy(), -self.vals))

    def __sub__(self, other) -> "GrassmannPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "GrassmannPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "GrassmannPoly":
        if not isinstance(other, GrassmannPoly):
            c = complex(other)
            return self._new(self.keys.copy(), self.vals * c)
        o = self._coerce(other)
        if len(self) == 0 or len(o) == 0:
            return GrassmannPoly.zero(self.n_gen)
        a = self.keys[:, None]
        b = o.keys[None, :]
        ok = (a & b) == 0
        ai, bi = np.nonzero(ok)
        left, right = self.keys[ai], o.keys[bi]
        sign = _reorder_sign(left, right, self.n_gen)
        return self._new(left | right, sign * self.vals[ai] * o.vals[bi])

    def __rmul__(self, other) -> "GrassmannPoly":
        # scalars commute with everything
        return self * other

    def __truediv__(self, other) -> "GrassmannPoly":
        return self * (1.0 / complex(other))

    def prune(self, tol: float) -> "GrassmannPoly":
        keep = np.abs(self.vals) > tol
        return GrassmannPoly(self.n_gen, _arrays=(self.keys[keep], self.vals[keep]))

    def exp(self) -> "GrassmannPoly":
        """exp(p) = e^{body} * exp(soul); terminates by nilpotency."""
        body = self.body
        soul = self - body
        if soul.is_even():
            # even monomials commute and square to zero: exp is a product of (1 + c m)
            out = GrassmannPoly.scalar(self.n_gen, 1.0)
            for k, v in zip(soul.keys, soul.vals):
                factor = GrassmannPoly(self.n_gen, _arrays=(np.array([0, k], dtype=np.int64),
                                                          np.array([1.0, v], dtype=complex)))
                out = out * factor
        else:
            out = GrassmannPoly.scalar(self.n_gen, 1.0)
            term = GrassmannPoly.scalar(self.n_gen, 1.0)
            for n in range(1, self.n_gen + 1):
                term = term * soul / n
                if len(term) == 0:
                    break
                out = out + term
        return out * complex(np.exp(body))

    def __repr__(self) -> str:
        return f"GrassmannPoly(n_gen={self.n_gen}, terms={len(self)})"


def berezin(poly: GrassmannPoly, generator: int) -> GrassmannPoly:
    """Integral d(theta_g): moves theta_g to the front and drops it."""
    if not 0 <= generator < poly.n_gen:
        raise ValueError(f"generator {generator} outside 0..{poly.n_gen - 1}")
    bit = 1 << generator
    has = (poly.keys & bit) != 0
    keys = poly.keys[has]
    before = _popcount(keys & (bit - 1))
    sign = 1 - 2 * (before & 1)
    return poly._new(keys & ~bit, poly.vals[has] * sign)


def derivative(poly: GrassmannPoly, generator: int) -> GrassmannPoly:
    """Left derivative; identical to the Berezin integral."""
    return berezin(poly, generator)


def integrate(poly: GrassmannPoly, order: Iterable[int]) -> GrassmannPoly:
    """Apply Berezin integrals innermost first, in the order given."""
    out = poly
    for g in order:
        out = berezin(out, g)
    return out
