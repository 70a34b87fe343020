"""Amplitudes for automata whose cells take values in Z_k.

Includes the continuous-time quantum walk on Z and its image sum on Z_k,
the circle-parameterized action, and its k = 2 (Ising) reduction.  Sums
over lattice configurations are exact and exponential in size, guarded by
an enumeration budget (``QCA_ENUM_BUDGET`` overrides the default).
"""

from __future__ import annotations

import cmath
import math
import os
from typing import Callable

import numpy as np
from scipy.special import jv

from .errors import EnumerationBudgetExceeded
from .lattice import ComplexAmp

DEFAULT_BUDGET = 10_000_000
TRUNCATION_TOL = 1e-12
_CHUNK = 1 << 16


def enumeration_budget() -> int:
    env = os.environ.get("QCA_ENUM_BUDGET")
    return int(env) if env else DEFAULT_BUDGET


def walk_z(delta: int, t: float) -> ComplexAmp:
    """Quantum-walk amplitude on Z for displacement ``delta`` after time ``t``.

    (1/2pi) int dp exp(i p delta) exp(-2it(cos p - 1)) = exp(2it) (-i)^|delta| J_|delta|(2t)
    """
    return ComplexAmp.from_complex(_walk_z(int(delta), float(t)))


def _walk_z(delta: int, t: float) -> complex:
    n = abs(delta)
    return cmath.exp(2j * t) * (-1j) ** (n % 4) * float(jv(n, 2 * t))


def bessel_tail_cutoff(t: float, k: int, tol: float = TRUNCATION_TOL) -> int:
    """Smallest m_max whose neglected images sum below ``tol``.

    Every image with |m| > m_max has |delta| >= (m_max) k, and
    |J_n(2t)| <= t^n / n! bounds each one; the tail is summed geometrically.
    """
    t = abs(t)
    m_max = 1
    while True:
        n0 = m_max * k
        if n0 + 1 > 2 * t:
            log_term = n0 * math.log(t) - math.lgamma(n0 + 1) if t > 0 else -math.inf
            ratio = t / (n0 + 1)
            # both signs of m, and the k-spaced images shrink at least geometrically
            bound = 2 * math.exp(log_term) / (1 - ratio)
            if bound < tol:
                return m_max
        m_max += 1


def image_sum(amplitude_z: Callable[[int], complex], k: int, x_i: int, x_f: int, m_max: int) -> complex:
    """Periodize an amplitude on Z: sum_{|m| <= m_max} K_Z(x_i + m k - x_f)."""
    terms = [complex(amplitude_z(x_i + m * k - x_f)) for m in range(-m_max, m_max + 1)]
    return math.fsum(z.real for z in terms) + 1j * math.fsum(z.imag for z in terms)


def walk_zk(k: int, x_i: int, x_f: int, t: float, m_max: int | None = None) -> ComplexAmp:
    """Quantum walk on the cycle Z_k as an image sum of walks on Z."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if m_max is None:
        m_max = bessel_tail_cutoff(t, k)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    return ComplexAmp.from_complex(image_sum(lambda d: _walk_z(d, t), k, x_i, x_f, m_max))


def walk_zk_momentum(k: int, x_i: int, x_f: int, t: float) -> ComplexAmp:
    """Same amplitude from the k momentum eigenstates of the cycle."""
    n = np.arange(k)
    p = 2 * np.pi * n / k
    terms = np.exp(1j * p * (x_i - x_f)) * np.exp(-2j * t * (np.cos(p) - 1))
    return ComplexAmp.from_complex(terms.sum() / k)


def _cos_table(k: int) -> np.ndarray:
    return np.cos(2 * np.pi * np.arange(k) / k)


def _bond_sum(spatial: np.ndarray, temporal: np.ndarray) -> np.ndarray:
    """Sum over rows 0..N-1 and sites of spatial minus temporal bond terms.

    Arrays carry a leading batch axis: (batch, N, M).
    """
    return (spatial - temporal).sum(axis=(-2, -1))


def _circle_batch(k: int, configs: np.ndarray) -> np.ndarray:
    table = _cos_table(k)
    x = configs
    spatial = table[(np.roll(x[:, :-1], -1, axis=2) - x[:, :-1]) % k]
    temporal = table[(x[:, 1:] - x[:, :-1]) % k]
    return (k / (2 * math.pi)) ** 2 * _bond_sum(spatial, temporal)


def circle_action(k: int, config) -> float:
    """(k/2pi)^2 sum cos(2pi(X(I,J+1)-X(I,J))/k) - cos(2pi(X(I+1,J)-X(I,J))/k).

    ``config`` holds rows 0..N (shape (N+1, M)); sums run over I = 0..N-1
    with periodic J.  Cosines are read from a table indexed by the
    difference mod k, so shifts by multiples of k leave the value bit-identical.
    """
    x = np.asarray(config, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("config needs at least the initial and final rows")
    return float(_circle_batch(k, x[None])[0])


def _ising_batch(spins: np.ndarray) -> np.ndarray:
    s = spins
    spatial = np.roll(s[:, :-1], -1, axis=2) * s[:, :-1]
    temporal = s[:, 1:] * s[:, :-1]
    return (1 / math.pi) ** 2 * _bond_sum(spatial.astype(float), temporal.astype(float))


def ising_action(config) -> float:
    """(1/pi)^2 sum S(I,J+1)S(I,J) - S(I+1,J)S(I,J) for spins +-1."""
    s = np.asarray(config, dtype=np.int64)
    if not np.all(np.abs(s) == 1):
        raise ValueError("spins must be +1 or -1")
    return float(_ising_batch(s[None])[0])


def _enumerate(values: np.ndarray, n_interior: int, row0, rown, action_batch, budget: int | None):
    """Sum exp(i*action) over all interior fillings, in lexicographic order."""
    m = len(row0)
    n_vals = len(values)
    count = n_vals ** (n_interior * m)
    budget = enumeration_budget() if budget is None else budget
    if count > budget:
        raise EnumerationBudgetExceeded(count, budget)
    cells = n_interior * m
    total_re, total_im = [], []
    for start in range(0, count, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, count), dtype=np.int64)
        digits = np.empty((len(idx), cells), dtype=np.int64)
        rem = idx.copy()
        for c in range(cells - 1, -1, -1):
            digits[:, c] = rem % n_vals
            rem //= n_vals
        interior = values[digits].reshape(len(idx), n_interior, m)
        configs = np.concatenate([
            np.broadcast_to(row0, (len(idx), 1, m)),
            interior,
            np.broadcast_to(rown, (len(idx), 1, m)),
        ], axis=1)
        phases = np.exp(1j * action_batch(configs))
        total_re.append(float(np.sum(phases.real)))
        total_im.append(float(np.sum(phases.imag)))
    return complex(math.fsum(total_re), math.fsum(total_im))


def zk_amplitude(k: int, row0, rown, steps: int, budget: int | None = None) -> ComplexAmp:
    """Exact sum over interior Z_k configurations of exp(i * circle_action)."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    r0 = np.asarray(row0, dtype=np.int64) % k
    rn = np.asarray(rown, dtype=np.int64) % k
    values = np.arange(k, dtype=np.int64)
    return ComplexAmp.from_complex(
        _enumerate(values, steps - 1, r0, rn, lambda c: _circle_batch(k, c), budget))


def ising_amplitude(row0, rown, steps: int, budget: int | None = None) -> ComplexAmp:
    """Exact sum over interior spin configurations of exp(i * ising_action)."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    r0 = np.asarray(row0, dtype=np.int64)
    rn = np.asarray(rown, dtype=np.int64)
    if not (np.all(np.abs(r0) == 1) and np.all(np.abs(rn) == 1)):
        raise ValueError("spins must be +1 or -1")
    # +1 first so the enumeration order matches Z_2 values (0, 1) under S = cos(pi X)
    values = np.array([1, -1], dtype=np.int64)
    return ComplexAmp.from_complex(_enumerate(values, steps - 1, r0, rn, _ising_batch, budget))


def z2_to_spins(config) -> np.ndarray:
    """S_z = cos(pi X) for integer X."""
    return 1 - 2 * (np.asarray(config, dtype=np.int64) % 2)
