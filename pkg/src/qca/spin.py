"""Spin chains, Jordan-Wigner fermions and control Hamiltonians.

Spin-1/2 operators S = sigma/2 act on C^(2^M) with site 1 as the leftmost
Kronecker factor and local basis (up, down).  Fermions are
``theta(J) = prod_{K<J} (1 - 2 n_K) S_-(J)`` with ``n = S_+ S_-``, so an
occupied site is spin up.  Operators are assembled sparse and returned as
dense arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionBudgetExceeded, HermiticityError

SITE_BUDGET = 12
CONTROL_BUDGET = 10
HERMITIAN_TOL = 1e-12

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_SPLUS = np.array([[0, 1], [0, 0]], dtype=complex)
_SMINUS = _SPLUS.T.copy()


def _check_sites(m: int, budget: int = SITE_BUDGET):
    if m < 1:
        raise ValueError("need at least one site")
    if m > budget:
        raise DimensionBudgetExceeded(m, budget)


def _embed(m: int, k: int, local: np.ndarray) -> sp.csr_matrix:
    """Operator ``local`` on site k (1-based) of an M-site chain."""
    left = sp.identity(2 ** (k - 1), format="csr", dtype=complex)
    right = sp.identity(2 ** (m - k), format="csr", dtype=complex)
    return sp.kron(sp.kron(left, sp.csr_matrix(local)), right, format="csr")


@lru_cache(maxsize=32)
def _sparse_spin(m: int):
    return {a: [_embed(m, k, 0.5 * _PAULI[a]) for k in range(1, m + 1)] for a in "xyz"}


@lru_cache(maxsize=32)
def _sparse_jw(m: int):
    dim = 2 ** m
    theta = []
    string = sp.identity(dim, format="csr", dtype=complex)
    for k in range(1, m + 1):
        s_minus = _embed(m, k, _SMINUS)
        theta.append((string @ s_minus).tocsr())
        n_k = _embed(m, k, _SPLUS @ _SMINUS)
        string = (string @ (sp.identity(dim, dtype=complex) - 2 * n_k)).tocsr()
    return theta


def spin_ops(m: int) -> dict:
    """{'x': [S_x(1)..S_x(M)], 'y': [...], 'z': [...]} as dense matrices."""
    _check_sites(m)
    return {a: [op.toarray() for op in ops] for a, ops in _sparse_spin(m).items()}


def jw_fermions(m: int):
    """(theta, theta_dagger) lists indexed by site 0..M-1 (site K+1)."""
    _check_sites(m)
    th = _sparse_jw(m)
    return [t.toarray() for t in th], [t.conj().T.toarray() for t in th]


def _bonds(m: int, boundary: str):
    if boundary not in ("open", "periodic"):
        raise ValueError(f"unknown boundary {boundary!r}")
    pairs = [(k, k + 1) for k in range(m - 1)]
    if boundary == "periodic":
        pairs.append((m - 1, 0))
    return pairs


def heisenberg_h(m: int, b=(0.0, 0.0, 0.0), boundary: str = "open") -> np.ndarray:
    """sum_J S(J).S(J+1) + B.S(J)."""
    _check_sites(m)
    if m < 2:
        raise ValueError("need M >= 2")
    s = _sparse_spin(m)
    h = sp.csr_matrix((2 ** m, 2 ** m), dtype=complex)
    for j, k in _bonds(m, boundary):
        for a in "xyz":
            h = h + s[a][j] @ s[a][k]
    for j in range(m):
        for a, ba in zip("xyz", b):
            if ba:
                h = h + ba * s[a][j]
    return h.toarray()


def tfim_h(m: int, bz: float, gamma: float, boundary: str = "open") -> np.ndarray:
    """sum_K B_z S_z(K) + gamma S_x(K) S_x(K+1)."""
    _check_sites(m)
    if m < 2:
        raise ValueError("need M >= 2")
    s = _sparse_spin(m)
    h = sp.csr_matrix((2 ** m, 2 ** m), dtype=complex)
    for k in range(m):
        h = h + bz * s["z"][k]
    for j, k in _bonds(m, boundary):
        h = h + gamma * (s["x"][j] @ s["x"][k])
    return h.toarray()


def _number_ops(th):
    return [t.conj().T @ t for t in th]


def parity_operator(m: int) -> np.ndarray:
    """exp(i pi N) = prod_K (1 - 2 n_K)."""
    _check_sites(m)
    th = _sparse_jw(m)
    out = sp.identity(2 ** m, format="csr", dtype=complex)
    for n_k in _number_ops(th):
        out = out @ (sp.identity(2 ** m, dtype=complex) - 2 * n_k)
    return out.toarray()


def fermionized_tfim(m: int, bz: float, gamma: float, boundary: str = "open",
                     include_boundary_term: bool = True) -> np.ndarray:
    """Transverse-field Ising chain written with Jordan-Wigner fermions.

    H = -B_z M/2 + B_z sum n_K + gamma/4 sum A_K B_(K+1),
    A = theta^dag - theta, B = theta^dag + theta.
    On a periodic chain the wrap-around bond is A_M B_1 and the boundary
    term -gamma/4 (P + 1) A_M B_1 with parity P = exp(i pi N) restores the
    exact spin Hamiltonian; dropping it leaves the quadratic form.
    """
    _check_sites(m)
    if m < 2:
        raise ValueError("need M >= 2")
    th = _sparse_jw(m)
    dim = 2 ** m
    eye = sp.identity(dim, format="csr", dtype=complex)
    a = [t.conj().T - t for t in th]
    bb = [t.conj().T + t for t in th]
    h = -bz * m / 2 * eye
    for n_k in _number_ops(th):
        h = h + bz * n_k
    for j, k in _bonds(m, boundary):
        h = h + gamma / 4 * (a[j] @ bb[k])
    if boundary == "periodic" and include_boundary_term:
        parity = sp.csr_matrix(parity_operator(m))
        h = h - gamma / 4 * ((parity + eye) @ (a[m - 1] @ bb[0]))
    return h.toarray()


def fermionized_heisenberg(m: int, bz: float = 1.0, boundary: str = "open") -> np.ndarray:
    """Jordan-Wigner image of the Heisenberg chain with B = (0, 0, B_z).

    sum_J 1/2 (th^dag_J th_(J+1) + h.c.) + (n_J - 1/2)(n_(J+1) - 1/2) + B_z (n_J - 1/2).
    The printed fermion form keeps the hopping and the n n interaction but
    drops the -1/2 shifts (a chemical potential and a constant).
    """
    _check_sites(m)
    th = _sparse_jw(m)
    n = _number_ops(th)
    eye = sp.identity(2 ** m, format="csr", dtype=complex)
    h = sp.csr_matrix((2 ** m, 2 ** m), dtype=complex)
    for j, k in _bonds(m, boundary):
        hop = th[j].conj().T @ th[k]
        if boundary == "periodic" and (j, k) == (m - 1, 0):
            # hopping across the seam picks up minus the total parity
            hop = -sp.csr_matrix(parity_operator(m)) @ hop
        h = h + 0.5 * (hop + hop.conj().T)
        h = h + (n[j] - 0.5 * eye) @ (n[k] - 0.5 * eye)
    for j in range(m):
        h = h + bz * (n[j] - 0.5 * eye)
    return h.toarray()


def heisenberg_printed_fermion(m: int) -> np.ndarray:
    """Open-chain sum_J 1/2 (th^dag_J th_(J+1) + h.c.) + n_J n_(J+1), as printed."""
    _check_sites(m)
    th = _sparse_jw(m)
    n = _number_ops(th)
    h = sp.csr_matrix((2 ** m, 2 ** m), dtype=complex)
    for j, k in _bonds(m, "open"):
        hop = th[j].conj().T @ th[k]
        h = h + 0.5 * (hop + hop.conj().T) + n[j] @ n[k]
    return h.toarray()


def bdg_matrix(m: int, bz: float, gamma: float, boundary: str = "open") -> np.ndarray:
    """2M x 2M Bogoliubov-de Gennes block [[A, D], [-conj(D), -conj(A)]].

    A_KK = B_z, A_(K,K+1) = A_(K+1,K) = gamma/4, D_(K,K+1) = -D_(K+1,K) = gamma/4.
    On a periodic chain the wrap-around bond is the quadratic one (boundary
    term dropped).
    """
    if m < 2:
        raise ValueError("need M >= 2")
    a = np.diag(np.full(m, float(bz)))
    d = np.zeros((m, m))
    for j, k in _bonds(m, boundary):
        a[j, k] += gamma / 4
        a[k, j] += gamma / 4
        d[j, k] += gamma / 4
        d[k, j] -= gamma / 4
    return np.block([[a, d], [-d.conj(), -a.conj()]])


def bogoliubov_spectrum(m: int, bz: float, gamma: float, boundary: str = "open") -> np.ndarray:
    """Non-negative single-particle energies Lambda_k, ascending."""
    ev = np.linalg.eigvalsh(bdg_matrix(m, bz, gamma, boundary))
    return np.sort(ev[m:])


def bogoliubov_ground_energy(m: int, bz: float, gamma: float, boundary: str = "open") -> float:
    """-1/2 sum Lambda_k; the trace of A cancels the -B_z M/2 offset."""
    return float(-0.5 * np.sum(bogoliubov_spectrum(m, bz, gamma, boundary)))


def check_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> None:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise HermiticityError("operator is not square")
    scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
    if np.max(np.abs(h - h.conj().T)) > tol * scale:
        raise HermiticityError("operator is not Hermitian")


def spectrum(h: np.ndarray) -> np.ndarray:
    check_hermitian(h)
    return np.linalg.eigvalsh(h)


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t H) by eigendecomposition."""
    check_hermitian(h)
    e, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * t * e)) @ v.conj().T


def propagate(h: np.ndarray, psi0, t: float) -> np.ndarray:
    """exp(-i T H) psi0."""
    check_hermitian(h)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (h.shape[0],):
        raise ValueError("state does not match the operator dimension")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValueError("state must be normalized")
    e, v = np.linalg.eigh(h)
    return v @ (np.exp(-1j * t * e) * (v.conj().T @ psi0))


def basis_state(bits: Sequence[int]) -> np.ndarray:
    """Product state; bit 0 = spin up, bit 1 = spin down, site 1 first."""
    idx = 0
    for b in bits:
        idx = 2 * idx + int(b)
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[idx] = 1.0
    return psi


def precession_hamiltonian(b) -> np.ndarray:
    """Single spin H = -B.S, whose Heisenberg equation is dS/dt = S x B."""
    s = spin_ops(1)
    return -sum(bc * s[a][0] for a, bc in zip("xyz", b))


def spin_expectation(psi: np.ndarray) -> np.ndarray:
    s = spin_ops(1)
    return np.array([np.real(np.vdot(psi, s[a][0] @ psi)) for a in "xyz"])


def coherent_state(direction) -> np.ndarray:
    """Spin-1/2 state with <S> = direction / 2 for a unit vector."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    theta = np.arccos(np.clip(n[2], -1, 1))
    phi = np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)


# control Hamiltonians


@dataclass(frozen=True)
class SpinControl:
    """alpha_x^K S_x(K) + beta_y^K S_y(K) + gamma^KL S_z(K) S_z(L)."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        b = np.asarray(self.beta, dtype=float)
        g = np.asarray(self.gamma, dtype=float)
        m = a.size
        if a.shape != (m,) or b.shape != (m,) or g.shape != (m, m):
            raise ValueError("control coefficients must be sized M and M x M")
        for name, v in zip(("alpha", "beta", "gamma"), (a, b, g)):
            object.__setattr__(self, name, v)

    @property
    def sites(self) -> int:
        return self.alpha.size


@dataclass(frozen=True)
class FermionControl:
    """a_K th(K) + b_K th^dag(K) + w_KL (th^dag_K th_L + th^dag_L th_K)
    + g_KL n_K n_L + offset."""

    a: np.ndarray
    b: np.ndarray
    w: np.ndarray
    g: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        w = np.asarray(self.w, dtype=complex)
        g = np.asarray(self.g, dtype=complex)
        m = a.size
        if a.shape != (m,) or b.shape != (m,) or w.shape != (m, m) or g.shape != (m, m):
            raise ValueError("control coefficients must be sized M and M x M")
        for name, v in zip(("a", "b", "w", "g"), (a, b, w, g)):
            object.__setattr__(self, name, v)

    @property
    def sites(self) -> int:
        return self.a.size


@dataclass(frozen=True)
class ControlSchedule:
    segments: tuple = field(default_factory=tuple)
    sites: int = 1

    def __post_init__(self):
        segs = tuple((float(d), c) for d, c in self.segments)
        for d, c in segs:
            if not d > 0:
                raise ValueError("segment durations must be positive")
            if c.sites != self.sites:
                raise ValueError("segment coefficients do not match the site count")
        object.__setattr__(self, "segments", segs)


def spin_control_h(c: SpinControl) -> np.ndarray:
    m = c.sites
    _check_sites(m, CONTROL_BUDGET)
    s = _sparse_spin(m)
    h = sp.csr_matrix((2 ** m, 2 ** m), dtype=complex)
    for k in range(m):
        h = h + c.alpha[k] * s["x"][k] + c.beta[k] * s["y"][k]
        for l in range(m):
            if c.gamma[k, l]:
                h = h + c.gamma[k, l] * (s["z"][k] @ s["z"][l])
    return h.toarray()


def fermion_control_h(c: FermionControl) -> np.ndarray:
    m = c.sites
    _check_sites(m, CONTROL_BUDGET)
    th = _sparse_jw(m)
    n = _number_ops(th)
    dim = 2 ** m
    h = c.offset * sp.identity(dim, format="csr", dtype=complex)
    for k in range(m):
        h = h + c.a[k] * th[k] + c.b[k] * th[k].conj().T
        for l in range(m):
            if c.w[k, l]:
                h = h + c.w[k, l] * (th[k].conj().T @ th[l] + th[l].conj().T @ th[k])
            if c.g[k, l]:
                h = h + c.g[k, l] * (n[k] @ n[l])
    return h.toarray()


def spin_to_fermion(c: SpinControl) -> FermionControl:
    """Jordan-Wigner image of a spin control set.

    Transverse fields are local fermion operators only on site 1:
    alpha S_x(1) + beta S_y(1) = (alpha + i beta)/2 th(1) + (alpha - i beta)/2 th^dag(1).
    gamma S_z S_z = gamma (n - 1/2)(n' - 1/2) expands into g, diagonal w and a constant.
    """
    m = c.sites
    if np.any(c.alpha[1:]) or np.any(c.beta[1:]):
        raise ValueError("transverse controls beyond site 1 carry a Jordan-Wigner string")
    a = np.zeros(m, dtype=complex)
    b = np.zeros(m, dtype=complex)
    a[0] = (c.alpha[0] + 1j * c.beta[0]) / 2
    b[0] = (c.alpha[0] - 1j * c.beta[0]) / 2
    w = np.zeros((m, m), dtype=complex)
    g = np.array(c.gamma, dtype=complex)
    offset = 0.0
    for k in range(m):
        for l in range(m):
            gkl = c.gamma[k, l]
            # w_KK multiplies 2 n_K
            w[k, k] -= gkl / 4
            w[l, l] -= gkl / 4
            offset += gkl / 4
    return FermionControl(a, b, w, g, offset)


def control_unitary(schedule: ControlSchedule, model: str = "spin") -> np.ndarray:
    """Product of segment propagators, later segments on the left."""
    m = schedule.sites
    _check_sites(m, CONTROL_BUDGET)
    if model not in ("spin", "fermionic"):
        raise ValueError("model must be 'spin' or 'fermionic'")
    u = np.eye(2 ** m, dtype=complex)
    for dt, coeffs in schedule.segments:
        if model == "spin":
            if not isinstance(coeffs, SpinControl):
                raise TypeError("spin model needs SpinControl segments")
            h = spin_control_h(coeffs)
        else:
            if not isinstance(coeffs, FermionControl):
                raise TypeError("fermionic model needs FermionControl segments")
            h = fermion_control_h(coeffs)
        u = expm_hermitian(h, dt) @ u
    return u
