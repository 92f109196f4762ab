"""Dense full-Hilbert-space steady state for a few spins (validation oracle).

Every spin carries its own Lindblad operators; no permutation symmetry is
assumed. The Liouvillian is built from ``vec(A rho B) = (B^T kron A) vec(rho)``
with column-stacking ``vec`` and its null vector is taken from an SVD.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionTooLarge
from .model import ModelParams

MAX_DIM2 = 4096


def _kron_all(ops):
    return reduce(np.kron, ops)


@dataclass
class FullOperators:
    a: np.ndarray
    s_minus: list
    s_plus: list
    s_z: list
    j_minus: np.ndarray
    j_plus: np.ndarray
    j_z: np.ndarray
    dim: int


def full_operators(n_spins: int, n_cut: int) -> FullOperators:
    """Operators on cavity (x) spin_1 (x) ... (x) spin_N; spin basis (up, down)."""
    nph = n_cut + 1
    a1 = np.diag(np.sqrt(np.arange(1, nph)), 1)
    sm1 = np.array([[0.0, 0.0], [1.0, 0.0]])  # |down><up|
    sz1 = np.diag([0.5, -0.5])
    e2, eph = np.eye(2), np.eye(nph)

    def spin_op(op, j):
        return _kron_all([eph] + [op if i == j else e2 for i in range(n_spins)])

    a = _kron_all([a1] + [e2] * n_spins)
    sm = [spin_op(sm1, j) for j in range(n_spins)]
    sp_ = [s.T.copy() for s in sm]
    sz = [spin_op(sz1, j) for j in range(n_spins)]
    return FullOperators(a, sm, sp_, sz, sum(sm), sum(sp_), sum(sz), nph * 2**n_spins)


def _lindblad_term(op):
    """Superoperator of -L_O rho = 2 O rho O^dag - O^dag O rho - rho O^dag O."""
    d = op.shape[0]
    eye = np.eye(d)
    od = op.conj().T
    ood = od @ op
    return 2.0 * np.kron(op.conj(), op) - np.kron(eye, ood) - np.kron(ood.T, eye)


def full_liouvillian(params: ModelParams, n_cut: int, ops: FullOperators = None) -> np.ndarray:
    ops = ops or full_operators(params.n_spins, n_cut)
    N = params.n_spins
    a = ops.a
    H = (1j * params.g * (a.conj().T @ ops.j_minus - a @ ops.j_plus)
         + params.delta * ops.j_z - (params.epsilon / N) * ops.j_z @ ops.j_z)
    d = ops.dim
    eye = np.eye(d)
    L = -1j * (np.kron(eye, H) - np.kron(H.T, eye))
    L += 0.5 * params.kappa * _lindblad_term(a)
    for j in range(N):
        L += 0.5 * params.gamma * _lindblad_term(ops.s_minus[j])
        L += 0.5 * params.pump_w * _lindblad_term(ops.s_plus[j])
        L += params.gamma_phi * _lindblad_term(ops.s_z[j])
    return L


@dataclass
class BruteForceSolution:
    rho: np.ndarray
    ops: FullOperators
    n_cut: int
    null_residual: float

    def expect(self, op) -> complex:
        return complex(np.trace(self.rho @ op))

    def photon_pmf(self) -> np.ndarray:
        nph = self.n_cut + 1
        blk = self.rho.shape[0] // nph
        diag = np.real(np.diag(self.rho)).reshape(nph, blk)
        return diag.sum(axis=1)

    def standard_observables(self):
        o = self.ops
        return {
            "photons": self.expect(o.a.conj().T @ o.a).real,
            "jz": self.expect(o.j_z).real,
            "jplus_jminus": self.expect(o.j_plus @ o.j_minus).real,
        }

    def swap_commutator_norm(self) -> float:
        """Largest ||[rho, SWAP_ij]|| over spin pairs."""
        N = len(self.ops.s_z)
        worst = 0.0
        for i, j in itertools.combinations(range(N), 2):
            P = swap_operator(N, self.n_cut, i, j)
            worst = max(worst, float(np.linalg.norm(self.rho @ P - P @ self.rho)))
        return worst


def swap_operator(n_spins: int, n_cut: int, i: int, j: int) -> np.ndarray:
    """Permutation exchanging spins ``i`` and ``j`` (cavity factor untouched)."""
    nph = n_cut + 1
    dim_s = 2**n_spins
    perm = np.empty(dim_s, dtype=int)
    for s in range(dim_s):
        bits = [(s >> (n_spins - 1 - k)) & 1 for k in range(n_spins)]
        bits[i], bits[j] = bits[j], bits[i]
        perm[s] = sum(b << (n_spins - 1 - k) for k, b in enumerate(bits))
    Ps = np.zeros((dim_s, dim_s))
    Ps[perm, np.arange(dim_s)] = 1.0
    return np.kron(np.eye(nph), Ps)


def brute_force_steady_state(params: ModelParams, n_cut: int, max_dim2: int = MAX_DIM2) -> BruteForceSolution:
    """Steady state of the full master equation for small N.

    Raises
    ------
    DimensionTooLarge
        When the Liouvillian dimension ``d^2`` exceeds ``max_dim2``.
    """
    d = (n_cut + 1) * 2**params.n_spins
    if d * d > max_dim2:
        raise DimensionTooLarge(f"Liouvillian dimension {d * d} exceeds {max_dim2}")
    ops = full_operators(params.n_spins, n_cut)
    L = full_liouvillian(params, n_cut, ops)
    _, s, vh = np.linalg.svd(L)
    v = vh[-1].conj()
    rho = v.reshape(d, d, order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho)
    res = float(np.linalg.norm(L @ rho.reshape(-1, order="F")) / np.linalg.norm(rho))
    return BruteForceSolution(rho, ops, n_cut, res)
