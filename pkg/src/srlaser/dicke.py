"""Exact steady states of the spin-cavity master equation in the Dicke basis.

The density matrix is expanded as

    rho = sum rho^{n,n'}_{J,M,M'} P_{J,M,M'} (x) |n><n'|,

with ``P_{J,M,M'}`` the multiplicity-averaged projector-like operators of the
permutation-symmetric decomposition. Only coefficients with
``M + n == M' + n'`` are kept (U(1) symmetry), and photon numbers are
truncated at ``n_cut``. Quantum numbers are stored doubled (``2J``, ``2M``)
so that half-integer spins stay integers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CutoffExceeded, DegenerateNullSpace, DomainError
from .model import ModelParams


def multiplicity(n_spins: int, two_j: int) -> int:
    """Number of Dicke manifolds with total spin J among N spin-1/2 particles.

    ``D_J = N! (2J+1) / ((N/2+J+1)! (N/2-J)!)``, in exact integer arithmetic.
    """
    if n_spins < 0 or two_j < 0 or two_j > n_spins or (n_spins - two_j) % 2:
        raise DomainError(f"invalid (N, 2J) = ({n_spins}, {two_j})")
    up = (n_spins + two_j) // 2 + 1     # N/2 + J + 1
    down = (n_spins - two_j) // 2       # N/2 - J
    num = math.factorial(n_spins) * (two_j + 1)
    den = math.factorial(up) * math.factorial(down)
    q, r = divmod(num, den)
    assert r == 0
    return q


def spin_values(n_spins: int) -> List[int]:
    """Allowed 2J values, ascending."""
    return list(range(n_spins % 2, n_spins + 1, 2))


@dataclass
class DickeBasis:
    """Coefficient index set ``(2J, 2M, 2M', n, n')`` with ``M + n == M' + n'``.

    Rows are sorted by ``(2q, 2J, 2M, n, 2M')`` with ``q = M + n``; ``sectors``
    maps each ``2q`` to the slice of rows sharing it.
    """

    n_spins: int
    n_cut: int
    two_j: np.ndarray
    two_m: np.ndarray
    two_mp: np.ndarray
    n: np.ndarray
    n_prime: np.ndarray
    sectors: Dict[int, slice] = field(default_factory=dict)

    def __len__(self) -> int:
        return int(self.two_j.size)

    @property
    def dimension(self) -> int:
        return len(self)

    @property
    def charge2(self) -> np.ndarray:
        return self.two_m + 2 * self.n

    def _codes(self, tj, tm, tmp, n, npr):
        N, nc = self.n_spins, self.n_cut
        c = tj.astype(np.int64)
        c = c * (N + 1) + (tm + N)
        c = c * (N + 1) + (tmp + N)
        c = c * (nc + 1) + n
        c = c * (nc + 1) + npr
        return c

    def __post_init__(self):
        codes = self._codes(self.two_j, self.two_m, self.two_mp, self.n, self.n_prime)
        self._order = np.argsort(codes, kind="stable")
        self._sorted = codes[self._order]

    def lookup(self, tj, tm, tmp, n, npr) -> np.ndarray:
        """Row index of each requested tuple, or -1 when it is not in the basis."""
        tj, tm, tmp, n, npr = (np.asarray(v, dtype=np.int64) for v in (tj, tm, tmp, n, npr))
        N, nc = self.n_spins, self.n_cut
        ok = ((tj >= 0) & (tj <= N) & ((N - tj) % 2 == 0)
              & (np.abs(tm) <= tj) & (np.abs(tmp) <= tj)
              & ((tj - tm) % 2 == 0) & ((tj - tmp) % 2 == 0)
              & (n >= 0) & (n <= nc) & (npr >= 0) & (npr <= nc)
              & (tm + 2 * n == tmp + 2 * npr))
        out = np.full(tj.shape, -1, dtype=np.int64)
        if ok.any():
            codes = self._codes(tj[ok], tm[ok], tmp[ok], n[ok], npr[ok])
            pos = np.searchsorted(self._sorted, codes)
            pos = np.clip(pos, 0, self._sorted.size - 1)
            hit = self._sorted[pos] == codes
            idx = np.where(hit, self._order[pos], -1)
            out[ok] = idx
        return out

    def diagonal_mask(self) -> np.ndarray:
        return (self.two_m == self.two_mp) & (self.n == self.n_prime)

    def partner(self) -> np.ndarray:
        """Index of the Hermitian partner ``(J, M', M, n', n)`` of every row."""
        return self.lookup(self.two_j, self.two_mp, self.two_m, self.n_prime, self.n)

    def indices(self) -> np.ndarray:
        return np.stack([self.two_j, self.two_m, self.two_mp, self.n, self.n_prime], axis=1)


def enumerate_basis(n_spins: int, n_cut: int) -> DickeBasis:
    """All coefficients allowed by the spin ranges, the cutoff and the U(1) rule."""
    if n_cut < 0:
        raise ValueError("n_cut must be >= 0")
    if n_spins < 1:
        raise ValueError("n_spins must be >= 1")
    rows = []
    for tj in spin_values(n_spins):
        ms = np.arange(-tj, tj + 1, 2)
        TM, TMP = np.meshgrid(ms, ms, indexing="ij")
        TM, TMP = TM.ravel(), TMP.ravel()
        for n in range(n_cut + 1):
            # n' fixed by M + n = M' + n'
            d = TM - TMP
            keep = d % 2 == 0
            npr = n + d // 2
            keep &= (npr >= 0) & (npr <= n_cut)
            k = keep.sum()
            rows.append(np.stack([np.full(k, tj), TM[keep], TMP[keep], np.full(k, n), npr[keep]], axis=1))
    arr = np.concatenate(rows).astype(np.int64)
    q2 = arr[:, 1] + 2 * arr[:, 3]
    order = np.lexsort((arr[:, 2], arr[:, 3], arr[:, 1], arr[:, 0], q2))
    arr = arr[order]
    q2 = q2[order]
    sectors = {}
    uniq, start = np.unique(q2, return_index=True)
    bounds = list(start) + [len(q2)]
    for i, q in enumerate(uniq):
        sectors[int(q)] = slice(int(bounds[i]), int(bounds[i + 1]))
    return DickeBasis(n_spins, n_cut, arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4], sectors)


@dataclass
class LiouvillianMatrix:
    """Sparse generator acting on Dicke coefficient vectors."""

    basis: DickeBasis
    matrix: sp.csr_matrix
    params: ModelParams

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def trace_functional(self) -> np.ndarray:
        return self.basis.diagonal_mask().astype(float)

    def __matmul__(self, v):
        return self.matrix @ v


def _safe_div(num, den):
    den = np.asarray(den, dtype=float)
    return np.where(den != 0, num / np.where(den != 0, den, 1.0), 0.0)


def _sqrt0(x):
    return np.sqrt(np.clip(x, 0.0, None))


def assemble_liouvillian(params: ModelParams, basis: DickeBasis) -> LiouvillianMatrix:
    """Sparse matrix of the master equation in the truncated Dicke basis.

    Frame: rotating with the cavity, spin splitting ``delta``. Entries whose
    source index lies outside the basis (photon number above the cutoff,
    ``|M| > J``) are dropped.
    """
    if basis.n_spins != params.n_spins:
        raise ValueError("basis and params disagree on n_spins")
    N = params.n_spins
    g, k, w, gam, gph = params.g, params.kappa, params.pump_w, params.gamma, params.gamma_phi
    tj, tm, tmp, n, npr = basis.two_j, basis.two_m, basis.two_mp, basis.n, basis.n_prime
    J, M, Mp = tj / 2.0, tm / 2.0, tmp / 2.0
    nf, npf = n.astype(float), npr.astype(float)
    rows, cols, vals = [], [], []
    target = np.arange(len(basis))

    def add(src, coeff):
        src = np.asarray(src)
        coeff = np.broadcast_to(np.asarray(coeff, dtype=complex), src.shape)
        keep = (src >= 0) & (coeff != 0)
        rows.append(target[keep])
        cols.append(src[keep])
        vals.append(coeff[keep])

    # diagonal: coherent phases, cavity loss and the spin anticommutator terms
    jj1 = J * (J + 1.0)
    x = (0.5 * w * (N - M - Mp) + 0.5 * gam * (N + M + Mp)
         + 0.5 * gph * (N - _safe_div(M * Mp * (N + 2.0), jj1)))
    diag = (-1j * params.delta * (M - Mp) + 1j * (params.epsilon / N) * (M**2 - Mp**2)
            - 0.5 * k * (nf + npf) - x)
    add(target, diag)

    # cavity jump a rho a^dagger
    add(basis.lookup(tj, tm, tmp, n + 1, npr + 1), k * np.sqrt((nf + 1) * (npf + 1)))

    # coupling H = i g (a^dag J^- - a J^+)
    add(basis.lookup(tj, tm - 2, tmp, n + 1, npr), -g * np.sqrt(nf + 1) * _sqrt0((J - M + 1) * (J + M)))
    add(basis.lookup(tj, tm, tmp - 2, n, npr + 1), -g * np.sqrt(npf + 1) * _sqrt0((J - Mp + 1) * (J + Mp)))
    add(basis.lookup(tj, tm + 2, tmp, n - 1, npr), g * np.sqrt(nf) * _sqrt0((J + M + 1) * (J - M)))
    add(basis.lookup(tj, tm, tmp + 2, n, npr - 1), g * np.sqrt(npf) * _sqrt0((J + Mp + 1) * (J - Mp)))

    # individual-spin dissipators; each coefficient is evaluated at the source (Js, Ms, Ms')
    def Y(Js, Ms, Mps):
        return 0.5 * gph * _safe_div(N + 2 * Js + 2, Js * (2 * Js + 1)) * _sqrt0(
            (Js + Ms) * (Js - Ms) * (Js + Mps) * (Js - Mps))

    def Z(Js, Ms, Mps):
        return 0.5 * gph * (N - 2 * Js) / ((Js + 1) * (2 * Js + 1)) * _sqrt0(
            (Js + Ms + 1) * (Js - Ms + 1) * (Js + Mps + 1) * (Js - Mps + 1))

    def U(Js, Ms, Mps):
        return 0.25 * gam * _safe_div(N + 2.0, Js * (Js + 1)) * _sqrt0(
            (Js + Ms) * (Js - Ms + 1) * (Js + Mps) * (Js - Mps + 1))

    def V(Js, Ms, Mps):
        return 0.25 * gam * _safe_div(N + 2 * Js + 2, Js * (2 * Js + 1)) * _sqrt0(
            (Js + Ms) * (Js + Ms - 1) * (Js + Mps) * (Js + Mps - 1))

    def W(Js, Ms, Mps):
        return 0.25 * gam * (N - 2 * Js) / ((Js + 1) * (2 * Js + 1)) * _sqrt0(
            (Js - Ms + 1) * (Js - Ms + 2) * (Js - Mps + 1) * (Js - Mps + 2))

    def R(Js, Ms, Mps):
        return 0.25 * w * _safe_div(N + 2.0, Js * (Js + 1)) * _sqrt0(
            (Js - Ms) * (Js + Ms + 1) * (Js - Mps) * (Js + Mps + 1))

    def S(Js, Ms, Mps):
        return 0.25 * w * _safe_div(N + 2 * Js + 2, Js * (2 * Js + 1)) * _sqrt0(
            (Js - Ms) * (Js - Ms - 1) * (Js - Mps) * (Js - Mps - 1))

    def T(Js, Ms, Mps):
        return 0.25 * w * (N - 2 * Js) / ((Js + 1) * (2 * Js + 1)) * _sqrt0(
            (Js + Ms + 1) * (Js + Ms + 2) * (Js + Mps + 1) * (Js + Mps + 2))

    for dj, dm, fn in ((2, 0, Y), (-2, 0, Z), (0, 2, U), (2, 2, V), (-2, 2, W),
                       (0, -2, R), (2, -2, S), (-2, -2, T)):
        src = basis.lookup(tj + dj, tm + dm, tmp + dm, n, npr)
        Js = (tj + dj) / 2.0
        Ms, Mps = (tm + dm) / 2.0, (tmp + dm) / 2.0
        with np.errstate(invalid="ignore", divide="ignore"):
            coeff = np.where(src >= 0, fn(Js, Ms, Mps), 0.0)
        add(src, coeff)

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    dim = len(basis)
    mat = sp.csr_matrix((v, (r, c)), shape=(dim, dim))
    mat.sum_duplicates()
    return LiouvillianMatrix(basis, mat, params)


@dataclass
class SteadyStateSolution:
    basis: DickeBasis
    coefficients: np.ndarray
    trace_residual: float
    null_residual: float
    params: Optional[ModelParams] = None

    @property
    def n_spins(self) -> int:
        return self.basis.n_spins

    @property
    def n_cut(self) -> int:
        return self.basis.n_cut

    def hermiticity_residual(self) -> float:
        part = self.basis.partner()
        c = self.coefficients
        return float(np.max(np.abs(c - np.conj(c[part])), initial=0.0))

    def min_diagonal(self) -> float:
        d = self.coefficients[self.basis.diagonal_mask()]
        return float(d.real.min())


DIRECT_MAX_DIM = 15000
NULL_RESIDUAL_TOL = 1e-9


def _bordered(liou: LiouvillianMatrix):
    L = liou.matrix
    tr = liou.trace_functional()
    row = int(np.flatnonzero(tr)[0])
    A = L.tolil(copy=True)
    A[row, :] = tr
    b = np.zeros(L.shape[0], dtype=complex)
    b[row] = 1.0
    return A.tocsc(), b


def _solve_direct(A, b, check_gap, gap_tol):
    try:
        lu = spla.splu(A, permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:  # "Factor is exactly singular"
        raise DegenerateNullSpace(str(exc)) from exc
    x = lu.solve(b)
    if check_gap:
        inv = spla.LinearOperator(A.shape, matvec=lu.solve, rmatvec=lambda y: lu.solve(y, trans="H"),
                                  dtype=complex)
        cond = spla.onenormest(A) * spla.onenormest(inv)
        if cond * gap_tol > 1.0:
            raise DegenerateNullSpace(f"condition estimate {cond:.3g} exceeds {1 / gap_tol:.3g}")
    return x


def _solve_iterative(A, b):
    """GMRES preconditioned by an incomplete LU of the bordered matrix."""
    try:
        ilu = spla.spilu(A, drop_tol=1e-3, fill_factor=20, permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise DegenerateNullSpace(str(exc)) from exc
    M = spla.LinearOperator(A.shape, ilu.solve, dtype=complex)
    x, _ = spla.gmres(A, b, x0=ilu.solve(b), M=M, rtol=1e-13, atol=0.0, restart=100, maxiter=40)
    return x


def steady_state(liou: LiouvillianMatrix, *, method: str = "auto", check_gap: bool = False,
                 gap_tol: float = 1e-6) -> SteadyStateSolution:
    """Null vector of the generator with unit trace.

    One population row is replaced by the trace functional and the square
    system is solved. ``method`` is ``"direct"`` (sparse LU), ``"iterative"``
    (ILU-preconditioned GMRES, falling back to LU if the null residual misses
    ``1e-9``) or ``"auto"``, which picks LU up to ``DIRECT_MAX_DIM`` unknowns.
    With ``check_gap`` (direct solves only) the 1-norm condition number of the
    bordered matrix is estimated; a value above ``1/gap_tol`` means a second
    direction is nearly null.

    Raises
    ------
    DegenerateNullSpace
        If the bordered system is singular (or nearly so with ``check_gap``).
    """
    L = liou.matrix
    basis = liou.basis
    tr = liou.trace_functional()
    A, b = _bordered(liou)
    if method == "auto":
        method = "direct" if A.shape[0] <= DIRECT_MAX_DIM or check_gap else "iterative"
    if method not in ("direct", "iterative"):
        raise ValueError("method must be 'auto', 'direct' or 'iterative'")

    def finish(x):
        if not np.all(np.isfinite(x)):
            raise DegenerateNullSpace("non-finite steady state")
        # remove rounding-level anti-Hermitian parts by averaging with the partner
        x = 0.5 * (x + np.conj(x[basis.partner()]))
        trace = float((tr @ x).real)
        if trace == 0.0:
            raise DegenerateNullSpace("steady state has zero trace")
        x = x / trace
        null = float(np.linalg.norm(L @ x) / np.linalg.norm(x))
        return SteadyStateSolution(basis, x, abs(float((tr @ x).real) - 1.0), null, liou.params)

    if method == "iterative":
        sol = finish(_solve_iterative(A, b))
        if sol.null_residual <= NULL_RESIDUAL_TOL:
            return sol
    return finish(_solve_direct(A, b, check_gap, gap_tol))


def solve_steady_state(params: ModelParams, n_cut: int, **kw) -> SteadyStateSolution:
    basis = enumerate_basis(params.n_spins, n_cut)
    return steady_state(assemble_liouvillian(params, basis), **kw)


# ---------------------------------------------------------------- observables


def _lfact(x):
    from scipy.special import gammaln

    return gammaln(np.asarray(x, dtype=float) + 1.0)


def expectation(solution: SteadyStateSolution, p: int, r: int, q: int, k: int, kp: int) -> complex:
    """<(J^+)^p (J^z)^r (J^-)^q (a^dag)^k a^k'> in the steady state.

    Terms violating ``p + k == q + k'`` vanish identically and return 0.
    """
    if min(p, r, q, k, kp) < 0:
        raise ValueError("exponents must be non-negative")
    if p + k != q + kp:
        return 0j
    b = solution.basis
    J, M, Mp = b.two_j / 2.0, b.two_m / 2.0, b.two_mp / 2.0
    n, npr = b.n, b.n_prime
    sel = (np.rint(2 * (Mp - p)) == np.rint(2 * (M - q))) & (npr - k == n - kp)
    sel &= (n >= kp) & (npr >= k)
    sel &= (J + M - q >= 0) & (J + Mp - p >= 0)
    if not sel.any():
        return 0j
    J, M, Mp, nn, nnp = J[sel], M[sel], Mp[sel], n[sel].astype(float), npr[sel].astype(float)
    log_amp = 0.5 * (_lfact(nn) - _lfact(nn - kp) + _lfact(nnp) - _lfact(nnp - k)
                     + _lfact(J + M) - _lfact(J - M) + _lfact(J + q - M) - _lfact(J + M - q)
                     + _lfact(J + Mp) - _lfact(J - Mp) + _lfact(J + p - Mp) - _lfact(J + Mp - p))
    amp = np.exp(log_amp) * (M - q) ** r
    return complex(np.sum(solution.coefficients[sel] * amp))


def observables(solution: SteadyStateSolution, spec: Iterable[Tuple]) -> complex:
    """Weighted sum of monomial expectations.

    ``spec`` holds ``(p, r, q, k, k', weight)`` tuples (weight optional, default 1).
    """
    total = 0j
    for item in spec:
        p, r, q, k, kp = item[:5]
        weight = item[5] if len(item) > 5 else 1.0
        total += weight * expectation(solution, p, r, q, k, kp)
    return total


STANDARD_OBSERVABLES = {
    "photons": (0, 0, 0, 1, 1),
    "jz": (0, 1, 0, 0, 0),
    "jplus_jminus": (1, 0, 1, 0, 0),
}


def standard_observables(solution: SteadyStateSolution) -> Dict[str, float]:
    out = {name: expectation(solution, *e).real for name, e in STANDARD_OBSERVABLES.items()}
    out["photons_sq"] = (expectation(solution, 0, 0, 0, 2, 2) + expectation(solution, 0, 0, 0, 1, 1)).real
    out["jz_sq"] = expectation(solution, 0, 2, 0, 0, 0).real
    return out


@dataclass
class Distributions:
    """Populations summed over the other quantum numbers.

    ``spin_pmf[i]`` belongs to ``2M = -N + 2 i``; ``joint_jm[a, i]`` to
    ``2J = two_j_values[a]`` and the same ``M``.
    """

    photon_pmf: np.ndarray
    spin_pmf: np.ndarray
    joint_jm: np.ndarray
    two_j_values: np.ndarray
    two_m_values: np.ndarray

    @property
    def mean_photons(self) -> float:
        return float(np.arange(self.photon_pmf.size) @ self.photon_pmf)

    @property
    def fano(self) -> float:
        n = np.arange(self.photon_pmf.size)
        m = n @ self.photon_pmf
        var = (n - m) ** 2 @ self.photon_pmf
        return float(var / m) if m > 0 else float("nan")


def distributions(solution: SteadyStateSolution) -> Distributions:
    b = solution.basis
    N, nc = b.n_spins, b.n_cut
    d = b.diagonal_mask()
    pop = solution.coefficients[d].real
    n = b.n[d]
    m_idx = (b.two_m[d] + N) // 2
    js = np.array(spin_values(N))
    j_idx = np.searchsorted(js, b.two_j[d])
    photon = np.bincount(n, weights=pop, minlength=nc + 1)
    spin = np.bincount(m_idx, weights=pop, minlength=N + 1)
    joint = np.zeros((js.size, N + 1))
    np.add.at(joint, (j_idx, m_idx), pop)
    return Distributions(photon, spin, joint, js, np.arange(-N, N + 1, 2))


# ---------------------------------------------------------------- cutoff control


@dataclass
class CutoffPolicy:
    """Ladder and tolerances for :func:`converge_cutoff`.

    ``tail_tol`` bounds the photon mass above ``n_cut - tail_margin``;
    consecutive rungs must agree on ``<a^dag a>`` and ``<J^z>`` to ``obs_rtol``.
    """

    start: int = 8
    factor: int = 2
    max_cut: int = 256
    tail_tol: float = 1e-8
    tail_margin: int = 5
    obs_rtol: float = 1e-6

    def ladder(self) -> List[int]:
        out, c = [], self.start
        while c <= self.max_cut:
            out.append(c)
            c *= self.factor
        return out


def tail_mass(solution: SteadyStateSolution, margin: int = 5) -> float:
    pmf = distributions(solution).photon_pmf
    lo = max(solution.n_cut - margin + 1, 0)
    return float(pmf[lo:].sum())


def _obs_close(a: Dict[str, float], b: Dict[str, float], rtol: float, n_spins: int) -> bool:
    for key in ("photons", "jz"):
        scale = max(abs(a[key]), abs(b[key]), 1e-12 * n_spins)
        if abs(a[key] - b[key]) > rtol * scale:
            return False
    return True


@dataclass
class CutoffResult:
    n_cut: int
    solution: SteadyStateSolution
    history: List[Tuple[int, float, Dict[str, float]]]


def converge_cutoff(params: ModelParams, policy: CutoffPolicy = None) -> CutoffResult:
    """Smallest ladder cutoff with a negligible photon tail and stable observables.

    A rung is accepted when its tail mass is below ``tail_tol`` and the next
    rung reproduces its observables within ``obs_rtol``.

    Raises
    ------
    CutoffExceeded
        When the ladder runs past ``max_cut``.
    """
    policy = policy or CutoffPolicy()
    history = []
    prev = None
    for nc in policy.ladder():
        sol = solve_steady_state(params, nc)
        tail = tail_mass(sol, policy.tail_margin)
        obs = standard_observables(sol)
        history.append((nc, tail, obs))
        if prev is not None:
            pnc, psol, ptail, pobs = prev
            if ptail < policy.tail_tol and _obs_close(pobs, obs, policy.obs_rtol, params.n_spins):
                return CutoffResult(pnc, psol, history)
        prev = (nc, sol, tail, obs)
    raise CutoffExceeded(f"no converged cutoff up to {policy.max_cut}")


# ---------------------------------------------------------------- persistence


def solution_to_json(solution: SteadyStateSolution) -> dict:
    """Documented layout: integer index rows ``[2J, 2M, 2M', n, n']`` and ``[re, im]`` values."""
    out = {
        "n_spins": solution.n_spins,
        "n_cut": solution.n_cut,
        "indices": solution.basis.indices().tolist(),
        "coefficients": [[float(z.real), float(z.imag)] for z in solution.coefficients],
        "trace_residual": solution.trace_residual,
        "null_residual": solution.null_residual,
    }
    if solution.params is not None:
        out["params"] = {f: getattr(solution.params, f) for f in solution.params.__dataclass_fields__}
    return out


def solution_from_json(data: dict) -> SteadyStateSolution:
    basis = enumerate_basis(int(data["n_spins"]), int(data["n_cut"]))
    idx = np.asarray(data["indices"], dtype=np.int64)
    rows = basis.lookup(idx[:, 0], idx[:, 1], idx[:, 2], idx[:, 3], idx[:, 4])
    if np.any(rows < 0):
        raise ValueError("index outside the basis")
    vals = np.asarray(data["coefficients"], dtype=float)
    coeffs = np.zeros(len(basis), dtype=complex)
    coeffs[rows] = vals[:, 0] + 1j * vals[:, 1]
    params = ModelParams(**data["params"]) if "params" in data else None
    return SteadyStateSolution(basis, coeffs, float(data["trace_residual"]), float(data["null_residual"]), params)


def save_solution(solution: SteadyStateSolution, path) -> None:
    with open(path, "w") as fh:
        json.dump(solution_to_json(solution), fh)


def load_solution(path) -> SteadyStateSolution:
    with open(path) as fh:
        return solution_from_json(json.load(fh))
