"""Mean-field dynamics of the cavity amplitude, magnon amplitude and polarization.

State variables are ``a = <a>``, ``j_minus = <J^->`` and ``jz = <J^z>`` in a
frame rotating at ``omega_c + omega_l_offset`` (the cavity frame when the offset
is zero). Stationary lasing states rotate in the cavity frame; residuals used
for convergence tests are therefore minimised over the frame offset, which
removes the U(1) phase mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NotStationary, StepFailure
from .model import (
    BRANCH_TOL,
    ModelParams,
    Phase,
    classify_phase,
    cooperativity_branches,
    derive_rates,
    effective_detuning,
    normal_state_jz,
)

GOLDSTONE_BAND = 1e-9
STATIONARY_RTOL = 1e-8
# largest Jacobian growth rate (per Gamma) accepted at a relaxed state; the
# neutral phase mode of a nearly converged lasing state sits well below it
RELAX_GROWTH_TOL = 1e-6


@dataclass(frozen=True)
class MeanFieldState:
    a: complex
    j_minus: complex
    jz: float

    def to_real(self) -> np.ndarray:
        return np.array([self.a.real, self.a.imag, self.j_minus.real, self.j_minus.imag, self.jz])

    @classmethod
    def from_real(cls, y) -> "MeanFieldState":
        return cls(complex(y[0], y[1]), complex(y[2], y[3]), float(y[4]))

    @property
    def photons(self) -> float:
        return abs(self.a) ** 2

    @property
    def total_spin(self) -> float:
        """Length of the mean-field Bloch vector, sqrt(|J^-|^2 + Jz^2)."""
        return math.hypot(abs(self.j_minus), self.jz)

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_real()))


def mf_rhs(params: ModelParams, state: MeanFieldState, omega_l_offset: float = 0.0) -> MeanFieldState:
    """Time derivative of the mean-field variables.

    ``omega_l_offset`` is ``omega_L - omega_c``, the frequency of the rotating
    frame measured from the cavity. The returned object holds
    ``(da/dt, dJ^-/dt, dJz/dt)``; ``dJ^+/dt`` is its conjugate by construction.
    """
    r = derive_rates(params)
    a, jm, jz = state.a, state.j_minus, state.jz
    d_eps = effective_detuning(params, jz)
    g = params.g
    da = (1j * omega_l_offset - 0.5 * params.kappa) * a + g * jm
    djm = (-1j * (d_eps - omega_l_offset) - 0.5 * r.kappa_s) * jm + 2.0 * g * jz * a
    djz = (0.5 * params.n_spins * (params.pump_w - params.gamma)
           - (params.pump_w + params.gamma) * jz
           - 2.0 * g * (a * jm.conjugate()).real)
    return MeanFieldState(complex(da), complex(djm), float(djz))


def _rhs_real(params, omega_l_offset):
    N = params.n_spins
    g, kap = params.g, params.kappa
    r = derive_rates(params)
    ks = r.kappa_s
    wpg = params.pump_w + params.gamma
    src = 0.5 * N * (params.pump_w - params.gamma)
    two_eps_n = 2.0 * params.epsilon / N
    delta = params.delta
    off = omega_l_offset

    def f(t, y):
        ar, ai, jr, ji, jz = y
        d = delta - two_eps_n * jz - off
        return [
            -0.5 * kap * ar - off * ai + g * jr,
            -0.5 * kap * ai + off * ar + g * ji,
            -0.5 * ks * jr + d * ji + 2.0 * g * jz * ar,
            -0.5 * ks * ji - d * jr + 2.0 * g * jz * ai,
            src - wpg * jz - 2.0 * g * (ar * jr + ai * ji),
        ]

    return f


def stationarity_residual(params: ModelParams, state: MeanFieldState):
    """Norm of the time derivative in the best co-rotating frame.

    Returns ``(residual, offset)`` where ``offset`` is the frame frequency
    (relative to the cavity) that minimises ``|mf_rhs|``.
    """
    f0 = mf_rhs(params, state, 0.0)
    u = np.array([state.a, state.j_minus])
    v = np.array([f0.a, f0.j_minus])
    uu = float(np.vdot(u, u).real)
    off = -float(np.vdot(u, v).imag) / uu if uu > 0 else 0.0
    f = mf_rhs(params, state, off)
    return math.sqrt(abs(f.a) ** 2 + abs(f.j_minus) ** 2 + f.jz**2), off


def residual_scale(params: ModelParams) -> float:
    return params.n_spins * derive_rates(params).gamma_total


@dataclass
class IntegrationControls:
    """Tolerances for :func:`integrate`.

    ``atol`` defaults to ``rtol`` times the spin length N/2.
    """

    rtol: float = 1e-9
    atol: Optional[float] = None
    max_step: float = np.inf
    min_step: float = 1e-12
    n_samples: int = 201
    method: str = "RK45"


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray  # shape (5, n_samples), real representation
    terminal_residual: float
    omega_l_offset: float = 0.0

    def state(self, k: int = -1) -> MeanFieldState:
        return MeanFieldState.from_real(self.y[:, k])

    @property
    def final(self) -> MeanFieldState:
        return self.state(-1)

    @property
    def photons(self) -> np.ndarray:
        return self.y[0] ** 2 + self.y[1] ** 2

    @property
    def jz(self) -> np.ndarray:
        return self.y[4]


def integrate(params: ModelParams, initial: MeanFieldState, t_span, controls: IntegrationControls = None,
              omega_l_offset: float = 0.0) -> Trajectory:
    """Integrate the mean-field equations with an adaptive Dormand-Prince 4(5) scheme."""
    c = controls or IntegrationControls()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)):
        raise ValueError("t_span must be finite")
    atol = c.atol if c.atol is not None else c.rtol * 0.5 * params.n_spins
    t_eval = np.linspace(t0, t1, max(int(c.n_samples), 2))
    sol = solve_ivp(_rhs_real(params, omega_l_offset), (t0, t1), initial.to_real(), method=c.method,
                    rtol=c.rtol, atol=atol, t_eval=t_eval, max_step=c.max_step)
    if sol.status < 0:
        raise StepFailure(sol.message)
    bound = 0.5 * params.n_spins * (1.0 + 1e-9)
    if np.any(np.abs(sol.y[4]) > bound):
        raise StepFailure("|Jz| exceeded N/2 during integration")
    final = MeanFieldState.from_real(sol.y[:, -1])
    res, _ = stationarity_residual(params, final)
    return Trajectory(sol.t, sol.y, res, omega_l_offset)


@dataclass
class RelaxResult:
    state: MeanFieldState
    time: float
    residual: float
    converged: bool


def relax(params: ModelParams, initial: MeanFieldState, *, rtol_residual: float = STATIONARY_RTOL,
          t_max: Optional[float] = None, chunk: Optional[float] = None,
          controls: IntegrationControls = None) -> RelaxResult:
    """Integrate until the co-rotating residual drops below ``rtol_residual * N * Gamma``
    at a linearly stable point.

    A small residual near an unstable fixed point (a weak seed passing close
    to the normal state just above threshold) does not count; integration
    continues until the instability has carried the state away. Gives up
    (``converged=False``) after ``t_max``, default ``1e4 / Gamma``.
    """
    r = derive_rates(params)
    G = r.gamma_total
    t_max = 1e4 / G if t_max is None else t_max
    chunk = 50.0 / G if chunk is None else chunk
    c = controls or IntegrationControls(n_samples=2)
    threshold = rtol_residual * residual_scale(params)

    def settled(state, res):
        if res > threshold:
            return False
        growth = np.linalg.eigvals(jacobian(params, state)).real.max()
        return growth <= RELAX_GROWTH_TOL * G

    state, t = initial, 0.0
    res, off = stationarity_residual(params, state)
    while not settled(state, res) and t < t_max:
        # co-rotate with the current estimate so lasing states stay slow
        traj = integrate(params, state, (0.0, chunk), c, omega_l_offset=off)
        state, t = traj.final, t + chunk
        res, off = stationarity_residual(params, state)
        chunk = min(2.0 * chunk, t_max - t) if t < t_max else chunk
    return RelaxResult(state, t, res, settled(state, res))


def standard_seed(params: ModelParams) -> MeanFieldState:
    """Small coherent seed on a fully inverted-down ensemble."""
    N = params.n_spins
    return MeanFieldState(1e-3 * math.sqrt(N) + 0j, 0j, -0.5 * N)


@dataclass
class StationarySolution:
    state: MeanFieldState
    cooperativity: float
    laser_freq_offset: float
    stable: bool
    jacobian_eigenvalues: np.ndarray
    branch: str  # "normal", "plus" or "minus"

    @property
    def lasing(self) -> bool:
        return self.branch != "normal"


def lasing_state(params: ModelParams, c: float) -> MeanFieldState:
    """Closed-form lasing amplitudes for cooperativity ``c`` with ``a`` real and positive."""
    r = derive_rates(params)
    N = params.n_spins
    jz = 0.5 * N * r.pump_factor / c
    wpg = params.pump_w + params.gamma
    a_mag = math.sqrt(max(abs(jz) * wpg * (c - 1.0) / params.kappa, 0.0))
    jm_mag = abs(jz) * math.sqrt(max(wpg * (c - 1.0) / (0.5 * r.kappa_s), 0.0))
    d_eps = effective_detuning(params, jz)
    off = params.kappa * d_eps / r.gamma_total
    # stationarity of da/dt fixes J^- = a (kappa/2 - i off) / g
    phase = complex(0.5 * params.kappa, -off)
    phase /= abs(phase)
    return MeanFieldState(complex(a_mag, 0.0), jm_mag * phase, jz)


def laser_offset(params: ModelParams, jz: float) -> float:
    r = derive_rates(params)
    return params.kappa * effective_detuning(params, jz) / r.gamma_total


def jacobian(params: ModelParams, state: MeanFieldState) -> np.ndarray:
    """Linearisation in the variables (a, a*, J^-, J^+, Jz), frame at the laser frequency."""
    r = derive_rates(params)
    N, g, kap, ks, G = params.n_spins, params.g, params.kappa, r.kappa_s, r.gamma_total
    a, jm, jz = state.a, state.j_minus, state.jz
    ac, jp = a.conjugate(), jm.conjugate()
    d = effective_detuning(params, jz)
    e2 = 2.0 * params.epsilon / N
    M = np.zeros((5, 5), dtype=complex)
    M[0, 0] = -kap / 2 + 1j * kap * d / G
    M[0, 2] = g
    M[1, 1] = -kap / 2 - 1j * kap * d / G
    M[1, 3] = g
    M[2, 0] = 2 * g * jz
    M[2, 2] = -ks / 2 - 1j * ks * d / G
    M[2, 4] = 1j * e2 * jm + 2 * g * a
    M[3, 1] = 2 * g * jz
    M[3, 3] = -ks / 2 + 1j * ks * d / G
    M[3, 4] = -1j * e2 * jp + 2 * g * ac
    M[4, 0] = -g * jp
    M[4, 1] = -g * jm
    M[4, 2] = -g * ac
    M[4, 3] = -g * a
    M[4, 4] = -(params.pump_w + params.gamma)
    return M


def jacobian_stability(params: ModelParams, state: MeanFieldState, *, residual_tol: float = 1e-6):
    """Jacobian, its eigenvalues, and whether the fixed point is linearly stable.

    Eigenvalues within ``GOLDSTONE_BAND * Gamma`` of the imaginary axis are
    treated as the neutral phase mode and ignored.
    """
    res, _ = stationarity_residual(params, state)
    if res > residual_tol * residual_scale(params):
        raise NotStationary(f"residual {res:.3g} exceeds {residual_tol:g} N Gamma")
    M = jacobian(params, state)
    eig = np.linalg.eigvals(M)
    G = derive_rates(params).gamma_total
    band = GOLDSTONE_BAND * G
    stable = bool(np.all(eig.real[np.abs(eig.real) > band] < 0))
    return M, eig, stable


def solve_stationary(params: ModelParams) -> List[StationarySolution]:
    """Normal state plus one lasing state per branch with C > 1."""
    out = []
    jz0 = normal_state_jz(params)
    normal = MeanFieldState(0j, 0j, jz0)
    _, eig, stable = jacobian_stability(params, normal)
    from .model import effective_cooperativity
    out.append(StationarySolution(normal, effective_cooperativity(params, jz0),
                                  laser_offset(params, jz0), stable, eig, "normal"))
    br = cooperativity_branches(params, allow_complex=True)
    if br.real:
        for name, c in (("plus", br.c_plus), ("minus", br.c_minus)):
            if c > 1.0 + BRANCH_TOL:
                st = lasing_state(params, c)
                _, eig, stable = jacobian_stability(params, st)
                out.append(StationarySolution(st, c, laser_offset(params, st.jz), stable, eig, name))
    return out


@dataclass(frozen=True)
class PhaseBoundaries:
    """Interaction strengths at which the phase changes, at fixed pump.

    ``eps1``/``eps2`` bound the region with real cooperativities (``eps2`` below);
    ``eps3``/``eps4`` bound the lasing region and are ``None`` when
    ``C0 (w-gamma)/(w+gamma) < 1``. ``upper_bistable`` says whether the interval
    ``(eps3, eps1)`` is bistable rather than normal, ``lower_bistable`` the same
    for ``(eps2, eps4)``.
    """

    eps1: float
    eps2: float
    eps3: Optional[float]
    eps4: Optional[float]
    upper_bistable: bool = False
    lower_bistable: bool = False

    def phase_at(self, epsilon: float) -> Phase:
        if self.eps3 is not None and self.eps4 < epsilon < self.eps3:
            return Phase.LASING
        if self.eps3 is not None:
            if self.upper_bistable and self.eps3 <= epsilon < self.eps1:
                return Phase.BISTABLE
            if self.lower_bistable and self.eps2 < epsilon <= self.eps4:
                return Phase.BISTABLE
        return Phase.NORMAL


def phase_boundaries(params: ModelParams) -> PhaseBoundaries:
    r = derive_rates(params)
    D, G, c0, p = params.delta, r.gamma_total, r.c0, r.pump_factor
    s = math.sqrt(G**2 + 4 * D**2)
    eps1 = 0.25 * c0 * (2 * D + s)
    eps2 = 0.25 * c0 * (2 * D - s)
    arg = c0 * p - 1.0
    if arg < 0 or p == 0:
        return PhaseBoundaries(eps1, eps2, None, None)
    root = math.sqrt(arg)
    pref = G * (params.pump_w + params.gamma) / (2 * (params.pump_w - params.gamma))
    eps3 = pref * (2 * D / G + root)
    eps4 = pref * (2 * D / G - root)
    # at C = 1 the companion root is 4 (eps p)^2 / (Gamma^2 + 4 Delta^2);
    # the side where it exceeds one is where C^(-) crossed, i.e. bistable
    upper = 4 * (eps3 * p) ** 2 > G**2 + 4 * D**2
    lower = 4 * (eps4 * p) ** 2 > G**2 + 4 * D**2
    return PhaseBoundaries(eps1, eps2, eps3, eps4, bool(upper), bool(lower))


@dataclass
class RampPoint:
    w: float
    state: MeanFieldState
    lasing: bool
    converged: bool
    residual: float

    @property
    def jz(self) -> float:
        return self.state.jz


def hysteresis_ramp(params: ModelParams, w_start: float, w_end: float, n_steps: int,
                    direction: str = "up", *, seed: MeanFieldState = None,
                    kick: Optional[float] = None) -> List[RampPoint]:
    """Quasi-adiabatic pump ramp, relaxing at each step from the previous end state.

    ``direction`` is ``"up"`` (increasing pump) or ``"down"``; the pump values
    are ``linspace(min, max, n_steps)`` traversed in that order. Before each
    step the cavity amplitude is raised to at least ``kick`` (default
    ``1e-3 sqrt(N)``) so that an unstable normal state can leave, standing in
    for spontaneous emission.
    """
    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    lo, hi = sorted((float(w_start), float(w_end)))
    ws = np.linspace(lo, hi, n_steps)
    if direction == "down":
        ws = ws[::-1]
    elif direction != "up":
        raise ValueError("direction must be 'up' or 'down'")
    N = params.n_spins
    kick = 1e-3 * math.sqrt(N) if kick is None else kick
    state = seed
    out = []
    for w in ws:
        p = params.replace(pump_w=float(w))
        if state is None:
            state = standard_seed(p)
        if abs(state.a) < kick:
            phase = state.a / abs(state.a) if state.a != 0 else 1.0
            state = MeanFieldState(kick * phase, state.j_minus, state.jz)
        rr = relax(p, state)
        state = rr.state
        out.append(RampPoint(float(w), state, state.photons > 1e-6 * N, rr.converged, rr.residual))
    return out
