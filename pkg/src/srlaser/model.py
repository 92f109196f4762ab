"""Model parameters, derived rates and the mean-field cooperativity.

Everything here works in the frame rotating with the cavity, in consistent
angular-frequency units chosen by the caller. The spin ensemble enters only
through ``n_spins`` and the single-spin coupling ``g``; the collective
coupling ``g * sqrt(n_spins)`` is available as :attr:`ModelParams.g_sqrt_n`.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ComplexBranches, DegenerateRates

# Absolute slack for comparing closed-form cooperativities with the threshold.
BRANCH_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical rates and couplings of the spin-cavity model.

    Parameters
    ----------
    n_spins : int
        Number of spin-1/2 emitters N.
    g : float
        Single-spin cavity coupling.
    delta : float
        Spin-cavity detuning.
    epsilon : float
        All-to-all one-axis-twisting strength (enters as -(epsilon/N) Jz^2).
    kappa : float
        Cavity field decay rate (> 0).
    gamma : float
        Spontaneous emission rate of each spin.
    pump_w : float
        Incoherent pump rate of each spin.
    gamma_phi : float
        Spin dephasing rate.
    """

    n_spins: int
    g: float
    delta: float
    epsilon: float
    kappa: float
    gamma: float
    pump_w: float
    gamma_phi: float

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 1:
            raise ValueError(f"n_spins must be a positive integer, got {self.n_spins!r}")
        object.__setattr__(self, "n_spins", int(self.n_spins))
        for name in ("g", "delta", "epsilon", "kappa", "gamma", "pump_w", "gamma_phi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")
        for name in ("g", "gamma", "pump_w", "gamma_phi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def from_collective(cls, n_spins: int, g_sqrt_n: float, **rates) -> "ModelParams":
        """Build parameters from the collective coupling ``g * sqrt(N)``.

        The single-spin ``g`` is chosen among the floats adjacent to
        ``g_sqrt_n / sqrt(N)`` so that ``g * sqrt(N)`` reproduces the input
        exactly whenever such a float exists.
        """
        return cls(n_spins=n_spins, g=_exact_single_coupling(n_spins, g_sqrt_n), **rates)

    @property
    def g_sqrt_n(self) -> float:
        return self.g * math.sqrt(self.n_spins)

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def scaled(self, lam: float) -> "ModelParams":
        """All rates and couplings multiplied by ``lam`` (time rescaling)."""
        return self.replace(
            g=self.g * lam, delta=self.delta * lam, epsilon=self.epsilon * lam,
            kappa=self.kappa * lam, gamma=self.gamma * lam,
            pump_w=self.pump_w * lam, gamma_phi=self.gamma_phi * lam,
        )


def _exact_single_coupling(n_spins, g_sqrt_n):
    root = math.sqrt(n_spins)
    guess = g_sqrt_n / root
    candidates = [guess]
    lo = hi = guess
    for _ in range(4):
        lo = np.nextafter(lo, -np.inf)
        hi = np.nextafter(hi, np.inf)
        candidates += [float(lo), float(hi)]
    for cand in candidates:
        if cand * root == g_sqrt_n:
            return float(cand)
    return guess


@dataclass(frozen=True)
class DerivedRates:
    kappa_s: float
    gamma_total: float
    c0: float
    pump_factor: float


def derive_rates(params: ModelParams) -> DerivedRates:
    """Magnon decay rate, total dissipation, intrinsic cooperativity, population factor."""
    w, gam = params.pump_w, params.gamma
    if w + gam == 0:
        raise DegenerateRates("pump_w + gamma == 0: population factor undefined")
    kappa_s = w + gam + params.gamma_phi
    gamma_total = kappa_s + params.kappa
    if kappa_s == 0:
        raise DegenerateRates("kappa_s == 0: intrinsic cooperativity undefined")
    c0 = 4.0 * params.n_spins * params.g**2 / (params.kappa * kappa_s)
    return DerivedRates(kappa_s, gamma_total, c0, (w - gam) / (w + gam))


def effective_detuning(params: ModelParams, jz: float) -> float:
    """Spin-cavity detuning shifted by the mean-field interaction energy."""
    return params.delta - 2.0 * params.epsilon * jz / params.n_spins


def effective_cooperativity(params: ModelParams, jz: float) -> float:
    """C evaluated at a given polarization, C0 p Gamma^2 / (Gamma^2 + 4 Delta_eps^2)."""
    r = derive_rates(params)
    d_eps = effective_detuning(params, jz)
    G2 = r.gamma_total**2
    return r.c0 * r.pump_factor * G2 / (G2 + 4.0 * d_eps**2)


def normal_state_jz(params: ModelParams) -> float:
    return 0.5 * params.n_spins * derive_rates(params).pump_factor


@dataclass(frozen=True)
class CooperativityBranches:
    c_plus: Optional[float]
    c_minus: Optional[float]

    @property
    def real(self) -> bool:
        return self.c_plus is not None


def branch_discriminant(params: ModelParams) -> float:
    r = derive_rates(params)
    if r.c0 == 0:
        return r.gamma_total**2
    e = params.epsilon / r.c0
    return r.gamma_total**2 + 16.0 * e * params.delta - 16.0 * e**2


def cooperativity_branches(params: ModelParams, *, allow_complex: bool = False) -> CooperativityBranches:
    """Both self-consistent cooperativities C^(+) >= C^(-).

    The self-consistency ``C = C0 p Gamma^2 / (Gamma^2 + 4 Delta_eps^2)`` with
    ``Jz = (N/2) p / C`` is a quadratic in C. The two roots are returned in
    descending order (for ``w < gamma`` this swaps the sign convention of the
    closed form, whose prefactor is then negative).

    Raises
    ------
    ComplexBranches
        If the discriminant is negative, unless ``allow_complex`` is set, in
        which case both fields are ``None``.
    """
    r = derive_rates(params)
    G2 = r.gamma_total**2
    D = params.delta
    eps = params.epsilon
    p = r.pump_factor
    denom = 2.0 * (G2 + 4.0 * D**2)
    if r.c0 == 0:
        # no coupling: C vanishes identically
        return CooperativityBranches(0.0, 0.0)
    disc = branch_discriminant(params)
    if disc < 0:
        if allow_complex:
            return CooperativityBranches(None, None)
        raise ComplexBranches(f"discriminant {disc:.6g} < 0: no real cooperativity")
    root = r.gamma_total * math.sqrt(disc)
    base = G2 + 8.0 * eps * D / r.c0
    s = base + root if base >= 0 else base - root
    # stable quadratic roots: the product is 4 eps^2 p^2 / (Gamma^2 + 4 D^2)
    big = r.c0 * p * s / denom
    product = 4.0 * eps**2 * p**2 / (G2 + 4.0 * D**2)
    if big == 0:
        small = r.c0 * p * (base - root if base >= 0 else base + root) / denom
    else:
        small = product / big
    hi, lo = (big, small) if big >= small else (small, big)
    return CooperativityBranches(float(hi), float(lo))


def self_consistency_residual(params: ModelParams, c: float) -> float:
    """Relative mismatch of a cooperativity with its own polarization."""
    jz = 0.5 * params.n_spins * derive_rates(params).pump_factor / c
    implied = effective_cooperativity(params, jz)
    return abs(implied - c) / max(abs(c), 1e-300)


class Phase(str, enum.Enum):
    NORMAL = "Normal"
    LASING = "SuperradiantLasing"
    BISTABLE = "Bistable"


def classify_phase(params: ModelParams) -> Phase:
    """Mean-field phase from the position of both branches relative to C = 1."""
    br = cooperativity_branches(params, allow_complex=True)
    if not br.real:
        return Phase.NORMAL
    if br.c_minus > 1.0 + BRANCH_TOL:
        return Phase.BISTABLE
    if br.c_plus > 1.0 + BRANCH_TOL:
        return Phase.LASING
    return Phase.NORMAL
