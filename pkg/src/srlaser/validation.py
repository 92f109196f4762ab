"""Quick oracle and invariant checks, run by ``srlaser validate``.

Each check returns ``(name, passed, detail)``. The checks are independent
of one another and take a few seconds in total; the pytest suite carries the
full-scale versions.
"""

from __future__ import annotations

import math
from typing import Callable, List, Tuple

import numpy as np

from .bruteforce import brute_force_steady_state
from .dicke import distributions, multiplicity, solve_steady_state, spin_values, standard_observables
from .fluctuations import FluctuationCoeffs, green_function, principal_spectra, squeeze_db_from_spectra
from .meanfield import lasing_state, residual_scale, stationarity_residual
from .model import ModelParams, cooperativity_branches, self_consistency_residual

Check = Tuple[str, bool, str]


def check_squeeze_law() -> Check:
    worst = 0.0
    for chi in np.linspace(-10, 10, 50):
        c = FluctuationCoeffs(1.0, 0.0, 0.01, float(chi))
        law = 20.0 / math.log(10.0) * math.asinh(abs(chi))
        worst = max(worst, abs(squeeze_db_from_spectra(c) - law))
    return "squeeze law asinh|chi|", worst < 1e-10, f"max error {worst:.2e} dB"


def check_uncertainty_product() -> Check:
    worst = 0.0
    for chi in np.linspace(-5, 5, 20):
        s = principal_spectra(FluctuationCoeffs(0.7, 0.0, 0.01, float(chi)), [0.0])
        worst = max(worst, abs(s.s_plus[0] * s.s_minus[0] * 0.7**2 - 1.0))
    return "S+(0) S-(0) = kappa_a^-2", worst < 1e-10, f"max rel error {worst:.2e}"


def check_degeneracy() -> Check:
    w = np.linspace(0, 10, 101)
    c = FluctuationCoeffs(0.5, 0.0, 0.01, 0.0)
    s = principal_spectra(c, w)
    ref = 0.5 / (0.25 + w**2)
    err = max(np.max(np.abs(s.s_plus - s.s_minus) / s.s_plus), np.max(np.abs(s.s_plus - ref) / ref))
    return "chi = 0 degeneracy", err < 1e-12, f"max rel error {err:.2e}"


def check_multiplicities() -> Check:
    bad = [n for n in range(1, 21)
           if sum(multiplicity(n, tj) * (tj + 1) for tj in spin_values(n)) != 2**n]
    return "sum_J D_J (2J+1) = 2^N", not bad, f"failures at N={bad}" if bad else "N = 1..20 exact"


def check_meanfield_closure() -> Check:
    p = ModelParams.from_collective(100, 1.0, delta=1.0, epsilon=1.0, kappa=1.0, gamma=0.01,
                                    pump_w=0.2, gamma_phi=1.0)
    br = cooperativity_branches(p)
    st = lasing_state(p, br.c_plus)
    res, _ = stationarity_residual(p, st)
    rel = res / residual_scale(p)
    sc = abs(self_consistency_residual(p, br.c_plus))
    return "mean-field lasing state is stationary", rel < 1e-8 and sc < 1e-10, f"residual {rel:.2e} N Gamma"


def check_green_normalization() -> Check:
    c = FluctuationCoeffs(1.0, 0.1, 0.01, 1.0, a_mag=10.0)
    g = green_function(c, 0.0, 0.0, 4.0)
    mass = g.box_mass(-50.0, 50.0, -math.pi, math.pi)
    return "Green function normalization", abs(mass - 1.0) < 1e-6, f"mass {mass:.12f}"


def check_dicke_oracle() -> Check:
    p = ModelParams(n_spins=2, g=0.6, delta=0.3, epsilon=0.4, kappa=1.0, gamma=0.2, pump_w=0.9, gamma_phi=0.3)
    n_cut = 6
    d = standard_observables(solve_steady_state(p, n_cut))
    bf = brute_force_steady_state(p, n_cut).standard_observables()
    err = max(abs(d[k] - bf[k]) / max(abs(bf[k]), 1e-12) for k in bf)
    return "Dicke basis vs full Hilbert space (N=2)", err < 1e-8, f"max rel error {err:.2e}"


def check_pmf_normalization() -> Check:
    p = ModelParams(n_spins=3, g=0.5, delta=0.0, epsilon=0.0, kappa=1.0, gamma=0.1, pump_w=0.8, gamma_phi=0.2)
    d = distributions(solve_steady_state(p, 10))
    err = max(abs(d.photon_pmf.sum() - 1.0), abs(d.spin_pmf.sum() - 1.0))
    ok = err < 1e-10 and d.photon_pmf.min() > -1e-12
    return "distributions normalized and nonnegative", ok, f"error {err:.2e}"


CHECKS: List[Callable[[], Check]] = [
    check_squeeze_law,
    check_uncertainty_product,
    check_degeneracy,
    check_multiplicities,
    check_meanfield_closure,
    check_green_normalization,
    check_dicke_oracle,
    check_pmf_normalization,
]


def run_checks() -> List[Check]:
    out = []
    for fn in CHECKS:
        try:
            out.append(fn())
        except Exception as exc:  # a crashing check is a failed check
            out.append((fn.__name__, False, f"{type(exc).__name__}: {exc}"))
    return out
