"""Per-point computations behind each sweep task.

Every task function takes resolved :class:`ModelParams` plus the task's
option dict and returns ``(scalars, payload)``; ``payload`` is ``None`` or a
JSON-ready dict that the collector stores as a sidecar file. Column lists are
fixed per task so CSV files stay rectangular.
"""

from __future__ import annotations

from typing import Callable, Dict, Optional, Tuple

import numpy as np

from ..dicke import CutoffPolicy, converge_cutoff, distributions, solve_steady_state, standard_observables, tail_mass
from ..errors import BelowThreshold
from ..fluctuations import FluctuationCoeffs, fluct_coeffs, principal_spectra, q_representation, squeeze_db
from ..meanfield import hysteresis_ramp, lasing_state
from ..model import ModelParams, Phase, classify_phase, cooperativity_branches, normal_state_jz

Result = Tuple[Dict[str, object], Optional[dict]]

SCALAR_COLUMNS = {
    "phase-diagram": ["phase", "c_plus", "c_minus", "photons_per_n", "jz_per_n"],
    "squeeze-map": ["phase", "zeta0_db", "kappa_a", "d_a", "d_phi", "chi"],
    "spectra": ["zeta0_db", "kappa_a", "d_a", "d_phi", "chi", "s_minus_0", "s_ref_0"],
    "hysteresis": ["jump_up", "jump_down", "bistable_w_lo", "bistable_w_hi", "unconverged"],
    "q-snapshots": ["n_snapshots", "min_total", "cov_xp_last"],
    "exact-steady-state": ["n_cut", "photons", "jz", "jplus_jminus", "fano", "tail_mass", "null_residual"],
}


def _lasing_photons(params: ModelParams):
    """|a|^2 and Jz of the C^(+) lasing branch, or ``None`` below threshold."""
    br = cooperativity_branches(params, allow_complex=True)
    if br.real and br.c_plus > 1.0:
        st = lasing_state(params, br.c_plus)
        return st.photons, st.jz, br
    return None, None, br


def phase_diagram(params: ModelParams, opts) -> Result:
    """Phase tag, both branches and the lasing-branch photon number per spin.

    In the bistable region the lasing branch is reported, so the photon
    column is nonzero wherever a stable lasing state exists.
    """
    N = params.n_spins
    phase = classify_phase(params)
    photons, jz, br = _lasing_photons(params)
    if photons is None:
        photons, jz = 0.0, normal_state_jz(params)
    return {
        "phase": phase.value,
        "c_plus": br.c_plus if br.real else None,
        "c_minus": br.c_minus if br.real else None,
        "photons_per_n": photons / N,
        "jz_per_n": jz / N,
    }, None


def squeeze_map(params: ModelParams, opts) -> Result:
    """Zero-frequency squeezing of the lasing branch, zero where there is none."""
    phase = classify_phase(params)
    try:
        c = fluct_coeffs(params)
    except BelowThreshold:
        return {"phase": phase.value, "zeta0_db": 0.0}, None
    return {
        "phase": phase.value, "zeta0_db": squeeze_db(c), "kappa_a": c.kappa_a,
        "d_a": c.d_a, "d_phi": c.d_phi, "chi": c.chi,
    }, None


def spectra(params: ModelParams, opts) -> Result:
    """Principal spectra with two references.

    ``s_ref`` uses the same coefficients with chi = 0; ``s_eps0`` is the
    laser at the same parameters but epsilon = 0 (omitted when that laser is
    below threshold). With ``mode = simplified`` the closed form without
    amplitude noise is used throughout, so the epsilon = 0 curves coincide.
    """
    c = fluct_coeffs(params)
    mode = opts.get("mode", "full")
    omega = np.linspace(0.0, float(opts["omega_max"]), int(opts["omega_count"]))
    sp = principal_spectra(c, omega, mode)
    ref = principal_spectra(c.with_chi(0.0), omega, mode)
    zero = principal_spectra(c, [0.0], mode)
    zref = principal_spectra(c.with_chi(0.0), [0.0], mode)
    payload = {
        "omega": omega, "s_plus": sp.s_plus, "s_minus": sp.s_minus, "s_ref": ref.s_minus,
        "theta": sp.theta, "squeeze_axis": sp.squeeze_axis,
    }
    try:
        payload["s_eps0"] = principal_spectra(fluct_coeffs(params.replace(epsilon=0.0)), omega, mode).s_minus
    except BelowThreshold:
        pass
    return {
        "zeta0_db": squeeze_db(c), "kappa_a": c.kappa_a, "d_a": c.d_a, "d_phi": c.d_phi,
        "chi": c.chi, "s_minus_0": float(zero.s_minus[0]), "s_ref_0": float(zref.s_minus[0]),
    }, payload


def _first_switch(points):
    for prev, cur in zip(points, points[1:]):
        if prev.lasing != cur.lasing:
            return cur.w
    return None


def hysteresis(params: ModelParams, opts) -> Result:
    """Up and down pump ramps; the point's own pump rate is not used.

    A jump is the first ramp step whose lasing flag differs from the previous
    step. The analytic bistable window is read off the same pump grid.
    """
    N = params.n_spins
    lo, hi, n = float(opts["w_start"]), float(opts["w_end"]), int(opts["n_steps"])
    up = hysteresis_ramp(params, lo, hi, n, "up")
    down = hysteresis_ramp(params, lo, hi, n, "down")
    bist = [pt.w for pt in up if classify_phase(params.replace(pump_w=pt.w)) is Phase.BISTABLE]

    def branch(points):
        return {
            "w": [p.w for p in points],
            "jz_per_n": [p.state.jz / N for p in points],
            "photons_per_n": [p.state.photons / N for p in points],
            "lasing": [p.lasing for p in points],
        }

    return {
        "jump_up": _first_switch(up), "jump_down": _first_switch(down),
        "bistable_w_lo": min(bist) if bist else None, "bistable_w_hi": max(bist) if bist else None,
        "unconverged": sum(not p.converged for p in up + down),
    }, {"up": branch(up), "down": branch(down)}


def q_snapshots(params: ModelParams, opts) -> Result:
    """Husimi Q snapshots from the mean-field point at the configured times.

    Coefficients come from the lasing branch; any of ``kappa_a``, ``d_a``,
    ``d_phi``, ``chi``, ``a_mag`` given in the options replace the computed ones.
    """
    over = {k: opts.get(k) for k in ("kappa_a", "d_a", "d_phi", "chi", "a_mag")}
    if all(v is not None for v in over.values()):
        c = FluctuationCoeffs(over["kappa_a"], over["d_a"], over["d_phi"], over["chi"], a_mag=over["a_mag"])
    else:
        c = fluct_coeffs(params)
        fields = dict(kappa_a=c.kappa_a, d_a=c.d_a, d_phi=c.d_phi, chi=c.chi, a_mag=c.a_mag)
        fields.update({k: v for k, v in over.items() if v is not None})
        c = FluctuationCoeffs(**fields)
    snaps, totals = [], []
    cov = None
    for t in opts["times"]:
        g = q_representation(c, 0.0, 0.0, float(t), extent=float(opts["extent"]),
                             resolution=int(opts["resolution"]))
        _, cov = g.moments()
        totals.append(g.total())
        snaps.append({"time": g.time, "x": g.x, "p": g.p, "q": g.values, "total": g.total(),
                      "covariance": cov})
    coeffs = dict(kappa_a=c.kappa_a, d_a=c.d_a, d_phi=c.d_phi, chi=c.chi, a_mag=c.a_mag)
    return {"n_snapshots": len(snaps), "min_total": min(totals), "cov_xp_last": float(cov[0, 1])}, \
        {"coefficients": coeffs, "snapshots": snaps}


def exact_steady_state(params: ModelParams, opts) -> Result:
    """Permutation-symmetric exact steady state with photon and spin distributions."""
    if opts["n_cut"] == "auto":
        res = converge_cutoff(params, CutoffPolicy(max_cut=int(opts["max_cut"]), tail_tol=float(opts["tail_tol"]),
                                                   obs_rtol=float(opts["obs_rtol"])))
        sol, n_cut = res.solution, res.n_cut
    else:
        n_cut = int(opts["n_cut"])
        sol = solve_steady_state(params, n_cut)
    obs = standard_observables(sol)
    d = distributions(sol)
    return {
        "n_cut": n_cut, "photons": obs["photons"], "jz": obs["jz"], "jplus_jminus": obs["jplus_jminus"],
        "fano": d.fano, "tail_mass": tail_mass(sol), "null_residual": sol.null_residual,
    }, {
        "photon_pmf": d.photon_pmf, "spin_pmf": d.spin_pmf, "two_m_values": d.two_m_values,
        "two_j_values": d.two_j_values, "joint_jm": d.joint_jm,
    }


TASK_FUNCS: Dict[str, Callable[[ModelParams, dict], Result]] = {
    "phase-diagram": phase_diagram,
    "squeeze-map": squeeze_map,
    "spectra": spectra,
    "hysteresis": hysteresis,
    "q-snapshots": q_snapshots,
    "exact-steady-state": exact_steady_state,
}

TASK_OPTIONS = {
    "spectra": "spectra",
    "hysteresis": "hysteresis",
    "q-snapshots": "qsnapshots",
    "exact-steady-state": "exact",
}
