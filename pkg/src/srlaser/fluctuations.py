"""Linearized photon fluctuations below and above the lasing threshold.

Above threshold the photon field is described by amplitude and phase
deviations ``(z, phi)`` from the mean-field value ``|a|``; the effective
Fokker-Planck operator is

    kappa_a d_z z + D_a/2 d_z^2 + D_phi/2 d_phi^2 + (kappa_a chi/|a|)(2 z - d_z/2) d_phi

and its Green's function, Husimi Q function and quadrature noise spectra are
implemented here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.special import wofz

from .errors import AboveThreshold, BelowThreshold, NegativeQ, TruncationFailure
from .meanfield import lasing_state, laser_offset
from .model import (
    BRANCH_TOL,
    ModelParams,
    cooperativity_branches,
    derive_rates,
    effective_cooperativity,
    effective_detuning,
    normal_state_jz,
)

DEFAULT_TOL = 1e-12
DEFAULT_N_CAP = 200_000


@dataclass(frozen=True)
class FluctuationCoeffs:
    """Coefficients of the linearized photon Fokker-Planck equation.

    Attributes
    ----------
    kappa_a : float
        Amplitude relaxation rate.
    d_a : float
        Amplitude diffusion rate.
    d_phi : float
        Phase diffusion rate (laser linewidth).
    chi : float
        Normalized mean-field interaction.
    phi_lock : float
        Stationary cavity-magnon phase difference.
    a_mag : float
        Mean-field cavity amplitude |a|.
    laser_freq_offset : float
        omega_L - omega_c.
    """

    kappa_a: float
    d_a: float
    d_phi: float
    chi: float
    phi_lock: float = 0.0
    a_mag: float = 1.0
    laser_freq_offset: float = 0.0

    def with_chi(self, chi: float) -> "FluctuationCoeffs":
        return FluctuationCoeffs(self.kappa_a, self.d_a, self.d_phi, float(chi), self.phi_lock,
                                 self.a_mag, self.laser_freq_offset)

    def with_d_a(self, d_a: float) -> "FluctuationCoeffs":
        return FluctuationCoeffs(self.kappa_a, float(d_a), self.d_phi, self.chi, self.phi_lock,
                                 self.a_mag, self.laser_freq_offset)


def _bracket(p: ModelParams, c: float) -> float:
    r = derive_rates(p)
    wpg = p.pump_w + p.gamma
    return 0.25 * wpg / (p.pump_w - p.gamma) + (r.kappa_s + wpg) / (8.0 * c * r.kappa_s)


def fluct_coeffs(params: ModelParams) -> FluctuationCoeffs:
    """Fokker-Planck coefficients around the stable lasing branch C^(+).

    Raises
    ------
    BelowThreshold
        If no real branch exceeds one.
    """
    br = cooperativity_branches(params, allow_complex=True)
    if not br.real or br.c_plus <= 1.0 + BRANCH_TOL:
        raise BelowThreshold("no lasing branch with C > 1")
    c = br.c_plus
    r = derive_rates(params)
    st = lasing_state(params, c)
    a2 = st.photons
    k, ks, G = params.kappa, r.kappa_s, r.gamma_total
    wpg = params.pump_w + params.gamma
    kappa_a = k * (1.0 - 1.0 / c)
    bracket = _bracket(params, c)
    d_a = (k / c) * (bracket + (c - 1.0) * wpg / (2.0 * c * ks))
    d_phi = (k * c / a2) * (ks / G) ** 2 * bracket
    chi = 2.0 * st.jz * params.epsilon / (params.n_spins * G)
    d_eps = effective_detuning(params, st.jz)
    phi_lock = -math.atan2(2.0 * d_eps, G)
    return FluctuationCoeffs(kappa_a, d_a, d_phi, chi, phi_lock, math.sqrt(a2), laser_offset(params, st.jz))


# ---------------------------------------------------------------- below threshold


@dataclass(frozen=True)
class BelowThresholdStats:
    """Stationary photon and spin statistics of the normal state.

    ``g1_decay`` is the complex rate in ``g1(tau) = exp(-g1_decay * tau)`` in
    the frame rotating at ``omega_c + laser_freq_offset``.
    """

    n_photons: float
    delta_jz: float
    g1_decay: complex
    g2_decay: float
    cooperativity: float
    laser_freq_offset: float

    def g1(self, tau):
        return np.exp(-self.g1_decay * np.asarray(tau))

    def g2(self, tau):
        return 1.0 + np.exp(-self.g2_decay * np.abs(np.asarray(tau, dtype=float)))


def below_threshold_stats(params: ModelParams) -> BelowThresholdStats:
    """Thermal photon statistics of the normal state.

    Raises
    ------
    AboveThreshold
        When the cooperativity at the normal-state polarization is >= 1.
    """
    r = derive_rates(params)
    jz = normal_state_jz(params)
    c = effective_cooperativity(params, jz)
    if c >= 1.0:
        raise AboveThreshold(f"normal-state cooperativity {c:.6g} >= 1")
    w, gam = params.pump_w, params.gamma
    d_eps = effective_detuning(params, jz)
    G2 = r.gamma_total**2
    # C/(w - gamma) written without the removable 0/0 at w = gamma
    c_over = r.c0 * G2 / ((w + gam) * (G2 + 4.0 * d_eps**2))
    n = w * c_over / (1.0 - c)
    djz = math.sqrt(params.n_spins * w * gam) / (w + gam)
    off = laser_offset(params, jz)
    g1 = (1.0 - c) * complex(0.5 * params.kappa, off)
    return BelowThresholdStats(n, djz, g1, params.kappa * (1.0 - c), c, off)


# ---------------------------------------------------------------- Green's function


@dataclass(frozen=True)
class _GreenTerms:
    sigma2: float
    d_tilde: float
    z_re: float      # real part of z~_n (independent of n)
    z_im: float      # imaginary part of z~_n per unit n
    c_re: float      # real part of c~_n per unit n^2
    c_im: float      # imaginary part of c~_n per unit n


def _green_terms(coeffs: FluctuationCoeffs, z0: float, t: float) -> _GreenTerms:
    ka, da, chi, a = coeffs.kappa_a, coeffs.d_a, coeffs.chi, coeffs.a_mag
    e1 = math.exp(-ka * t)
    om1 = -math.expm1(-ka * t)
    sigma2 = (da / ka) * -math.expm1(-2.0 * ka * t)
    d_tilde = coeffs.d_phi + 4.0 * chi**2 * da / a**2 + 2.0 * chi**2 * ka / a**2
    z_im = chi * da / (a * ka) * om1**2 + chi / (2.0 * a) * om1
    c_re = om1 * (da / (ka * a**2) * (3.0 - e1) * chi**2 + chi**2 / a**2)
    c_im = -4.0 * z0 * chi / a + om1 * 2.0 * z0 * chi / a
    return _GreenTerms(sigma2, d_tilde, z0 * e1, z_im, c_re, c_im)


def _n_max(decay: float, tol: float, cap: int) -> int:
    """Smallest series length whose dropped tail ``exp(-decay n^2)`` is below ``tol``."""
    if not decay > 0:
        raise TruncationFailure(f"series does not converge (n^2 decay coefficient {decay:.3g} <= 0)")
    n = math.ceil(math.sqrt(math.log(1.0 / tol) / decay)) + 8
    if n > cap:
        raise TruncationFailure(f"n_max={n} exceeds cap {cap}")
    return n


class GreenFunction:
    """Propagator of the linearized photon Fokker-Planck equation.

    ``G(z, phi, t; z0, phi0, 0)`` as a Fourier series in ``phi`` with Gaussian
    amplitude profiles of complex centre. The series is summed over
    ``|n| <= n_max`` with ``n_max`` fixed from the net ``n^2`` damping.
    """

    def __init__(self, coeffs: FluctuationCoeffs, z0: float, phi0: float, t: float,
                 tol: float = DEFAULT_TOL, n_cap: int = DEFAULT_N_CAP):
        if t <= 0:
            raise ValueError("t must be > 0 (the t = 0 propagator is a delta function)")
        self.coeffs, self.z0, self.phi0, self.t = coeffs, float(z0), float(phi0), float(t)
        a = coeffs.a_mag
        self.terms = g = _green_terms(coeffs, self.z0, self.t)
        sigma = math.sqrt(g.sigma2)
        if a < 10.0 * sigma:
            warnings.warn(f"|a| = {a:.3g} < 10 sigma = {10 * sigma:.3g}: extended z-domain is inaccurate")
        self.decay = 0.5 * g.d_tilde * t - g.c_re - g.z_im**2 / g.sigma2
        self.n_max = _n_max(self.decay, tol, n_cap)
        self.n = np.arange(-self.n_max, self.n_max + 1)

    @property
    def sigma2(self) -> float:
        return self.terms.sigma2

    def _log_weight(self):
        g, n = self.terms, self.n
        return -0.5 * g.d_tilde * n**2 * self.t + g.c_re * n**2 + 1j * g.c_im * n

    def terms_at(self, z, phi) -> np.ndarray:
        """Individual series terms (last axis runs over n) before summation."""
        g, n = self.terms, self.n
        z = np.asarray(z, dtype=float)[..., None]
        phi = np.asarray(phi, dtype=float)[..., None]
        zt = g.z_re + 1j * g.z_im * n
        expo = self._log_weight() - (z - zt) ** 2 / g.sigma2 + 1j * n * (phi - self.phi0)
        return np.exp(expo) / (2.0 * math.pi * math.sqrt(math.pi * g.sigma2))

    def complex_value(self, z, phi) -> np.ndarray:
        return self.terms_at(z, phi).sum(axis=-1)

    def __call__(self, z, phi) -> np.ndarray:
        """Real density; the n and -n terms are complex conjugates."""
        return self.complex_value(z, phi).real

    def z_marginal(self, z) -> np.ndarray:
        """Density integrated over phi (only the n = 0 term survives)."""
        g = self.terms
        z = np.asarray(z, dtype=float)
        return np.exp(-(z - g.z_re) ** 2 / g.sigma2) / math.sqrt(math.pi * g.sigma2)

    def box_mass(self, z_lo: float, z_hi: float, phi_lo: float, phi_hi: float) -> float:
        """Probability inside ``[z_lo, z_hi] x [phi_lo, phi_hi]``, term by term in closed form."""
        g, n = self.terms, self.n
        sigma = math.sqrt(g.sigma2)
        zt = g.z_re + 1j * g.z_im * n
        logw = self._log_weight()
        half = 0.5 * (phi_hi - phi_lo)
        mid = 0.5 * (phi_hi + phi_lo) - self.phi0
        nz = np.where(n == 0, 1, n)
        ang = np.where(n == 0, half / math.pi, np.sin(nz * half) / (math.pi * nz)) * np.exp(1j * n * mid)

        def half_erf(u):
            # 0.5 erf(u) = s/2 - s/2 exp(-u^2) w(i s u), s = sign(Re u), kept in log form
            s = np.where(u.real >= 0, 1.0, -1.0)
            return 0.5 * s, -0.5 * s * np.exp(logw - u**2) * wofz(1j * s * u)

        c_hi, v_hi = half_erf((z_hi - zt) / sigma)
        c_lo, v_lo = half_erf((z_lo - zt) / sigma)
        zpart = (c_hi - c_lo) * np.exp(logw) + (v_hi - v_lo)
        return float((ang * zpart).sum().real)


def green_function(coeffs: FluctuationCoeffs, z0: float, phi0: float, t: float,
                   tol: float = DEFAULT_TOL, n_cap: int = DEFAULT_N_CAP) -> GreenFunction:
    return GreenFunction(coeffs, z0, phi0, t, tol=tol, n_cap=n_cap)


# ---------------------------------------------------------------- Q representation


@dataclass
class QGrid:
    """Husimi Q density over the quadrature plane, per unit dx dp.

    ``x = sqrt(2) Re q`` and ``p = sqrt(2) Im q``; ``values[i, j]`` is at
    ``(x[j], p[i])``.
    """

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray
    time: float
    center: Tuple[float, float]
    extent: float
    n_max: int = 0
    n_nodes: int = 0

    @property
    def cell(self) -> float:
        return float((self.x[1] - self.x[0]) * (self.p[1] - self.p[0]))

    def total(self) -> float:
        return float(self.values.sum() * self.cell)

    def moments(self):
        """Mean vector and covariance matrix of (x, p) by grid quadrature."""
        X, P = np.meshgrid(self.x, self.p)
        w = self.values * self.cell
        m = w.sum()
        mx, mp = (w * X).sum() / m, (w * P).sum() / m
        cxx = (w * (X - mx) ** 2).sum() / m
        cpp = (w * (P - mp) ** 2).sum() / m
        cxp = (w * (X - mx) * (P - mp)).sum() / m
        return np.array([mx, mp]), np.array([[cxx, cxp], [cxp, cpp]])

    def mean_phase_factor(self) -> complex:
        """<exp(i arg q)> under the grid density."""
        X, P = np.meshgrid(self.x, self.p)
        w = self.values * self.cell
        r = np.hypot(X, P)
        ph = np.where(r > 0, (X + 1j * P) / np.where(r > 0, r, 1.0), 0.0)
        return complex((w * ph).sum() / w.sum())


def _q_nodes(a_tot: float, q_max: float, sigma2: float, n_max: int, tol: float) -> int:
    # the phi-integrand is exp(A cos phi - B sin^2 phi); its Fourier content
    # falls off like exp(-k^2 / (2 (A + 2B))) beyond which nodes are wasted
    A = 2.0 * a_tot * q_max / (1.0 + sigma2)
    B = q_max**2
    band = math.sqrt(2.0 * (A + 2.0 * B) * math.log(1.0 / tol)) + 2 * n_max
    n = max(4 * n_max + 64, int(math.ceil(band)) + 16)
    return n + (n % 2)


def _phase_series(coeffs_n, n_max: int, tol: float):
    """Periodic cubic spline of F(theta) = sum_n c_n exp(i n theta), which is real."""
    from scipy.interpolate import CubicSpline

    # spline error ~ h^4 max|F| / 384 with max|F| <= n_max^4 sum|c_n|
    m = int(2 ** math.ceil(math.log2(max(256, 2.0 * math.pi * n_max * (0.02 / tol) ** 0.25))))
    spec = np.zeros(m, dtype=complex)
    spec[np.arange(-n_max, n_max + 1) % m] = coeffs_n
    vals = np.fft.ifft(spec).real * m
    theta = 2.0 * math.pi * np.arange(m + 1) / m
    return CubicSpline(theta, np.append(vals, vals[0]), bc_type="periodic")


def q_values(coeffs: FluctuationCoeffs, z0: float, phi0: float, t: float, x, p, *,
             tol: float = DEFAULT_TOL, n_cap: int = DEFAULT_N_CAP, chunk: int = 4096):
    """Q density per unit dx dp at quadrature points ``(x, p)``.

    The series over ``n`` is resummed: with ``u_n = |a| + z~_n = u0 + i b n``
    the ``n``-dependence of each term reduces to ``c_n exp(i n theta)`` with
    ``theta = phi + phi_q - phi0 + 2 b |q| cos(phi) / (1 + sigma~^2)``, so the
    sum is a fixed periodic function of ``theta`` evaluated once on a fine
    grid. The remaining ``phi`` integral uses the periodic trapezoid rule.

    Returns ``(values, n_max, n_nodes)``. Residual negatives above ``-1e-9``
    are clipped to zero.

    Raises
    ------
    NegativeQ
        When a value below ``-1e-9`` appears.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    shape = np.broadcast(x, p).shape
    xb, pb = np.broadcast_to(x, shape).ravel(), np.broadcast_to(p, shape).ravel()
    q = (xb + 1j * pb) / math.sqrt(2.0)
    rq, phq = np.abs(q), np.angle(q)
    a = coeffs.a_mag
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        # coherent state at alpha = (|a| + z0) exp(i phi0)
        alpha = (a + z0) * np.exp(1j * phi0)
        vals = np.exp(-np.abs(q - alpha) ** 2) / math.pi
        return 0.5 * vals.reshape(shape), 0, 0
    g = _green_terms(coeffs, z0, t)
    s1 = 1.0 + g.sigma2
    decay = 0.5 * g.d_tilde * t - g.c_re - g.z_im**2 / s1
    n_max = _n_max(decay, tol, n_cap)
    n = np.arange(-n_max, n_max + 1)
    u0, b = a + g.z_re, g.z_im
    cn = np.exp(-0.5 * g.d_tilde * n**2 * t + g.c_re * n**2 + 1j * g.c_im * n
                - (2j * b * n * u0 - (b * n) ** 2) / s1)
    series = _phase_series(cn, n_max, tol)
    n_nodes = _q_nodes(abs(u0), float(rq.max(initial=0.0)), g.sigma2, n_max, tol)
    phi = 2.0 * math.pi * np.arange(n_nodes) / n_nodes
    cphi, s2phi = np.cos(phi), np.sin(phi) ** 2
    two_pi = 2.0 * math.pi
    out = np.empty(rq.size)
    for s in range(0, rq.size, chunk):
        r = rq[s:s + chunk, None]
        ph = phq[s:s + chunk, None]
        env = np.exp(-(u0 - r * cphi) ** 2 / s1 - r**2 * s2phi)
        theta = np.mod(phi + ph - phi0 + 2.0 * b * r * cphi / s1, two_pi)
        out[s:s + chunk] = (env * series(theta)).sum(axis=1) / n_nodes
    vals = 0.5 * out / (math.pi * math.sqrt(s1))
    worst = vals.min(initial=0.0)
    if worst < -1e-9:
        raise NegativeQ(f"Q value {worst:.3g} below -1e-9")
    return np.clip(vals, 0.0, None).reshape(shape), n_max, n_nodes


def q_representation(coeffs: FluctuationCoeffs, z0: float, phi0: float, t: float, *,
                     center: Optional[Tuple[float, float]] = None, extent: float = 6.0,
                     resolution: int = 81, tol: float = DEFAULT_TOL,
                     n_cap: int = DEFAULT_N_CAP) -> QGrid:
    """Q density on a square grid of half-width ``extent`` around ``center``.

    The default centre is the mean-field point ``(sqrt(2)|a|, 0)``.
    """
    if center is None:
        center = (math.sqrt(2.0) * coeffs.a_mag, 0.0)
    x = np.linspace(center[0] - extent, center[0] + extent, resolution)
    p = np.linspace(center[1] - extent, center[1] + extent, resolution)
    X, P = np.meshgrid(x, p)
    vals, n_max, n_nodes = q_values(coeffs, z0, phi0, t, X, P, tol=tol, n_cap=n_cap)
    return QGrid(x, p, vals, float(t), (float(center[0]), float(center[1])), float(extent), n_max, n_nodes)


# ---------------------------------------------------------------- noise spectra


def noise_spectrum_matrix(coeffs: FluctuationCoeffs, omega) -> np.ndarray:
    """Real symmetric quadrature noise matrix [[S_xx, S_xp], [S_px, S_pp]].

    Vectorized over ``omega``; the matrix axes are the last two.
    """
    ka, da, chi = coeffs.kappa_a, coeffs.d_a, coeffs.chi
    w = np.asarray(omega, dtype=float)
    L = ka**2 + w**2
    A = 4.0 * da + ka
    pref = A / L
    m = np.empty(w.shape + (2, 2))
    m[..., 0, 0] = pref
    m[..., 0, 1] = m[..., 1, 0] = pref * (-2.0 * ka**2 * chi / L)
    m[..., 1, 1] = pref * (4.0 * ka**2 * chi**2 / L) + ka / L
    return m


def _sym2_eig(m):
    """Eigenvalues (larger, smaller) of real symmetric 2x2 matrices, cancellation free."""
    a, b, c = m[..., 0, 0], m[..., 0, 1], m[..., 1, 1]
    half_tr = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    big = half_tr + rad
    det = a * c - b * b
    small = np.where(big != 0, det / np.where(big != 0, big, 1.0), half_tr - rad)
    return big, small


@dataclass
class NoiseSpectra:
    """Principal noise spectra along the anti-squeezed (+) and squeezed (-) axes.

    ``theta`` is ``atan(chi)``. ``squeeze_axis`` is the angle of the
    ``s_minus`` eigenvector at zero frequency, measured from the x axis
    towards p and folded into (-pi/2, pi/2].
    """

    omega_grid: np.ndarray
    s_plus: np.ndarray
    s_minus: np.ndarray
    theta: float
    squeeze_axis: float
    mode: str = "full"


def _squeeze_axis(m0) -> float:
    _, vecs = np.linalg.eigh(m0)
    v = vecs[:, 0]
    ang = math.atan2(v[1], v[0])
    if ang <= -math.pi / 2:
        ang += math.pi
    elif ang > math.pi / 2:
        ang -= math.pi
    return ang


def principal_spectra(coeffs: FluctuationCoeffs, omega_grid, mode: str = "full") -> NoiseSpectra:
    """Principal spectra S+ >= S- on ``omega_grid``.

    ``mode="full"`` diagonalises the noise matrix; ``mode="simplified"``
    evaluates the closed form valid for ``D_a << kappa_a``.
    """
    w = np.asarray(omega_grid, dtype=float)
    chi = coeffs.chi
    m0 = noise_spectrum_matrix(coeffs, 0.0)
    if mode == "full":
        sp, sm = _sym2_eig(noise_spectrum_matrix(coeffs, w))
    elif mode == "simplified":
        ka = coeffs.kappa_a
        L = ka**2 + w**2
        x = 2.0 * ka**2 / L
        big = 1.0 + x * chi**2 + x * abs(chi) * math.sqrt(1.0 + chi**2)
        # product of the two brackets is 1 + 2 x chi^2 - x^2 chi^2; dividing
        # avoids the cancellation in 1 + x chi (chi - sqrt(1 + chi^2))
        small = (1.0 + x * chi**2 * (2.0 - x)) / big
        sp, sm = ka / L * big, ka / L * small
    else:
        raise ValueError("mode must be 'full' or 'simplified'")
    return NoiseSpectra(w, np.asarray(sp), np.asarray(sm), math.atan(chi), _squeeze_axis(m0), mode)


def squeeze_db(coeffs: FluctuationCoeffs) -> float:
    """Decibel squeeze parameter at zero frequency, (20/ln 10) asinh|chi|."""
    return 20.0 / math.log(10.0) * math.asinh(abs(coeffs.chi))


def squeeze_db_from_spectra(coeffs: FluctuationCoeffs, mode: str = "full") -> float:
    """Same quantity from the smaller eigenvalue of the zero-frequency noise matrix.

    The reference is the same coefficients with ``chi = 0``.
    """
    s = principal_spectra(coeffs, [0.0], mode=mode).s_minus[0]
    ref = principal_spectra(coeffs.with_chi(0.0), [0.0], mode=mode).s_minus[0]
    return -10.0 * math.log10(s / ref)


def squeeze_db_params(params: ModelParams) -> float:
    """Squeeze parameter for a parameter point; BelowThreshold outside the lasing branch."""
    return squeeze_db(fluct_coeffs(params))
