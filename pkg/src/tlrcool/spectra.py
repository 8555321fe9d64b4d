"""Frequency-domain response and noise of the mechanical mode.

Every function is vectorized over ``omega`` and uses the Fourier convention
u(t) = (2 pi)^-1/2 int e^{i omega t} u(omega) d omega, under which the
position spectrum is

    S_x(omega) = |chi_eff(omega)|^2 [S_th(omega) + S_ca(omega)].

Unsymmetrized spectra are the primary objects; their symmetrized parts are
provided for the weak-coupling closed forms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .params import SystemParams
from .steady import WorkingPoint


class SingularSusceptibilityError(ArithmeticError):
    """B(omega) vanishes: the linearized response is unbounded."""


def _w(omega):
    return np.asarray(omega, dtype=float)


def _out(x):
    return x.item() if np.ndim(x) == 0 else x


def cavity_factor(omega, delta, kappa):
    """|(kappa + i omega)^2 + Delta^2|^2, written as a sum of squares."""
    w = _w(omega)
    return (kappa**2 + delta**2 - w**2) ** 2 + 4.0 * kappa**2 * w**2


def _cavity_poly(w, delta, kappa):
    return (kappa + 1j * w) ** 2 + delta**2


def _g2(wp: WorkingPoint, params: SystemParams) -> float:
    return abs(params.g0 * wp.a_mean) ** 2


@dataclass(frozen=True)
class SpectralIntermediates:
    b_of_omega: np.ndarray
    c_of_omega: np.ndarray
    cavity_factor: np.ndarray


def intermediates(omega, wp: WorkingPoint, params: SystemParams) -> SpectralIntermediates:
    w = _w(omega)
    m, hbar, kappa, delta = params.m, params.hbar, params.kappa, wp.delta
    poly = _cavity_poly(w, delta, kappa)
    b = m * (params.omega_b**2 - w**2 + 1j * params.gamma_b * w) * poly - 2.0 * hbar * _g2(wp, params) * delta
    c = hbar * np.sqrt(2.0 * kappa) * params.g0 * wp.a_mean * (kappa + 1j * (w + delta))
    return SpectralIntermediates(b_of_omega=_out(b), c_of_omega=_out(c), cavity_factor=_out(cavity_factor(w, delta, kappa)))


def gamma_ca(omega, wp: WorkingPoint, params: SystemParams):
    """Damping added by the driven cavity, 4 hbar |G|^2 kappa Delta / (m |.|^2)."""
    cf = cavity_factor(omega, wp.delta, params.kappa)
    return _out(4.0 * params.hbar * _g2(wp, params) * params.kappa * wp.delta / (params.m * cf))


def gamma_b_eff(omega, wp, params):
    return _out(params.gamma_b + np.asarray(gamma_ca(omega, wp, params)))


def omega_b_eff_sq(omega, wp: WorkingPoint, params: SystemParams):
    """Signed square of the effective mechanical frequency.

    Negative values are kept: they mark a static instability.
    """
    w = _w(omega)
    kappa, delta = params.kappa, wp.delta
    g = np.asarray(gamma_ca(w, wp, params))
    if kappa == 0:
        return _out(np.full_like(w, params.omega_b**2))
    return _out(params.omega_b**2 - (kappa**2 - w**2 + delta**2) * g / (2.0 * kappa))


def chi_eff(omega, wp: WorkingPoint, params: SystemParams):
    """Effective susceptibility [(kappa + i w)^2 + Delta^2] / B(w)."""
    w = _w(omega)
    b = np.asarray(intermediates(w, wp, params).b_of_omega)
    if np.any(b == 0):
        raise SingularSusceptibilityError("B(omega) = 0: the working point is unstable")
    return _out(_cavity_poly(w, wp.delta, params.kappa) / b)


def chi_eff_mechanical(omega, wp: WorkingPoint, params: SystemParams):
    """The same susceptibility as 1/(m[(w_eff)^2 - w^2 + i w gamma_eff])."""
    w = _w(omega)
    den = params.m * (np.asarray(omega_b_eff_sq(w, wp, params)) - w**2 + 1j * w * np.asarray(gamma_b_eff(w, wp, params)))
    if np.any(den == 0):
        raise SingularSusceptibilityError("effective oscillator denominator vanishes")
    return _out(1.0 / den)


def _omega_coth(w, thermal_energy, hbar):
    """omega * coth(hbar omega / 2 k T), even in omega, with the w -> 0
    limit 2 k T / hbar.  At T = 0 it reduces to |omega|."""
    aw = np.abs(w)
    if thermal_energy <= 0:
        return aw
    x = hbar * aw / thermal_energy  # = 2 * (hbar w / 2kT)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = aw * (1.0 + 2.0 / np.expm1(x))
    return np.where(aw == 0, 2.0 * thermal_energy / hbar, val)


def _omega_one_plus_coth(w, thermal_energy, hbar):
    """omega [1 + coth(hbar omega / 2 k T)] = 2 omega / (1 - exp(-hbar omega / kT))."""
    if thermal_energy <= 0:
        return np.where(w > 0, 2.0 * w, 0.0)
    x = hbar * w / thermal_energy
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        val = 2.0 * w / -np.expm1(-x)
    val = np.where(np.isfinite(val), val, 0.0)
    return np.where(w == 0, 2.0 * thermal_energy / hbar, val)


def s_th(omega, params: SystemParams, white: bool = False):
    """Brownian force spectrum, returned as (unsymmetrized, symmetrized).

    ``white=True`` replaces it by its zero-frequency value 2 gamma_b m k_B T
    (both parts), the classical white-noise model used for cross-checks.
    """
    w = _w(omega)
    pref = params.hbar * params.gamma_b * params.m
    kt = params.k_B * params.temperature
    if white:
        flat = np.full_like(w, 2.0 * params.gamma_b * params.m * kt)
        return _out(flat), _out(flat.copy())
    return _out(pref * _omega_one_plus_coth(w, kt, params.hbar)), _out(pref * _omega_coth(w, kt, params.hbar))


def s_ca(omega, wp: WorkingPoint, params: SystemParams):
    """Back-action force spectrum from the driven cavity, returned as
    (unsymmetrized, symmetrized)."""
    w = _w(omega)
    n = params.occupations().n_cav
    kappa, delta = params.kappa, wp.delta
    pref = 2.0 * params.hbar**2 * _g2(wp, params) * kappa / cavity_factor(w, delta, kappa)
    even = (2.0 * n + 1.0) * (kappa**2 + delta**2 + w**2)
    return _out(pref * (even + 2.0 * w * delta)), _out(pref * even)


def s_ca_via_gamma(omega, wp: WorkingPoint, params: SystemParams):
    """Unsymmetrized S_ca written through gamma_ca; requires Delta != 0."""
    if wp.delta == 0:
        raise ZeroDivisionError("the gamma_ca form of S_ca is undefined at Delta = 0")
    w = _w(omega)
    n = params.occupations().n_cav
    k2d2 = params.kappa**2 + wp.delta**2
    bracket = (2.0 * n + 1.0) * (k2d2 + w**2) / (2.0 * wp.delta) + w
    return _out(params.m * params.hbar * bracket * np.asarray(gamma_ca(w, wp, params)))


def s_x(omega, wp: WorkingPoint, params: SystemParams, white_thermal: bool = False):
    """Position fluctuation spectrum."""
    w = _w(omega)
    chi = np.asarray(chi_eff(w, wp, params))
    th = np.asarray(s_th(w, params, white=white_thermal)[0])
    ca = np.asarray(s_ca(w, wp, params)[0])
    return _out((chi.real**2 + chi.imag**2) * (th + ca))


def s_p(omega, wp: WorkingPoint, params: SystemParams, white_thermal: bool = False):
    """Momentum fluctuation spectrum (omega m)^2 S_x."""
    w = _w(omega)
    return _out((w * params.m) ** 2 * np.asarray(s_x(w, wp, params, white_thermal)))


@dataclass(frozen=True)
class SpectrumSample:
    omega: np.ndarray
    s_x: np.ndarray
    s_p: np.ndarray
    s_th: np.ndarray
    s_th_sym: np.ndarray
    s_ca: np.ndarray
    s_ca_sym: np.ndarray
    chi_eff: np.ndarray
    gamma_ca: np.ndarray
    omega_b_eff_sq: np.ndarray
    gamma_b_eff: np.ndarray


def sample(omega, wp: WorkingPoint, params: SystemParams, white_thermal: bool = False) -> SpectrumSample:
    """All frequency-resolved quantities on the grid ``omega``."""
    w = np.atleast_1d(_w(omega))
    th, th_sym = s_th(w, params, white=white_thermal)
    ca, ca_sym = s_ca(w, wp, params)
    chi = np.asarray(chi_eff(w, wp, params))
    sx = np.abs(chi) ** 2 * (th + ca)
    g = np.asarray(gamma_ca(w, wp, params))
    return SpectrumSample(
        omega=w,
        s_x=sx,
        s_p=(w * params.m) ** 2 * sx,
        s_th=np.asarray(th),
        s_th_sym=np.asarray(th_sym),
        s_ca=np.asarray(ca),
        s_ca_sym=np.asarray(ca_sym),
        chi_eff=chi,
        gamma_ca=g,
        omega_b_eff_sq=np.asarray(omega_b_eff_sq(w, wp, params)),
        gamma_b_eff=params.gamma_b + g,
    )


SPECTRUM_COLUMNS = ("omega", "s_x", "s_p", "s_th", "s_ca", "re_chi", "im_chi", "gamma_ca", "omega_b_eff_sq")


def spectrum_rows(spec: SpectrumSample):
    """Rows in the documented CSV column order."""
    for i in range(len(spec.omega)):
        yield (
            float(spec.omega[i]),
            float(spec.s_x[i]),
            float(spec.s_p[i]),
            float(spec.s_th[i]),
            float(spec.s_ca[i]),
            float(spec.chi_eff[i].real),
            float(spec.chi_eff[i].imag),
            float(spec.gamma_ca[i]),
            float(spec.omega_b_eff_sq[i]),
        )
