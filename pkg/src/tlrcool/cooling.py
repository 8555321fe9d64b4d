"""Final phonon number, effective temperature and cooling figures of merit.

:func:`evaluate_point` is the full pipeline: working point, stability,
quadrature of the position and momentum spectra, the weak-coupling closed
forms and the regime flags, packed into a :class:`CoolingReport`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature, spectra
from .params import SystemParams
from .stability import Verdict
from .steady import WorkingPoint

# factors standing in for "much greater" / "much less"
MUCH_GREATER = 10.0
MUCH_LESS = 0.1


class InconsistentVariancesError(ArithmeticError):
    """Variances imply a phonon number below zero beyond the tolerance."""


class CoolingDomainError(ValueError):
    """Quantity requested outside the cooling (Delta > 0) domain."""


class DegenerateDampingError(ZeroDivisionError):
    """The effective mechanical damping vanishes at omega_b."""


@dataclass(frozen=True)
class Tolerances:
    rel_tol: float = quadrature.DEFAULT_REL_TOL
    max_evals: int = quadrature.DEFAULT_MAX_EVALS
    # momentum spectrum of an ohmic bath decays only as 1/omega; integrate up
    # to this multiple of max(omega_b, |Delta|, kappa)
    uv_cutoff: float = 1.0e3
    stability_margin: float = 1e-12
    much_greater: float = MUCH_GREATER
    much_less: float = MUCH_LESS
    white_thermal: bool = False


@dataclass(frozen=True)
class Flags:
    stable: bool
    weak_coupling: bool
    high_quality_cavity: bool
    condition_20: bool
    condition_22: bool
    rwa_ok: bool
    linearization_ok: bool


@dataclass(frozen=True)
class CoolingReport:
    delta: float
    delta0: float
    kappa: float
    temperature: float
    gamma_b: float
    epsilon: float
    verdict: str
    var_x: float
    var_p: float
    var_x_error: float
    var_p_error: float
    var_x_approx: float
    var_p_approx: float
    n_bf_exact: float
    n_bf_approx: float
    t_eff: float
    n_b: float
    n_cav: float
    n_ca: float
    gamma_ca_at_wb: float
    gamma_b_eff_at_wb: float
    equipartition_ratio: float
    n_evaluations: int
    converged: bool
    flags: Flags
    n_bf_valid: bool
    t_eff_valid: bool
    multistable: bool = False
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["notes"] = list(self.notes)
        return out


def phonon_number(var_x, var_p, m=1.0, omega_b=1.0, hbar=1.0, tolerance=0.0) -> float:
    """Mean phonon number from position and momentum variances."""
    n = var_p / (2.0 * hbar * m * omega_b) + m * omega_b * var_x / (2.0 * hbar) - 0.5
    if n < -10.0 * tolerance and n < -1e-12:
        raise InconsistentVariancesError(f"variances give n = {n:.3e} < 0")
    return n


def effective_temperature(n_bf, omega_b=1.0, hbar=1.0, k_B=1.0) -> float:
    """Temperature of the thermal state with occupation ``n_bf``."""
    if n_bf < 0:
        raise ValueError("phonon number must be non-negative")
    if n_bf == 0:
        return 0.0
    return hbar * omega_b / (k_B * math.log1p(1.0 / n_bf))


def n_ca(delta, kappa, omega_b=1.0, n_cav=0.0) -> float:
    """Phonon number the cavity back-action alone would impose."""
    if not delta > 0:
        raise CoolingDomainError("n_ca is defined for positive detuning only")
    return (2.0 * n_cav + 1.0) * (kappa**2 + delta**2 + omega_b**2) / (4.0 * omega_b * delta) - 0.5


def phonon_weighted(gamma_b, n_b, gamma_ca_wb, n_ca_value) -> float:
    """Damping-weighted mean of the bath and back-action occupations."""
    total = gamma_b + gamma_ca_wb
    if not total > 0:
        raise DegenerateDampingError("gamma_b + gamma_ca must be positive")
    return (gamma_b * n_b + gamma_ca_wb * n_ca_value) / total


def variances_approx(wp: WorkingPoint, params: SystemParams) -> tuple[float, float]:
    """Weak-coupling closed forms for the variances.

    Only the symmetrized spectra at omega_b enter, divided by
    2 m^2 omega_b^2 |gamma_eff(omega_b)|.
    """
    wb, m = params.omega_b, params.m
    g_eff = spectra.gamma_b_eff(wb, wp, params)
    if g_eff == 0:
        raise DegenerateDampingError("gamma_b_eff(omega_b) = 0")
    th = spectra.s_th(wb, params)[1]
    ca = spectra.s_ca(wb, wp, params)[1]
    vx = (th + ca) / (2.0 * m**2 * wb**2 * abs(g_eff))
    return vx, (m * wb) ** 2 * vx


def cooling_limits(params: SystemParams, wp: WorkingPoint | None = None) -> dict:
    """Resolved-sideband and Doppler floors, the classical ratio T_eff/T and
    the n_ca optimum over detuning."""
    wb, kappa = params.omega_b, params.kappa
    n = params.occupations().n_cav
    best = math.hypot(wb, kappa)
    out = {
        "resolved_sideband": n + kappa**2 / (4.0 * wb**2),
        "doppler": kappa / (2.0 * wb),
        # n_ca / n_b -> (k T / hbar omega_a) / (k T / hbar omega_b)
        "classical": wb / params.omega_a if params.omega_a > 0 else math.inf,
        "optimal_delta": best,
        "n_ca_optimum": ((2.0 * n + 1.0) * best - wb) / (2.0 * wb),
    }
    if wp is not None and wp.delta > 0:
        out["n_ca"] = n_ca(wp.delta, kappa, wb, n)
    return out


def classify_regime(wp: WorkingPoint, params: SystemParams, gamma_ca_wb: float, drive_epsilon=None, tol=None) -> Flags:
    tol = tol or Tolerances()
    wb, kappa = params.omega_b, params.kappa
    occ = params.occupations()
    g_eff = params.gamma_b + gamma_ca_wb
    weak = abs(g_eff) < min(kappa, wb)
    if wp.delta > 0:
        nca = n_ca(wp.delta, kappa, wb, occ.n_cav)
        cond22 = params.gamma_b * occ.n_mech < tol.much_less * gamma_ca_wb * nca
    else:
        cond22 = False
    eps = abs(drive_epsilon) if drive_epsilon is not None else 0.0
    return Flags(
        stable=wp.verdict == Verdict.STABLE,
        weak_coupling=bool(weak),
        high_quality_cavity=bool(kappa**2 < tol.much_less**2 * wb**2),
        condition_20=bool(gamma_ca_wb > tol.much_greater * params.gamma_b and weak),
        condition_22=bool(cond22),
        rwa_ok=bool(eps < 0.25 * params.omega_a),
        linearization_ok=wp.linearization_ok,
    )


def spectrum_scale(wp: WorkingPoint, params: SystemParams) -> float:
    return max(params.omega_b, abs(wp.delta), params.kappa)


def variances_exact(wp: WorkingPoint, params: SystemParams, tol: Tolerances | None = None):
    """Quadrature of S_x and S_p; returns the two QuadratureResults, already
    divided by 2 pi."""
    tol = tol or Tolerances()
    peaks = quadrature.locate_peaks(wp, params).peaks
    scale = spectrum_scale(wp, params)
    zp_x = params.hbar / (2.0 * params.m * params.omega_b)
    zp_p = params.hbar * params.m * params.omega_b / 2.0
    two_pi = 2.0 * math.pi
    white = tol.white_thermal
    rx = quadrature.integrate_spectrum(
        lambda w: spectra.s_x(w, wp, params, white),
        peaks,
        tol.rel_tol,
        scale=scale,
        floor=two_pi * zp_x,
        max_evals=tol.max_evals,
        max_cutoff=tol.uv_cutoff * scale,
    )
    rp = quadrature.integrate_spectrum(
        lambda w: spectra.s_p(w, wp, params, white),
        peaks,
        tol.rel_tol,
        scale=scale,
        floor=two_pi * zp_p,
        max_evals=tol.max_evals,
        max_cutoff=tol.uv_cutoff * scale,
    )
    return _scaled(rx, 1.0 / two_pi), _scaled(rp, 1.0 / two_pi)


def _scaled(r: quadrature.QuadratureResult, factor: float) -> quadrature.QuadratureResult:
    return dataclasses.replace(r, value=r.value * factor, abs_error_estimate=r.abs_error_estimate * factor)


def evaluate_point(
    params: SystemParams,
    wp: WorkingPoint,
    tol: Tolerances | None = None,
    epsilon: complex | None = None,
    exact: bool = True,
) -> CoolingReport:
    """Full cooling report at one working point.

    Unstable points are reported with NaN phonon numbers and
    ``n_bf_valid = False``.  ``exact=False`` skips the quadrature.
    """
    tol = tol or Tolerances()
    wb, m, hbar = params.omega_b, params.m, params.hbar
    occ = params.occupations()
    gca = float(spectra.gamma_ca(wb, wp, params))
    geff = params.gamma_b + gca
    flags = classify_regime(wp, params, gca, epsilon, tol)
    notes = []
    stable = wp.verdict == Verdict.STABLE

    try:
        nca = n_ca(wp.delta, params.kappa, wb, occ.n_cav)
    except CoolingDomainError:
        nca = math.nan
        notes.append("n_ca undefined for Delta <= 0")

    try:
        vxa, vpa = variances_approx(wp, params)
    except DegenerateDampingError:
        vxa = vpa = math.nan
        notes.append("gamma_b_eff(omega_b) = 0")
    n_approx = phonon_number(vxa, vpa, m, wb, hbar) if math.isfinite(vxa) else math.nan

    vx = vp = ex = ep = math.nan
    n_exact = math.nan
    evals = 0
    converged = False
    if stable and exact:
        rx, rp = variances_exact(wp, params, tol)
        vx, vp, ex, ep = rx.value, rp.value, rx.abs_error_estimate, rp.abs_error_estimate
        evals = rx.n_evaluations + rp.n_evaluations
        converged = rx.converged and rp.converged
        err_n = ep / (2.0 * hbar * m * wb) + m * wb * ex / (2.0 * hbar)
        n_exact = phonon_number(vx, vp, m, wb, hbar, tolerance=err_n)
        if not converged:
            notes.append("quadrature did not converge")
    elif not stable:
        notes.append(f"working point is {wp.verdict.value}: phonon numbers invalid")

    n_main = n_exact if math.isfinite(n_exact) else n_approx
    t_eff = effective_temperature(max(n_main, 0.0), wb, hbar, params.k_B) if math.isfinite(n_main) else math.nan
    if not flags.weak_coupling:
        notes.append("outside weak coupling: T_eff is not a thermal temperature")
    ratio = vp / ((m * wb) ** 2 * vx) if math.isfinite(vx) and vx > 0 else math.nan

    return CoolingReport(
        delta=wp.delta,
        delta0=wp.delta0,
        kappa=params.kappa,
        temperature=params.temperature,
        gamma_b=params.gamma_b,
        epsilon=float(abs(epsilon)) if epsilon is not None else math.nan,
        verdict=wp.verdict.value,
        var_x=vx,
        var_p=vp,
        var_x_error=ex,
        var_p_error=ep,
        var_x_approx=vxa if stable else math.nan,
        var_p_approx=vpa if stable else math.nan,
        n_bf_exact=n_exact,
        n_bf_approx=n_approx if stable else math.nan,
        t_eff=t_eff if stable else math.nan,
        n_b=occ.n_mech,
        n_cav=occ.n_cav,
        n_ca=nca,
        gamma_ca_at_wb=gca,
        gamma_b_eff_at_wb=geff,
        equipartition_ratio=ratio,
        n_evaluations=evals,
        converged=converged,
        flags=flags,
        n_bf_valid=stable,
        t_eff_valid=stable and flags.weak_coupling,
        multistable=wp.multistable,
        notes=tuple(notes),
    )


REPORT_COLUMNS = (
    "delta",
    "delta0",
    "kappa",
    "temperature",
    "gamma_b",
    "epsilon",
    "verdict",
    "var_x",
    "var_p",
    "var_x_error",
    "var_p_error",
    "var_x_approx",
    "var_p_approx",
    "n_bf_exact",
    "n_bf_approx",
    "t_eff",
    "n_b",
    "n_cav",
    "n_ca",
    "gamma_ca_at_wb",
    "gamma_b_eff_at_wb",
    "equipartition_ratio",
    "n_evaluations",
    "converged",
    "n_bf_valid",
    "t_eff_valid",
    "multistable",
    "stable",
    "weak_coupling",
    "high_quality_cavity",
    "condition_20",
    "condition_22",
    "rwa_ok",
    "linearization_ok",
)


def report_row(report: CoolingReport) -> dict:
    """Flat mapping in :data:`REPORT_COLUMNS` order."""
    flat = dataclasses.asdict(report)
    flat.update(flat.pop("flags"))
    flat.pop("notes")
    return {k: flat[k] for k in REPORT_COLUMNS}


def equipartition_ok(report: CoolingReport, band: float = 0.1) -> bool:
    return bool(np.isfinite(report.equipartition_ratio) and abs(report.equipartition_ratio - 1) < band)
