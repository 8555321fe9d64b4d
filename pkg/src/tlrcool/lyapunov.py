"""Stationary covariance of the linearized dynamics from a Lyapunov equation.

With white noise on every input the symmetrized covariance V of
(dx, dp, dX, dY) obeys A V + V A^T + D = 0.  The mechanical force is
replaced by its zero-frequency value 2 gamma_b m k_B T, so this is an
independent check on the spectral quadrature run in its white-thermal
mode, and a close check on the full colored-noise result when
k_B T >> hbar omega_b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_continuous_lyapunov

from .cooling import Tolerances, phonon_number, variances_exact
from .params import SystemParams
from .stability import DriftMatrix, Verdict, drift_matrix, is_stable
from .steady import WorkingPoint

RESIDUAL_TOL = 1e-10
CLASSICAL_THRESHOLD = 100.0
BRANCH_TOL = {"white": 1e-3, "coth": 1e-2, "analytic": 1e-3}


class NoStationaryStateError(ArithmeticError):
    """The drift matrix is not Hurwitz, so no stationary covariance exists."""


def diffusion_matrix(params: SystemParams) -> np.ndarray:
    """Symmetrized white-noise diffusion matrix in the (dx, dp, dX, dY) basis."""
    n = params.occupations().n_cav
    d = np.zeros((4, 4))
    d[1, 1] = 2.0 * params.gamma_b * params.m * params.k_B * params.temperature
    d[2, 2] = d[3, 3] = params.kappa * (2.0 * n + 1.0)
    return d


@dataclass(frozen=True)
class CovarianceMatrix:
    matrix: np.ndarray
    residual: float
    hbar: float = 1.0

    @property
    def var_x(self) -> float:
        return float(self.matrix[0, 0])

    @property
    def var_p(self) -> float:
        return float(self.matrix[1, 1])

    def uncertainty_products(self) -> tuple[float, float]:
        """Determinants of the mechanical and cavity 2x2 blocks."""
        v = self.matrix
        return float(np.linalg.det(v[:2, :2])), float(np.linalg.det(v[2:, 2:]))

    def heisenberg_ok(self, rel_tol: float = 1e-9) -> bool:
        mech, cav = self.uncertainty_products()
        return mech >= (self.hbar / 2) ** 2 * (1 - rel_tol) and cav >= 0.25 * (1 - rel_tol)

    def phonon_number(self, params: SystemParams) -> float:
        return phonon_number(self.var_x, self.var_p, params.m, params.omega_b, params.hbar)


def lyapunov_covariance(dm: DriftMatrix, diffusion: np.ndarray, hbar: float = 1.0) -> CovarianceMatrix:
    """Solve A V + V A^T + D = 0 directly (Bartels-Stewart)."""
    if is_stable(dm) != Verdict.STABLE:
        raise NoStationaryStateError("drift matrix has eigenvalues with Re >= 0")
    a = np.asarray(dm.matrix, dtype=float)
    d = np.asarray(diffusion, dtype=float)
    v = solve_continuous_lyapunov(a, -d)
    v = 0.5 * (v + v.T)
    residual = float(np.linalg.norm(a @ v + v @ a.T + d))
    scale = max(float(np.linalg.norm(d)), np.finfo(float).tiny)
    if residual > RESIDUAL_TOL * scale:
        raise ArithmeticError(f"Lyapunov residual {residual:.3e} exceeds {RESIDUAL_TOL:g} |D|")
    return CovarianceMatrix(matrix=v, residual=residual, hbar=hbar)


def covariance_at(params: SystemParams, wp: WorkingPoint) -> CovarianceMatrix:
    dm = drift_matrix(params, wp.a_mean, wp.delta)
    return lyapunov_covariance(dm, diffusion_matrix(params), params.hbar)


@dataclass(frozen=True)
class Comparison:
    branch: str
    applicable: bool
    passed: bool
    rel_tol: float
    deviations: dict = field(default_factory=dict)
    reference: dict = field(default_factory=dict)
    reason: str = ""


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


def compare_with_quadrature(
    params: SystemParams,
    wp: WorkingPoint,
    rel_tol: float | None = None,
    branches=("white", "coth", "analytic"),
    tol: Tolerances | None = None,
) -> list[Comparison]:
    """Relative deviation of the oracle from the quadrature, per branch.

    ``white``: oracle vs quadrature with the same white thermal force.
    ``coth``: oracle vs the full colored-noise quadrature; applicable only
    when k_B T / hbar omega_b > 100.
    ``analytic``: at zero coupling, both routes vs (n_b + 1/2) hbar / (m omega_b).
    Inapplicable branches are returned with ``applicable=False`` and count
    as passed.
    """
    tol = tol or Tolerances()
    if tol.rel_tol > 1e-7:
        tol = Tolerances(**{**tol.__dict__, "rel_tol": 1e-7})
    cov = covariance_at(params, wp)
    out = []
    for branch in branches:
        limit = BRANCH_TOL[branch] if rel_tol is None else rel_tol
        if branch == "white":
            rx, rp = variances_exact(wp, params, Tolerances(**{**tol.__dict__, "white_thermal": True}))
            dev = {"var_x": _rel(cov.var_x, rx.value), "var_p": _rel(cov.var_p, rp.value)}
            ref = {"var_x": rx.value, "var_p": rp.value}
        elif branch == "coth":
            ratio = params.k_B * params.temperature / (params.hbar * params.omega_b)
            if not ratio > CLASSICAL_THRESHOLD:
                out.append(Comparison(branch, False, True, limit, reason=f"k_B T / hbar omega_b = {ratio:.3g} <= {CLASSICAL_THRESHOLD:g}"))
                continue
            rx, rp = variances_exact(wp, params, Tolerances(**{**tol.__dict__, "white_thermal": False}))
            dev = {"var_x": _rel(cov.var_x, rx.value), "var_p": _rel(cov.var_p, rp.value)}
            ref = {"var_x": rx.value, "var_p": rp.value}
        elif branch == "analytic":
            if abs(params.g0 * wp.a_mean) != 0:
                out.append(Comparison(branch, False, True, limit, reason="coupling is nonzero"))
                continue
            closed = (params.occupations().n_mech + 0.5) * params.hbar / (params.m * params.omega_b)
            rx, _ = variances_exact(wp, params, tol)
            dev = {"oracle": _rel(cov.var_x, closed), "quadrature": _rel(rx.value, closed)}
            ref = {"var_x": closed}
        else:
            raise ValueError(f"unknown branch {branch!r}")
        passed = all(math.isfinite(v) and v < limit for v in dev.values())
        out.append(Comparison(branch, True, passed, limit, dev, ref))
    return out
