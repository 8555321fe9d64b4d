"""Drift matrix of the linearized fluctuations and its stability verdict.

State ordering is (dx, dp, dX, dY) with dX = (da + da^+)/sqrt(2) and
dY = (da - da^+)/(i sqrt(2)).  Two independent verdicts are computed: the
eigenvalues of the drift matrix and a Routh-Hurwitz table built from the
characteristic polynomial, whose coefficients come from the
Faddeev-LeVerrier recursion (traces of matrix powers, no eigensolver).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .params import SystemParams

SQRT2 = math.sqrt(2.0)


class Verdict(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


class StabilityInconsistencyError(RuntimeError):
    """Eigenvalue and Routh-Hurwitz verdicts disagree away from the boundary."""


@dataclass(frozen=True)
class DriftMatrix:
    matrix: np.ndarray
    char_poly: np.ndarray = field(repr=False)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.matrix)


def drift_matrix(params: SystemParams, a_mean: complex, delta: float) -> DriftMatrix:
    m, hbar = params.m, params.hbar
    coupling = params.g0 * complex(a_mean)
    gr, gi = coupling.real, coupling.imag
    kappa = params.kappa
    a = np.array(
        [
            [0.0, 1.0 / m, 0.0, 0.0],
            [-m * params.omega_b**2, -params.gamma_b, SQRT2 * hbar * gr, SQRT2 * hbar * gi],
            [-SQRT2 * gi, 0.0, -kappa, delta],
            [SQRT2 * gr, 0.0, -delta, -kappa],
        ]
    )
    return DriftMatrix(matrix=a, char_poly=characteristic_polynomial(a))


def characteristic_polynomial(a: np.ndarray) -> np.ndarray:
    """Coefficients [1, c1, ..., cn] of det(sI - A), highest power first."""
    n = a.shape[0]
    coeffs = [1.0]
    mk = np.zeros_like(a)
    c = 1.0
    eye = np.eye(n)
    for k in range(1, n + 1):
        mk = a @ mk + c * eye
        c = -np.trace(a @ mk) / k
        coeffs.append(c)
    return np.array(coeffs)


def routh_first_column(poly, rel_eps: float = 1e-12) -> tuple[np.ndarray, bool]:
    """First column of the Routh array and whether a (near-)zero pivot was met."""
    poly = np.asarray(poly, dtype=float)
    n = len(poly) - 1
    width = n // 2 + 1
    rows = [np.zeros(width), np.zeros(width)]
    rows[0][: len(poly[0::2])] = poly[0::2]
    rows[1][: len(poly[1::2])] = poly[1::2]
    scale = np.max(np.abs(poly))
    degenerate = False
    for _ in range(n - 1):
        prev, cur = rows[-2], rows[-1]
        if abs(cur[0]) <= rel_eps * scale:
            degenerate = True
            cur = cur.copy()
            cur[0] = rel_eps * scale
            rows[-1] = cur
        new = np.zeros(width)
        for j in range(width - 1):
            new[j] = (cur[0] * prev[j + 1] - prev[0] * cur[j + 1]) / cur[0]
        rows.append(new)
    column = np.array([r[0] for r in rows])
    if abs(column[-1]) <= rel_eps * scale:
        degenerate = True
    return column, degenerate


def routh_hurwitz_verdict(poly, rel_eps: float = 1e-12) -> Verdict:
    poly = np.asarray(poly, dtype=float)
    if poly[0] < 0:
        poly = -poly
    column, degenerate = routh_first_column(poly, rel_eps)
    if np.any(column < 0):
        return Verdict.UNSTABLE
    if degenerate:
        return Verdict.MARGINAL
    return Verdict.STABLE


def eigen_verdict(dm: DriftMatrix, tol_margin: float = 1e-12) -> Verdict:
    growth = float(np.max(dm.eigenvalues().real))
    if growth < -tol_margin:
        return Verdict.STABLE
    if growth > tol_margin:
        return Verdict.UNSTABLE
    return Verdict.MARGINAL


def is_stable(dm: DriftMatrix, tol_margin: float = 1e-12) -> Verdict:
    """Stability verdict, cross-checked between eigenvalues and Routh-Hurwitz.

    A disagreement is tolerated only when the leading eigenvalue sits within
    a relative 1e-9 of the imaginary axis, where the result is ``marginal``.
    """
    by_eig = eigen_verdict(dm, tol_margin)
    by_rh = routh_hurwitz_verdict(dm.char_poly)
    if by_eig == by_rh:
        return by_eig
    growth = float(np.max(dm.eigenvalues().real))
    if abs(growth) <= 1e-9 * max(1.0, np.linalg.norm(dm.matrix)):
        return Verdict.MARGINAL
    raise StabilityInconsistencyError(
        f"eigenvalues say {by_eig.value}, Routh-Hurwitz says {by_rh.value} (max Re = {growth:.3e})"
    )
