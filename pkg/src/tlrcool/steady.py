"""Classical working point of the driven, coupled resonators.

The mean fields obey

    <a> = epsilon / (kappa + i Delta),
    <x> = hbar g0 (|<a>|^2 + 1/2) / (m omega_b^2),
    Delta = Delta0 - g0 <x>,

which closes into a cubic in Delta when Delta0 is prescribed.  The 1/2
(vacuum) term is kept exactly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .params import DriveParams, InvalidParameterError, ModelValidityWarning, SystemParams
from .stability import Verdict, drift_matrix, is_stable

LINEARIZATION_MIN_AMPLITUDE = 10.0


@dataclass(frozen=True)
class RootInfo:
    delta: float
    verdict: Verdict


@dataclass(frozen=True)
class WorkingPoint:
    delta: float
    delta0: float
    a_mean: complex
    x_mean: float
    mode: str  # "delta" (prescribed) or "delta0" (solved)
    roots: tuple[RootInfo, ...] = field(default=())
    verdict: Verdict = Verdict.STABLE

    g0: float = 0.0

    @property
    def g_eff(self) -> float:
        """|g0 <a>|."""
        return abs(self.g0 * self.a_mean)

    @property
    def photon_number(self) -> float:
        return abs(self.a_mean) ** 2

    @property
    def multistable(self) -> bool:
        return sum(r.verdict == Verdict.STABLE for r in self.roots) > 1

    @property
    def linearization_ok(self) -> bool:
        return abs(self.a_mean) > LINEARIZATION_MIN_AMPLITUDE


def cavity_amplitude(epsilon, kappa, delta):
    """Steady intracavity amplitude epsilon / (kappa + i delta)."""
    return epsilon / (kappa + 1j * delta)


def static_shift_coefficient(params: SystemParams) -> float:
    """hbar g0^2 / (m omega_b^2): detuning shift per unit of |<a>|^2 + 1/2."""
    return params.hbar * params.g0**2 / (params.m * params.omega_b**2)


def displacement(params: SystemParams, a_mean: complex) -> float:
    return params.hbar * params.g0 * (abs(a_mean) ** 2 + 0.5) / (params.m * params.omega_b**2)


def delta0_for(params: SystemParams, epsilon: complex, delta: float) -> float:
    """Bare detuning that produces the effective detuning ``delta``."""
    a = cavity_amplitude(epsilon, params.kappa, delta)
    return delta + params.g0 * displacement(params, a)


def detuning_roots(params: SystemParams, epsilon: complex, delta0: float) -> np.ndarray:
    """All real solutions of Delta = Delta0 - K (|eps|^2/(kappa^2+Delta^2) + 1/2),
    sorted in decreasing order.

    Equivalent cubic: (Delta - c)(kappa^2 + Delta^2) + K |eps|^2 = 0 with
    c = Delta0 - K/2.  There is always at least one real root.
    """
    k = static_shift_coefficient(params)
    c = delta0 - 0.5 * k
    kap2 = params.kappa**2
    p = k * abs(epsilon) ** 2
    if p == 0.0:
        return np.array([c])
    poly = np.array([1.0, -c, kap2, p - c * kap2])

    def h(d):
        return (d - c) * (kap2 + d * d) + p

    def dh(d):
        return (kap2 + d * d) + 2.0 * d * (d - c)

    raw = np.roots(poly)
    scale = max(abs(c), params.kappa, abs(p) ** (1.0 / 3.0), 1e-300)
    candidates = []
    for r in raw:
        if abs(r.imag) > 1e-6 * scale:
            continue
        d = r.real
        for _ in range(50):
            slope = dh(d)
            if slope == 0.0:
                break
            step = h(d) / slope
            d -= step
            if abs(step) <= 1e-15 * max(abs(d), scale):
                break
        candidates.append(d)
    if not candidates:
        # a real cubic has a real root; fall back to the root closest to the axis
        r = raw[np.argmin(np.abs(raw.imag))]
        candidates.append(r.real)
    roots = []
    for d in sorted(candidates, reverse=True):
        if all(abs(d - q) > 1e-9 * scale for q in roots):
            roots.append(d)
    assert roots, "cubic must have a real root"
    return np.array(roots)


def _point(params, epsilon, delta, delta0, mode, roots=()):
    a = cavity_amplitude(epsilon, params.kappa, delta)
    verdict = is_stable(drift_matrix(params, a, delta))
    return WorkingPoint(
        delta=float(delta),
        delta0=float(delta0),
        a_mean=complex(a),
        x_mean=displacement(params, a),
        mode=mode,
        roots=tuple(roots),
        verdict=verdict,
        g0=params.g0,
    )


def solve_working_point(
    params: SystemParams,
    drive: DriveParams,
    delta: float | None = None,
) -> WorkingPoint:
    """Working point for a prescribed effective detuning ``delta`` or, when
    ``delta`` is None, for the bare detuning ``drive.delta0``.

    In the second mode every real root of the cubic is reported with its
    stability verdict; the principal one is the largest, which is the branch
    continuously connected to Delta = Delta0 - K/2 as epsilon -> 0.
    """
    if params.omega_a > 0 and not drive.rwa_ok(params.omega_a):
        warnings.warn("|epsilon| is not small against omega_a", ModelValidityWarning, stacklevel=2)
    eps = drive.epsilon
    if delta is not None:
        d0 = delta0_for(params, eps, delta)
        wp = _point(params, eps, delta, d0, "delta")
        return replace(wp, roots=(RootInfo(wp.delta, wp.verdict),))
    if drive.delta0 is None:
        raise InvalidParameterError("either delta or drive.delta0 must be given")
    roots = detuning_roots(params, eps, drive.delta0)
    infos = []
    for d in roots:
        a = cavity_amplitude(eps, params.kappa, d)
        infos.append(RootInfo(float(d), is_stable(drift_matrix(params, a, d))))
    wp = _point(params, eps, roots[0], drive.delta0, "delta0", infos)
    if wp.multistable:
        warnings.warn(
            f"{sum(r.verdict == Verdict.STABLE for r in infos)} stable working points coexist",
            ModelValidityWarning,
            stacklevel=2,
        )
    return wp


def fixed_point_detuning(params, epsilon, delta0, damping=0.5, tol=1e-13, max_iter=100000):
    """Damped fixed-point iteration for Delta, started at Delta0.

    Independent of the cubic solver; used as a cross-check.
    """
    k = static_shift_coefficient(params)
    d = delta0
    for _ in range(max_iter):
        target = delta0 - k * (abs(epsilon) ** 2 / (params.kappa**2 + d * d) + 0.5)
        new = (1 - damping) * d + damping * target
        if abs(new - d) <= tol * max(1.0, abs(d)):
            return new
        d = new
    return math.nan
