"""Peak-aware adaptive integration of fluctuation spectra.

Panels are integrated with the 15-point Kronrod rule and its embedded
7-point Gauss rule, evaluated in vectorized batches.  Panels whose error
share is too large are bisected until the summed error meets the target.
The integration window starts at a finite symmetric cutoff and grows
geometrically until the outermost shell no longer matters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import spectra
from .params import SystemParams
from .steady import WorkingPoint

# Kronrod 15-point abscissae/weights with the embedded Gauss 7-point weights.
_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[:-1][::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[:-1][::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1::2] = np.concatenate([_WG[:-1], [_WG[-1]], _WG[:-1][::-1]])

DEFAULT_REL_TOL = 1e-6
DEFAULT_MAX_EVALS = 400_000
PEAK_OFFSETS = (1.0, 3.0, 10.0, 30.0)
CUTOFF_GROWTH = 4.0
CUTOFF_START = 10.0


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    n_evaluations: int
    panels_used: int
    converged: bool
    cutoff: float = math.inf
    cutoff_limited: bool = False


@dataclass(frozen=True)
class Peak:
    center: float
    width: float
    kind: str = "mechanical"


def gauss_kronrod(f, a, b):
    """Vectorized G7-K15 rule on the panels [a_i, b_i].

    Returns (integral, error estimate) arrays; the estimate follows the
    QUADPACK heuristic.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    k = fx @ _KWEIGHTS * half
    g = fx @ _GWEIGHTS * half
    mean = k / np.where(half != 0, 2 * half, 1.0)
    resasc = np.abs(half) * (np.abs(fx - mean[:, None]) @ _KWEIGHTS)
    err = np.abs(k - g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5), err)
    resabs = np.abs(half) * (np.abs(fx) @ _KWEIGHTS)
    floor = 50.0 * np.finfo(float).eps * resabs
    return k, np.maximum(scaled, floor)


def adaptive(f, breakpoints, abs_tol, max_evals=DEFAULT_MAX_EVALS):
    """Integrate over [breakpoints[0], breakpoints[-1]] with mandatory
    subdivision at every breakpoint.

    ``abs_tol`` is a number or a callable mapping the running value to the
    absolute error target.  Returns (value, error, evals, panels, converged).
    """
    target = abs_tol if callable(abs_tol) else (lambda _v: abs_tol)
    pts = np.unique(np.asarray(breakpoints, dtype=float))
    a, b = pts[:-1], pts[1:]
    val, err = gauss_kronrod(f, a, b)
    evals = 15 * len(a)
    while True:
        total_err = float(err.sum())
        goal = target(float(val.sum()))
        if total_err <= goal:
            return float(val.sum()), total_err, evals, len(a), True
        if evals >= max_evals:
            return float(val.sum()), total_err, evals, len(a), False
        # bisect every panel above the equidistributed share, or at least the worst
        share = goal / len(a)
        bad = err > share
        if not np.any(bad):
            bad[np.argmax(err)] = True
        widths = b[bad] - a[bad]
        tiny = widths <= 1e-13 * np.maximum(1.0, np.abs(a[bad]))
        if np.all(tiny):
            return float(val.sum()), total_err, evals, len(a), False
        idx = np.flatnonzero(bad)[~tiny]
        ma = a[idx]
        mb = b[idx]
        mid = 0.5 * (ma + mb)
        na = np.concatenate([ma, mid])
        nb = np.concatenate([mid, mb])
        nv, ne = gauss_kronrod(f, na, nb)
        evals += 15 * len(na)
        keep = np.ones(len(a), dtype=bool)
        keep[idx] = False
        a = np.concatenate([a[keep], na])
        b = np.concatenate([b[keep], nb])
        val = np.concatenate([val[keep], nv])
        err = np.concatenate([err[keep], ne])


def _forced_points(peaks, lo, hi):
    pts = [lo, hi, 0.0]
    for p in peaks:
        pts.append(p.center)
        for k in PEAK_OFFSETS:
            pts.extend((p.center - k * p.width, p.center + k * p.width))
    pts = np.asarray(pts, dtype=float)
    return pts[(pts >= lo) & (pts <= hi)]


def integrate_spectrum(
    f,
    peaks,
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    scale: float = 1.0,
    floor: float = 0.0,
    max_evals: int = DEFAULT_MAX_EVALS,
    max_cutoff: float | None = None,
) -> QuadratureResult:
    """Integrate the vectorized spectrum ``f`` over the whole real line.

    The window [-W, W] starts at W = 10 * ``scale`` and grows by 4x until
    the newest shell contributes less than ``rel_tol`` times
    max(|value|, ``floor``), or until ``max_cutoff`` is reached (which is
    reported through ``cutoff_limited``).
    """
    if not 1e-12 <= rel_tol <= 1e-3:
        raise ValueError("rel_tol must lie in [1e-12, 1e-3]")
    peaks = list(peaks)
    extent = max([scale] + [abs(p.center) + 30 * p.width for p in peaks])
    cutoff = CUTOFF_START * extent
    if max_cutoff is not None:
        cutoff = min(cutoff, max_cutoff)

    pts = _forced_points(peaks, -cutoff, cutoff)
    value, error, evals, panels, ok = adaptive(
        f, pts, lambda v: 0.3 * rel_tol * max(abs(v), floor), max_evals
    )
    limited = False
    tail = 0.0
    while True:
        target = rel_tol * max(abs(value), floor)
        if max_cutoff is not None and cutoff >= max_cutoff:
            limited = True
            break
        new = cutoff * CUTOFF_GROWTH
        if max_cutoff is not None:
            new = min(new, max_cutoff)
        budget = max_evals - evals
        if budget <= 0:
            ok = False
            break
        right = adaptive(f, np.geomspace(cutoff, new, 5), 0.02 * target, budget)
        left = adaptive(f, -np.geomspace(new, cutoff, 5), 0.02 * target, budget)
        shell = right[0] + left[0]
        value += shell
        error += right[1] + left[1]
        evals += right[2] + left[2]
        panels += right[3] + left[3]
        ok = ok and right[4] and left[4]
        cutoff = new
        if abs(shell) < rel_tol * max(abs(value), floor):
            tail = abs(shell) / 3.0
            break
    error += tail
    converged = bool(ok and error <= rel_tol * max(abs(value), floor) * (1 + 1e-12))
    return QuadratureResult(
        value=float(value),
        abs_error_estimate=float(error),
        n_evaluations=int(evals),
        panels_used=int(panels),
        converged=converged,
        cutoff=float(cutoff),
        cutoff_limited=limited,
    )


@dataclass(frozen=True)
class PeakSearch:
    peaks: tuple[Peak, ...]
    converged: bool
    iterations: int


def locate_peaks(wp: WorkingPoint, params: SystemParams, tol: float = 1e-10, max_iter: int = 50) -> PeakSearch:
    """Mechanical resonances at +-w* with w*^2 = omega_b_eff^2(w*), plus the
    broad cavity features at +-sqrt(kappa^2 + Delta^2) of width kappa."""
    wb = params.omega_b
    w = wb
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        sq = spectra.omega_b_eff_sq(w, wp, params)
        if not sq > 0:
            break
        new = math.sqrt(sq)
        if abs(new - w) <= tol * wb:
            w = new
            converged = True
            break
        w = new
    if not converged:
        w = _scan_peak(wp, params)
    width = abs(float(spectra.gamma_b_eff(w, wp, params)))
    if width == 0:
        width = 1e-8 * wb
    cav = math.hypot(params.kappa, wp.delta)
    peaks = (
        Peak(-w, width),
        Peak(w, width),
        Peak(-cav, params.kappa, "cavity"),
        Peak(cav, params.kappa, "cavity"),
    )
    return PeakSearch(peaks=peaks, converged=converged, iterations=it)


def _scan_peak(wp, params):
    """Fallback: maximum of |chi_eff| on a dense positive-frequency grid."""
    top = 4.0 * max(params.omega_b, abs(wp.delta), params.kappa)
    grid = np.linspace(1e-6 * params.omega_b, top, 20001)
    mag = np.abs(spectra.chi_eff(grid, wp, params))
    i = int(np.argmax(mag))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    fine = np.linspace(lo, hi, 2001)
    return float(fine[np.argmax(np.abs(spectra.chi_eff(fine, wp, params)))])
