import math

import numpy as np
import pytest
from scipy import integrate

from tlrcool import spectra
from tlrcool.cooling import Tolerances, variances_exact
from tlrcool.params import SystemParams
from tlrcool.quadrature import Peak, adaptive, gauss_kronrod, integrate_spectrum, locate_peaks
from tlrcool.sweep import Model


def test_rule_is_exact_for_polynomials():
    for deg in range(0, 22):
        val, _ = gauss_kronrod(lambda x: x**deg, np.array([0.0]), np.array([1.0]))
        assert val[0] == pytest.approx(1 / (deg + 1), rel=1e-13)


def test_adaptive_smooth_integral():
    val, err, _, _, ok = adaptive(np.cos, [0.0, math.pi / 2], 1e-12)
    assert ok and abs(val - 1) < 1e-12 and err <= 1e-12


@pytest.mark.parametrize("width", [1e-1, 1e-3, 1e-5])
def test_narrow_lorentzian(width):
    f = lambda w: width / ((w - 1) ** 2 + width**2)
    r = integrate_spectrum(f, [Peak(1.0, width)], 1e-9, scale=1.0)
    assert r.converged
    assert r.value == pytest.approx(math.pi, rel=1e-8)
    assert abs(r.value - math.pi) <= max(r.abs_error_estimate, 1e-12)


def test_uv_cutoff_flag():
    f = lambda w: 1.0 / (1.0 + np.abs(w))  # log-divergent tail
    r = integrate_spectrum(f, [], 1e-6, scale=1.0, max_cutoff=100.0)
    assert r.cutoff_limited and r.cutoff == 100.0
    assert r.value == pytest.approx(2 * math.log(101.0), rel=1e-6)


def test_rel_tol_range():
    with pytest.raises(ValueError):
        integrate_spectrum(lambda w: w * 0, [], 1e-2)


def test_peaks_found_at_effective_frequency():
    m = Model(params=SystemParams(kappa=0.1, temperature=327.3))
    wp = m.working_point()
    search = locate_peaks(wp, m.params)
    mech = [p for p in search.peaks if p.kind == "mechanical"]
    w = mech[1].center
    assert search.converged
    assert spectra.omega_b_eff_sq(w, wp, m.params) == pytest.approx(w * w, rel=1e-9)
    assert mech[0].center == -w


@pytest.mark.parametrize("kappa,delta", [(1.0, 1.0), (0.2, 1.0), (0.1, 1.0)])
def test_against_reference_quadrature(kappa, delta):
    """Cross-check with QUADPACK over the same finite window."""
    m = Model(params=SystemParams(kappa=kappa), delta=delta)
    wp = m.working_point()
    rx, _ = variances_exact(wp, m.params, Tolerances(rel_tol=1e-9))
    peaks = locate_peaks(wp, m.params).peaks
    pts = sorted({p.center + s * k * p.width for p in peaks for s in (-1, 0, 1) for k in (1, 10)})
    f = lambda w: float(spectra.s_x(w, wp, m.params))
    edges = [-rx.cutoff] + [p for p in pts if abs(p) < rx.cutoff] + [rx.cutoff]
    ref = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-11, limit=500)[0] for a, b in zip(edges[:-1], edges[1:]))
    assert rx.value == pytest.approx(ref / (2 * math.pi), rel=1e-8)


def test_error_estimate_is_honest():
    m = Model(params=SystemParams(kappa=0.2))
    wp = m.working_point()
    coarse, _ = variances_exact(wp, m.params, Tolerances(rel_tol=1e-4))
    fine, _ = variances_exact(wp, m.params, Tolerances(rel_tol=1e-10))
    assert abs(coarse.value - fine.value) <= coarse.abs_error_estimate
