import math

import numpy as np
import pytest

from tlrcool import spectra
from tlrcool.params import SystemParams
from tlrcool.sweep import Model

W = np.linspace(-6, 6, 4001)


@pytest.fixture(params=[(1.0, 1.0), (0.2, 1.0), (0.1, 0.7), (1.0, -0.5)])
def point(request):
    kappa, delta = request.param
    m = Model(params=SystemParams(kappa=kappa), delta=delta)
    return m.params, m.working_point()


def test_two_susceptibility_forms_agree(point):
    p, wp = point
    c1 = spectra.chi_eff(W, wp, p)
    c2 = spectra.chi_eff_mechanical(W, wp, p)
    np.testing.assert_allclose(c1, c2, rtol=1e-10)


def test_two_backaction_forms_agree(point):
    p, wp = point
    np.testing.assert_allclose(spectra.s_ca(W, wp, p)[0], spectra.s_ca_via_gamma(W, wp, p), rtol=1e-10)


def test_susceptibility_modulus_is_even(point):
    p, wp = point
    c = spectra.chi_eff(W, wp, p)
    np.testing.assert_allclose(np.abs(c), np.abs(c[::-1]), rtol=1e-12)


def test_gamma_form_undefined_at_zero_detuning():
    m = Model(delta=0.0)
    with pytest.raises(ZeroDivisionError):
        spectra.s_ca_via_gamma(1.0, m.working_point(), m.params)


def test_uncoupled_susceptibility():
    p = SystemParams(gamma_b=0.01)
    wp = Model(params=p, epsilon=0.0).working_point()
    c = spectra.chi_eff(W, wp, p)
    np.testing.assert_allclose(c, 1 / (1 - W**2 + 0.01j * W), rtol=1e-12)
    assert spectra.gamma_ca(1.0, wp, p) == 0


def test_thermal_spectrum_limits():
    p = SystemParams(temperature=50.0)
    full, sym = spectra.s_th(np.array([0.0, 1e-9, 1.0, -1.0]), p)
    assert full[0] == pytest.approx(2 * p.gamma_b * 50.0)
    assert full[1] == pytest.approx(full[0], rel=1e-8)
    # detailed balance: S(w) / S(-w) = exp(hbar w / kT)
    assert full[2] / full[3] == pytest.approx(math.exp(1 / 50.0))
    assert sym[2] == pytest.approx(0.5 * (full[2] + full[3]))
    cold = SystemParams(temperature=0.0)
    f0, s0 = spectra.s_th(np.array([-1.0, 2.0]), cold)
    np.testing.assert_allclose(f0, [0.0, 2 * 2 * cold.gamma_b])
    np.testing.assert_allclose(s0, [cold.gamma_b, 2 * cold.gamma_b])
    white, _ = spectra.s_th(np.array([0.3, 3.0]), p, white=True)
    np.testing.assert_allclose(white, 2 * p.gamma_b * 50.0)


def test_induced_damping_at_cooling_point():
    m = Model(params=SystemParams(kappa=0.1, temperature=327.3))
    g = spectra.gamma_ca(1.0, m.working_point(), m.params)
    # 4 |G|^2 kappa Delta / ((kappa^2 + Delta^2 - 1)^2 + 4 kappa^2), |G| = g0 eps / |kappa + i|
    G2 = (3e-5 * 2.5e3) ** 2 / (0.01 + 1)
    assert g == pytest.approx(4 * G2 * 0.1 / (1e-4 + 0.04), rel=1e-12)
    assert g == pytest.approx(0.0556, abs=5e-4)


def test_effective_frequency_sign_marks_static_instability():
    # spring softening: 1 - 2|G|^2 Delta / (kappa^2 + Delta^2) < 0
    m = Model(params=SystemParams(kappa=1.0), epsilon=6e4, delta=1.0)
    wp = m.working_point()
    assert spectra.omega_b_eff_sq(0.0, wp, m.params) < 0
    assert wp.verdict.value == "unstable"


def test_sample_columns(point):
    p, wp = point
    s = spectra.sample(np.linspace(-2, 2, 11), wp, p)
    rows = list(spectra.spectrum_rows(s))
    assert len(rows) == 11 and len(rows[0]) == len(spectra.SPECTRUM_COLUMNS)
    np.testing.assert_allclose(s.s_p, s.omega**2 * s.s_x)
    np.testing.assert_allclose(s.s_x, spectra.s_x(s.omega, wp, p))
