import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlrcool.params import SystemParams
from tlrcool.stability import (
    DriftMatrix,
    StabilityInconsistencyError,
    Verdict,
    characteristic_polynomial,
    drift_matrix,
    eigen_verdict,
    is_stable,
    routh_hurwitz_verdict,
)

SQ2 = math.sqrt(2)


def test_uncoupled_spectrum():
    p = SystemParams(gamma_b=1e-2, kappa=0.3)
    dm = drift_matrix(p, 0.0, 0.7)
    ev = sorted(dm.eigenvalues(), key=lambda z: (z.real, z.imag))
    wb = math.sqrt(1 - 1e-4 / 4)
    expected = sorted([-0.3 + 0.7j, -0.3 - 0.7j, -5e-3 + 1j * wb, -5e-3 - 1j * wb], key=lambda z: (z.real, z.imag))
    np.testing.assert_allclose(ev, expected, atol=1e-10)
    assert np.all(dm.matrix[:2, 2:] == 0) and np.all(dm.matrix[2:, :2] == 0)
    assert is_stable(dm) == Verdict.STABLE


def test_real_amplitude_entries():
    p = SystemParams()
    dm = drift_matrix(p, 100.0, 1.0)
    g = p.g0 * 100.0
    assert dm.matrix[1, 2] == pytest.approx(SQ2 * g)
    assert dm.matrix[1, 3] == 0
    assert dm.matrix[3, 0] == pytest.approx(SQ2 * g)
    assert dm.matrix[2, 0] == 0


def _reconstruct(a_mean, p, delta):
    """Rebuild the complex fluctuation equations from the matrix, column by
    column, and compare with the operator form."""
    dm = drift_matrix(p, a_mean, delta).matrix
    rng = np.random.default_rng(0)
    x, pm, X, Y = rng.normal(size=4)
    da = (X + 1j * Y) / SQ2
    vec = dm @ np.array([x, pm, X, Y])
    pdot = -p.m * p.omega_b**2 * x - p.gamma_b * pm + p.hbar * p.g0 * (a_mean * da.conjugate() + (a_mean * da.conjugate()).conjugate())
    adot = -(p.kappa + 1j * delta) * da + 1j * p.g0 * a_mean * x
    assert vec[0] == pytest.approx(pm / p.m)
    assert vec[1] == pytest.approx(pdot.real)
    assert (vec[2] + 1j * vec[3]) / SQ2 == pytest.approx(adot)


@pytest.mark.parametrize("a_mean", [100.0, 50 - 80j, 3j])
def test_matrix_transcribes_the_fluctuation_equations(a_mean):
    _reconstruct(a_mean, SystemParams(kappa=0.4), 0.9)


@settings(max_examples=40, deadline=None)
@given(
    phase=st.floats(0, 2 * math.pi),
    amp=st.floats(1, 1e4),
    delta=st.floats(-3, 3),
    kappa=st.floats(0.01, 5),
)
def test_phase_invariance_and_trace(phase, amp, delta, kappa):
    p = SystemParams(kappa=kappa)
    d1 = drift_matrix(p, amp, delta)
    d2 = drift_matrix(p, amp * cmath.exp(1j * phase), delta)
    np.testing.assert_allclose(np.sort_complex(d1.eigenvalues()), np.sort_complex(d2.eigenvalues()), atol=1e-9 * (1 + amp * p.g0))
    assert d1.trace == pytest.approx(-(p.gamma_b + 2 * kappa), abs=1e-14)


def test_characteristic_polynomial_matches_numpy():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.normal(size=(4, 4))
        np.testing.assert_allclose(characteristic_polynomial(a), np.poly(a), atol=1e-10)


def test_routh_simple_polynomials():
    assert routh_hurwitz_verdict(np.poly([-1, -2, -3, -4])) == Verdict.STABLE
    assert routh_hurwitz_verdict(np.poly([-1, -2, -3, 0.5])) == Verdict.UNSTABLE
    assert routh_hurwitz_verdict(np.poly([-1, -2, 1j, -1j]).real) != Verdict.STABLE


def test_reference_point_detuning_sign():
    from tlrcool.sweep import Model

    assert Model(delta=-1.0).working_point().verdict == Verdict.UNSTABLE
    assert Model(delta=1.0).working_point().verdict == Verdict.STABLE


def test_marginal_oscillator():
    p = SystemParams(gamma_b=0.0)
    assert is_stable(drift_matrix(p, 0.0, 1.0)) == Verdict.MARGINAL


def test_disagreement_raises():
    a = np.diag([-1.0, -2.0, -3.0, 1.0])
    bogus = DriftMatrix(matrix=a, char_poly=np.poly([-1, -2, -3, -4]))
    assert eigen_verdict(bogus) == Verdict.UNSTABLE
    with pytest.raises(StabilityInconsistencyError):
        is_stable(bogus)
