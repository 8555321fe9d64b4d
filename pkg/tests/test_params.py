import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import constants

from tlrcool.params import (
    DriveParams,
    HardwareParams,
    InvalidParameterError,
    ModelValidityWarning,
    SystemParams,
    bose_occupation,
    derive_coupling,
    drive_from_power,
    thermal_occupations,
    to_natural_units,
    to_si_units,
)


def test_defaults_are_the_variance_figure_set():
    p = SystemParams()
    assert (p.gamma_b, p.omega_a, p.kappa, p.g0, p.temperature) == (2.5e-5, 2e4, 1.0, 3e-5, 6e3)
    assert p.q_b == pytest.approx(4e4)


@pytest.mark.parametrize("field,value", [("m", 0.0), ("omega_b", -1.0), ("kappa", 0.0), ("gamma_b", -1e-3), ("temperature", -1.0)])
def test_invalid_values_rejected(field, value):
    with pytest.raises(InvalidParameterError):
        SystemParams(**{field: value})


def test_adiabatic_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        with pytest.raises(ModelValidityWarning):
            SystemParams(omega_a=50.0)


def test_bose_occupation_limits():
    assert bose_occupation(1.0, 0.0) == 0.0
    assert bose_occupation(1.0, 1e6) == pytest.approx(1e6 - 0.5, rel=1e-9)
    # deep quantum regime must not underflow to an exception
    assert 0.0 <= bose_occupation(1e4, 1.0) < 1e-300
    np.testing.assert_allclose(bose_occupation(np.array([1.0, 2.0]), 1.0), 1 / np.expm1([1.0, 2.0]))


def test_thermal_occupations_si():
    occ = thermal_occupations(0.01, 8e10, 4e6)
    x = constants.hbar * 4e6 / (constants.k * 0.01)
    assert occ.n_mech == pytest.approx(1 / math.expm1(x), rel=1e-12)
    assert occ.n_cav < 1e-20


@settings(max_examples=50, deadline=None)
@given(
    kappa=st.floats(0.01, 10),
    gamma_b=st.floats(1e-7, 1e-2),
    g0=st.floats(1e-7, 1e-3),
    temp=st.floats(0.0, 1e4),
)
def test_unit_round_trip(kappa, gamma_b, g0, temp):
    nat = SystemParams(kappa=kappa, gamma_b=gamma_b, g0=g0, temperature=temp)
    si = to_si_units(nat, m=1.5e-13, omega_b=4e6)
    back = to_natural_units(si)
    for name in ("kappa", "gamma_b", "g0", "temperature", "omega_a"):
        assert getattr(back, name) == pytest.approx(getattr(nat, name), rel=1e-12, abs=1e-300)
    assert back.reference == (1.5e-13, 4e6)
    assert si.occupations().n_mech == pytest.approx(nat.occupations().n_mech, rel=1e-9, abs=1e-300)


def test_si_coupling_scaling():
    si = to_si_units(SystemParams(), m=1.5e-13, omega_b=4e6)
    length = math.sqrt(constants.hbar / (1.5e-13 * 4e6))
    assert si.g0 == pytest.approx(3e-5 * 4e6 / length)
    assert si.temperature == pytest.approx(6e3 * constants.hbar * 4e6 / constants.k)


def test_to_si_needs_reference():
    with pytest.raises(InvalidParameterError):
        to_si_units(SystemParams())


def test_hardware_coupling_and_shift():
    hw = HardwareParams(cg0=1e-15, d=1e-7, ca=1e-12, la=1e-9, power=1e-12)
    wa = 1 / math.sqrt(1e-21)
    assert hw.omega_a_bare == pytest.approx(wa)
    assert hw.v_rms == pytest.approx(math.sqrt(constants.hbar * wa / 1e-12))
    # C_g0 V_rms^2 / (hbar d) and C_g0 omega_a' / (C_a d) are the same number
    assert derive_coupling(hw) == pytest.approx(hw.cg0 * hw.v_rms**2 / (constants.hbar * hw.d))
    assert hw.omega_a == pytest.approx(wa * (1 + 1e-15 / 1e-12))


def test_drive_from_power():
    eps = drive_from_power(1e-12, 1e6, 1e10)
    assert eps**2 == pytest.approx(2 * 1e6 * 1e-12 / (constants.hbar * 1e10))
    with pytest.raises(InvalidParameterError):
        drive_from_power(-1.0, 1.0, 1.0)


def test_drive_rwa():
    assert DriveParams(epsilon=2.5e3).rwa_ok(2e4)
    assert not DriveParams(epsilon=6e3).rwa_ok(2e4)
    with pytest.raises(InvalidParameterError):
        DriveParams(epsilon=complex("nan"))
