import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tlrcool.params import DriveParams, InvalidParameterError, ModelValidityWarning, SystemParams
from tlrcool.stability import Verdict
from tlrcool.steady import (
    cavity_amplitude,
    delta0_for,
    detuning_roots,
    fixed_point_detuning,
    solve_working_point,
    static_shift_coefficient,
)


def test_zero_drive():
    p = SystemParams()
    wp = solve_working_point(p, DriveParams(epsilon=0.0), delta=1.0)
    assert wp.a_mean == 0
    assert wp.x_mean == pytest.approx(0.5 * p.g0)
    assert wp.delta0 == pytest.approx(1.0 + 0.5 * p.g0**2)
    assert not wp.linearization_ok


def test_amplitude_formula():
    assert cavity_amplitude(2.0, 1.0, 1.0) == pytest.approx(1 - 1j)


def test_delta_mode_matches_delta0_mode():
    p = SystemParams(kappa=0.1)
    d0 = delta0_for(p, 2.5e3, 1.0)
    wp = solve_working_point(p, DriveParams(epsilon=2.5e3, delta0=d0))
    assert wp.delta == pytest.approx(1.0, abs=1e-12)
    assert wp.mode == "delta0"


def test_requires_a_detuning():
    with pytest.raises(InvalidParameterError):
        solve_working_point(SystemParams(), DriveParams())


@settings(max_examples=60, deadline=None)
@given(
    kappa=st.floats(0.05, 5),
    eps=st.floats(0, 2e4),
    delta0=st.floats(-5, 5),
)
def test_roots_solve_the_self_consistency(kappa, eps, delta0):
    p = SystemParams(kappa=kappa)
    k = static_shift_coefficient(p)
    for d in detuning_roots(p, eps, delta0):
        resid = d - (delta0 - k * (eps**2 / (kappa**2 + d * d) + 0.5))
        assert abs(resid) < 1e-9 * max(1.0, abs(d), abs(delta0))


def test_roots_match_fixed_point_oracle():
    p = SystemParams(kappa=1.0)
    for d0 in (-2.0, 0.0, 1.0, 3.0):
        roots = detuning_roots(p, 2.5e3, d0)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(fixed_point_detuning(p, 2.5e3, d0), abs=1e-10)


def test_bistable_region_reports_three_roots():
    # strong drive, narrow cavity: the Lorentzian shift folds over
    p = SystemParams(kappa=0.05, g0=3e-4)
    k = static_shift_coefficient(p)
    eps = 2e3
    roots = detuning_roots(p, eps, 2.0)
    assert len(roots) == 3
    assert list(roots) == sorted(roots, reverse=True)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        wp = solve_working_point(p, DriveParams(epsilon=eps, delta0=2.0))
    assert wp.delta == roots[0]
    assert len(wp.roots) == 3
    assert k > 0


def test_negative_detuning_unstable():
    wp = solve_working_point(SystemParams(), DriveParams(epsilon=2.5e3), delta=-1.0)
    assert wp.verdict == Verdict.UNSTABLE


def test_rwa_warning():
    with pytest.warns(ModelValidityWarning):
        solve_working_point(SystemParams(), DriveParams(epsilon=1e4), delta=1.0)
