import numpy as np
import pytest

from tlrcool.lyapunov import NoStationaryStateError, compare_with_quadrature, covariance_at, diffusion_matrix, lyapunov_covariance
from tlrcool.params import SystemParams
from tlrcool.stability import drift_matrix
from tlrcool.sweep import Model


def test_uncoupled_equipartition_and_vacuum():
    p = SystemParams(temperature=250.0)
    cov = covariance_at(p, Model(params=p, epsilon=0.0).working_point())
    assert cov.var_x == pytest.approx(250.0, rel=1e-10)
    assert cov.var_p == pytest.approx(250.0, rel=1e-10)
    assert cov.matrix[2, 2] == pytest.approx(0.5 * (2 * p.occupations().n_cav + 1), rel=1e-10)
    assert np.allclose(cov.matrix, cov.matrix.T)


def test_vacuum_cavity_block():
    p = SystemParams(temperature=0.0)
    cov = covariance_at(p, Model(params=p, epsilon=0.0).working_point())
    assert cov.matrix[2, 2] == pytest.approx(0.5) and cov.matrix[3, 3] == pytest.approx(0.5)


def test_residual_and_heisenberg(reference_point, cooling_point):
    for m in (reference_point, cooling_point):
        cov = covariance_at(m.params, m.working_point())
        assert cov.residual < 1e-10 * np.linalg.norm(diffusion_matrix(m.params))
        assert cov.heisenberg_ok()
        assert np.all(np.diag(cov.matrix) > 0)


def test_unstable_has_no_stationary_state():
    m = Model(delta=-1.0)
    wp = m.working_point()
    with pytest.raises(NoStationaryStateError):
        lyapunov_covariance(drift_matrix(m.params, wp.a_mean, wp.delta), diffusion_matrix(m.params))


def test_branches(reference_point):
    res = {c.branch: c for c in compare_with_quadrature(reference_point.params, reference_point.working_point())}
    assert res["white"].passed and res["white"].applicable
    assert res["coth"].passed and res["coth"].applicable
    assert not res["analytic"].applicable


def test_cold_gates_the_coth_branch():
    m = Model(params=SystemParams(temperature=0.0))
    (c,) = compare_with_quadrature(m.params, m.working_point(), branches=("coth",))
    assert not c.applicable and c.passed


def test_analytic_branch():
    m = Model(params=SystemParams(temperature=800.0), epsilon=0.0)
    (c,) = compare_with_quadrature(m.params, m.working_point(), branches=("analytic",))
    assert c.applicable and c.passed
    assert max(c.deviations.values()) < 1e-3
