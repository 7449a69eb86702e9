import math

import numpy as np
import pytest

from qbslant.fixtures import example_7_2
from qbslant.geometry import (
    ChartError,
    ImmersionSpec,
    NotNormalError,
    NotTangentError,
    bc_decompose,
    omega_field,
    phi_omega,
    shape_operator,
    weingarten_residual,
)


@pytest.fixture(scope="module")
def spec72():
    return example_7_2().spec()


def test_gram_matches_hand_computation(spec72):
    ch = spec72.chart([0.3, 1.0, 1.0, 0.0, 0.0])
    assert np.allclose(ch.gram, np.diag([2.0, 3.0, 3.0, 1.0, 1.0]), atol=1e-14)


def test_connection_along_the_polar_direction(spec72):
    # nabla_{dv} du = (v / (v^2 + w^2)) du
    ch = spec72.chart([0.0, 1.0, 1.0, 0.0, 0.0])
    u, v = spec72.index("u"), spec72.index("v")
    expected = np.zeros(5)
    expected[u] = 0.5
    assert np.allclose(ch.christoffel[v, u], expected, atol=1e-14)
    assert np.allclose(ch.christoffel, ch.christoffel.transpose(1, 0, 2), atol=1e-14)


def test_sigma_is_normal_and_gauss_holds(spec72):
    ch = spec72.chart([0.7, 1.3, 0.6, 0.2, -0.4])
    assert np.max(np.abs(ch.sigma @ ch.tangent.basis.T)) < 1e-12
    tang = np.einsum("ijk,kl->ijl", ch.christoffel, ch.frame)
    assert np.max(np.abs(ch.hessian - tang - ch.sigma)) < 1e-12


def test_shape_operator_is_metric_dual(spec72):
    ch = spec72.chart([0.7, 1.3, 0.6, 0.2, -0.4])
    for N in ch.normal.basis:
        A = shape_operator(ch, N)
        assert np.allclose(ch.gram @ A, ch.sff_matrix(N), atol=1e-12)


def test_weingarten_formula_by_finite_differences(spec72):
    ch = spec72.chart([0.7, 1.3, 0.6, 0.2, -0.4])
    for c in np.eye(5)[:3]:
        for d in range(5):
            assert weingarten_residual(spec72, ch, omega_field(spec72, c), d) < 1e-6


def test_phi_omega_and_bc(spec72):
    ch = spec72.chart([0.7, 1.3, 0.6, 0.2, -0.4])
    v = ch.frame[1] + 2 * ch.frame[3]
    phi, om = phi_omega(ch, v)
    assert np.allclose(phi + om, ch.J(v))
    assert abs(float(phi @ om)) < 1e-12
    N = ch.normal.basis[0]
    B, C = bc_decompose(ch, N)
    assert np.allclose(B + C, ch.J(N))
    with pytest.raises(NotTangentError):
        phi_omega(ch, N)
    with pytest.raises(NotNormalError):
        bc_decompose(ch, v)


def test_singular_point_is_rejected(spec72):
    with pytest.raises(ChartError):
        spec72.chart([0.0, 0.0, 0.0, 0.0, 0.0])


def test_undefined_point_is_rejected():
    spec = ImmersionSpec.from_strings(["u", "v"], ["log(u)", "v", "0", "0"])
    with pytest.raises(ChartError):
        spec.chart([-1.0, 0.0])


def test_spec_validation():
    with pytest.raises(ValueError, match="expected 4 components"):
        ImmersionSpec.from_strings(["u"], ["u", "0", "0"], n=2)
    with pytest.raises(ValueError, match="undeclared"):
        ImmersionSpec.from_strings(["u"], ["u", "q"])
    with pytest.raises(ValueError, match="unique"):
        ImmersionSpec.from_strings(["u", "u"], ["u", "0"])


def test_chart_cache_returns_same_object(spec72):
    p = [0.1, 1.0, 2.0, 0.0, 0.0]
    assert spec72.chart(p) is spec72.chart(p)
    assert math.isclose(spec72.chart(p).gram[0, 0], 5.0)
