import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from qbslant.ambient import (
    AmbientSpace,
    check_hermitian_compatibility,
    check_kaehler_parallel,
    check_skewness,
)
from qbslant.linalg import DimensionError


def test_J_on_basis():
    C = AmbientSpace(3)
    assert np.array_equal(C.apply_J(C.basis_vector(2)), C.basis_vector(2, imaginary=True))
    assert np.array_equal(C.apply_J(C.basis_vector(2, imaginary=True)), -C.basis_vector(2))
    J = C.J_matrix()
    assert np.array_equal(J @ J, -np.eye(6))


@given(st.integers(1, 6).flatmap(lambda n: st.tuples(st.just(n), arrays(np.float64, 2 * n, elements=st.floats(-1e3, 1e3)))))
def test_matrix_and_apply_agree(args):
    n, v = args
    C = AmbientSpace(n)
    assert np.array_equal(C.J_matrix() @ v, C.apply_J(v))
    assert np.array_equal(C.apply_J(C.apply_J(v)), -v)


def test_residuals_vanish():
    C = AmbientSpace(4)
    rng = np.random.default_rng(1)
    samples = [rng.standard_normal(8) for _ in range(10)]
    assert check_hermitian_compatibility(C, samples) < 1e-12
    assert check_skewness(C, samples) < 1e-12
    assert check_kaehler_parallel(C, samples[:2], list(np.eye(8))) == 0.0


def test_bad_inputs():
    with pytest.raises(ValueError):
        AmbientSpace(0)
    with pytest.raises(DimensionError):
        AmbientSpace(2).apply_J(np.ones(3))
    with pytest.raises(ValueError):
        check_hermitian_compatibility(AmbientSpace(1), [])
