import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from hypothesis.extra.numpy import arrays

from qbslant.linalg import (
    DimensionError,
    Subspace,
    angle_vector_subspace,
    gram_schmidt,
    orthogonal_complement,
    principal_cosines,
    project,
    subspace_intersection,
)

vec6 = arrays(np.float64, 6, elements=st.floats(-10, 10))


def test_gram_schmidt_drops_dependent_vectors():
    S = gram_schmidt([np.array([1.0, 0, 0]), np.array([2.0, 0, 0]), np.array([1.0, 1.0, 0])])
    assert S.dim == 2
    assert np.allclose(S.basis @ S.basis.T, np.eye(2))


def test_gram_schmidt_empty_needs_dimension():
    with pytest.raises(ValueError):
        gram_schmidt([])
    assert gram_schmidt([], ambient_dim=4).dim == 0


def test_inconsistent_dimensions():
    with pytest.raises(DimensionError):
        gram_schmidt([np.ones(3), np.ones(4)])
    with pytest.raises(DimensionError):
        project(np.ones(4), gram_schmidt([np.ones(3)]))


@given(st.lists(vec6, min_size=1, max_size=5))
def test_gram_schmidt_is_orthonormal_and_spans(vs):
    S = gram_schmidt(vs)
    if S.dim:
        assert np.allclose(S.basis @ S.basis.T, np.eye(S.dim), atol=1e-10)
    scale = max(float(np.linalg.norm(v)) for v in vs)
    for v in vs:
        assert np.linalg.norm(v - project(v, S)) <= 1e-7 * max(1.0, scale)


def test_complement_and_intersection():
    A = gram_schmidt(list(np.eye(4)[:3]))
    B = gram_schmidt([np.array([0, 0, 1.0, 0]), np.array([0, 0, 0, 1.0]), np.array([1.0, 1.0, 0, 0])])
    C = subspace_intersection(A, B)
    assert C.dim == 2
    comp = orthogonal_complement(A)
    assert comp.dim == 1 and abs(comp.basis[0][3]) == pytest.approx(1.0)
    assert subspace_intersection(A, Subspace.zero(4)).dim == 0


def test_principal_cosines():
    A = gram_schmidt([np.array([1.0, 0, 0])])
    B = gram_schmidt([np.array([1.0, 1.0, 0])])
    assert principal_cosines(A, B) == pytest.approx([1 / math.sqrt(2)])


@given(vec6, st.floats(min_value=1e-3, max_value=1e3))
def test_angle_is_scale_invariant(v, c):
    assume(np.linalg.norm(v) > 1e-3)
    S = gram_schmidt([np.eye(6)[0], np.eye(6)[3]])
    assert angle_vector_subspace(c * v, S) == pytest.approx(angle_vector_subspace(v, S), abs=1e-12)
    assert 0.0 <= angle_vector_subspace(v, S) <= math.pi / 2


def test_angle_of_zero_vector():
    with pytest.raises(ValueError):
        angle_vector_subspace(np.zeros(3), gram_schmidt([np.ones(3)]))
