"""Small dense linear algebra on R^{2n}.

Vectors are 1-d float arrays in the interleaved order (x1, y1, ..., xn, yn).
A :class:`Subspace` stores an orthonormal basis as the rows of a matrix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

DEFAULT_RANK_TOL = 1e-9


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class Subspace:
    basis: np.ndarray  # shape (k, d), orthonormal rows

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(np.zeros((0, ambient_dim)))

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def __iter__(self):
        return iter(self.basis)


def gram_schmidt(
    vectors: Iterable[np.ndarray],
    rank_tol: float = DEFAULT_RANK_TOL,
    ambient_dim: Optional[int] = None,
    scale: Optional[float] = None,
) -> Subspace:
    """Orthonormal basis of the span of ``vectors``.

    Modified Gram-Schmidt with one reorthogonalisation pass.  A vector whose
    residual norm falls below ``rank_tol * scale`` is dropped, where ``scale``
    defaults to the largest input norm.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if not vecs:
        if ambient_dim is None:
            raise ValueError("ambient_dim is required for an empty vector list")
        return Subspace.zero(ambient_dim)
    d = vecs[0].shape[0]
    if any(v.shape != (d,) for v in vecs):
        raise DimensionError("vectors have inconsistent dimensions")
    if scale is None:
        scale = max(float(np.linalg.norm(v)) for v in vecs)
    cutoff = rank_tol * scale
    basis: list[np.ndarray] = []
    for v in vecs:
        w = v.copy()
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        nrm = float(np.linalg.norm(w))
        if nrm > cutoff and nrm > 0.0:
            basis.append(w / nrm)
    if not basis:
        return Subspace.zero(d)
    return Subspace(np.array(basis))


def _check_dim(v: np.ndarray, S: Subspace) -> None:
    if v.shape[-1] != S.ambient_dim:
        raise DimensionError(f"vector of dimension {v.shape[-1]} vs subspace in R^{S.ambient_dim}")


def project(v: np.ndarray, S: Subspace) -> np.ndarray:
    """Orthogonal projection sum <v, b_i> b_i."""
    v = np.asarray(v, dtype=float)
    _check_dim(v, S)
    return (S.basis @ v) @ S.basis


def orthogonal_complement(S: Subspace, within: Optional[Subspace] = None,
                          rank_tol: float = DEFAULT_RANK_TOL) -> Subspace:
    """Complement of ``S`` inside ``within`` (default: the whole space).

    Deterministic: candidate directions are the basis of ``within`` (or the
    standard basis), appended after ``S`` and orthonormalised in order.
    """
    d = S.ambient_dim
    candidates = within.basis if within is not None else np.eye(d)
    extended = gram_schmidt(list(S.basis) + list(candidates), rank_tol, ambient_dim=d, scale=1.0)
    return Subspace(extended.basis[S.dim:])


def subspace_intersection(A: Subspace, B: Subspace, tol: float = 1e-9) -> Subspace:
    """Intersection via principal vectors.

    Singular values of the cross-Gram matrix ``A B^T`` are the cosines of the
    principal angles; the left singular directions with cosine >= 1 - tol
    span the intersection.
    """
    if A.ambient_dim != B.ambient_dim:
        raise DimensionError("subspaces live in different ambient spaces")
    if A.dim == 0 or B.dim == 0:
        return Subspace.zero(A.ambient_dim)
    U, s, _ = np.linalg.svd(A.basis @ B.basis.T)
    keep = s >= 1.0 - tol
    if not keep.any():
        return Subspace.zero(A.ambient_dim)
    vecs = U[:, : len(s)][:, keep].T @ A.basis
    return gram_schmidt(list(vecs), ambient_dim=A.ambient_dim, scale=1.0)


def principal_cosines(A: Subspace, B: Subspace) -> np.ndarray:
    if A.dim == 0 or B.dim == 0:
        return np.zeros(0)
    return np.linalg.svd(A.basis @ B.basis.T, compute_uv=False)


def angle_vector_subspace(v: np.ndarray, S: Subspace) -> float:
    """Angle in [0, pi/2] between ``v`` and ``S``.

    Equals arccos(|proj v| / |v|); evaluated as atan2 of the perpendicular
    and parallel parts, which stays accurate near both ends of the range.
    """
    v = np.asarray(v, dtype=float)
    _check_dim(v, S)
    if not np.any(v):
        raise ValueError("angle undefined for the zero vector")
    p = project(v, S)
    return math.atan2(float(np.linalg.norm(v - p)), float(np.linalg.norm(p)))
