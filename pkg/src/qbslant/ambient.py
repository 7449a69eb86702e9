"""Flat complex Euclidean space C^n = (R^{2n}, J, <,>).

Coordinates are interleaved, (x1, y1, x2, y2, ..., xn, yn), and the complex
structure sends d/dx_i to d/dy_i and d/dy_i to -d/dx_i.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .linalg import DimensionError


@dataclass(frozen=True)
class AmbientSpace:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("complex dimension must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.n

    def J_matrix(self) -> np.ndarray:
        J = np.zeros((self.dim, self.dim))
        for i in range(self.n):
            J[2 * i + 1, 2 * i] = 1.0
            J[2 * i, 2 * i + 1] = -1.0
        return J

    def apply_J(self, v: np.ndarray) -> np.ndarray:
        """(a, b) -> (-b, a) on every complex pair; works along the last axis."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.dim:
            raise DimensionError(f"expected {self.dim} components, got {v.shape[-1]}")
        out = np.empty_like(v)
        out[..., 0::2] = -v[..., 1::2]
        out[..., 1::2] = v[..., 0::2]
        return out

    def basis_vector(self, k: int, imaginary: bool = False) -> np.ndarray:
        """d/dx_k (or d/dy_k) for 1-based complex index k."""
        e = np.zeros(self.dim)
        e[2 * (k - 1) + int(imaginary)] = 1.0
        return e


def check_hermitian_compatibility(space: AmbientSpace, samples: Sequence[np.ndarray]) -> float:
    """max |<Jv, Jw> - <v, w>| over all ordered pairs of samples."""
    if len(samples) == 0:
        raise ValueError("need at least one sample vector")
    V = np.asarray(samples, dtype=float)
    JV = space.apply_J(V)
    return float(np.max(np.abs(JV @ JV.T - V @ V.T)))


def check_skewness(space: AmbientSpace, samples: Sequence[np.ndarray]) -> float:
    """max |<Jv, w> + <v, Jw>|."""
    V = np.asarray(samples, dtype=float)
    JV = space.apply_J(V)
    G = JV @ V.T
    return float(np.max(np.abs(G + G.T)))


def _richardson(f: Callable[[float], np.ndarray], h: float) -> np.ndarray:
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def check_kaehler_parallel(
    space: AmbientSpace,
    points: Iterable[np.ndarray],
    directions: Iterable[np.ndarray],
    steps: Sequence[float] = (1e-4,),
) -> float:
    """Finite-difference derivative of the J tensor field along each direction.

    J is constant on C^n, so the result is a harness check that should be 0.
    """
    def J_at(p: np.ndarray) -> np.ndarray:
        if p.shape != (space.dim,):
            raise DimensionError("point outside the ambient space")
        return space.J_matrix()

    worst = 0.0
    for p, d in itertools.product(list(points), list(directions)):
        p = np.asarray(p, dtype=float)
        d = np.asarray(d, dtype=float)
        for h in steps:
            dJ = _richardson(lambda t: J_at(p + t * d), h)
            worst = max(worst, float(np.max(np.abs(dJ))))
    return worst
