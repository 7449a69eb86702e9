"""First- and second-order geometry of a parametrised submanifold of C^n.

Coordinate tangent vectors and second partials of the immersion come from
one pass of second-order jets; only derivatives of constructed fields
(frames, phi/omega images) go through finite differences.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import expr as E
from .ambient import AmbientSpace
from .jet import Jet2
from .linalg import DEFAULT_RANK_TOL, Subspace, gram_schmidt, orthogonal_complement, project

# smallest / largest Gram eigenvalue below this rejects the chart
REGULARITY_TOL = 1e-8
FD_STEP = 1e-4
# how far off T (or N) an input vector may be, relative to its norm
MEMBERSHIP_TOL = 1e-8


class ChartError(ValueError):
    """The immersion is not regular (or not defined) at the requested point."""


class NotTangentError(ValueError):
    pass


class NotNormalError(ValueError):
    pass


class ImmersionSpec:
    """Parameter names plus one expression per real ambient coordinate."""

    def __init__(self, params: Sequence[str], components: Sequence[E.Ast], ambient: AmbientSpace):
        self.params = tuple(params)
        self.components = tuple(components)
        self.ambient = ambient
        if len(set(self.params)) != len(self.params):
            raise ValueError("parameter names must be unique")
        if len(self.components) != ambient.dim:
            raise ValueError(f"expected {ambient.dim} components, got {len(self.components)}")
        for k, c in enumerate(self.components):
            extra = [v for v in E.free_variables(c) if v not in self.params]
            if extra:
                raise ValueError(f"component {k} uses undeclared names {extra}")
        self._cache: dict = {}
        self._lock = threading.Lock()

    @classmethod
    def from_strings(cls, params: Sequence[str], exprs: Sequence[str], n: Optional[int] = None):
        if n is None:
            if len(exprs) % 2:
                raise ValueError("need an even number of components")
            n = len(exprs) // 2
        return cls(params, [E.parse(s) for s in exprs], AmbientSpace(n))

    @property
    def m(self) -> int:
        return len(self.params)

    def index(self, name: str) -> int:
        return self.params.index(name)

    def values(self, point: Sequence[float]) -> np.ndarray:
        env = dict(zip(self.params, map(float, point)))
        return np.array([float(E.evaluate(c, env)) for c in self.components])

    def jets(self, point: Sequence[float]):
        """Position, Jacobian (m, 2n) and Hessian (m, m, 2n) at ``point``."""
        point = [float(p) for p in point]
        m = self.m
        if len(point) != m:
            raise ValueError(f"expected {m} parameter values, got {len(point)}")
        env = {name: Jet2.seed(point, i) for i, name in enumerate(self.params)}
        d = self.ambient.dim
        pos = np.empty(d)
        jac = np.zeros((m, d))
        hess = np.zeros((m, m, d))
        for k, c in enumerate(self.components):
            val = E.evaluate(c, env)
            if isinstance(val, Jet2):
                pos[k] = val.value
                jac[:, k] = val.grad
                hess[:, :, k] = val.hess
            else:
                pos[k] = float(val)
        return pos, jac, hess

    def chart(self, point: Sequence[float], rank_tol: float = DEFAULT_RANK_TOL) -> "PointChart":
        """Cached :func:`evaluate_chart`."""
        key = (tuple(float(p) for p in point), rank_tol)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        chart = evaluate_chart(self, key[0], rank_tol)
        with self._lock:
            if len(self._cache) > 8192:
                self._cache.clear()
            self._cache[key] = chart
        return chart


@dataclass(frozen=True)
class TangentFieldValue:
    """Tangent vector given by its coefficients over the coordinate frame."""

    coefficients: np.ndarray

    def ambient(self, chart: "PointChart") -> np.ndarray:
        return self.coefficients @ chart.frame


@dataclass(eq=False)
class PointChart:
    point: np.ndarray
    space: AmbientSpace
    position: np.ndarray
    frame: np.ndarray  # (m, 2n): row i is d chi / d u_i
    hessian: np.ndarray  # (m, m, 2n)
    gram: np.ndarray
    tangent: Subspace
    normal: Subspace
    gram_inv: np.ndarray = field(repr=False)
    sigma: np.ndarray = field(repr=False)  # (m, m, 2n) normal parts of the hessian
    christoffel: np.ndarray = field(repr=False)  # [i, j] -> coefficients of nabla_{d_i} d_j

    @property
    def m(self) -> int:
        return self.frame.shape[0]

    def to_coefficients(self, v: np.ndarray) -> np.ndarray:
        return self.gram_inv @ (self.frame @ v)

    def from_coefficients(self, c: np.ndarray) -> np.ndarray:
        return np.asarray(c, dtype=float) @ self.frame

    def tangential(self, v: np.ndarray) -> np.ndarray:
        return project(v, self.tangent)

    def normal_part(self, v: np.ndarray) -> np.ndarray:
        return v - project(v, self.tangent)

    def J(self, v: np.ndarray) -> np.ndarray:
        return self.space.apply_J(v)

    def phi(self, v: np.ndarray) -> np.ndarray:
        return project(self.space.apply_J(v), self.tangent)

    def omega(self, v: np.ndarray) -> np.ndarray:
        Jv = self.space.apply_J(v)
        return Jv - project(Jv, self.tangent)

    def sff_matrix(self, N: np.ndarray) -> np.ndarray:
        """S[i, j] = <sigma(d_i, d_j), N>."""
        return self.sigma @ N

    def sff(self, x: np.ndarray, y: np.ndarray, N: np.ndarray) -> float:
        """<sigma(X, Y), N> = g(A_N X, Y) for coefficient vectors x, y."""
        return float(x @ self.sff_matrix(N) @ y)

    def sigma_of(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.sigma)

    def nabla(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Coefficients of nabla_X Y for constant-coefficient fields X, Y."""
        return np.einsum("i,j,ijk->k", x, y, self.christoffel)

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        """Induced metric on coefficient vectors."""
        return float(a @ self.gram @ b)


def evaluate_chart(spec: ImmersionSpec, point: Sequence[float], rank_tol: float = DEFAULT_RANK_TOL) -> PointChart:
    point = np.array([float(p) for p in point])
    try:
        pos, jac, hess = spec.jets(point)
    except E.EvaluationError as exc:
        raise ChartError(f"immersion undefined at {point.tolist()}: {exc}") from exc
    m, d = jac.shape
    if m > d:
        raise ChartError("more parameters than ambient dimensions")
    # entrywise dot products so the Gram matrix is exactly <d_i, d_j>
    gram = np.array([[float(a @ b) for b in jac] for a in jac])
    eig = np.linalg.eigvalsh(gram)
    if eig[-1] <= 0.0 or eig[0] < REGULARITY_TOL * eig[-1]:
        raise ChartError(
            f"immersion not regular at {point.tolist()}: Gram eigenvalues {eig[0]:.3e} .. {eig[-1]:.3e}"
        )
    tangent = gram_schmidt(list(jac), rank_tol)
    if tangent.dim != m:
        raise ChartError(f"coordinate frame has rank {tangent.dim} < {m} at {point.tolist()}")
    normal = orthogonal_complement(tangent, rank_tol=rank_tol)
    gram_inv = np.linalg.inv(gram)
    # tangential part of each second partial, expressed in the coordinate frame
    hf = hess @ jac.T  # (m, m, m): <chi_ij, chi_k>
    christoffel = hf @ gram_inv
    sigma = hess - christoffel @ jac
    sigma = 0.5 * (sigma + sigma.transpose(1, 0, 2))
    return PointChart(
        point=point,
        space=spec.ambient,
        position=pos,
        frame=jac,
        hessian=hess,
        gram=gram,
        tangent=tangent,
        normal=normal,
        gram_inv=gram_inv,
        sigma=sigma,
        christoffel=christoffel,
    )


def _require_tangent(chart: PointChart, v: np.ndarray, tol: float) -> None:
    off = np.linalg.norm(chart.normal_part(v))
    if off > tol * max(1.0, float(np.linalg.norm(v))):
        raise NotTangentError(f"vector is {off:.3e} off the tangent space")


def phi_omega(chart: PointChart, v: np.ndarray, tol: float = MEMBERSHIP_TOL):
    """Split Jv into tangential (phi) and normal (omega) parts."""
    v = np.asarray(v, dtype=float)
    _require_tangent(chart, v, tol)
    Jv = chart.J(v)
    phi = project(Jv, chart.tangent)
    return phi, Jv - phi


def bc_decompose(chart: PointChart, nv: np.ndarray, tol: float = MEMBERSHIP_TOL):
    """Split J(nv) into tangential (B) and normal (C) parts."""
    nv = np.asarray(nv, dtype=float)
    off = np.linalg.norm(project(nv, chart.tangent))
    if off > tol * max(1.0, float(np.linalg.norm(nv))):
        raise NotNormalError(f"vector has tangential part of norm {off:.3e}")
    Jn = chart.J(nv)
    B = project(Jn, chart.tangent)
    return B, Jn - B


def second_fundamental_form(chart: PointChart, i: int, j: int) -> np.ndarray:
    return chart.sigma[i, j]


def shape_operator(chart: PointChart, N: np.ndarray) -> np.ndarray:
    """Matrix A over the coordinate frame: A d_i = sum_k A[k, i] d_k."""
    return chart.gram_inv @ chart.sff_matrix(np.asarray(N, dtype=float))


def induced_connection(chart: PointChart, i: int, j: int) -> TangentFieldValue:
    return TangentFieldValue(chart.christoffel[i, j].copy())


Direction = Union[int, Sequence[float], np.ndarray]


def _direction_vector(direction: Direction, m: int) -> np.ndarray:
    if isinstance(direction, (int, np.integer)):
        if not 0 <= direction < m:
            raise IndexError(f"direction {direction} out of range")
        e = np.zeros(m)
        e[direction] = 1.0
        return e
    a = np.asarray(direction, dtype=float)
    if a.shape != (m,):
        raise ValueError(f"direction must have {m} components")
    return a


def field_derivative(
    spec: ImmersionSpec,
    field: Callable[[np.ndarray], np.ndarray],
    point: Sequence[float],
    direction: Direction,
    step: float = FD_STEP,
) -> np.ndarray:
    """Derivative of a vector field along a parameter-space direction.

    Fourth-order central difference (-f(2h) + 8f(h) - 8f(-h) + f(-2h)) / 12h,
    taken along the unit direction and rescaled by its length.
    """
    p = np.asarray(point, dtype=float)
    a = _direction_vector(direction, spec.m)
    length = float(np.linalg.norm(a))
    if length == 0.0:
        return np.zeros_like(np.asarray(field(p), dtype=float))
    u = a / length
    f = lambda t: np.asarray(field(p + t * u), dtype=float)
    h = step
    try:
        d = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)
    except (ChartError, E.EvaluationError) as exc:
        raise ChartError(f"field not evaluable near {p.tolist()}: {exc}") from exc
    return length * d


def normal_connection(
    spec: ImmersionSpec,
    chart: PointChart,
    field: Callable[[np.ndarray], np.ndarray],
    direction: Direction,
    step: float = FD_STEP,
) -> np.ndarray:
    """nabla-perp of a normal field: normal part of its ambient derivative."""
    return chart.normal_part(field_derivative(spec, field, chart.point, direction, step))


def weingarten_residual(
    spec: ImmersionSpec,
    chart: PointChart,
    field: Callable[[np.ndarray], np.ndarray],
    direction: Direction,
    step: float = FD_STEP,
) -> float:
    """|tangential part of D_X N + A_N X| for a normal field N."""
    a = _direction_vector(direction, spec.m)
    dN = field_derivative(spec, field, chart.point, a, step)
    N = np.asarray(field(chart.point), dtype=float)
    AX = shape_operator(chart, N) @ a
    return float(np.linalg.norm(chart.tangential(dN) + chart.from_coefficients(AX)))


def coordinate_field(spec: ImmersionSpec, coefficients: Sequence[float]):
    """Ambient representative p -> sum c_k d chi/d u_k (p) of a constant-coefficient field."""
    c = np.asarray(coefficients, dtype=float)
    return lambda p: spec.chart(p).from_coefficients(c)


def omega_field(spec: ImmersionSpec, coefficients: Sequence[float]):
    """p -> omega(X)(p) for the constant-coefficient tangent field X."""
    c = np.asarray(coefficients, dtype=float)

    def f(p):
        ch = spec.chart(p)
        return ch.omega(ch.from_coefficients(c))

    return f
