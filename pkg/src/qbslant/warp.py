"""Warped-product structure read off the induced metric.

Given a split of the parameters into base and fiber, the metric is a warped
product g_B + f^2 g_F exactly when the base/fiber cross block vanishes, the
base block ignores the fiber coordinates and the fiber block at any base point
is a scalar multiple of the fiber block at a reference base point.  The
warping function is only defined up to a constant factor; we fix f = 1 at the
first base point.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .geometry import ImmersionSpec
from .slant import DistributionAssignment, SlantReport
from .tolerances import Tolerances

RIEMANNIAN_PRODUCT = "RIEMANNIAN_PRODUCT"
QUASI_HEMI_SLANT = "QUASI_HEMI_SLANT"
NEITHER = "NEITHER"


@dataclass(frozen=True)
class WarpSplit:
    base: tuple[int, ...]
    fiber: tuple[int, ...]

    def __post_init__(self):
        if set(self.base) & set(self.fiber):
            raise ValueError("base and fiber overlap")
        if not self.fiber:
            raise ValueError("empty fiber")

    def validate(self, m: int) -> None:
        if sorted((*self.base, *self.fiber)) != list(range(m)):
            raise ValueError(f"base and fiber must partition the {m} parameters")

    @classmethod
    def from_names(cls, spec: ImmersionSpec, base: Sequence[str], fiber: Sequence[str]) -> "WarpSplit":
        for n in (*base, *fiber):
            if n not in spec.params:
                raise ValueError(f"unknown parameter {n!r} in warp split")
        split = cls(tuple(spec.index(n) for n in base), tuple(spec.index(n) for n in fiber))
        split.validate(spec.m)
        return split

    def compose(self, b: Sequence[float], q: Sequence[float]) -> np.ndarray:
        p = np.empty(len(self.base) + len(self.fiber))
        p[list(self.base)] = b
        p[list(self.fiber)] = q
        return p


def gram_at(spec: ImmersionSpec, p) -> np.ndarray:
    jac = spec.jets(p)[1]
    return np.array([[float(a @ b) for b in jac] for a in jac])


def _fiber_block(G: np.ndarray, split: WarpSplit) -> np.ndarray:
    return G[np.ix_(split.fiber, split.fiber)]


def log_f_gradient(spec: ImmersionSpec, split: WarpSplit, p, step: float = 1e-4) -> np.ndarray:
    """d(ln f) along each base direction at p.

    Uses ln f(p + t e_i) - ln f(p) = 1/2 ln lambda(t) with lambda the least
    squares ratio of fiber blocks, then the 4th-order central difference.
    """
    p = np.asarray(p, dtype=float)
    B = _fiber_block(gram_at(spec, p), split)
    bb = float(np.sum(B * B))
    out = np.zeros(len(split.base))
    for k, i in enumerate(split.base):
        def half_log(t):
            q = p.copy()
            q[i] += t
            A = _fiber_block(gram_at(spec, q), split)
            return 0.5 * math.log(float(np.sum(A * B)) / bb)

        h = step
        out[k] = (-half_log(2 * h) + 8 * half_log(h) - 8 * half_log(-h) + half_log(-2 * h)) / (12 * h)
    return out


@dataclass
class WarpReport:
    split: WarpSplit
    cross_residual: float
    base_dependence: float
    proportionality: float
    base_points: list
    fiber_points: list
    f_samples: list  # f at each base point, f(b0) = 1
    grad_log_f: list  # per base point, per base direction
    is_warped: bool
    verdict: Optional[str] = None
    notes: list = field(default_factory=list)
    branch_residual: Optional[float] = None
    strengthened: Optional[float] = None
    theta2: Optional[float] = None
    grad_tol: float = 1e-7

    @property
    def max_grad(self) -> float:
        return max((abs(g) for row in self.grad_log_f for g in row), default=0.0)

    @property
    def trivial(self) -> bool:
        return self.is_warped and self.max_grad < self.grad_tol


def analyze_warp(
    spec: ImmersionSpec,
    split: WarpSplit,
    base_points: Sequence[Sequence[float]],
    fiber_points: Sequence[Sequence[float]],
    tol: Tolerances = Tolerances(),
    workers: int = 1,
) -> WarpReport:
    split.validate(spec.m)
    if not base_points or not fiber_points:
        raise ValueError("warp analysis needs base and fiber sample points")
    nb, nf = len(split.base), len(split.fiber)
    if any(len(b) != nb for b in base_points) or any(len(q) != nf for q in fiber_points):
        raise ValueError("sample point length does not match the split")
    grid = [(i, j) for i in range(len(base_points)) for j in range(len(fiber_points))]
    grams = ordered_map(
        lambda ij: gram_at(spec, split.compose(base_points[ij[0]], fiber_points[ij[1]])), grid, workers
    )
    G = {ij: g for ij, g in zip(grid, grams)}
    bi, fi = list(split.base), list(split.fiber)
    cross = max(float(np.max(np.abs(g[np.ix_(bi, fi)]))) if bi else 0.0 for g in grams)
    base_dep = 0.0
    if bi:
        for i in range(len(base_points)):
            ref = G[(i, 0)][np.ix_(bi, bi)]
            for j in range(1, len(fiber_points)):
                diff = G[(i, j)][np.ix_(bi, bi)] - ref
                base_dep = max(base_dep, float(np.max(np.abs(diff))) / max(1.0, float(np.max(np.abs(ref)))))
    prop = 0.0
    lam = []
    for i in range(len(base_points)):
        num = den = 0.0
        for j in range(len(fiber_points)):
            A = _fiber_block(G[(i, j)], split)
            B = _fiber_block(G[(0, j)], split)
            num += float(np.sum(A * B))
            den += float(np.sum(B * B))
        li = num / den
        lam.append(li)
        for j in range(len(fiber_points)):
            A = _fiber_block(G[(i, j)], split)
            B = _fiber_block(G[(0, j)], split)
            r = float(np.linalg.norm(A - li * B)) / max(1.0, float(np.linalg.norm(A)))
            prop = max(prop, r)
    degenerate = any(l <= 0.0 for l in lam)
    f = [math.sqrt(l) if l > 0 else float("nan") for l in lam]
    grads = ordered_map(
        lambda b: log_f_gradient(spec, split, split.compose(b, fiber_points[0]), tol.fd_step).tolist(),
        list(base_points),
        workers,
    )
    warped = (not degenerate) and cross <= tol.warp_tol and base_dep <= tol.warp_tol and prop <= tol.warp_tol
    rep = WarpReport(
        split=split,
        cross_residual=cross,
        base_dependence=base_dep,
        proportionality=prop,
        base_points=[list(map(float, b)) for b in base_points],
        fiber_points=[list(map(float, q)) for q in fiber_points],
        f_samples=f,
        grad_log_f=grads,
        is_warped=warped,
        grad_tol=tol.grad_tol,
    )
    if not warped:
        rep.verdict = NEITHER
        rep.notes.append("metric does not support a warped product on this split")
    elif rep.max_grad < tol.grad_tol:
        rep.verdict = RIEMANNIAN_PRODUCT
    return rep


@dataclass(frozen=True)
class ConnectionResidual:
    point: tuple
    base_param: int
    fiber_param: int
    nabla: list  # coefficients of nabla_{d_i} d_j
    dlogf: float
    residual: float


def check_eq_5_1(
    spec: ImmersionSpec,
    split: WarpSplit,
    points: Sequence[Sequence[float]],
    pairs: Optional[Sequence[tuple[int, int]]] = None,
    step: float = 1e-4,
) -> list[ConnectionResidual]:
    """|nabla_{d_i} d_j - (d_i ln f) d_j| in the induced metric, i base and j fiber."""
    split.validate(spec.m)
    if pairs is None:
        pairs = [(i, j) for i in split.base for j in split.fiber]
    for i, j in pairs:
        if i not in split.base or j not in split.fiber:
            raise ValueError(f"pair ({i}, {j}) must be (base index, fiber index)")
    out = []
    for p in points:
        chart = spec.chart(p)
        grad = log_f_gradient(spec, split, p, step)
        for i, j in pairs:
            d = chart.christoffel[i, j].copy()
            g = float(grad[split.base.index(i)])
            d[j] -= g
            res = math.sqrt(max(0.0, chart.inner(d, d)))
            out.append(ConnectionResidual(tuple(map(float, p)), i, j, chart.christoffel[i, j].tolist(), g, res))
    return out


def dichotomy_check(
    spec: ImmersionSpec,
    assignment: DistributionAssignment,
    warp: WarpReport,
    slant: SlantReport,
    tol: Tolerances = Tolerances(),
) -> WarpReport:
    """Fill in the branch decision between constant f and an anti-invariant D2.

    The product (X ln f) g(Z, phi W), which must vanish, is evaluated for D2 coordinate fields on the
    fiber over the whole sample grid, along with cos^2(theta2) |X ln f|.
    """
    split = warp.split
    theta2 = slant.theta("D2")
    warp.theta2 = theta2
    zw = [i for i in assignment.D2 if i in split.fiber]
    branch = 0.0
    for b, grad in zip(warp.base_points, warp.grad_log_f):
        gmax = max((abs(g) for g in grad), default=0.0)
        for q in warp.fiber_points:
            chart = spec.chart(split.compose(b, q))
            for z in zw:
                for w in zw:
                    val = float(chart.frame[z] @ chart.phi(chart.frame[w]))
                    branch = max(branch, gmax * abs(val))
    warp.branch_residual = branch
    c2 = math.cos(theta2) ** 2 if theta2 is not None else 1.0
    warp.strengthened = c2 * warp.max_grad
    if not warp.is_warped:
        warp.verdict = NEITHER
    elif warp.max_grad < tol.grad_tol:
        warp.verdict = RIEMANNIAN_PRODUCT
    elif theta2 is not None and abs(theta2 - math.pi / 2) < tol.angle_tol:
        warp.verdict = QUASI_HEMI_SLANT
    else:
        warp.verdict = NEITHER
        warp.notes.append("non-constant warping with theta2 != pi/2: both branches fail")
    slant_idx = set(assignment.D1) | set(assignment.D2)
    if warp.is_warped and set(split.fiber) != slant_idx:
        warp.notes.append(
            "fiber supported by the metric differs from D1 + D2 "
            f"(fiber {[spec.params[i] for i in split.fiber]}, "
            f"slant blocks {[spec.params[i] for i in sorted(slant_idx)]})"
        )
    return warp


def search_splits(
    spec: ImmersionSpec,
    base_points_for,
    fiber_points_for,
    tol: Tolerances = Tolerances(),
    max_m: int = 6,
) -> list[WarpSplit]:
    """All base/fiber partitions the metric supports (small m only).

    ``base_points_for(split)`` and ``fiber_points_for(split)`` supply sample
    grids for a candidate split.
    """
    m = spec.m
    if m > max_m:
        raise ValueError(f"exhaustive search limited to m <= {max_m}")
    found = []
    for r in range(0, m):
        for base in itertools.combinations(range(m), r):
            fiber = tuple(i for i in range(m) if i not in base)
            split = WarpSplit(base, fiber)
            rep = analyze_warp(spec, split, base_points_for(split), fiber_points_for(split), tol)
            if rep.is_warped:
                found.append(split)
    return found
