"""Pointwise evaluation of the long structure identities for quasi bi-slant
submanifolds and warped products.

Every field is a constant-coefficient combination of coordinate fields, given
as a coefficient vector of length m.  Lie brackets of such fields vanish, and
all terms reduce to chart data plus finite-difference derivatives of omega
images (the only place FD enters).  Q and R restrict the coefficients to the
D1 and D2 blocks, which equals the orthogonal projection whenever the blocks
are mutually orthogonal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .geometry import ImmersionSpec, PointChart, normal_connection, omega_field
from .slant import DistributionAssignment, SlantReport

FD_REGIME = "fd"
JET_REGIME = "jet"


@dataclass
class IdentityResidual:
    identity: str
    variant: str
    point: tuple
    arguments: dict
    left: float
    right: float
    residual: float
    dominant: float
    regime: str
    terms: dict = field(default_factory=dict)
    precondition: Optional[str] = None  # names the violated condition, if any

    @property
    def relative(self) -> float:
        return self.residual / max(1.0, self.dominant)


def describe_field(spec: ImmersionSpec, coefs: Sequence[float]) -> str:
    parts = []
    for name, c in zip(spec.params, coefs):
        if c == 0:
            continue
        if c == 1:
            parts.append(f"d{name}")
        elif c == -1:
            parts.append(f"-d{name}")
        else:
            parts.append(f"{c!r}*d{name}")
    return " + ".join(parts).replace("+ -", "- ") or "0"


def _support_ok(coefs: np.ndarray, allowed: Sequence[int]) -> bool:
    mask = np.zeros(len(coefs), dtype=bool)
    mask[list(allowed)] = True
    return not np.any(coefs[~mask])


def _require(spec, coefs, allowed, role, block):
    c = np.asarray(coefs, dtype=float)
    if c.shape != (spec.m,):
        raise ValueError(f"field {role} needs {spec.m} coefficients")
    if not _support_ok(c, allowed):
        raise ValueError(f"field {role} must lie in {block}")
    return c


class _Point:
    """Per-point helpers shared by every identity."""

    def __init__(self, spec: ImmersionSpec, assignment: DistributionAssignment, p, step: float):
        self.spec = spec
        self.chart: PointChart = spec.chart(p)
        self.step = step
        m = spec.m
        self.qmask = assignment.mask("D1", m)
        self.rmask = assignment.mask("D2", m)

    def vec(self, c):
        return self.chart.from_coefficients(c)

    def Q(self, c):
        return c * self.qmask

    def R(self, c):
        return c * self.rmask

    def phi_c(self, c):
        """phi of a field, returned as frame coefficients."""
        ch = self.chart
        return ch.to_coefficients(ch.phi(self.vec(c)))

    def omega(self, c):
        return self.chart.omega(self.vec(c))

    def A(self, N, x, y) -> float:
        """g(A_N X, Y) = <sigma(X, Y), N>."""
        return self.chart.sff(x, y, N)

    def nabla_g(self, x, y, target) -> float:
        """g(nabla_X Y, target) with target a coefficient vector."""
        ch = self.chart
        return ch.inner(ch.nabla(x, y), target)

    def nabla_perp(self, direction, c) -> np.ndarray:
        """nabla-perp_{direction} of the normal field omega(C)."""
        if not np.any(direction) or not np.any(c):
            return np.zeros(self.chart.space.dim)
        # the same derivative recurs across argument triples
        cache = self.spec.__dict__.setdefault("_nabla_perp_cache", {})
        key = (tuple(self.chart.point), tuple(direction), tuple(c), self.step)
        hit = cache.get(key)
        if hit is None:
            hit = normal_connection(self.spec, self.chart, omega_field(self.spec, c), direction, self.step)
            if len(cache) > 65536:
                cache.clear()
            cache[key] = hit
        return hit


def _angles(report: Optional[SlantReport], thetas):
    if thetas is not None:
        t1, t2 = thetas
    elif report is not None:
        t1, t2 = report.theta("D1"), report.theta("D2")
    else:
        raise ValueError("need either measured angles or a slant report")
    c1 = math.cos(t1) ** 2 if t1 is not None else 0.0
    c2 = math.cos(t2) ** 2 if t2 is not None else 0.0
    return c1, 1.0 - c1, c2, 1.0 - c2


def slant_precondition(report: Optional[SlantReport]) -> Optional[str]:
    if report is None:
        return None
    bad = report.failed_conditions()
    if not bad:
        return None
    return ", ".join(f"definition_3_1.{k}" for k in bad)


def _assemble(identity, variant, spec, p, args, left, terms, regime, precondition):
    right = float(sum(terms.values()))
    dominant = max([abs(left)] + [abs(v) for v in terms.values()])
    return IdentityResidual(
        identity=identity,
        variant=variant,
        point=tuple(float(x) for x in p),
        arguments={k: describe_field(spec, v) for k, v in args.items()},
        left=float(left),
        right=right,
        residual=abs(float(left) - right),
        dominant=dominant,
        regime=regime,
        terms=terms,
        precondition=precondition,
    )


# --- first long identity ----------------------------------------------------------


def _prop_4_1_terms(P: _Point, X, Y, Z, c1, s1, c2, s2):
    """Right side of the first long identity with X differentiated along."""
    ch = P.chart
    QY, RY = P.Q(Y), P.R(Y)
    phiZ = P.phi_c(Z)
    wZ = P.omega(Z)
    wphiQY = ch.omega(ch.phi(P.vec(QY)))
    wphiRY = ch.omega(ch.phi(P.vec(RY)))
    dwZ = P.nabla_perp(X, Z)
    return {
        "cos2_t1*g(nabla_X QY, phiZ)": c1 * P.nabla_g(X, QY, phiZ),
        "g(A_{w phi QY} phiZ, X)": P.A(wphiQY, phiZ, X),
        "-sin2_t1*g(A_{wZ} X, QY)": -s1 * P.A(wZ, X, QY),
        "cos2_t2*g(nabla_X RY, phiZ)": c2 * P.nabla_g(X, RY, phiZ),
        "g(A_{w phi RY} phiZ, X)": P.A(wphiRY, phiZ, X),
        "-sin2_t2*g(A_{wZ} X, RY)": -s2 * P.A(wZ, X, RY),
        "g(nablaperp_X wZ, w phi QY)": float(dwZ @ wphiQY),
        "g(nablaperp_X wZ, w phi RY)": float(dwZ @ wphiRY),
        "g(A_{wQY} Z, X)": P.A(P.omega(QY), Z, X),
        "g(A_{wRY} Z, X)": P.A(P.omega(RY), Z, X),
    }


def _swapped_terms(P: _Point, X, Y, Z, c1, s1, c2, s2):
    """Right side of g(nabla_Z Y, phi X): the derivative runs along Z."""
    ch = P.chart
    QY, RY, QZ, RZ = P.Q(Y), P.R(Y), P.Q(Z), P.R(Z)
    phiX = P.phi_c(X)
    wX = P.omega(X)
    wphiQY = ch.omega(ch.phi(P.vec(QY)))
    wphiRY = ch.omega(ch.phi(P.vec(RY)))
    dwX = P.nabla_perp(Z, X)
    return {
        "cos2_t1*g(nabla_QZ QY, phiX)": c1 * P.nabla_g(QZ, QY, phiX),
        "g(A_{w phi QY} phiX, QZ)": P.A(wphiQY, phiX, QZ),
        "-sin2_t1*g(A_{wX} QZ, QY)": -s1 * P.A(wX, QZ, QY),
        "cos2_t2*g(nabla_RZ RY, phiX)": c2 * P.nabla_g(RZ, RY, phiX),
        "g(A_{w phi RY} phiX, RZ)": P.A(wphiRY, phiX, RZ),
        "-sin2_t2*g(A_{wX} RZ, RY)": -s2 * P.A(wX, RZ, RY),
        "g(nablaperp_Z wX, w phi QY)": float(dwX @ wphiQY),
        "g(nablaperp_Z wX, w phi RY)": float(dwX @ wphiRY),
        "g(A_{wQY} X, Z)": P.A(P.omega(QY), X, Z),
        "g(A_{wRY} X, Z)": P.A(P.omega(RY), X, Z),
    }


def check_prop_4_1(
    spec: ImmersionSpec,
    assignment: DistributionAssignment,
    X: Sequence[float],
    Y: Sequence[float],
    Z: Sequence[float],
    points: Sequence[Sequence[float]],
    report: Optional[SlantReport] = None,
    thetas: Optional[tuple] = None,
    variant: str = "statement",
    step: float = 1e-4,
    workers: int = 1,
) -> list[IdentityResidual]:
    """g(nabla_X Y, phi Z) against its ten-term expansion.

    ``variant="statement"`` takes X in D1 and differentiates along X.
    ``variant="proof"`` takes X in D and evaluates the intermediate form
    g(nabla_Z Y, phi X) whose derivatives run along Z.
    """
    c1, s1, c2, s2 = _angles(report, thetas)
    slant = (*assignment.D1, *assignment.D2)
    Y = _require(spec, Y, slant, "Y", "D1+D2")
    Z = _require(spec, Z, slant, "Z", "D1+D2")
    if variant == "statement":
        X = _require(spec, X, assignment.D1, "X", "D1")
    elif variant == "proof":
        X = _require(spec, X, assignment.D, "X", "D")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    pre = slant_precondition(report)

    def one(p):
        P = _Point(spec, assignment, p, step)
        if variant == "statement":
            left = P.nabla_g(X, Y, P.phi_c(Z))
            terms = _prop_4_1_terms(P, X, Y, Z, c1, s1, c2, s2)
        else:
            left = P.nabla_g(Z, Y, P.phi_c(X))
            terms = _swapped_terms(P, X, Y, Z, c1, s1, c2, s2)
        return _assemble("prop_4_1", variant, spec, p, {"X": X, "Y": Y, "Z": Z}, left, terms, FD_REGIME, pre)

    return ordered_map(one, list(points), workers)


# --- bracket identity ----------------------------------------------------------


def _prop_4_2_terms(P: _Point, X, Y, Z):
    ch = P.chart
    phiX = P.phi_c(X)
    wphiY = ch.omega(ch.phi(P.vec(Y)))
    wphiZ = ch.omega(ch.phi(P.vec(Z)))
    return {
        "g(A_{w phi Z} phiX, Y)": P.A(wphiZ, phiX, Y),
        "-g(A_{w phi Y} phiX, Z)": -P.A(wphiY, phiX, Z),
        "g(nablaperp_Y wX, w phi Z)": float(P.nabla_perp(Y, X) @ wphiZ),
        "-g(nablaperp_Z wX, w phi Y)": -float(P.nabla_perp(Z, X) @ wphiY),
        "g(A_{wZ} X, Y)": P.A(P.omega(Z), X, Y),
        "-g(A_{wY} X, Z)": -P.A(P.omega(Y), X, Z),
    }


def check_prop_4_2(
    spec: ImmersionSpec,
    assignment: DistributionAssignment,
    X: Sequence[float],
    Y: Sequence[float],
    Z: Sequence[float],
    points: Sequence[Sequence[float]],
    report: Optional[SlantReport] = None,
    variant: str = "statement",
    step: float = 1e-4,
    workers: int = 1,
) -> list[IdentityResidual]:
    """g([Y, Z], phi X) against its six-term expansion.

    The bracket of two coordinate fields is zero, so the left side is 0.
    The statement variant takes X in D1, the proof variant X in D.
    """
    slant = (*assignment.D1, *assignment.D2)
    Y = _require(spec, Y, slant, "Y", "D1+D2")
    Z = _require(spec, Z, slant, "Z", "D1+D2")
    if variant == "statement":
        X = _require(spec, X, assignment.D1, "X", "D1")
    elif variant == "proof":
        X = _require(spec, X, assignment.D, "X", "D")
    else:
        raise ValueError(f"unknown variant {variant!r}")
    pre = slant_precondition(report)

    def one(p):
        P = _Point(spec, assignment, p, step)
        terms = _prop_4_2_terms(P, X, Y, Z)
        return _assemble("prop_4_2", variant, spec, p, {"X": X, "Y": Y, "Z": Z}, 0.0, terms, FD_REGIME, pre)

    return ordered_map(one, list(points), workers)


# --- warped-product second fundamental form identities -------------------------------------------------------


def check_lemma_5_1(
    spec: ImmersionSpec,
    assignment: DistributionAssignment,
    split,
    X: Sequence[float],
    Y: Sequence[float],
    Z: Sequence[float],
    points: Sequence[Sequence[float]],
    roles: str = "statement",
    precondition: Optional[str] = None,
) -> list[IdentityResidual]:
    """g(sigma(X,Y), omega Z) = g(sigma(X,Z), omega QY) + g(sigma(X,Z), omega RY).

    ``roles="statement"``: X, Z on the base and Y on the fiber.
    ``roles="proof"``: X, Y on the base and Z on the fiber.
    """
    base, fiber = split.base, split.fiber
    X = _require(spec, X, base, "X", "the base")
    if roles == "statement":
        Y = _require(spec, Y, fiber, "Y", "the fiber")
        Z = _require(spec, Z, base, "Z", "the base")
    elif roles == "proof":
        Y = _require(spec, Y, base, "Y", "the base")
        Z = _require(spec, Z, fiber, "Z", "the fiber")
    else:
        raise ValueError(f"unknown roles {roles!r}")
    out = []
    for p in points:
        P = _Point(spec, assignment, p, 1e-4)
        ch = P.chart
        left = float(ch.sigma_of(X, Y) @ P.omega(Z))
        sXZ = ch.sigma_of(X, Z)
        terms = {
            "g(sigma(X,Z), w QY)": float(sXZ @ P.omega(P.Q(Y))),
            "g(sigma(X,Z), w RY)": float(sXZ @ P.omega(P.R(Y))),
        }
        out.append(_assemble("lemma_5_1", roles, spec, p, {"X": X, "Y": Y, "Z": Z}, left, terms,
                             JET_REGIME, precondition))
    return out


def check_lemma_5_2(
    spec: ImmersionSpec,
    assignment: DistributionAssignment,
    split,
    X: Sequence[float],
    Z: Sequence[float],
    W: Sequence[float],
    points: Sequence[Sequence[float]],
    precondition: Optional[str] = None,
) -> list[IdentityResidual]:
    """g(sigma(X,Z), omega W) = g(sigma(X,W), omega QZ) + g(sigma(X,W), omega RZ)."""
    X = _require(spec, X, split.base, "X", "the base")
    Z = _require(spec, Z, split.fiber, "Z", "the fiber")
    W = _require(spec, W, split.fiber, "W", "the fiber")
    out = []
    for p in points:
        P = _Point(spec, assignment, p, 1e-4)
        ch = P.chart
        left = float(ch.sigma_of(X, Z) @ P.omega(W))
        sXW = ch.sigma_of(X, W)
        terms = {
            "g(sigma(X,W), w QZ)": float(sXW @ P.omega(P.Q(Z))),
            "g(sigma(X,W), w RZ)": float(sXW @ P.omega(P.R(Z))),
        }
        out.append(_assemble("lemma_5_2", "statement", spec, p, {"X": X, "Z": Z, "W": W}, left, terms,
                             JET_REGIME, precondition))
    return out


# --- phi symmetry -------------------------------------------------------------


@dataclass(frozen=True)
class SkewnessResult:
    skew: float  # max |<phi X, Y> + <X, phi Y>|, should vanish
    symmetric: float  # max |<phi X, Y> - <X, phi Y>|, the symmetric form


def check_skewness_2_9(chart: PointChart, probes: Sequence[np.ndarray]) -> SkewnessResult:
    """Compare phi against both the skew and the symmetric adjointness laws."""
    V = [np.asarray(v, dtype=float) for v in probes]
    PV = [chart.phi(v) for v in V]
    skew = sym = 0.0
    for a in range(len(V)):
        for b in range(len(V)):
            l = float(PV[a] @ V[b])
            r = float(V[a] @ PV[b])
            skew = max(skew, abs(l + r))
            sym = max(sym, abs(l - r))
    return SkewnessResult(skew, sym)


# --- argument enumeration -----------------------------------------------------


def unit_fields(m: int, indices: Sequence[int]) -> list[np.ndarray]:
    out = []
    for i in indices:
        e = np.zeros(m)
        e[i] = 1.0
        out.append(e)
    return out
