"""Slant angles, quasi bi-slant verification and the induced splittings.

A :class:`DistributionAssignment` names which coordinate directions span the
invariant block ``D`` and the two slant blocks ``D1``, ``D2``.  Everything
here is measured pointwise from charts; nothing is assumed about the blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .geometry import ImmersionSpec, PointChart, TangentFieldValue
from .linalg import (
    Subspace,
    angle_vector_subspace,
    gram_schmidt,
    orthogonal_complement,
    project,
    subspace_intersection,
)
from .tolerances import Tolerances

BLOCKS = ("D", "D1", "D2")
DEFAULT_SEED = 0xC0FFEE
DEFAULT_PROBES = 8

# stream tags for seeded probe generators
_PROBE_STREAM = 1
_LEMMA_STREAM = 2


@dataclass(frozen=True)
class DistributionAssignment:
    D: tuple[int, ...] = ()
    D1: tuple[int, ...] = ()
    D2: tuple[int, ...] = ()

    def __post_init__(self):
        seen = [*self.D, *self.D1, *self.D2]
        if len(seen) != len(set(seen)):
            raise ValueError("distribution blocks must be disjoint")
        if any(i < 0 for i in seen):
            raise ValueError("negative parameter index")

    @classmethod
    def from_names(cls, spec: ImmersionSpec, groups: Mapping[str, Sequence[str]]) -> "DistributionAssignment":
        unknown = set(groups) - set(BLOCKS)
        if unknown:
            raise ValueError(f"unknown block(s) {sorted(unknown)}")
        idx = {}
        for b in BLOCKS:
            names = groups.get(b, ())
            missing = [n for n in names if n not in spec.params]
            if missing:
                raise ValueError(f"block {b} names undeclared parameter(s) {missing}")
            idx[b] = tuple(spec.index(n) for n in names)
        return cls(**idx)

    def block(self, which: str) -> tuple[int, ...]:
        return getattr(self, which)

    def covered(self) -> tuple[int, ...]:
        return tuple(sorted((*self.D, *self.D1, *self.D2)))

    def validate(self, m: int) -> None:
        if any(i >= m for i in self.covered()):
            raise ValueError(f"assignment refers to parameter index >= {m}")

    def mask(self, which: str, m: int) -> np.ndarray:
        e = np.zeros(m)
        e[list(self.block(which))] = 1.0
        return e


def block_span(chart: PointChart, indices: Sequence[int], rank_tol: float = 1e-9) -> Subspace:
    return gram_schmidt([chart.frame[i] for i in indices], rank_tol, ambient_dim=chart.space.dim)


def _in_span(v: np.ndarray, S: Subspace, tol: float = 1e-8) -> bool:
    return float(np.linalg.norm(v - project(v, S))) <= tol * max(1.0, float(np.linalg.norm(v)))


def distribution_slant_angle(chart: PointChart, assignment: DistributionAssignment, which: str,
                             probe: np.ndarray) -> float:
    """Angle between J(probe) and the span of the chosen block."""
    if which not in ("D1", "D2", "D"):
        raise ValueError(f"unknown block {which!r}")
    probe = np.asarray(probe, dtype=float)
    if not np.any(probe):
        raise ValueError("zero probe")
    S = block_span(chart, assignment.block(which))
    if not _in_span(probe, S):
        raise ValueError(f"probe does not lie in block {which}")
    return angle_vector_subspace(chart.J(probe), S)


def wirtinger_angle(chart: PointChart, v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("zero vector")
    return angle_vector_subspace(chart.J(v), chart.tangent)


def auto_invariant_block(chart: PointChart, tol: float = 1e-9) -> Subspace:
    """Maximal J-invariant subspace T ∩ J(T) of the tangent space."""
    JT = Subspace(chart.J(chart.tangent.basis))
    return subspace_intersection(chart.tangent, JT, tol)


def random_unit_probes(S: Subspace, k: int, rng: np.random.Generator) -> list[np.ndarray]:
    """The basis of S followed by k random unit vectors of S."""
    if S.dim == 0:
        return []
    out = list(S.basis)
    for _ in range(k):
        c = rng.standard_normal(S.dim)
        v = c @ S.basis
        out.append(v / np.linalg.norm(v))
    return out


def probe_rng(seed: int, point_index: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, point_index, stream]))


# --- quasi bi-slant conditions -----------------------------------------------------------


@dataclass
class BlockAngles:
    samples: list[float] = field(default_factory=list)
    dim: int = 0

    @property
    def mean(self) -> Optional[float]:
        return float(np.mean(self.samples)) if self.samples else None

    @property
    def max_deviation(self) -> float:
        if not self.samples:
            return 0.0
        return float(np.max(np.abs(np.array(self.samples) - np.mean(self.samples))))

    def classify(self, angle_tol: float) -> str:
        if not self.samples:
            return "empty"
        mean = self.mean
        if self.max_deviation >= angle_tol:
            return "non-constant"
        if mean < angle_tol:
            return "invariant"
        if abs(mean - math.pi / 2) < angle_tol:
            return "anti-invariant"
        return "proper slant"


@dataclass
class SlantReport:
    """Outcome of checking conditions (a)-(e) over sample points and probes."""

    seed: int
    probes_per_block: int
    n_points: int
    angles: dict[str, BlockAngles]
    cross_terms: dict[str, float]  # raw max |<d_i, d_j>| per block pair
    orthogonality: float  # normalised max |cos| between blocks
    cross_term_entries: list[dict]  # individual nonzero raw cross terms
    covers_tangent: bool
    invariance_angle: float  # (b): max angle of J(probe) against D
    invariance_omega: float  # (b): max |omega(probe)| / |probe| over D probes
    c_one_sided: float  # max |<J d1, d2>|
    c_mirrored: float  # max |<J d2, d1>|
    conditions: dict[str, bool]
    angle_tol: float

    @property
    def passed(self) -> bool:
        return all(self.conditions.values())

    def theta(self, which: str) -> Optional[float]:
        return self.angles[which].mean

    def classification(self, which: str) -> str:
        return self.angles[which].classify(self.angle_tol)

    def failed_conditions(self) -> list[str]:
        return [k for k, ok in self.conditions.items() if not ok]


def _unit_rows(chart: PointChart, idx: Sequence[int]) -> list[np.ndarray]:
    return [chart.frame[i] / np.linalg.norm(chart.frame[i]) for i in idx]


def _point_measurements(spec: ImmersionSpec, assignment: DistributionAssignment, point, k: int,
                        seed: int, index: int, tol: Tolerances) -> dict:
    chart = spec.chart(point, tol.rank_tol)
    rng = probe_rng(seed, index, _PROBE_STREAM)
    out: dict = {"cross": {}, "entries": [], "ortho": 0.0}
    spans = {b: block_span(chart, assignment.block(b), tol.rank_tol) for b in BLOCKS}
    # (a)
    for a, b in (("D", "D1"), ("D", "D2"), ("D1", "D2")):
        raw = 0.0
        for i in assignment.block(a):
            for j in assignment.block(b):
                gij = float(chart.gram[i, j])
                raw = max(raw, abs(gij))
                cos = abs(gij) / math.sqrt(chart.gram[i, i] * chart.gram[j, j])
                out["ortho"] = max(out["ortho"], cos)
                if cos > tol.ortho_tol:
                    out["entries"].append({"i": i, "j": j, "value": gij})
        # span-level test catches non-orthogonality hidden in combinations
        if spans[a].dim and spans[b].dim:
            out["ortho"] = max(out["ortho"], float(np.max(np.abs(spans[a].basis @ spans[b].basis.T))))
        out["cross"][f"{a}|{b}"] = raw
    # (b)
    inv_angle = 0.0
    inv_omega = 0.0
    for v in random_unit_probes(spans["D"], k, rng):
        inv_angle = max(inv_angle, angle_vector_subspace(chart.J(v), spans["D"]))
        inv_omega = max(inv_omega, float(np.linalg.norm(chart.omega(v))))
    out["inv_angle"], out["inv_omega"] = inv_angle, inv_omega
    # (c)
    B1, B2 = spans["D1"].basis, spans["D2"].basis
    if len(B1) and len(B2):
        out["c1"] = float(np.max(np.abs(chart.J(B1) @ B2.T)))
        out["c2"] = float(np.max(np.abs(chart.J(B2) @ B1.T)))
    else:
        out["c1"] = out["c2"] = 0.0
    # (d), (e)
    out["angles"] = {}
    for b in ("D1", "D2"):
        out["angles"][b] = [
            angle_vector_subspace(chart.J(v), spans[b]) for v in random_unit_probes(spans[b], k, rng)
        ]
    out["dims"] = {b: spans[b].dim for b in BLOCKS}
    return out


def verify_definition_3_1(
    spec: ImmersionSpec,
    assignment: DistributionAssignment,
    points: Sequence[Sequence[float]],
    tol: Tolerances = Tolerances(),
    seed: int = DEFAULT_SEED,
    probes: int = DEFAULT_PROBES,
    workers: int = 1,
) -> SlantReport:
    """Measure conditions (a)-(e) of the quasi bi-slant definition.

    Condition (c) is judged one-sided, J(D1) ⊥ D2; the mirrored quantity
    J(D2) ⊥ D1 is measured and reported but does not affect the verdict.
    """
    assignment.validate(spec.m)
    meas = ordered_map(
        lambda ip: _point_measurements(spec, assignment, ip[1], probes, seed, ip[0], tol),
        list(enumerate(points)),
        workers,
    )
    angles = {b: BlockAngles(dim=len(assignment.block(b))) for b in ("D1", "D2")}
    for mm in meas:
        for b in angles:
            angles[b].samples.extend(mm["angles"][b])
    cross = {key: max(mm["cross"][key] for mm in meas) for key in meas[0]["cross"]} if meas else {}
    entries: dict[tuple[int, int], float] = {}
    for mm in meas:
        for e in mm["entries"]:
            key = (e["i"], e["j"])
            if abs(e["value"]) > abs(entries.get(key, 0.0)):
                entries[key] = e["value"]
    entry_list = [
        {"params": [spec.params[i], spec.params[j]], "value": v} for (i, j), v in sorted(entries.items())
    ]
    ortho = max((mm["ortho"] for mm in meas), default=0.0)
    covers = len(assignment.covered()) == spec.m
    inv_angle = max((mm["inv_angle"] for mm in meas), default=0.0)
    inv_omega = max((mm["inv_omega"] for mm in meas), default=0.0)
    c1 = max((mm["c1"] for mm in meas), default=0.0)
    c2 = max((mm["c2"] for mm in meas), default=0.0)
    conditions = {
        "a": covers and ortho <= tol.ortho_tol,
        "b": inv_angle < tol.angle_tol,
        "c": c1 <= tol.ortho_tol,
        "d": angles["D1"].max_deviation < tol.angle_tol,
        "e": angles["D2"].max_deviation < tol.angle_tol,
    }
    return SlantReport(
        seed=seed,
        probes_per_block=probes,
        n_points=len(points),
        angles=angles,
        cross_terms=cross,
        orthogonality=ortho,
        cross_term_entries=entry_list,
        covers_tangent=covers,
        invariance_angle=inv_angle,
        invariance_omega=inv_omega,
        c_one_sided=c1,
        c_mirrored=c2,
        conditions=conditions,
        angle_tol=tol.angle_tol,
    )


# --- projections and the normal bundle ----------------------------------------


@dataclass(frozen=True)
class ProjectionTriple:
    P: TangentFieldValue
    Q: TangentFieldValue
    R: TangentFieldValue
    residual: float  # |v - PX - QX - RX|


def project_PQR(chart: PointChart, assignment: DistributionAssignment, v: np.ndarray) -> ProjectionTriple:
    """Orthogonal projections of a tangent vector onto the D, D1, D2 spans.

    Exact reassembly needs mutually orthogonal blocks; otherwise the defect
    shows up in ``residual``.
    """
    v = np.asarray(v, dtype=float)
    parts = [project(v, block_span(chart, assignment.block(b))) for b in BLOCKS]
    residual = float(np.linalg.norm(v - sum(parts)))
    P, Q, R = (TangentFieldValue(chart.to_coefficients(p)) for p in parts)
    return ProjectionTriple(P, Q, R, residual)


@dataclass(frozen=True)
class NormalDecomposition:
    omega_D1: Subspace
    omega_D2: Subspace
    mu: Subspace
    mu_invariance_residual: float
    overlap: float  # max |cos| between omega(D1) and omega(D2)


def normal_decomposition(chart: PointChart, assignment: DistributionAssignment,
                         rank_tol: float = 1e-9) -> NormalDecomposition:
    d = chart.space.dim
    images = {}
    for b in ("D1", "D2"):
        span = block_span(chart, assignment.block(b), rank_tol)
        # omega of unit vectors: absolute cutoff so tiny images are dropped
        images[b] = gram_schmidt([chart.omega(v) for v in span.basis], rank_tol, ambient_dim=d, scale=1.0)
    both = gram_schmidt([*images["D1"].basis, *images["D2"].basis], rank_tol, ambient_dim=d, scale=1.0)
    mu = orthogonal_complement(both, within=chart.normal, rank_tol=rank_tol)
    resid = 0.0
    for b in mu.basis:
        Jb = chart.J(b)
        resid = max(resid, float(np.linalg.norm(Jb - project(Jb, mu))))
    overlap = 0.0
    if images["D1"].dim and images["D2"].dim:
        overlap = float(np.max(np.abs(images["D1"].basis @ images["D2"].basis.T)))
    return NormalDecomposition(images["D1"], images["D2"], mu, resid, overlap)


# --- slant block identities ---------------------------------------------------------


@dataclass
class LemmaResiduals:
    block: str
    theta: Optional[float]
    r1: float = 0.0  # max |phi^2 X + cos^2 X|
    r2: float = 0.0  # max |<phi X, phi Y> - cos^2 <X, Y>|
    r3: float = 0.0  # max |<omega X, omega Y> - sin^2 <X, Y>|
    pairs: int = 0
    constant_angle: bool = True

    @property
    def worst(self) -> float:
        return max(self.r1, self.r2, self.r3)


def block_phi(chart: PointChart, S: Subspace, v: np.ndarray) -> np.ndarray:
    """phi restricted to a block: projection of Jv onto the block span."""
    return project(chart.J(v), S)


def check_lemma_3_3_and_3_4(
    spec: ImmersionSpec,
    assignment: DistributionAssignment,
    which: str,
    points: Sequence[Sequence[float]],
    theta: float,
    probes: int = DEFAULT_PROBES,
    seed: int = DEFAULT_SEED,
    constant_angle: bool = True,
    rank_tol: float = 1e-9,
) -> LemmaResiduals:
    """Residuals of phi^2 = -cos^2, and the phi/omega norm identities, on a block.

    ``constant_angle`` carries whether the block passed the constancy test;
    the residuals are computed either way.
    """
    out = LemmaResiduals(which, theta, constant_angle=constant_angle)
    if not assignment.block(which):
        return out
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    for k, p in enumerate(points):
        chart = spec.chart(p, rank_tol)
        S = block_span(chart, assignment.block(which), rank_tol)
        rng = probe_rng(seed, k, _LEMMA_STREAM)
        vs = random_unit_probes(S, probes, rng)[S.dim:] or list(S.basis)
        phis = [block_phi(chart, S, v) for v in vs]
        omegas = [chart.omega(v) for v in vs]
        for v, fv in zip(vs, phis):
            out.r1 = max(out.r1, float(np.linalg.norm(block_phi(chart, S, fv) + c2 * v)))
        for a in range(len(vs)):
            for b in range(len(vs)):
                xy = float(vs[a] @ vs[b])
                out.r2 = max(out.r2, abs(float(phis[a] @ phis[b]) - c2 * xy))
                out.r3 = max(out.r3, abs(float(omegas[a] @ omegas[b]) - s2 * xy))
                out.pairs += 1
    return out
