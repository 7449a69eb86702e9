"""Run every selected check for a manifest and render the results."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from . import __version__
from . import expr as E
from .ambient import check_hermitian_compatibility, check_kaehler_parallel, check_skewness
from .geometry import ChartError, PointChart, shape_operator, weingarten_residual, omega_field
from .identities import (
    check_lemma_5_1,
    check_lemma_5_2,
    check_prop_4_1,
    check_prop_4_2,
    check_skewness_2_9,
    slant_precondition,
    unit_fields,
)
from .manifest import CHECK_ORDER, Manifest
from .slant import (
    auto_invariant_block,
    check_lemma_3_3_and_3_4,
    normal_decomposition,
    probe_rng,
    random_unit_probes,
    verify_definition_3_1,
)
from .warp import NEITHER, analyze_warp, check_eq_5_1, dichotomy_check

PASS = "PASS"
FAIL = "FAIL"
UNMET = "PRECONDITION_UNMET"

_AMBIENT_STREAM = 4
_STRUCTURE_STREAM = 5
# identities run on the leading sample points only; the rest of the grid is
# covered by the cheaper pointwise checks
IDENTITY_POINTS = 4


@dataclass
class CheckRecord:
    name: str
    status: str
    summary: str
    values: dict = field(default_factory=dict)
    unmet: list = field(default_factory=list)  # violated prerequisites
    seconds: float = 0.0


@dataclass
class RunReport:
    manifest: Manifest
    checks: list[CheckRecord]
    discrepancies: list[dict]
    points: list

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, UNMET: 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    @property
    def exit_code(self) -> int:
        return 1 if self.counts()[FAIL] else 0

    def check(self, name: str) -> CheckRecord:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_obj(self, timings: bool = False) -> dict:
        checks = []
        for c in self.checks:
            rec = {"name": c.name, "status": c.status, "summary": c.summary, "values": c.values, "unmet": c.unmet}
            if timings:
                rec["seconds"] = c.seconds
            checks.append(rec)
        cnt = self.counts()
        return _clean({
            "engine": {"name": "qbslant", "version": __version__},
            "manifest": self.manifest.to_json_obj(),
            "sample_points": self.points,
            "checks": checks,
            "discrepancies": self.discrepancies,
            "summary": {"pass": cnt[PASS], "fail": cnt[FAIL], "precondition_unmet": cnt[UNMET],
                        "exit_code": self.exit_code},
        })


def _clean(x):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        f = float(x)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


# --- shared run state ---------------------------------------------------------


class _Context:
    def __init__(self, manifest: Manifest, workers: int):
        self.m = manifest
        self.tol = manifest.tolerances
        self.workers = workers
        self.spec = manifest.spec()
        self.assignment = manifest.assignment(self.spec)
        self.split = manifest.split(self.spec)
        self.all_points = manifest.sample_points()
        self._charts: Optional[dict] = None
        self._slant = None
        self._warp = None
        self._dichotomy = None

    @property
    def seed(self) -> int:
        return self.m.samples.seed

    def charts(self) -> dict:
        """index -> chart or the error message, over every sample point."""
        if self._charts is None:
            out = {}
            for i, p in enumerate(self.all_points):
                try:
                    out[i] = self.spec.chart(p, self.tol.rank_tol)
                except (ChartError, E.EvaluationError, ValueError) as exc:
                    out[i] = str(exc)
            self._charts = out
        return self._charts

    @property
    def points(self) -> list:
        return [self.all_points[i] for i, c in self.charts().items() if isinstance(c, PointChart)]

    def slant(self):
        if self._slant is None:
            self._slant = verify_definition_3_1(
                self.spec, self.assignment, self.points, self.tol, self.seed, self.m.samples.probes, self.workers
            )
        return self._slant

    def slant_unmet(self) -> list:
        pre = slant_precondition(self.slant())
        return pre.split(", ") if pre else []

    def warp(self):
        if self._warp is None and self.split is not None:
            w = self.m.warp
            self._warp = analyze_warp(self.spec, self.split, w.base_points, w.fiber_points, self.tol, self.workers)
        return self._warp

    def dichotomy(self):
        if self._dichotomy is None and self.warp() is not None:
            self._dichotomy = dichotomy_check(self.spec, self.assignment, self.warp(), self.slant(), self.tol)
        return self._dichotomy

    def names(self, coefs) -> list:
        return [self.spec.params[i] for i in coefs]


def _fmt(x: Optional[float]) -> str:
    return "n/a" if x is None else f"{x:.3e}"


# --- individual checks --------------------------------------------------------


def _check_ambient(ctx: _Context) -> CheckRecord:
    space = ctx.spec.ambient
    rng = probe_rng(ctx.seed, 0, _AMBIENT_STREAM)
    samples = [rng.standard_normal(space.dim) for _ in range(16)]
    J = space.J_matrix()
    j2 = float(np.max(np.abs(J @ J + np.eye(space.dim))))
    herm = check_hermitian_compatibility(space, samples)
    skew = check_skewness(space, samples)
    par = check_kaehler_parallel(space, samples[:3], list(np.eye(space.dim)))
    worst = max(j2, herm, skew, par)
    ok = worst <= ctx.tol.ambient_tol
    return CheckRecord(
        "ambient", PASS if ok else FAIL, f"worst residual {_fmt(worst)}",
        {"j_squared": j2, "hermitian": herm, "skew": skew, "kaehler_parallel": par,
         "tolerance": ctx.tol.ambient_tol},
    )


def _check_charts(ctx: _Context) -> CheckRecord:
    charts = ctx.charts()
    failures = [{"point": ctx.all_points[i], "error": c} for i, c in charts.items() if isinstance(c, str)]
    good = [(i, c) for i, c in charts.items() if isinstance(c, PointChart)]
    dims, regularity, fd = [], [], 0.0
    for i, ch in good:
        eig = np.linalg.eigvalsh(ch.gram)
        regularity.append(float(eig[0] / eig[-1]))
        dims.append(auto_invariant_block(ch, ctx.tol.intersection_tol).dim)
        fd = max(fd, _jacobian_fd(ctx, ctx.all_points[i], ch))
    odd = [d for d in dims if d % 2]
    ok = not failures and not odd and fd <= ctx.tol.fd_tol
    return CheckRecord(
        "charts", PASS if ok else FAIL,
        f"{len(good)}/{len(charts)} regular, invariant dims {sorted(set(dims))}, jacobian vs FD {_fmt(fd)}",
        {"evaluated": len(charts), "regular": len(good), "failures": failures, "invariant_dims": dims,
         "min_regularity": min(regularity, default=None), "jacobian_fd_residual": fd,
         "tolerance": ctx.tol.fd_tol},
    )


def _jacobian_fd(ctx: _Context, p, chart: PointChart) -> float:
    p = np.asarray(p, dtype=float)
    h = ctx.tol.fd_step * 10
    worst = 0.0
    for i in range(ctx.spec.m):
        e = np.zeros_like(p)
        e[i] = 1.0
        f = lambda t: ctx.spec.values(p + t * e)
        d = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)
        scale = max(1.0, float(np.max(np.abs(chart.frame[i]))))
        worst = max(worst, float(np.max(np.abs(d - chart.frame[i]))) / scale)
    return worst


def _check_structure(ctx: _Context) -> CheckRecord:
    skew = sym = pyth = gw = gauss = 0.0
    wein = 0.0
    for k, p in enumerate(ctx.points):
        ch = ctx.spec.chart(p, ctx.tol.rank_tol)
        rng = probe_rng(ctx.seed, k, _STRUCTURE_STREAM)
        probes = random_unit_probes(ch.tangent, 4, rng)
        sk = check_skewness_2_9(ch, probes)
        skew, sym = max(skew, sk.skew), max(sym, sk.symmetric)
        for v in probes:
            Jv = ch.J(v)
            pyth = max(pyth, abs(float(Jv @ Jv) - float(ch.phi(v) @ ch.phi(v)) - float(ch.omega(v) @ ch.omega(v)))
                       / float(v @ v))
        for N in ch.normal.basis:
            A = shape_operator(ch, N)
            S = ch.sff_matrix(N)
            # g(A_N d_i, d_j) = (A e_i)^T G e_j
            gw = max(gw, float(np.max(np.abs(S - (ch.gram @ A).T))))
        # Gauss: sigma is normal and hess = nabla + sigma
        tang = np.einsum("ijk,kl->ijl", ch.christoffel, ch.frame)
        gauss = max(gauss, float(np.max(np.abs(ch.hessian - tang - ch.sigma))),
                    float(np.max(np.abs(ch.sigma @ ch.tangent.basis.T))))
        if k < 2:
            for c in unit_fields(ctx.spec.m, range(ctx.spec.m)):
                w = ch.omega(ch.from_coefficients(c))
                if np.linalg.norm(w) <= ctx.tol.ortho_tol:
                    continue
                for d in range(ctx.spec.m):
                    r = weingarten_residual(ctx.spec, ch, omega_field(ctx.spec, c), d, ctx.tol.fd_step)
                    wein = max(wein, r)
    t = ctx.tol
    ok = skew <= t.structure_tol and pyth <= t.structure_tol and gw <= t.jet_tol and gauss <= t.jet_tol \
        and wein <= t.weingarten_tol
    return CheckRecord(
        "structure", PASS if ok else FAIL,
        f"phi skew {_fmt(skew)} (symmetric form {_fmt(sym)}), sigma/A {_fmt(gw)}, Weingarten {_fmt(wein)}",
        {"phi_skew_residual": skew, "phi_symmetric_form_residual": sym, "norm_split_residual": pyth,
         "sigma_shape_operator_residual": gw, "gauss_residual": gauss, "weingarten_fd_residual": wein,
         "tolerances": {"structure_tol": t.structure_tol, "jet_tol": t.jet_tol, "weingarten_tol": t.weingarten_tol}},
    )


def _check_definition(ctx: _Context) -> CheckRecord:
    r = ctx.slant()
    vals = {
        "seed": r.seed,
        "probes_per_block": r.probes_per_block,
        "points": r.n_points,
        "conditions": r.conditions,
        "theta1": r.theta("D1"),
        "theta2": r.theta("D2"),
        "theta1_max_deviation": r.angles["D1"].max_deviation,
        "theta2_max_deviation": r.angles["D2"].max_deviation,
        "classification": {b: r.classification(b) for b in ("D1", "D2")},
        "angle_samples": {b: len(r.angles[b].samples) for b in ("D1", "D2")},
        "cross_terms": r.cross_terms,
        "cross_term_entries": r.cross_term_entries,
        "orthogonality": r.orthogonality,
        "covers_tangent": r.covers_tangent,
        "invariance_angle": r.invariance_angle,
        "invariance_omega": r.invariance_omega,
        "c_one_sided": r.c_one_sided,
        "c_mirrored": r.c_mirrored,
        "angle_tol": r.angle_tol,
    }
    flags = " ".join(f"{k}:{'ok' if v else 'FAIL'}" for k, v in r.conditions.items())
    return CheckRecord("definition_3_1", PASS if r.passed else FAIL,
                       f"{flags}; theta1 {_fmt(vals['theta1'])}, theta2 {_fmt(vals['theta2'])}", vals)


def _check_lemmas_3(ctx: _Context) -> CheckRecord:
    r = ctx.slant()
    # the identities need J(block) to split into the block plus the normal space
    vals, unmet, worst = {}, ctx.slant_unmet(), 0.0
    for b in ("D1", "D2"):
        if not ctx.assignment.block(b):
            continue
        constant = r.classification(b) != "non-constant"
        lr = check_lemma_3_3_and_3_4(ctx.spec, ctx.assignment, b, ctx.points, r.theta(b),
                                     ctx.m.samples.probes, ctx.seed, constant, ctx.tol.rank_tol)
        vals[b] = {"theta": lr.theta, "r1": lr.r1, "r2": lr.r2, "r3": lr.r3, "pairs": lr.pairs,
                   "constant_angle": constant}
        if not constant:
            unmet.append(f"constant angle on {b}")
        worst = max(worst, lr.worst)
    vals["tolerance"] = ctx.tol.lemma_tol
    if not vals.keys() - {"tolerance"}:
        return CheckRecord("lemma_3_3_3_4", UNMET, "no slant blocks", vals, ["slant block present"])
    status = UNMET if unmet else (PASS if worst <= ctx.tol.lemma_tol else FAIL)
    return CheckRecord("lemma_3_3_3_4", status, f"worst residual {_fmt(worst)}", vals, unmet)


def _check_normal(ctx: _Context) -> CheckRecord:
    dims, resid, overlap = [], 0.0, 0.0
    for p in ctx.points:
        nd = normal_decomposition(ctx.spec.chart(p, ctx.tol.rank_tol), ctx.assignment, ctx.tol.rank_tol)
        dims.append([nd.omega_D1.dim, nd.omega_D2.dim, nd.mu.dim])
        resid = max(resid, nd.mu_invariance_residual)
        overlap = max(overlap, nd.overlap)
    unmet = ctx.slant_unmet()
    status = UNMET if unmet else (PASS if resid <= ctx.tol.ortho_tol else FAIL)
    uniq = sorted({tuple(d) for d in dims})
    return CheckRecord(
        "normal_decomposition", status,
        f"dims (wD1, wD2, mu) {[list(d) for d in uniq]}, mu J-invariance {_fmt(resid)}",
        {"dims": dims, "mu_invariance_residual": resid, "omega_overlap": overlap, "tolerance": ctx.tol.ortho_tol},
        unmet,
    )


def _identity_summary(results) -> dict:
    if not results:
        return {"count": 0}
    worst = max(results, key=lambda r: r.relative)
    return {
        "count": len(results),
        "max_residual": max(r.residual for r in results),
        "max_relative": worst.relative,
        "max_dominant_term": max(r.dominant for r in results),
        "worst_arguments": worst.arguments,
        "worst_point": list(worst.point),
        "regime": worst.regime,
    }


def _check_prop(ctx: _Context, name: str, fn: Callable) -> CheckRecord:
    a = ctx.assignment
    m = ctx.spec.m
    slant = (*a.D1, *a.D2)
    pts = ctx.points[:IDENTITY_POINTS]
    rep = ctx.slant()
    vals = {"points": len(pts), "tolerance": ctx.tol.fd_tol}
    worst = 0.0
    ran = False
    for variant, xs in (("statement", a.D1), ("proof", a.D)):
        res = []
        if slant:
            for X in unit_fields(m, xs):
                for Y in unit_fields(m, slant):
                    for Z in unit_fields(m, slant):
                        res += fn(ctx.spec, a, X, Y, Z, pts, report=rep, variant=variant,
                                  step=ctx.tol.fd_step, workers=ctx.workers)
        vals[variant] = _identity_summary(res)
        if res:
            ran = True
            worst = max(worst, vals[variant]["max_relative"])
    unmet = ctx.slant_unmet()
    for b in ("D1", "D2"):
        if a.block(b) and rep.classification(b) == "non-constant":
            unmet.append(f"constant angle on {b}")
    if not ran:
        return CheckRecord(name, UNMET, "no admissible arguments", vals, unmet + ["slant and D1/D blocks"])
    status = UNMET if unmet else (PASS if worst <= ctx.tol.fd_tol else FAIL)
    return CheckRecord(name, status, f"worst relative residual {_fmt(worst)} (FD regime)", vals, unmet)


def _check_warp(ctx: _Context) -> CheckRecord:
    w = ctx.warp()
    if w is None:
        return CheckRecord("warp", UNMET, "no warp split in manifest", {}, ["warp split"])
    vals = {
        "base": ctx.names(w.split.base),
        "fiber": ctx.names(w.split.fiber),
        "cross_residual": w.cross_residual,
        "base_dependence": w.base_dependence,
        "proportionality": w.proportionality,
        "f_samples": w.f_samples,
        "grad_log_f": w.grad_log_f,
        "max_grad_log_f": w.max_grad,
        "is_warped_product": w.is_warped,
        "trivial": w.trivial,
        "notes": list(w.notes),
        "tolerance": ctx.tol.warp_tol,
    }
    kind = "not a warped product"
    if w.is_warped:
        kind = "constant f" if w.trivial else f"warped, max |grad ln f| {_fmt(w.max_grad)}"
    return CheckRecord("warp", PASS if w.is_warped else FAIL,
                       f"cross {_fmt(w.cross_residual)}, proportionality {_fmt(w.proportionality)}: {kind}", vals)


def _warp_unmet(ctx: _Context) -> list:
    w = ctx.warp()
    if w is None:
        return ["warp split"]
    return [] if w.is_warped else ["warped product"]


def _check_eq51(ctx: _Context) -> CheckRecord:
    unmet = _warp_unmet(ctx)
    if unmet:
        return CheckRecord("eq_5_1", UNMET, "warped-product structure not established", {}, unmet)
    res = check_eq_5_1(ctx.spec, ctx.split, ctx.points, step=ctx.tol.fd_step)
    worst = max((r.residual for r in res), default=0.0)
    vals = {"count": len(res), "max_residual": worst, "tolerance": ctx.tol.connection_tol}
    if res:
        r0 = max(res, key=lambda r: r.residual)
        vals["worst"] = {"point": list(r0.point), "base": ctx.spec.params[r0.base_param],
                         "fiber": ctx.spec.params[r0.fiber_param], "dlogf": r0.dlogf}
    return CheckRecord("eq_5_1", PASS if worst <= ctx.tol.connection_tol else FAIL, f"worst residual {_fmt(worst)}", vals)


def _check_lemma51(ctx: _Context) -> CheckRecord:
    unmet = _warp_unmet(ctx)
    if ctx.split is None:
        return CheckRecord("lemma_5_1", UNMET, "no warp split in manifest", {}, unmet)
    unmet = unmet + ctx.slant_unmet()
    m, a, s = ctx.spec.m, ctx.assignment, ctx.split
    vals = {"tolerance": ctx.tol.lemma_tol}
    worst = 0.0
    for roles in ("statement", "proof"):
        res = []
        for X in unit_fields(m, s.base):
            if roles == "statement":
                trip = [(X, Y, Z) for Y in unit_fields(m, s.fiber) for Z in unit_fields(m, s.base)]
            else:
                trip = [(X, Y, Z) for Y in unit_fields(m, s.base) for Z in unit_fields(m, s.fiber)]
            for X_, Y, Z in trip:
                res += check_lemma_5_1(ctx.spec, a, s, X_, Y, Z, ctx.points, roles)
        vals[roles] = _identity_summary(res)
        if res:
            worst = max(worst, vals[roles]["max_relative"])
    status = UNMET if unmet else (PASS if worst <= ctx.tol.lemma_tol else FAIL)
    return CheckRecord("lemma_5_1", status, f"worst relative residual {_fmt(worst)} (jet regime)", vals, unmet)


def _check_lemma52(ctx: _Context) -> CheckRecord:
    unmet = _warp_unmet(ctx)
    if ctx.split is None:
        return CheckRecord("lemma_5_2", UNMET, "no warp split in manifest", {}, unmet)
    unmet = unmet + ctx.slant_unmet()
    m, a, s = ctx.spec.m, ctx.assignment, ctx.split
    res = []
    for X in unit_fields(m, s.base):
        for Z in unit_fields(m, s.fiber):
            for W in unit_fields(m, s.fiber):
                res += check_lemma_5_2(ctx.spec, a, s, X, Z, W, ctx.points)
    vals = {"statement": _identity_summary(res), "tolerance": ctx.tol.lemma_tol}
    worst = vals["statement"].get("max_relative", 0.0)
    status = UNMET if unmet else (PASS if worst <= ctx.tol.lemma_tol else FAIL)
    return CheckRecord("lemma_5_2", status, f"worst relative residual {_fmt(worst)} (jet regime)", vals, unmet)


def _check_dichotomy(ctx: _Context) -> CheckRecord:
    w = ctx.dichotomy()
    if w is None:
        return CheckRecord("dichotomy", UNMET, "no warp split in manifest", {}, ["warp split"])
    unmet = _warp_unmet(ctx) + ctx.slant_unmet()
    vals = {
        "verdict": w.verdict,
        "branch_residual": w.branch_residual,
        "cos2_theta2_grad_log_f": w.strengthened,
        "theta2": w.theta2,
        "max_grad_log_f": w.max_grad,
        "notes": list(w.notes),
        "tolerance": ctx.tol.branch_tol,
    }
    if unmet:
        status = UNMET
    elif w.verdict == NEITHER:
        status = FAIL
        vals["counterexample"] = True
    else:
        status = PASS if w.branch_residual <= ctx.tol.branch_tol else FAIL
    return CheckRecord("dichotomy", status, f"verdict {w.verdict}, residual {_fmt(w.branch_residual)}", vals, unmet)


_CHECKS = {
    "ambient": _check_ambient,
    "charts": _check_charts,
    "structure": _check_structure,
    "definition_3_1": _check_definition,
    "lemma_3_3_3_4": _check_lemmas_3,
    "normal_decomposition": _check_normal,
    "prop_4_1": lambda ctx: _check_prop(ctx, "prop_4_1", check_prop_4_1),
    "prop_4_2": lambda ctx: _check_prop(ctx, "prop_4_2", check_prop_4_2),
    "warp": _check_warp,
    "eq_5_1": _check_eq51,
    "lemma_5_1": _check_lemma51,
    "lemma_5_2": _check_lemma52,
    "dichotomy": _check_dichotomy,
}
assert tuple(_CHECKS) == CHECK_ORDER


# --- claims -------------------------------------------------------------------


def _claim_number(value, env=None) -> float:
    if isinstance(value, str):
        return float(E.evaluate(E.parse(value), env or {}))
    return float(value)


def _compare_claim(ctx: _Context, claim) -> dict:
    q = claim.quantity
    entry: dict[str, Any] = {"quantity": q, "claimed": claim.value, "tol": claim.tol, "note": claim.note}
    measured: Any = None
    agrees = False
    if q in ("theta1", "theta2"):
        measured = ctx.slant().theta("D1" if q == "theta1" else "D2")
        agrees = measured is not None and abs(measured - _claim_number(claim.value)) <= claim.tol
    elif q == "invariant_dim":
        dims = sorted({auto_invariant_block(ctx.spec.chart(p), ctx.tol.intersection_tol).dim for p in ctx.points})
        measured = dims[0] if len(dims) == 1 else dims
        agrees = dims == [int(claim.value)]
        if not agrees:
            entry["detail"] = "dimension of T ∩ J(T) at the sample points"
    elif q.startswith("definition_3_1"):
        r = ctx.slant()
        ok = r.passed if q == "definition_3_1" else r.conditions[q.split(".")[1]]
        measured = PASS if ok else FAIL
        agrees = measured == claim.value
        if not ok:
            entry["detail"] = {"failed_conditions": r.failed_conditions(),
                               "cross_term_entries": r.cross_term_entries,
                               "c_one_sided": r.c_one_sided, "c_mirrored": r.c_mirrored}
    elif q.startswith("metric."):
        _, p1, p2 = q.split(".")
        i, j = ctx.spec.index(p1), ctx.spec.index(p2)
        diffs, vals = [], []
        for p in ctx.points:
            g = float(ctx.spec.chart(p).gram[i, j])
            env = dict(zip(ctx.spec.params, p))
            vals.append(g)
            diffs.append(abs(g - _claim_number(claim.value, env)))
        measured = vals[0] if vals else None
        entry["max_abs_difference"] = max(diffs, default=0.0)
        agrees = bool(vals) and max(diffs) <= claim.tol
    elif q == "warp.f":
        w = ctx.warp()
        if w is not None:
            base_names = ctx.names(w.split.base)
            ref = None
            diffs = []
            for b, f in zip(w.base_points, w.f_samples):
                c = _claim_number(claim.value, dict(zip(base_names, b)))
                ref = c if ref is None else ref
                diffs.append(abs(f - c / ref))
            measured = w.f_samples
            entry["max_abs_difference"] = max(diffs)
            entry["detail"] = "f normalised to 1 at the first base point on both sides"
            agrees = max(diffs) <= claim.tol
    elif q == "verdict":
        w = ctx.dichotomy()
        measured = w.verdict if w is not None else None
        agrees = measured == claim.value
    entry["measured"] = measured
    entry["status"] = "AGREES" if agrees else "DISAGREES"
    return entry


# --- entry points -------------------------------------------------------------


def run(manifest: Manifest, workers: int = 1) -> RunReport:
    ctx = _Context(manifest, workers)
    records = []
    for name in CHECK_ORDER:
        if name not in manifest.checks:
            continue
        t0 = time.perf_counter()
        rec = _CHECKS[name](ctx)
        rec.seconds = time.perf_counter() - t0
        records.append(rec)
    disc = [_compare_claim(ctx, c) for c in manifest.claims]
    return RunReport(manifest, records, disc, ctx.points)


def emit(report: RunReport, fmt: str = "human", timings: bool = False) -> str:
    if fmt == "machine":
        return json.dumps(report.to_obj(timings), sort_keys=True, indent=1, allow_nan=False) + "\n"
    if fmt != "human":
        raise ValueError(f"unknown format {fmt!r}")
    m = report.manifest
    lines = [f"{m.name}: {len(report.points)} sample points, seed {m.samples.seed:#x}"]
    width = max(len(c.name) for c in report.checks) if report.checks else 0
    for c in report.checks:
        tag = f" [unmet: {', '.join(c.unmet)}]" if c.unmet else ""
        t = f" ({c.seconds * 1000:.1f} ms)" if timings else ""
        lines.append(f"  {c.name:<{width}}  {c.status:<18}  {c.summary}{tag}{t}")
    if report.discrepancies:
        lines.append("  claims:")
        for d in report.discrepancies:
            mark = "ok " if d["status"] == "AGREES" else "!! "
            lines.append(f"    {mark}{d['quantity']}: claimed {d['claimed']!r}, measured {_short(d['measured'])}")
    cnt = report.counts()
    lines.append(f"  {cnt[PASS]} pass, {cnt[FAIL]} fail, {cnt[UNMET]} precondition unmet")
    return "\n".join(lines) + "\n"


def _short(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    if isinstance(x, list) and len(x) > 4:
        return "[" + ", ".join(_short(v) for v in x[:4]) + ", ...]"
    if isinstance(x, list):
        return "[" + ", ".join(_short(v) for v in x) + "]"
    return repr(x)
