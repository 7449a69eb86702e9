"""Acceptance criteria, one test per criterion at the stated tolerances."""
import json
import math
import time

import numpy as np

from qbslant import expr as E
from qbslant.fixtures import (
    default_suite,
    direct_product,
    example_7_1,
    example_7_2,
    fixture_7_1_corrected,
    get_fixture,
    polar_warp,
    slant_plane,
)
from qbslant.identities import check_lemma_5_1, check_lemma_5_2, check_prop_4_1, check_prop_4_2, unit_fields
from qbslant.jet import Jet2
from qbslant.linalg import gram_schmidt, project
from qbslant.report import emit, run
from qbslant.slant import auto_invariant_block, check_lemma_3_3_and_3_4, verify_definition_3_1
from qbslant.warp import NEITHER, QUASI_HEMI_SLANT, RIEMANNIAN_PRODUCT, analyze_warp, check_eq_5_1, dichotomy_check

THIRD = math.acos(1 / 3)


def loaded(m):
    spec = m.spec()
    return spec, m.assignment(spec), m.split(spec), m.sample_points()


def test_criterion_1_example_7_2(record_property):
    record_property("criterion", "1 example_7_2 reproduction")
    m = example_7_2()
    spec, a, split, pts = loaded(m)
    assert len(pts) >= 10 and m.samples.probes >= 8
    rep = verify_definition_3_1(spec, a, pts, probes=m.samples.probes)
    d1, d2 = rep.angles["D1"].samples, rep.angles["D2"].samples
    assert len(d1) >= 10 * 8 and len(d2) >= 10 * 8
    assert max(abs(t - THIRD) for t in d1) < 1e-9
    assert max(abs(t - math.pi / 2) for t in d2) < 1e-9
    assert {auto_invariant_block(spec.chart(p)).dim for p in pts} == {2}
    w = analyze_warp(spec, split, m.warp.base_points, m.warp.fiber_points)
    # base points 0 and 1 are (s, t, v, w) = (0, 0, 1, 0) and (0, 0, 3, 4)
    assert m.warp.base_points[0][2:] == [1.0, 0.0] and m.warp.base_points[1][2:] == [3.0, 4.0]
    assert abs(w.f_samples[1] / w.f_samples[0] - 5.0) < 1e-8
    report = run(m)
    assert report.check("dichotomy").values["verdict"] == QUASI_HEMI_SLANT
    assert report.exit_code == 0


def test_criterion_2_example_7_1(record_property):
    record_property("criterion", "2 example_7_1 reproduction with discrepancy")
    m = example_7_1()
    spec, a, split, pts = loaded(m)
    rep = verify_definition_3_1(spec, a, pts)
    for b in ("D1", "D2"):
        assert max(abs(t - THIRD) for t in rep.angles[b].samples) < 1e-9
    # D = span{Z5, Z6} is J-invariant
    for p in pts:
        ch = spec.chart(p)
        D = gram_schmidt([ch.frame[i] for i in a.D])
        for v in D.basis:
            Jv = ch.J(v)
            assert np.linalg.norm(Jv - project(Jv, D)) < 1e-10
    assert [spec.params[i] for i in split.base] == ["s", "t"]
    assert [spec.params[i] for i in split.fiber] == ["u", "v", "w", "r"]
    obj = json.loads(emit(run(m), "machine"))
    dich = next(c for c in obj["checks"] if c["name"] == "dichotomy")
    assert dich["values"]["verdict"] == RIEMANNIAN_PRODUCT
    disc = {d["quantity"]: d for d in obj["discrepancies"]}
    cond_a = disc["definition_3_1.a"]
    assert cond_a["measured"] == "FAIL" and cond_a["status"] == "DISAGREES"
    entries = {tuple(e["params"]): e["value"] for e in cond_a["detail"]["cross_term_entries"]}
    assert abs(entries[("u", "w")] - 2.0) <= 1e-10
    assert abs(entries[("v", "r")] - 2.0) <= 1e-10
    assert "a" in cond_a["detail"]["failed_conditions"]


def test_criterion_3_lemma_suite(record_property):
    record_property("criterion", "3 slant block identities")
    cases = [(example_7_2(), "D1", THIRD), (fixture_7_1_corrected(), "D1", THIRD),
             (fixture_7_1_corrected(), "D2", THIRD)]
    cases += [(slant_plane(t), "D1", t) for t in (0.3, 0.7, 1.2)]
    for m, block, theta in cases:
        spec, a, _, pts = loaded(m)
        lr = check_lemma_3_3_and_3_4(spec, a, block, pts, theta, probes=m.samples.probes)
        assert lr.pairs >= 80, (m.name, block)
        assert lr.r1 < 1e-8 and lr.r2 < 1e-8 and lr.r3 < 1e-8, (m.name, block, lr)


def test_criterion_4_structure_equations(record_property):
    record_property("criterion", "4 structure equations")
    m = example_7_2()
    spec = m.spec()
    rng = np.random.default_rng(20240401)
    lo = np.array([m.samples.ranges[n][0] for n in spec.params])
    hi = np.array([m.samples.ranges[n][1] for n in spec.params])
    skew = pyth = gw = 0.0
    for _ in range(20):
        ch = spec.chart(lo + (hi - lo) * rng.random(spec.m))
        X, Y = (ch.from_coefficients(rng.standard_normal(spec.m)) for _ in range(2))
        skew = max(skew, abs(float(ch.phi(X) @ Y + X @ ch.phi(Y))))
        JX = ch.J(X)
        pyth = max(pyth, abs(JX @ JX - ch.phi(X) @ ch.phi(X) - ch.omega(X) @ ch.omega(X)) / (X @ X))
        x, y = ch.to_coefficients(X), ch.to_coefficients(Y)
        for N in ch.normal.basis:
            A = ch.gram_inv @ ch.sff_matrix(N)
            gw = max(gw, abs(float(ch.sigma_of(x, y) @ N) - ch.inner(A @ x, y)))
    assert skew < 1e-10 and pyth < 1e-10 and gw < 1e-9
    amb = run(m.with_overrides(checks=["ambient"])).check("ambient").values
    assert amb["hermitian"] < 1e-12 and amb["kaehler_parallel"] < 1e-12 and amb["j_squared"] < 1e-12


def test_criterion_5_identity_suite(record_property):
    record_property("criterion", "5 long identities and warped-product equations")
    for m in (fixture_7_1_corrected(), example_7_2()):
        spec, a, _, pts = loaded(m)
        rep = verify_definition_3_1(spec, a, pts)
        slant = (*a.D1, *a.D2)
        for variant, xs in (("statement", a.D1), ("proof", a.D)):
            for X in unit_fields(spec.m, xs):
                for Y in unit_fields(spec.m, slant):
                    for Z in unit_fields(spec.m, slant):
                        for fn in (check_prop_4_1, check_prop_4_2):
                            for r in fn(spec, a, X, Y, Z, pts[:4], report=rep, variant=variant):
                                assert r.residual < 1e-5, (m.name, r)
    m = example_7_2()
    spec, a, s, pts = loaded(m)
    assert len(pts) >= 10
    for X in unit_fields(5, s.base):
        for Y in unit_fields(5, s.base):
            for Z in unit_fields(5, s.fiber):
                for r in check_lemma_5_1(spec, a, s, X, Y, Z, pts, roles="proof"):
                    assert r.residual < 1e-6
                for r in check_lemma_5_1(spec, a, s, X, Z, Y, pts, roles="statement"):
                    assert r.residual < 1e-6
        for Z in unit_fields(5, s.fiber):
            for W in unit_fields(5, s.fiber):
                assert all(r.residual < 1e-6 for r in check_lemma_5_2(spec, a, s, X, Z, W, pts))
    hand = [0.0, 1.0, 1.0, 0.0, 0.0]
    assert hand in pts
    res = check_eq_5_1(spec, s, pts)
    assert len({r.point for r in res}) == len(pts)
    assert max(r.residual for r in res) < 1e-8
    v, u = spec.index("v"), spec.index("u")
    r0 = next(r for r in res if list(r.point) == hand and r.base_param == v and r.fiber_param == u)
    assert np.allclose(r0.nabla, [0.5, 0, 0, 0, 0], atol=1e-14)
    w = dichotomy_check(spec, a, analyze_warp(spec, s, m.warp.base_points, m.warp.fiber_points),
                        verify_definition_3_1(spec, a, pts))
    assert w.branch_residual < 1e-9


def generated_family(count=60, seed=61):
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        t1 = float(rng.uniform(0.05, math.pi / 2 - 0.05))
        if k % 2:
            out.append(polar_warp(t1))
        else:
            out.append(direct_product(t1, float(rng.uniform(0.05, math.pi / 2))))
    return out


def test_criterion_6_dichotomy_property(record_property):
    record_property("criterion", "6 dichotomy never NEITHER on generated fixtures")
    admitted = 0
    for m in generated_family():
        report = run(m.with_overrides(checks=["definition_3_1", "warp", "dichotomy"]))
        if report.check("definition_3_1").status != "PASS" or report.check("warp").status != "PASS":
            continue
        admitted += 1
        assert report.check("dichotomy").values["verdict"] != NEITHER, m.name
    assert admitted >= 50


def expression_pool():
    pool = []
    for name in default_suite() + ["polar_warp(1.0)", "direct_product(0.4, 1.1)", "slant_plane(1.2)"]:
        m = get_fixture(name)
        lo = [m.samples.ranges[p][0] for p in m.parameters]
        hi = [m.samples.ranges[p][1] for p in m.parameters]
        for src in m.immersion:
            pool.append((src, m.parameters, lo, hi))
    return pool


def richardson(f, h):
    return (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h)


def test_criterion_7_jets_match_finite_differences(record_property):
    record_property("criterion", "7 jet derivatives vs finite differences")
    pool = expression_pool()
    rng = np.random.default_rng(7)
    h = 1e-3
    worst = 0.0
    for _ in range(200):
        src, params, lo, hi = pool[rng.integers(len(pool))]
        tree = E.parse(src)
        p = np.array(lo) + (np.array(hi) - np.array(lo)) * rng.random(len(params))
        f = lambda q: float(E.evaluate(tree, dict(zip(params, q))))
        j = E.evaluate(tree, {n: Jet2.seed(list(p), i) for i, n in enumerate(params)})
        grad = np.asarray(getattr(j, "grad", np.zeros(len(params))))
        hess = np.asarray(getattr(j, "hess", np.zeros((len(params),) * 2)))
        m = len(params)
        eye = np.eye(m)
        fd_g = np.array([richardson(lambda t: f(p + t * eye[i]), h) for i in range(m)])
        fd_h = np.array([[richardson(lambda t: richardson(lambda r: f(p + t * eye[i] + r * eye[k]), h), h)
                          for k in range(m)] for i in range(m)])
        scale_g = max(1.0, float(np.max(np.abs(grad))))
        scale_h = max(1.0, float(np.max(np.abs(hess))))
        worst = max(worst, float(np.max(np.abs(grad - fd_g))) / scale_g,
                    float(np.max(np.abs(hess - fd_h))) / scale_h)
    assert worst < 1e-6


def test_criterion_8_determinism(record_property):
    record_property("criterion", "8 byte-identical suite reports")
    suite = [get_fixture(n) for n in default_suite()]

    def suite_run(workers):
        texts = []
        for m in suite:
            t0 = time.perf_counter()
            texts.append(emit(run(m, workers=workers), "machine"))
            assert time.perf_counter() - t0 < 1.0, m.name
        return "".join(texts).encode()

    first = suite_run(1)
    assert suite_run(1) == first
    assert suite_run(4) == first
