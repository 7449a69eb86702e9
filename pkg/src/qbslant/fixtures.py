"""Built-in manifests.

Parametrised fixtures are addressed as ``name(arg, ...)`` where every argument
is a constant expression, e.g. ``slant_plane(0.7)`` or ``polar_warp(acos(1/4))``.
"""
from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from typing import Callable

from . import expr as E
from .manifest import Manifest, from_obj

ACOS_THIRD = "acos(1/3)"


def _num(x: float) -> str:
    return repr(float(x))


# --- the corrected six-parameter example --------------------------------------

# sign pattern = (a1, b1, a2, b2, a3, b3, a4, b4): the coefficients of the
# slant legs on the extra complex line(s).  Leg k of u, v, w, r is (a_k, b_k).
CLAIMED_SIGNS = (-1, 1, 1, 1, -1, 1, 1, 1)


def _frame(signs, split_lines: bool) -> tuple[list[list[int]], int]:
    """Integer coordinate frame at theta = 0 for the given leg signs.

    Frame order is u, v, w, r, s, t.  With ``split_lines`` the w, r legs move
    from the shared complex line 5 onto a new line 7.  Rotating the (x1, x2)
    and (y1, y2) planes together is unitary and commutes with J, so theta = 0
    loses no generality for any J-metric quantity.
    """
    a1, b1, a2, b2, a3, b3, a4, b4 = signs
    n = 7 if split_lines else 6
    x = lambda k: 2 * (k - 1)
    y = lambda k: 2 * (k - 1) + 1
    leg = 7 if split_lines else 5

    def vec(entries):
        v = [0] * (2 * n)
        for idx, val in entries:
            v[idx] += val
        return v

    frame = [
        vec([(x(1), 1), (x(5), a1), (y(5), b1)]),
        vec([(y(1), 1), (x(5), a2), (y(5), b2)]),
        vec([(x(3), 1), (x(leg), a3), (y(leg), b3)]),
        vec([(y(3), 1), (x(leg), a4), (y(leg), b4)]),
        vec([(x(6), 1)]),
        vec([(y(6), 1)]),
    ]
    return frame, n


def _J(v: list[int]) -> list[int]:
    out = [0] * len(v)
    for i in range(0, len(v), 2):
        out[i], out[i + 1] = -v[i + 1], v[i]
    return out


def _dot(a, b) -> int:
    return sum(p * q for p, q in zip(a, b))


def _block_cos2(A, B) -> Fraction:
    """cos^2 of the slant angle of the real 2-plane span{A, B}."""
    det_g = _dot(A, A) * _dot(B, B) - _dot(A, B) ** 2
    return Fraction(_dot(_J(A), B) ** 2, det_g)


def exact_conditions(signs, split_lines: bool) -> dict:
    """Quasi bi-slant conditions in integer arithmetic for a sign pattern.

    Blocks D = {s, t}, D1 = {u, v}, D2 = {w, r}.  Each slant block is a real
    2-plane with constant frame, so its slant angle is automatically constant
    and cos^2 = <JA, B>^2 / det G.
    """
    F, _ = _frame(signs, split_lines)
    D, D1, D2 = (4, 5), (0, 1), (2, 3)
    a = all(_dot(F[i], F[j]) == 0 for P, Q in ((D, D1), (D, D2), (D1, D2)) for i in P for j in Q)
    # J(D) = D: the D legs are a full complex line
    b = _J(F[4]) == F[5]
    c = all(_dot(_J(F[i]), F[j]) == 0 for i in D1 for j in D2)
    c1 = _block_cos2(F[0], F[1])
    c2 = _block_cos2(F[2], F[3])
    return {"a": a, "b": b, "c": c, "cos2_theta1": c1, "cos2_theta2": c2}


def search_corrected_signs(split_lines: bool = True, target_cos2: Fraction = Fraction(1, 9)) -> list[tuple]:
    """All leg sign patterns passing every condition with both angles at target.

    Ordered by Hamming distance from the claimed signs, then lexicographically.
    """
    hits = []
    for signs in itertools.product((-1, 1), repeat=8):
        r = exact_conditions(signs, split_lines)
        if r["a"] and r["b"] and r["c"] and r["cos2_theta1"] == target_cos2 and r["cos2_theta2"] == target_cos2:
            hits.append(signs)
    dist = lambda s: sum(p != q for p, q in zip(s, CLAIMED_SIGNS))
    return sorted(hits, key=lambda s: (dist(s), s))


def _lin(terms) -> str:
    out = ""
    for coef, name in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        out += f"{sign}{name}" if abs(coef) == 1 else f"{sign}{abs(coef)}*{name}"
    out = out.lstrip("+")
    return out or "0"


# --- fixture builders ---------------------------------------------------------


def _base_1(name, components, n, claims, description) -> Manifest:
    return from_obj({
        "name": name,
        "description": description,
        "ambient_dim": n,
        "parameters": ["u", "v", "w", "r", "s", "t"],
        "immersion": components,
        "distributions": {"D": ["s", "t"], "D1": ["u", "v"], "D2": ["w", "r"]},
        "warp": {
            "base": ["s", "t"],
            "fiber": ["u", "v", "w", "r"],
            "base_points": [[0.0, 0.0], [1.0, -1.0], [2.0, 0.5]],
            "fiber_points": [[0.0, 0.0, 0.0, 0.0], [1.0, 2.0, -1.0, 0.5], [-0.3, 0.7, 1.1, -2.0]],
        },
        "samples": {
            "points": [[0.3, -0.2, 0.5, 1.0, 0.1, -0.4], [1.0, 1.0, 1.0, 1.0, 0.0, 0.0]],
            "ranges": {p: [-2.0, 2.0] for p in "uvwrst"},
            "count": 8,
        },
        "claims": claims,
    })


def example_7_1() -> Manifest:
    t = ACOS_THIRD
    comps = [
        f"u*cos({t})", f"v*cos({t})", f"u*sin({t})", f"v*sin({t})",
        f"w*cos({t})", f"r*cos({t})", f"w*sin({t})", f"r*sin({t})",
        "-u-w+v+r", "u+w+v+r", "s", "t",
    ]
    claims = [
        {"quantity": "theta1", "value": "acos(1/3)", "tol": 1e-9, "note": "claimed"},
        {"quantity": "theta2", "value": "acos(1/3)", "tol": 1e-9, "note": "claimed"},
        {"quantity": "invariant_dim", "value": 2, "tol": 0, "note": "claimed: D = span{Z5, Z6} as the invariant part"},
        {"quantity": "definition_3_1", "value": "PASS", "note": "claimed: proper quasi bi-slant"},
        {"quantity": "definition_3_1.a", "value": "PASS", "note": "claimed: orthogonal decomposition"},
        {"quantity": "metric.u.u", "value": 3, "tol": 1e-10, "note": "claimed metric"},
        {"quantity": "metric.w.w", "value": 3, "tol": 1e-10, "note": "claimed metric"},
        {"quantity": "metric.s.s", "value": 1, "tol": 1e-10, "note": "claimed metric"},
        {"quantity": "metric.u.w", "value": 0, "tol": 1e-10, "note": "claimed metric has no du dw term"},
        {"quantity": "metric.v.r", "value": 0, "tol": 1e-10, "note": "claimed metric has no dv dr term"},
        {"quantity": "warp.f", "value": "sqrt(3)", "tol": 1e-9, "note": "claimed: constant warping"},
        {"quantity": "verdict", "value": "RIEMANNIAN_PRODUCT", "note": "claimed"},
    ]
    return _base_1("example_7_1", comps, 6, claims,
                   "Six-parameter example in C^6 with both slant blocks sharing complex line 5.")


def fixture_7_1_corrected() -> Manifest:
    """Nearest sign pattern passing all conditions once the D2 legs use their own line."""
    hits = search_corrected_signs(split_lines=True)
    a1, b1, a2, b2, a3, b3, a4, b4 = hits[0]
    t = ACOS_THIRD
    comps = [
        f"u*cos({t})", f"v*cos({t})", f"u*sin({t})", f"v*sin({t})",
        f"w*cos({t})", f"r*cos({t})", f"w*sin({t})", f"r*sin({t})",
        _lin([(a1, "u"), (a2, "v")]), _lin([(b1, "u"), (b2, "v")]),
        "s", "t",
        _lin([(a3, "w"), (a4, "r")]), _lin([(b3, "w"), (b4, "r")]),
    ]
    claims = [
        {"quantity": "theta1", "value": "acos(1/3)", "tol": 1e-9, "note": "exact search target"},
        {"quantity": "theta2", "value": "acos(1/3)", "tol": 1e-9, "note": "exact search target"},
        {"quantity": "invariant_dim", "value": 2, "tol": 0, "note": "derived"},
        {"quantity": "definition_3_1", "value": "PASS", "note": "exact search"},
        {"quantity": "metric.u.w", "value": 0, "tol": 1e-10, "note": "derived"},
        {"quantity": "verdict", "value": "RIEMANNIAN_PRODUCT", "note": "derived"},
    ]
    return _base_1("fixture_7_1_corrected", comps, 7, claims,
                   "Six-parameter example with the w, r legs moved to complex line 7.")


def example_7_2() -> Manifest:
    return from_obj({
        "name": "example_7_2",
        "description": "Five-parameter example in C^5 with an anti-invariant block and polar warping.",
        "ambient_dim": 5,
        "parameters": ["u", "v", "w", "s", "t"],
        "immersion": ["v*cos(u)", "w*cos(u)", "v*sin(u)", "w*sin(u)", "-v+w", "v+w", "0", "0", "s", "t"],
        "distributions": {"D": ["s", "t"], "D1": ["v", "w"], "D2": ["u"]},
        "warp": {
            "base": ["s", "t", "v", "w"],
            "fiber": ["u"],
            "base_points": [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 3.0, 4.0], [0.5, -1.0, 2.0, 1.0], [1.0, 2.0, -1.0, 3.0]],
            "fiber_points": [[0.3], [1.1], [-2.0]],
        },
        "samples": {
            "points": [[0.3, 1.0, 1.0, 0.0, 0.0], [0.0, 1.0, 1.0, 0.0, 0.0]],
            "ranges": {"u": [-3.0, 3.0], "v": [0.5, 2.0], "w": [0.5, 2.0], "s": [-1.0, 1.0], "t": [-1.0, 1.0]},
            "count": 8,
        },
        "claims": [
            {"quantity": "theta1", "value": "acos(1/3)", "tol": 1e-9, "note": "claimed"},
            {"quantity": "theta2", "value": "pi/2", "tol": 1e-9, "note": "claimed"},
            {"quantity": "invariant_dim", "value": 2, "tol": 0, "note": "claimed"},
            {"quantity": "definition_3_1", "value": "PASS", "note": "claimed"},
            {"quantity": "metric.u.u", "value": "v^2+w^2", "tol": 1e-10, "note": "claimed metric"},
            {"quantity": "metric.v.v", "value": 3, "tol": 1e-10, "note": "claimed metric"},
            {"quantity": "metric.w.w", "value": 3, "tol": 1e-10, "note": "claimed metric"},
            {"quantity": "warp.f", "value": "sqrt(v^2+w^2)", "tol": 1e-8, "note": "claimed"},
            {"quantity": "verdict", "value": "QUASI_HEMI_SLANT", "note": "claimed"},
        ],
    })


def slant_plane(theta: float = 0.7) -> Manifest:
    th = _num(theta)
    return from_obj({
        "name": f"slant_plane({th})",
        "description": "Real plane of constant slant angle in C^2.",
        "ambient_dim": 2,
        "parameters": ["u", "v"],
        "immersion": ["u", f"v*cos({th})", f"v*sin({th})", "0"],
        "distributions": {"D1": ["u", "v"]},
        "samples": {"points": [[0.0, 0.0]], "ranges": {"u": [-2.0, 2.0], "v": [-2.0, 2.0]}, "count": 9},
        "checks": ["ambient", "charts", "structure", "definition_3_1", "lemma_3_3_3_4", "normal_decomposition"],
        "claims": [{"quantity": "theta1", "value": th, "tol": 1e-10, "note": "construction"}],
    })


def holomorphic_plane() -> Manifest:
    return from_obj({
        "name": "holomorphic_plane",
        "description": "Complex line C x {0} in C^2.",
        "ambient_dim": 2,
        "parameters": ["u", "v"],
        "immersion": ["u", "v", "0", "0"],
        "distributions": {"D": ["u", "v"]},
        "samples": {"points": [[0.0, 0.0]], "ranges": {"u": [-2.0, 2.0], "v": [-2.0, 2.0]}, "count": 9},
        "checks": ["ambient", "charts", "structure", "definition_3_1", "lemma_3_3_3_4", "normal_decomposition"],
        "claims": [{"quantity": "invariant_dim", "value": 2, "tol": 0, "note": "construction"}],
    })


def totally_real_plane() -> Manifest:
    return from_obj({
        "name": "totally_real_plane",
        "description": "Real plane R^2 in C^2.",
        "ambient_dim": 2,
        "parameters": ["u", "v"],
        "immersion": ["u", "0", "v", "0"],
        "distributions": {"D2": ["u", "v"]},
        "samples": {"points": [[0.0, 0.0]], "ranges": {"u": [-2.0, 2.0], "v": [-2.0, 2.0]}, "count": 9},
        "checks": ["ambient", "charts", "structure", "definition_3_1", "lemma_3_3_3_4", "normal_decomposition"],
        "claims": [
            {"quantity": "theta2", "value": "pi/2", "tol": 1e-10, "note": "construction"},
            {"quantity": "invariant_dim", "value": 0, "tol": 0, "note": "construction"},
        ],
    })


def complex_plane() -> Manifest:
    return from_obj({
        "name": "complex_plane",
        "description": "Identity embedding of C^2.",
        "ambient_dim": 2,
        "parameters": ["a", "b", "c", "d"],
        "immersion": ["a", "b", "c", "d"],
        "distributions": {"D": ["a", "b", "c", "d"]},
        "samples": {"points": [[0.0, 0.0, 0.0, 0.0]], "ranges": {p: [-1.0, 1.0] for p in "abcd"}, "count": 4},
        "checks": ["ambient", "charts", "structure", "definition_3_1", "normal_decomposition"],
        "claims": [{"quantity": "invariant_dim", "value": 4, "tol": 0, "note": "construction"}],
    })


def direct_product(theta1: float = 0.7, theta2: float = 1.2) -> Manifest:
    a, b = _num(theta1), _num(theta2)
    return from_obj({
        "name": f"direct_product({a}, {b})",
        "description": "C x slant plane x slant plane in C^5; flat and totally geodesic.",
        "ambient_dim": 5,
        "parameters": ["s", "t", "u", "v", "w", "r"],
        "immersion": ["s", "t", "u", f"v*cos({a})", f"v*sin({a})", "0", "w", f"r*cos({b})", f"r*sin({b})", "0"],
        "distributions": {"D": ["s", "t"], "D1": ["u", "v"], "D2": ["w", "r"]},
        "warp": {
            "base": ["s", "t"],
            "fiber": ["u", "v", "w", "r"],
            "base_points": [[0.0, 0.0], [1.0, -1.0], [-0.5, 2.0]],
            "fiber_points": [[0.0, 0.0, 0.0, 0.0], [1.0, -1.0, 0.5, 2.0], [0.3, 0.4, -1.2, 0.1]],
        },
        "samples": {"points": [[0.0] * 6], "ranges": {p: [-1.0, 1.0] for p in "stuvwr"}, "count": 3},
        "claims": [
            {"quantity": "theta1", "value": a, "tol": 1e-9, "note": "construction"},
            {"quantity": "theta2", "value": b, "tol": 1e-9, "note": "construction"},
            {"quantity": "verdict", "value": "RIEMANNIAN_PRODUCT", "note": "construction"},
        ],
    })


def polar_warp(theta1: float = math.acos(1 / 3)) -> Manifest:
    """The five-parameter polar template with the D1 angle set to theta1.

    Legs x3 = a(w - v), y3 = a(v + w) with a^2 = (1 + c) / (2 (1 - c)) give
    cos(theta1) = c; a = 1 recovers the original example.
    """
    c = math.cos(theta1)
    a = _num(math.sqrt((1 + c) / (2 * (1 - c))))
    th = _num(theta1)
    return from_obj({
        "name": f"polar_warp({th})",
        "description": "Polar-warped template with an anti-invariant fiber direction.",
        "ambient_dim": 5,
        "parameters": ["u", "v", "w", "s", "t"],
        "immersion": ["v*cos(u)", "w*cos(u)", "v*sin(u)", "w*sin(u)", f"{a}*(w-v)", f"{a}*(v+w)", "0", "0", "s", "t"],
        "distributions": {"D": ["s", "t"], "D1": ["v", "w"], "D2": ["u"]},
        "warp": {
            "base": ["s", "t", "v", "w"],
            "fiber": ["u"],
            "base_points": [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 3.0, 4.0], [0.5, -1.0, 2.0, 1.0]],
            "fiber_points": [[0.3], [1.1], [-2.0]],
        },
        "samples": {
            "points": [[0.3, 1.0, 1.0, 0.0, 0.0]],
            "ranges": {"u": [-3.0, 3.0], "v": [0.5, 2.0], "w": [0.5, 2.0], "s": [-1.0, 1.0], "t": [-1.0, 1.0]},
            "count": 3,
        },
        "claims": [
            {"quantity": "theta1", "value": th, "tol": 1e-9, "note": "construction"},
            {"quantity": "theta2", "value": "pi/2", "tol": 1e-9, "note": "construction"},
            {"quantity": "warp.f", "value": "sqrt(v^2+w^2)", "tol": 1e-8, "note": "construction"},
            {"quantity": "verdict", "value": "QUASI_HEMI_SLANT", "note": "construction"},
        ],
    })


def non_product() -> Manifest:
    return from_obj({
        "name": "non_product",
        "description": "Graph surface (u, v, uv, 0) in C^2 whose metric has a cross term.",
        "ambient_dim": 2,
        "parameters": ["u", "v"],
        "immersion": ["u", "v", "u*v", "0"],
        "distributions": {"D1": ["u", "v"]},
        "warp": {
            "base": ["u"],
            "fiber": ["v"],
            "base_points": [[1.0], [2.0], [-1.0]],
            "fiber_points": [[1.0], [0.5], [2.0]],
        },
        "samples": {"points": [[1.0, 1.0]], "ranges": {"u": [0.5, 2.0], "v": [0.5, 2.0]}, "count": 4},
        "checks": ["ambient", "charts", "structure", "definition_3_1", "warp", "dichotomy"],
        "claims": [{"quantity": "verdict", "value": "NEITHER", "note": "construction"}],
    })


REGISTRY: dict[str, Callable[..., Manifest]] = {
    "example_7_1": example_7_1,
    "example_7_2": example_7_2,
    "fixture_7_1_corrected": fixture_7_1_corrected,
    "slant_plane": slant_plane,
    "holomorphic_plane": holomorphic_plane,
    "totally_real_plane": totally_real_plane,
    "complex_plane": complex_plane,
    "direct_product": direct_product,
    "polar_warp": polar_warp,
    "non_product": non_product,
}

_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def get_fixture(spec: str) -> Manifest:
    """Resolve ``name`` or ``name(arg, ...)`` to a manifest."""
    m = _CALL.match(spec)
    if not m or m.group(1) not in REGISTRY:
        raise KeyError(f"unknown fixture {spec!r}")
    name, argtext = m.group(1), m.group(2)
    args: list[float] = []
    if argtext is not None and argtext.strip():
        for part in argtext.split(","):
            args.append(float(E.evaluate(E.parse(part), {})))
    try:
        return REGISTRY[name](*args)
    except TypeError as exc:
        raise KeyError(f"bad arguments for fixture {name}: {exc}") from exc


def fixture_names() -> list[str]:
    return list(REGISTRY)


def default_suite() -> list[str]:
    """Fixtures exercised by a full suite run."""
    return [
        "example_7_1",
        "example_7_2",
        "fixture_7_1_corrected",
        "slant_plane",
        "holomorphic_plane",
        "totally_real_plane",
        "direct_product",
        "polar_warp",
        "non_product",
    ]
