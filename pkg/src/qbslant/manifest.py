"""JSON manifests describing an immersion, its distributions and the checks to run."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import expr as E
from .geometry import ImmersionSpec
from .slant import DEFAULT_PROBES, DEFAULT_SEED, DistributionAssignment
from .tolerances import Tolerances
from .warp import WarpSplit

CHECK_ORDER = (
    "ambient",
    "charts",
    "structure",
    "definition_3_1",
    "lemma_3_3_3_4",
    "normal_decomposition",
    "prop_4_1",
    "prop_4_2",
    "warp",
    "eq_5_1",
    "lemma_5_1",
    "lemma_5_2",
    "dichotomy",
)

_TOP_KEYS = {
    "name", "description", "ambient_dim", "parameters", "immersion", "distributions",
    "warp", "samples", "tolerances", "checks", "claims",
}
_SAMPLE_STREAM = 3
CLAIM_PATTERN = re.compile(
    r"^(theta1|theta2|invariant_dim|verdict|warp\.f|definition_3_1(\.[a-e])?|metric\.[A-Za-z_]\w*\.[A-Za-z_]\w*)$"
)


class ManifestError(ValueError):
    """Bad manifest.  ``path`` locates the offending field (e.g. ``immersion``)."""

    def __init__(self, message: str, path: str = "", line: Optional[int] = None, column: Optional[int] = None):
        self.path = path
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}, column {column}: "
        elif path:
            where = f"{path}: "
        super().__init__(where + message)


@dataclass
class WarpSpec:
    base: list[str]
    fiber: list[str]
    base_points: list[list[float]]
    fiber_points: list[list[float]]


@dataclass
class SampleSpec:
    points: list[list[float]] = field(default_factory=list)
    ranges: dict[str, list[float]] = field(default_factory=dict)
    count: int = 0
    seed: int = DEFAULT_SEED
    probes: int = DEFAULT_PROBES


@dataclass
class Claim:
    quantity: str
    value: Any
    tol: float = 1e-9
    note: str = ""


@dataclass
class Manifest:
    name: str
    ambient_dim: int
    parameters: list[str]
    immersion: list[str]
    distributions: dict[str, list[str]]
    warp: Optional[WarpSpec] = None
    samples: SampleSpec = field(default_factory=SampleSpec)
    tolerances: Tolerances = field(default_factory=Tolerances)
    checks: list[str] = field(default_factory=lambda: list(CHECK_ORDER))
    claims: list[Claim] = field(default_factory=list)
    description: str = ""

    # derived objects

    def spec(self) -> ImmersionSpec:
        return ImmersionSpec.from_strings(self.parameters, self.immersion, self.ambient_dim)

    def assignment(self, spec: ImmersionSpec) -> DistributionAssignment:
        return DistributionAssignment.from_names(spec, self.distributions)

    def split(self, spec: ImmersionSpec) -> Optional[WarpSplit]:
        if self.warp is None:
            return None
        return WarpSplit.from_names(spec, self.warp.base, self.warp.fiber)

    def sample_points(self) -> list[list[float]]:
        """Explicit points followed by ``count`` seeded draws from the ranges."""
        pts = [list(map(float, p)) for p in self.samples.points]
        if self.samples.count:
            rng = np.random.default_rng(np.random.SeedSequence([self.samples.seed, _SAMPLE_STREAM]))
            lo = np.array([self.samples.ranges[n][0] for n in self.parameters], dtype=float)
            hi = np.array([self.samples.ranges[n][1] for n in self.parameters], dtype=float)
            for _ in range(self.samples.count):
                pts.append((lo + (hi - lo) * rng.random(len(lo))).tolist())
        return pts

    def with_overrides(self, seed: Optional[int] = None, checks: Optional[list[str]] = None) -> "Manifest":
        import copy

        m = copy.deepcopy(self)
        if seed is not None:
            m.samples.seed = seed
        if checks is not None:
            m.checks = _validate_checks(checks, "checks")
        return m

    def to_json_obj(self) -> dict:
        """Fully resolved manifest, defaults included."""
        obj = {
            "name": self.name,
            "description": self.description,
            "ambient_dim": self.ambient_dim,
            "parameters": list(self.parameters),
            "immersion": list(self.immersion),
            "distributions": {k: list(self.distributions.get(k, [])) for k in ("D", "D1", "D2")},
            "samples": {
                "points": self.samples.points,
                "ranges": self.samples.ranges,
                "count": self.samples.count,
                "seed": self.samples.seed,
                "probes": self.samples.probes,
            },
            "tolerances": self.tolerances.as_dict(),
            "checks": list(self.checks),
            "claims": [
                {"quantity": c.quantity, "value": c.value, "tol": c.tol, "note": c.note} for c in self.claims
            ],
        }
        if self.warp is not None:
            obj["warp"] = {
                "base": self.warp.base,
                "fiber": self.warp.fiber,
                "base_points": self.warp.base_points,
                "fiber_points": self.warp.fiber_points,
            }
        return obj

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj(), indent=2, sort_keys=True) + "\n"


# --- validation ---------------------------------------------------------------


def _expect(cond: bool, msg: str, path: str):
    if not cond:
        raise ManifestError(msg, path)


def _number(x, path: str) -> float:
    _expect(isinstance(x, (int, float)) and not isinstance(x, bool), "expected a number", path)
    _expect(math.isfinite(float(x)), "expected a finite number", path)
    return float(x)


def _points(obj, width: int, path: str) -> list[list[float]]:
    _expect(isinstance(obj, list), "expected a list of points", path)
    out = []
    for i, p in enumerate(obj):
        _expect(isinstance(p, list), "expected a list of numbers", f"{path}[{i}]")
        _expect(len(p) == width, f"expected {width} coordinates, got {len(p)}", f"{path}[{i}]")
        out.append([_number(x, f"{path}[{i}][{k}]") for k, x in enumerate(p)])
    return out


def _names(obj, path: str) -> list[str]:
    _expect(isinstance(obj, list) and all(isinstance(s, str) for s in obj), "expected a list of names", path)
    return list(obj)


def _validate_checks(obj, path: str) -> list[str]:
    names = _names(obj, path)
    for i, n in enumerate(names):
        _expect(n in CHECK_ORDER, f"unknown check {n!r}", f"{path}[{i}]")
    # run order is fixed regardless of how the list is written
    return [c for c in CHECK_ORDER if c in names]


def from_obj(obj: Any) -> Manifest:
    _expect(isinstance(obj, dict), "manifest must be a JSON object", "")
    unknown = sorted(set(obj) - _TOP_KEYS)
    _expect(not unknown, f"unknown field(s) {unknown}", "")
    for key in ("name", "ambient_dim", "parameters", "immersion"):
        _expect(key in obj, "missing required field", key)
    name = obj["name"]
    _expect(isinstance(name, str) and name, "expected a non-empty string", "name")
    n = obj["ambient_dim"]
    _expect(isinstance(n, int) and not isinstance(n, bool) and n >= 1, "expected a positive integer", "ambient_dim")
    params = _names(obj["parameters"], "parameters")
    _expect(len(params) > 0, "need at least one parameter", "parameters")
    _expect(len(set(params)) == len(params), "duplicate parameter names", "parameters")
    for i, p in enumerate(params):
        _expect(p.isidentifier() and p not in E.FUNCTIONS and p != "pi", f"invalid parameter name {p!r}",
                f"parameters[{i}]")
    imm = obj["immersion"]
    _expect(isinstance(imm, list) and all(isinstance(s, str) for s in imm), "expected a list of strings",
            "immersion")
    _expect(len(imm) == 2 * n, f"expected {2 * n} components, got {len(imm)}", "immersion")
    for i, s in enumerate(imm):
        try:
            ast = E.parse(s)
        except E.ParseError as exc:
            raise ManifestError(str(exc), f"immersion[{i}]") from exc
        extra = [v for v in E.free_variables(ast) if v not in params]
        _expect(not extra, f"undeclared name(s) {extra}", f"immersion[{i}]")

    dist = obj.get("distributions", {})
    _expect(isinstance(dist, dict), "expected an object", "distributions")
    for k in dist:
        _expect(k in ("D", "D1", "D2"), f"unknown block {k!r}", f"distributions.{k}")
    groups = {}
    for k in ("D", "D1", "D2"):
        names = _names(dist.get(k, []), f"distributions.{k}")
        for i, nm in enumerate(names):
            _expect(nm in params, f"undeclared parameter {nm!r}", f"distributions.{k}[{i}]")
        groups[k] = names
    flat = [x for g in groups.values() for x in g]
    _expect(len(flat) == len(set(flat)), "blocks must be disjoint", "distributions")

    warp = None
    if obj.get("warp") is not None:
        w = obj["warp"]
        _expect(isinstance(w, dict), "expected an object", "warp")
        base = _names(w.get("base", []), "warp.base")
        fiber = _names(w.get("fiber", []), "warp.fiber")
        _expect(len(fiber) > 0, "empty fiber", "warp.fiber")
        _expect(sorted(base + fiber) == sorted(params), "base and fiber must partition the parameters", "warp")
        bp = _points(w.get("base_points", []), len(base), "warp.base_points")
        fp = _points(w.get("fiber_points", []), len(fiber), "warp.fiber_points")
        _expect(len(bp) > 0, "need at least one base point", "warp.base_points")
        _expect(len(fp) > 0, "need at least one fiber point", "warp.fiber_points")
        warp = WarpSpec(base, fiber, bp, fp)

    s = obj.get("samples", {})
    _expect(isinstance(s, dict), "expected an object", "samples")
    samples = SampleSpec()
    samples.points = _points(s.get("points", []), len(params), "samples.points")
    if "count" in s:
        c = s["count"]
        _expect(isinstance(c, int) and not isinstance(c, bool) and c >= 0, "expected a count >= 0", "samples.count")
        samples.count = c
    if "seed" in s:
        sd = s["seed"]
        _expect(isinstance(sd, int) and not isinstance(sd, bool) and 0 <= sd < 2 ** 64, "expected a 64-bit seed",
                "samples.seed")
        samples.seed = sd
    if "probes" in s:
        pr = s["probes"]
        _expect(isinstance(pr, int) and not isinstance(pr, bool) and pr >= 8, "expected at least 8 probes",
                "samples.probes")
        samples.probes = pr
    rng = s.get("ranges", {})
    _expect(isinstance(rng, dict), "expected an object", "samples.ranges")
    for k, v in rng.items():
        _expect(k in params, f"undeclared parameter {k!r}", f"samples.ranges.{k}")
        _expect(isinstance(v, list) and len(v) == 2, "expected [low, high]", f"samples.ranges.{k}")
        lo, hi = _number(v[0], f"samples.ranges.{k}[0]"), _number(v[1], f"samples.ranges.{k}[1]")
        _expect(lo <= hi, "low must not exceed high", f"samples.ranges.{k}")
        samples.ranges[k] = [lo, hi]
    if samples.count:
        missing = [p for p in params if p not in samples.ranges]
        _expect(not missing, f"ranges missing for {missing}", "samples.ranges")
    _expect(samples.points or samples.count, "need explicit points or a sample count", "samples")

    tol_obj = obj.get("tolerances", {})
    _expect(isinstance(tol_obj, dict), "expected an object", "tolerances")
    for k, v in tol_obj.items():
        _number(v, f"tolerances.{k}")
    try:
        tol = Tolerances.from_overrides(tol_obj)
    except (KeyError, ValueError) as exc:
        raise ManifestError(str(exc).strip("'\""), "tolerances") from exc

    checks = _validate_checks(obj["checks"], "checks") if "checks" in obj else list(CHECK_ORDER)

    claims = []
    cl = obj.get("claims", [])
    _expect(isinstance(cl, list), "expected a list", "claims")
    for i, c in enumerate(cl):
        path = f"claims[{i}]"
        _expect(isinstance(c, dict) and "quantity" in c and "value" in c, "expected {quantity, value}", path)
        q = c["quantity"]
        _expect(isinstance(q, str) and CLAIM_PATTERN.match(q) is not None, "unsupported quantity", f"{path}.quantity")
        if q.startswith("metric."):
            _, p1, p2 = q.split(".")
            _expect(p1 in params and p2 in params, "metric entry names undeclared parameters", f"{path}.quantity")
        tolv = _number(c.get("tol", 1e-9), f"{path}.tol")
        claims.append(Claim(c["quantity"], c["value"], tolv, str(c.get("note", ""))))

    desc = obj.get("description", "")
    _expect(isinstance(desc, str), "expected a string", "description")
    return Manifest(
        name=name,
        ambient_dim=n,
        parameters=params,
        immersion=list(imm),
        distributions=groups,
        warp=warp,
        samples=samples,
        tolerances=tol,
        checks=checks,
        claims=claims,
        description=desc,
    )


def loads(text: str) -> Manifest:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return from_obj(obj)


def load_manifest(path) -> Manifest:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ManifestError(f"cannot read {p}: {exc.strerror}") from exc
    except UnicodeDecodeError as exc:
        raise ManifestError(f"{p} is not valid UTF-8") from exc
    return loads(text)
