import copy
import json

import pytest

from qbslant.fixtures import example_7_2
from qbslant.manifest import CHECK_ORDER, ManifestError, from_obj, load_manifest, loads
from qbslant.slant import DEFAULT_PROBES, DEFAULT_SEED
from qbslant.tolerances import Tolerances

MINIMAL = {
    "name": "plane",
    "ambient_dim": 2,
    "parameters": ["u", "v"],
    "immersion": ["u", "0", "v", "0"],
    "distributions": {"D2": ["u", "v"]},
    "samples": {"points": [[0.0, 0.0]]},
}


def with_(**changes):
    obj = copy.deepcopy(MINIMAL)
    obj.update(changes)
    return obj


def test_defaults_are_echoed():
    m = from_obj(MINIMAL)
    out = m.to_json_obj()
    assert out["samples"]["seed"] == DEFAULT_SEED
    assert out["samples"]["probes"] == DEFAULT_PROBES
    assert out["tolerances"] == Tolerances().as_dict()
    assert out["checks"] == list(CHECK_ORDER)
    assert out["distributions"] == {"D": [], "D1": [], "D2": ["u", "v"]}
    assert from_obj(json.loads(m.dumps())).to_json_obj() == out


def test_component_count_error_names_the_field():
    m = example_7_2().to_json_obj()
    m["immersion"] = m["immersion"][:9]
    with pytest.raises(ManifestError) as info:
        from_obj(m)
    assert info.value.path == "immersion"
    assert "expected 10 components, got 9" in str(info.value)


@pytest.mark.parametrize(
    "changes, path",
    [
        ({"immersion": ["u", "0", "v", "1+"]}, "immersion[3]"),
        ({"immersion": ["u", "0", "q", "0"]}, "immersion[2]"),
        ({"parameters": ["u", "u"]}, "parameters"),
        ({"parameters": ["u", "sin"]}, "parameters[1]"),
        ({"distributions": {"D2": ["u"], "D1": ["u"]}}, "distributions"),
        ({"distributions": {"D3": ["u"]}}, "distributions.D3"),
        ({"samples": {"points": [[0.0]]}}, "samples.points[0]"),
        ({"samples": {"count": 3}}, "samples.ranges"),
        ({"samples": {"points": [[0, 0]], "probes": 2}}, "samples.probes"),
        ({"samples": {}}, "samples"),
        ({"tolerances": {"angle_tol": "big"}}, "tolerances.angle_tol"),
        ({"tolerances": {"bogus": 1.0}}, "tolerances"),
        ({"checks": ["ambient", "nope"]}, "checks[1]"),
        ({"claims": [{"quantity": "theta9", "value": 1}]}, "claims[0].quantity"),
        ({"claims": [{"quantity": "metric.u.q", "value": 1}]}, "claims[0].quantity"),
        ({"warp": {"base": ["u"], "fiber": []}}, "warp.fiber"),
        ({"warp": {"base": ["u"], "fiber": ["v"], "base_points": [[1.0]], "fiber_points": [[1.0, 2.0]]}},
         "warp.fiber_points[0]"),
        ({"ambient_dim": 0}, "ambient_dim"),
        ({"extra": 1}, ""),
    ],
)
def test_field_paths(changes, path):
    with pytest.raises(ManifestError) as info:
        from_obj(with_(**changes))
    assert info.value.path == path


def test_json_syntax_error_has_line_and_column():
    with pytest.raises(ManifestError) as info:
        loads('{\n  "name": "x",\n  "ambient_dim": 2,\n}')
    assert (info.value.line, info.value.column) == (4, 1)
    assert "line 4, column 1" in str(info.value)


def test_missing_file(tmp_path):
    with pytest.raises(ManifestError, match="cannot read"):
        load_manifest(tmp_path / "absent.json")


def test_checks_run_in_canonical_order():
    m = from_obj(with_(checks=["structure", "ambient"]))
    assert m.checks == ["ambient", "structure"]


def test_sample_points_are_seeded():
    m = example_7_2()
    a = m.sample_points()
    assert a == m.sample_points()
    assert len(a) == 10
    assert a[:2] == m.samples.points
    b = m.with_overrides(seed=1).sample_points()
    assert b[:2] == a[:2] and b[2:] != a[2:]
    assert m.samples.seed == DEFAULT_SEED  # overrides copy
