from fractions import Fraction

import pytest

from qbslant.fixtures import (
    CLAIMED_SIGNS,
    REGISTRY,
    default_suite,
    exact_conditions,
    fixture_names,
    get_fixture,
    search_corrected_signs,
)


def test_claimed_signs_fail_on_shared_line():
    r = exact_conditions(CLAIMED_SIGNS, split_lines=False)
    assert not r["a"] and not r["c"]
    assert r["cos2_theta1"] == r["cos2_theta2"] == Fraction(1, 9)


def test_no_repair_with_a_shared_line():
    assert search_corrected_signs(split_lines=False) == []


def test_separate_line_repair_keeps_claimed_signs():
    hits = search_corrected_signs(split_lines=True)
    assert len(hits) == 16
    assert hits[0] == CLAIMED_SIGNS
    r = exact_conditions(hits[0], split_lines=True)
    assert r["a"] and r["b"] and r["c"]


def test_registry_round_trip():
    assert fixture_names() == list(REGISTRY)
    for name in default_suite():
        m = get_fixture(name)
        assert m.name.startswith(name)


def test_parametrised_names():
    assert get_fixture("slant_plane(0.3)").name == "slant_plane(0.3)"
    assert get_fixture("polar_warp(acos(1/4))").claims[0].value == repr(__import__("math").acos(0.25))
    with pytest.raises(KeyError):
        get_fixture("no_such_fixture")
    with pytest.raises(KeyError):
        get_fixture("holomorphic_plane(1, 2)")
