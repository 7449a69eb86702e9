import math

import pytest
from hypothesis import given, settings, strategies as st

from qbslant import expr as E


@pytest.mark.parametrize(
    "source, env, expected",
    [
        ("1 + 2 * 3", {}, 7.0),
        ("2^3^2", {}, 512.0),
        ("-2^2", {}, -4.0),
        ("2^-1", {}, 0.5),
        ("u*cos(acos(1/3))", {"u": 3.0}, 1.0),
        ("sqrt(v^2 + w^2)", {"v": 3.0, "w": 4.0}, 5.0),
        ("pi/2", {}, math.pi / 2),
        ("-u-w+v+r", {"u": 1.0, "v": 2.0, "w": 3.0, "r": 4.0}, 2.0),
        ("1e-3*x", {"x": 2.0}, 2e-3),
    ],
)
def test_evaluate(source, env, expected):
    assert E.evaluate(E.parse(source), env) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize(
    "source, offset",
    [
        ("1+", 2),
        ("sin(x", 5),
        ("2**3", 2),
        ("", 0),
        ("foo(x)", 0),
        ("x y", 2),
        ("pi + )", 5),
        ("sqrt(2) ) ", 8),
        ("(pi)*é", 5),
    ],
)
def test_parse_error_offsets(source, offset):
    with pytest.raises(E.ParseError) as info:
        E.parse(source)
    assert info.value.offset == offset
    assert info.value.expected


def test_invalid_utf8_is_a_parse_error():
    with pytest.raises(E.ParseError) as info:
        E.parse(b"x+\xff")
    assert info.value.offset == 2


def test_unbound_variable():
    with pytest.raises(E.UnboundVariableError) as info:
        E.evaluate(E.parse("x + z"), {"x": 1.0})
    assert info.value.name == "z"


@pytest.mark.parametrize("source", ["log(0)", "sqrt(-1)", "1/0", "(-2)^0.5", "acos(2)"])
def test_domain_errors(source):
    with pytest.raises(E.DomainError):
        E.evaluate(E.parse(source), {})


def test_free_variables_in_order():
    assert E.free_variables(E.parse("w*cos(u) + v - u")) == ("w", "u", "v")


names = st.sampled_from(["u", "v", "w"])
leaves = st.one_of(
    st.floats(min_value=0.0, max_value=1e6, allow_nan=False).map(E.Const),
    names.map(E.Var),
)
trees = st.recursive(
    leaves,
    lambda sub: st.one_of(
        sub.map(E.Neg),
        st.tuples(st.sampled_from("+-*/^"), sub, sub).map(lambda t: E.BinOp(*t)),
        st.tuples(st.sampled_from(E.FUNCTIONS), sub).map(lambda t: E.Call(*t)),
    ),
    max_leaves=12,
)


@given(trees)
def test_pretty_round_trip(tree):
    assert E.parse(E.pretty(tree)) == tree


@settings(max_examples=300)
@given(st.text(alphabet="uvw0123456789.+-*/^() sincotaqrexplg,", max_size=30))
def test_parse_only_raises_parse_error(text):
    try:
        tree = E.parse(text)
    except E.ParseError as exc:
        assert 0 <= exc.offset <= len(text.encode())
        return
    assert E.parse(E.pretty(tree)) == tree


@given(st.binary(max_size=20))
def test_parse_bytes_fuzz(data):
    try:
        E.parse(data)
    except E.ParseError:
        pass
