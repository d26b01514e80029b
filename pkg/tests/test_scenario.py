import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modpolar.function import Poly, Sqrt
from modpolar.runner import gallery_scenarios
from modpolar.scenario import (
    ModuleDecl,
    OperatorDecl,
    ParseError,
    Request,
    Scenario,
    ShapeError,
    emit_scenario,
    format_complex,
    parse_complex,
    parse_scenario,
)

FINITE = """\
name: demo
backend: finite
algebra: [1, 2]
modules:
  E: {rank: 2}
  S: {in: E, generators: [[1, 0]]}
operators:
  a:
    from: E
    to: E
    matrix:
      - [2, [1, [[0, 1], [0, 0]]]]
      - [0, 1-2i]
requests:
  - {analysis: polar, operator: a}
expect:
  a.polar.has_v: true
"""


def test_parse_complex_literals():
    assert parse_complex(3) == 3
    assert parse_complex("2.5") == 2.5
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("1 - i") == 1 - 1j
    assert parse_complex("-0.8i") == -0.8j
    assert parse_complex("i") == 1j
    assert parse_complex("1e-3+2e2i") == 0.001 + 200j
    for bad in ("2+x", "ii", "", True, None, [1]):
        with pytest.raises(ParseError):
            parse_complex(bad)


@given(re=st.floats(allow_nan=False, allow_infinity=False), im=st.floats(allow_nan=False, allow_infinity=False))
def test_complex_literal_round_trip(re, im):
    c = complex(re, im)
    back = parse_complex(format_complex(c))
    assert back == c or (math.isclose(back.real, c.real) and math.isclose(back.imag, c.imag))


def test_parse_example():
    s = parse_scenario(FINITE)
    assert s.name == "demo" and s.backend == "finite" and s.algebra == (1, 2)
    assert [m.name for m in s.modules] == ["E", "S"]
    assert s.module("S").parent == "E"
    a = s.operator("a")
    # scalar entry = multiple of the unit, list entry = blocks
    assert a.matrix[0][0] == (((2,),), ((2, 0), (0, 2)))
    assert a.matrix[0][1] == (((1,),), ((0, 1), (0, 0)))
    assert a.matrix[1][1][0][0][0] == 1 - 2j
    assert s.requests == (Request("polar", "a"),)
    assert s.expect == {"a.polar.has_v": True}


def test_round_trip_example():
    s = parse_scenario(FINITE)
    assert parse_scenario(emit_scenario(s)) == s


def test_gallery_round_trip():
    scenarios = gallery_scenarios()
    assert len(scenarios) == 9
    for s in scenarios:
        assert parse_scenario(emit_scenario(s)) == s


def _error(text):
    with pytest.raises(ParseError) as info:
        parse_scenario(text)
    return info.value


def test_error_names_field_and_line():
    err = _error(FINITE.replace("1-2i", "1-2x"))
    assert err.field == "operators.a.matrix.1.1" and err.line == 13
    assert "line 13" in str(err)
    err = _error(FINITE.replace("backend: finite", "backend: quantum"))
    assert err.field == "backend" and err.line == 2
    err = _error(FINITE.replace("analysis: polar", "analysis: magic"))
    assert err.field.startswith("requests.0") and err.line == 15
    err = _error(FINITE.replace("to: E", "to: Q"))
    assert "unknown module" in str(err)
    err = _error(FINITE + "extra: 1\n")
    assert "unknown fields" in str(err)
    err = _error("name: [unclosed\n")
    assert "invalid YAML" in str(err)


def test_shape_errors():
    with pytest.raises(ShapeError):
        parse_scenario(FINITE.replace("- [0, 1-2i]", "- [0]"))
    with pytest.raises(ShapeError):
        parse_scenario(FINITE.replace("[[0, 1], [0, 0]]", "[[0, 1]]"))
    with pytest.raises(ShapeError):
        parse_scenario(FINITE.replace("generators: [[1, 0]]", "generators: [[1]]"))


def test_function_scenario():
    text = """\
name: f
backend: function
algebra: C[0,1]
modules:
  E: {rank: 1}
  S: {in: E, generators: [[[0, 1]]]}
operators:
  a: {from: S, to: E, matrix: [[1]]}
  r: {from: E, to: E, matrix: [[{sqrt: [0, 1]}]]}
requests:
  - {analysis: polar, operator: r}
"""
    s = parse_scenario(text)
    assert s.operator("r").matrix[0][0] == Sqrt(Poly.t())
    assert s.module("S").generators[0][0] == Poly.t()
    assert parse_scenario(emit_scenario(s)) == s
    with pytest.raises(ParseError):
        parse_scenario(text.replace("{sqrt: [0, 1]}", "{sqrt: [0, 1i]}"))
    with pytest.raises(ParseError):
        parse_scenario(text.replace("C[0,1]", "[1]"))


# ---------------------------------------------------------------- generated scenarios

numbers = st.one_of(
    st.integers(-5, 5).map(complex),
    st.builds(complex, st.floats(-10, 10, allow_nan=False), st.floats(-10, 10, allow_nan=False)),
)


def _entry(draw, dims):
    return tuple(
        tuple(tuple(draw(numbers) for _ in range(n)) for _ in range(n)) for n in dims
    )


@st.composite
def finite_scenarios(draw):
    dims = draw(st.sampled_from([(1,), (2,), (1, 2)]))
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 3))
    modules = (ModuleDecl("E", n), ModuleDecl("F", m))
    matrix = tuple(tuple(_entry(draw, dims) for _ in range(n)) for _ in range(m))
    ops = (OperatorDecl("a", "E", "F", matrix),)
    kinds = draw(st.lists(st.sampled_from(["modularity", "polar", "invariants", "predicates"]), unique=True))
    reqs = tuple(Request(k, "a") for k in kinds)
    return Scenario("gen", "finite", dims, modules, ops, reqs, {}, draw(st.sampled_from(["", "generated"])))


@st.composite
def function_scenarios(draw):
    polys = st.lists(st.integers(-4, 4).map(float), min_size=1, max_size=4).map(Poly)
    entry = st.one_of(polys, polys.filter(lambda p: p.is_real()).map(Sqrt))
    n = draw(st.integers(1, 2))
    matrix = tuple(tuple(draw(entry) for _ in range(n)) for _ in range(n))
    ops = (OperatorDecl("a", "E", "E", matrix),)
    return Scenario("gen", "function", "C[0,1]", (ModuleDecl("E", n),), ops, (Request("polar", "a"),), {}, "")


@settings(max_examples=50, deadline=None)
@given(s=st.one_of(finite_scenarios(), function_scenarios()))
def test_round_trip_generated(s):
    assert parse_scenario(emit_scenario(s)) == s
