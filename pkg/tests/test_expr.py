import pytest
from hypothesis import given
from hypothesis import strategies as st

from connsum.expr import (Context, EvalError, ParseError, evaluate, evaluate_text, format_ast,
                          format_orbit, parse)

ROUND_TRIP = [
    "delta(phi^a*phi^b)",
    "bracket((phi^a), (phi^b))",
    "QO{(1 2)(3)()}^g=0",
    "exp(k^-1*iota(orb(QC{1,2}^g=1 @ T{1:phi^a, 2:phi^a})))",
    "relabel(QC{1,2,3}^g=0, {1->4, 2->5, 3->6})",
    "1/2*xi^2*(phi^a phi^b) - 3*k",
    "compose(1, 4, QC{1,2,3}^g=0, QC{4,5}^g=1)",
]


@pytest.mark.parametrize("text", ROUND_TRIP)
def test_print_parse_round_trip(text):
    once = format_ast(parse(text))
    assert format_ast(parse(once)) == once
    assert evaluate_text(once) == evaluate_text(text)


@pytest.mark.parametrize("text, value", [
    ("QO{(1 2)(3)()}^g=0", "QO{()(3)(1 2)}^g=0"),
    ("T{2:phi^b, 1:phi^b}", "-T{1:phi^b, 2:phi^b}^G=0"),
    ("(phi^a phi^b) + (phi^b phi^a)", "2*(phi^a phi^b)"),
    ("phi^b*phi^b", "0"),
    ("theta(QO{(1 2)}^g=0 @ T{1:phi^a, 2:phi^b})", "1/2*(phi^a phi^b)"),
])
def test_golden_values(text, value):
    assert evaluate_text(text) == value


@pytest.mark.parametrize("text, line, col", [
    ("delta(phi^a * ", 1, 15),
    ("QC{1,2}", 1, 1),
    ("1 +\n  )", 2, 3),
])
def test_parse_errors_carry_positions(text, line, col):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert (err.value.line, err.value.col) == (line, col)


def test_eval_errors_carry_positions():
    with pytest.raises(EvalError) as err:
        evaluate("1 + phi^zz")
    assert (err.value.line, err.value.col) == (1, 5)


def test_unknown_function():
    with pytest.raises(ParseError):
        parse("frobnicate(1)")


@given(st.lists(st.sampled_from(["a", "b"]), min_size=1, max_size=4),
       st.integers(0, 2))
def test_orbit_text_round_trip(letters, g):
    n = len(letters)
    g = max(g, 1) if n < 3 else g
    legs = ",".join(str(i) for i in range(1, n + 1))
    tensor = ", ".join(f"{i}:phi^{c}" for i, c in enumerate(letters, 1))
    value = evaluate(f"orb(QC{{{legs}}}^g={g} @ T{{{tensor}}})", Context())
    if not value.is_zero():
        assert evaluate(format_orbit(value)) == value
