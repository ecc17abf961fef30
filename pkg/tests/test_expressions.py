"""Expression grammar: parsing, evaluation, differentiation, printing."""

import math

import numpy as np
import pytest

from odeident.errors import ExpressionSyntaxError
from odeident.expressions import parse_expression


@pytest.mark.parametrize("text, value", [
    ("1 + 2 * 3", 7.0),
    ("(1 + 2) * 3", 9.0),
    ("2 - 3 - 4", -5.0),          # left associative
    ("12 / 4 / 3", 1.0),
    ("2^3", 8.0),
    ("-2^2", -4.0),               # unary minus binds looser than power
    ("2^-1", 0.5),
    ("pow(2, 10)", 1024.0),
    ("1.5e2", 150.0),
    (".5", 0.5),
])
def test_constant_expressions(text, value):
    assert parse_expression(text).eval(0.0) == pytest.approx(value)


@pytest.mark.parametrize("text, t, expected", [
    ("t", 0.7, 0.7),
    ("t^2 - t", 3.0, 6.0),
    ("sin(t)", math.pi / 2.0, 1.0),
    ("cos(t)", 0.0, 1.0),
    ("exp(t)", 1.0, math.e),
    ("(t - 0.5)^2", 0.25, 0.0625),
])
def test_time_expressions(text, t, expected):
    assert parse_expression(text).eval(t) == pytest.approx(expected)


def test_state_and_param_variables():
    e = parse_expression("x0 * p1 + x1", n_states=2, n_params=2)
    assert e.eval(0.0, x=(2.0, 3.0), p=(0.0, 5.0)) == pytest.approx(13.0)


def test_variable_bounds_enforced():
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("x2", n_states=2, n_params=0)
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("p0", n_states=1, n_params=0)


class TestDifferentiation:
    def test_time_derivative(self):
        e = parse_expression("t^3")
        assert e.diff_t().eval(2.0) == pytest.approx(12.0)

    def test_product_rule(self):
        e = parse_expression("t * sin(t)")
        d = e.diff_t()
        t = 1.3
        assert d.eval(t) == pytest.approx(math.sin(t) + t * math.cos(t))

    def test_quotient_rule(self):
        e = parse_expression("t / (1 + t)")
        assert e.diff_t().eval(1.0) == pytest.approx(0.25)

    def test_chain_rule_on_functions(self):
        e = parse_expression("exp(t^2)")
        t = 0.6
        assert e.diff_t().eval(t) == pytest.approx(2.0 * t * math.exp(t * t))

    def test_state_derivative(self):
        e = parse_expression("x0^2 * p0", n_states=1, n_params=1)
        d = e.diff_x(0)
        assert d.eval(0.0, x=(3.0,), p=(2.0,)) == pytest.approx(12.0)

    def test_param_derivative(self):
        e = parse_expression("(t - 0.5) * p0", n_states=0, n_params=1)
        d = e.diff_p(0)
        assert d.eval(0.25, p=(99.0,)) == pytest.approx(-0.25)

    def test_derivative_of_constant_is_zero(self):
        e = parse_expression("3.5")
        assert e.diff_t().eval(123.0) == 0.0

    @pytest.mark.parametrize("text", [
        "t^2 + sin(3 * t)", "exp(t) * cos(t)", "t / (2 + t^2)",
        "pow(t - 0.25, 3)",
    ])
    def test_against_finite_differences(self, text):
        e = parse_expression(text)
        d = e.diff_t()
        rng = np.random.default_rng(20240816)
        for t in rng.uniform(0.1, 0.9, size=5):
            h = 1e-6
            fd = (e.eval(t + h) - e.eval(t - h)) / (2.0 * h)
            assert d.eval(t) == pytest.approx(fd, abs=1e-5)


class TestCanonical:
    @pytest.mark.parametrize("text", [
        "t", "t + 1", "(t - 0.5)^2", "sin(2 * t) * exp(t)",
        "t / (1 + t)", "-t", "x0 + p0 * t", "2 - 3 - 4", "2 - (3 - 4)",
        "t / (2 / t)",
    ])
    def test_round_trip_same_value(self, text):
        e = parse_expression(text, n_states=1, n_params=1)
        again = parse_expression(e.canonical(), n_states=1, n_params=1)
        for t in (0.1, 0.37, 0.9):
            assert again.eval(t, x=(1.3,), p=(0.7,)) == pytest.approx(
                e.eval(t, x=(1.3,), p=(0.7,)), rel=1e-14)

    def test_canonical_stable(self):
        e = parse_expression("(t-0.5)  *  p0", n_params=1)
        assert e.canonical() == parse_expression(
            e.canonical(), n_params=1).canonical()

    def test_power_base_parenthesized(self):
        e = parse_expression("(t^2)^3")
        again = parse_expression(e.canonical())
        assert again.eval(2.0) == pytest.approx(64.0)

    def test_equality_by_structure(self):
        a = parse_expression("t + 1")
        b = parse_expression("t  +  1.0")
        assert a == b


class TestErrors:
    @pytest.mark.parametrize("text", [
        "", "1 +", "(1 + 2", "1 ** 2", "sin()", "sin(1, 2)", "foo(1)",
        "t t", "1..2", "x", "p", "pow(2)",
    ])
    def test_rejects_malformed(self, text):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression(text, n_states=3, n_params=3)

    def test_error_carries_position(self):
        with pytest.raises(ExpressionSyntaxError) as exc_info:
            parse_expression("1 + @")
        err = exc_info.value
        assert err.line == 1
        assert err.col == 5

    def test_multiline_position(self):
        with pytest.raises(ExpressionSyntaxError) as exc_info:
            parse_expression("1 +\n 2 +")
        assert exc_info.value.line == 2

    def test_non_integer_exponent_rejected(self):
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("t^0.5")
        with pytest.raises(ExpressionSyntaxError):
            parse_expression("t^t")

    def test_integer_valued_exponent_expression_ok(self):
        assert parse_expression("t^(1 + 1)").eval(3.0) == pytest.approx(9.0)


def test_division_by_zero_at_eval():
    e = parse_expression("1 / t")
    with pytest.raises(ZeroDivisionError):
        e.eval(0.0)


def test_simplification_keeps_value():
    e = parse_expression("0 + t * 1 + 0 * x0", n_states=1)
    assert e.canonical() == "t"
