"""Expression language: parsing, differentiation, evaluation, round-trips."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochscale.expr import (
    CATALOG,
    BinOp,
    Call,
    Const,
    EvalDomainError,
    FunctionSpec,
    ParseError,
    Pow,
    Var,
    diff,
    eval_expr,
    parse,
    to_source,
)

# catalog for derivative checks; the extra entries have bounded domains
# that cover [0, 3] x [-3, 3]
DERIV_CATALOG = CATALOG + ("log(x + 4)",)


class TestParse:
    def test_power(self):
        assert parse("x^2") == Pow(Var("x"), 2)

    def test_precedence_and_calls(self):
        assert parse("t*x + sin(x)") == BinOp("+", BinOp("*", Var("t"), Var("x")), Call("sin", Var("x")))

    def test_incomplete_power_offset(self):
        with pytest.raises(ParseError) as err:
            parse("x^")
        assert err.value.offset == 2

    def test_unknown_identifier(self):
        with pytest.raises(ParseError):
            parse("x + y")

    def test_unary_minus_precedence(self):
        # ^ binds above unary minus: -x^2 == -(x^2)
        assert eval_expr(parse("-x^2"), 0.0, 3.0) == -9.0

    def test_left_associativity(self):
        assert eval_expr(parse("8 - 4 - 2"), 0.0, 0.0) == 2.0
        assert eval_expr(parse("8 / 4 / 2"), 0.0, 0.0) == 1.0

    def test_scientific_notation(self):
        assert parse("1e-5") == Const(1e-5)

    def test_fractional_exponent_rejected(self):
        with pytest.raises(ParseError):
            parse("x^0.5")

    def test_negative_exponent_rejected(self):
        with pytest.raises(ParseError):
            parse("x^-1")


class TestDiff:
    def test_square(self):
        assert diff(parse("x^2"), "x") == BinOp("*", Const(2.0), Var("x"))

    def test_product_in_t(self):
        assert diff(parse("t*x"), "t") == Var("x")

    def test_exp_matches_central_difference(self):
        d = diff(parse("exp(x)"), "x")
        h = 1e-5
        x0 = 0.7
        fd = (math.exp(x0 + h) - math.exp(x0 - h)) / (2 * h)
        assert eval_expr(d, 0.0, x0) == pytest.approx(fd, rel=1e-8)

    def test_constant_derivative_zero(self):
        assert diff(parse("3.5"), "x") == Const(0.0)

    @pytest.mark.parametrize("source", DERIV_CATALOG)
    def test_finite_difference_oracle(self, source):
        # symbolic vs central finite differences at 100 random points
        e = parse(source)
        et, ex = diff(e, "t"), diff(e, "x")
        rng = np.random.default_rng(42)
        ts = rng.uniform(0.0, 3.0, 100)
        xs = rng.uniform(-3.0, 3.0, 100)
        h = 1e-6
        for t0, x0 in zip(ts, xs):
            for d, fd in (
                (et, (eval_expr(e, t0 + h, x0) - eval_expr(e, t0 - h, x0)) / (2 * h)),
                (ex, (eval_expr(e, t0, x0 + h) - eval_expr(e, t0, x0 - h)) / (2 * h)),
            ):
                sym = eval_expr(d, t0, x0)
                assert sym == pytest.approx(fd, rel=1e-6, abs=1e-8)

    @pytest.mark.parametrize("source", DERIV_CATALOG)
    def test_mixed_partials_commute(self, source):
        e = parse(source)
        dxt = diff(diff(e, "x"), "t")
        dtx = diff(diff(e, "t"), "x")
        rng = np.random.default_rng(7)
        for _ in range(20):
            t0 = rng.uniform(0.0, 3.0)
            x0 = rng.uniform(-3.0, 3.0)
            assert eval_expr(dxt, t0, x0) == pytest.approx(eval_expr(dtx, t0, x0), abs=1e-10)


class TestEval:
    def test_square(self):
        assert eval_expr(parse("x^2"), 123.0, 3.0) == 9.0

    def test_product(self):
        assert eval_expr(parse("t*x"), 2.0, 0.5) == 1.0

    def test_log_domain_error(self):
        with pytest.raises(EvalDomainError) as err:
            eval_expr(parse("log(x)"), 0.0, -1.0)
        assert "log(x)" in str(err.value)

    def test_division_by_zero(self):
        with pytest.raises(EvalDomainError):
            eval_expr(parse("1/(x - 1)"), 0.0, 1.0)

    def test_vectorized(self):
        xs = np.linspace(-2, 2, 17)
        np.testing.assert_allclose(eval_expr(parse("x^2 + t"), 1.0, xs), xs**2 + 1.0)

    def test_function_spec_structure(self):
        fs = FunctionSpec.from_source("x^2")
        assert fs.f_x == diff(fs.f, "x")
        assert fs.f_t == diff(fs.f, "t")
        assert fs.f_xx == diff(fs.f_x, "x")


# random AST strategy for round-trip testing
def _exprs(depth=3):
    leaf = st.one_of(
        st.floats(min_value=0.0, max_value=9.0, allow_nan=False).map(lambda v: Const(round(v, 3))),
        st.sampled_from([Var("t"), Var("x")]),
    )
    if depth == 0:
        return leaf
    sub = _exprs(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(st.sampled_from("+-*/"), sub, sub).map(lambda o: BinOp(o[0], o[1], o[2])),
        st.tuples(sub, st.integers(2, 4)).map(lambda o: Pow(o[0], o[1])),
        st.tuples(st.sampled_from(["exp", "sin", "cos"]), sub).map(lambda o: Call(o[0], o[1])),
    )


@given(_exprs())
@settings(max_examples=300, deadline=None)
def test_print_parse_round_trip(e):
    assert parse(to_source(e)) == parse(to_source(parse(to_source(e))))


@pytest.mark.parametrize("source", DERIV_CATALOG + ("-x^2 + 3*t", "(t + x)^3", "x/(1 + t^2)"))
def test_round_trip_catalog(source):
    e = parse(source)
    assert parse(to_source(e)) == e
