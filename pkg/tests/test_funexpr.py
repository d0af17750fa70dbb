import cmath

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bivarfun.errors import EvaluationDomainError, ExpressionSyntaxError
from bivarfun.fieldvals import Circle, Ellipse
from bivarfun.funexpr import (MatrixFunExpr, analyticity_probe, diff,
                              divided_difference, evaluate, parse)

from conftest import crandn

POLY = "1 + x*y + x^3*y^2"


def pts(rng, n=20, scale=1.0):
    return scale * crandn(rng, n)


def test_polynomial_value():
    f = parse(POLY, 2)
    assert evaluate(f, (1, 1)) == 3
    assert f.arity == 2


def test_exp_at_zero():
    assert evaluate(parse("exp(x)"), (0,)) == 1


def test_syntax_error_offset():
    with pytest.raises(ExpressionSyntaxError, match="offset 3"):
        parse("x +")


@pytest.mark.parametrize("text", ["foo(x)", "x^2.5", "x^-1", "x^y", "(x", "x )", "x3", "q"])
def test_rejects(text):
    with pytest.raises(ExpressionSyntaxError):
        parse(text, 2)


def test_precedence_and_associativity():
    f = parse("-x^2")
    assert evaluate(f, (3,)) == -9
    assert evaluate(parse("2^3^2"), (0,)) == 2 ** 9
    assert evaluate(parse("8/4/2"), (0,)) == 1
    assert evaluate(parse("1 - 2 - 3"), (0,)) == -4
    assert evaluate(parse("2*x + 3i", 1), (1,)) == 2 + 3j
    assert evaluate(parse("x1*x8", 8), range(1, 9)) == 8


def test_aliases():
    f, g = parse("x*y", 2), parse("x1*x2", 2)
    assert f == g


def test_bidisc_modulus():
    f = parse("x*y", 2)
    a = np.linspace(0, 2 * np.pi, 13)
    vals = f.evaluate(0.5 * np.exp(1j * a)[:, None], 0.5 * np.exp(1j * a)[None, :])
    np.testing.assert_allclose(np.abs(vals), 0.25, atol=1e-15)


def test_domain_error():
    with pytest.raises(EvaluationDomainError):
        evaluate(parse("1/(x+y)", 2), (1, -1))
    with pytest.raises(EvaluationDomainError):
        evaluate(parse("log(x)"), (0,))


def test_diff_examples(rng):
    z = pts(rng)
    f = parse("exp(x)")
    np.testing.assert_allclose(diff(f, 1).evaluate(z), f.evaluate(z), rtol=1e-14)
    g = parse("x^3*y^2", 2)
    x, y = pts(rng), pts(rng)
    np.testing.assert_allclose(diff(g, 1).evaluate(x, y), 3 * x ** 2 * y ** 2, rtol=1e-13)


@pytest.mark.parametrize("text", ["sin(x)*cos(x)", "exp(x^2)/(2 + x)", "sqrt(x + 3)",
                                  "log(x + 4) - x^5", "cos(exp(x))"])
def test_diff_vs_finite_difference(text, rng):
    f = parse(text)
    d = diff(f, 1)
    z = 0.8 * pts(rng, 10) / np.sqrt(2)
    h = 1e-5
    fd = (f.evaluate(z + h) - f.evaluate(z - h)) / (2 * h)
    np.testing.assert_allclose(d.evaluate(z), fd, rtol=1e-8)


def test_diff_linear(rng):
    f, g = parse("sin(x)*y", 2), parse("exp(x*y)", 2)
    a, b = 1.5 - 0.5j, -2.0
    h = parse(f"({a.real}+{a.imag}i)*(sin(x)*y) + ({b})*(exp(x*y))", 2)
    x, y = pts(rng), pts(rng)
    lhs = diff(h, 1).evaluate(x, y)
    rhs = a * diff(f, 1).evaluate(x, y) + b * diff(g, 1).evaluate(x, y)
    np.testing.assert_allclose(lhs, rhs, rtol=1e-13, atol=1e-13)


EXPRS = ["1 + x*y + x^3*y^2", "exp(-x)*sin(y)", "(x - y)^3/(3 + x*y)", "-x^2 - (y - 1)",
         "cos(x)/(2.5 + y) - 4i*x", "sqrt(x + 5)*log(y + 7)"]


@given(st.sampled_from(EXPRS), st.integers(0, 2**32 - 1))
def test_print_parse_roundtrip(text, seed):
    f = parse(text, 2)
    g = parse(str(f), 2)
    assert str(g) == str(f)
    rng = np.random.default_rng(seed)
    x, y = pts(rng, 8), pts(rng, 8)
    np.testing.assert_array_equal(f.evaluate(x, y), g.evaluate(x, y))


def test_divided_difference_examples(rng):
    x, y = pts(rng), pts(rng)
    sq = divided_difference(parse("x^2"))
    np.testing.assert_allclose(sq.evaluate(x, y), x + y, rtol=1e-13)
    e = divided_difference(parse("exp(x)"))
    np.testing.assert_allclose(e.evaluate(x, x), np.exp(x), rtol=1e-15)
    x0 = 0.3 + 0.2j
    y0 = x0 + 1e-12
    d = (x0 - y0) / 2
    oracle = cmath.exp((x0 + y0) / 2) * cmath.sinh(d) / d
    assert abs(e.evaluate(np.array([x0]), np.array([y0]))[0] - oracle) <= 1e-9


def test_divided_difference_symmetric(rng):
    dd = divided_difference(parse("sin(x)*exp(x)"))
    x, y = pts(rng), pts(rng)
    np.testing.assert_allclose(dd.evaluate(x, y), dd.evaluate(y, x), rtol=1e-13)


def test_divided_difference_polynomial(rng):
    # (x^4 - y^4)/(x - y) = x^3 + x^2 y + x y^2 + y^3
    dd = divided_difference(parse("x^4 - 2*x"))
    x, y = pts(rng), pts(rng)
    expanded = x ** 3 + x ** 2 * y + x * y ** 2 + y ** 3 - 2
    np.testing.assert_allclose(dd.evaluate(x, y), expanded, rtol=1e-11, atol=1e-11)


def test_divided_difference_requires_univariate():
    with pytest.raises(ValueError):
        divided_difference(parse("x*y", 2))


def test_matrix_fun_expr():
    F = MatrixFunExpr.parse([["x", "1"], ["x^2", "exp(x)"], ["0", "2i"]], 1)
    assert F.shape == (3, 2)
    v = F.evaluate(np.array([0.0, 1.0]))
    assert v.shape == (2, 3, 2)
    assert v[1, 1, 0] == 1 and v[0, 2, 1] == 2j


def test_probe_examples():
    unit = Circle(0, 1.0)
    assert analyticity_probe(parse("exp(x+y)", 2), [unit, unit])
    assert not analyticity_probe(parse("1/(x+y)", 2), [unit, unit])
    assert analyticity_probe(parse("1/(x+y)", 2), [Circle(3, 1.0), Circle(4, 1.0)])


def test_probe_branch_cuts():
    assert not analyticity_probe(parse("log(x)"), [Circle(0.5, 1.0)])
    assert not analyticity_probe(parse("sqrt(x)"), [Circle(-2, 1.0)])
    assert analyticity_probe(parse("sqrt(x)"), [Ellipse(3, 2.0, 1.0, 0.3)])
    assert analyticity_probe(parse("log(x)"), [Circle(2 + 2j, 1.0)])
