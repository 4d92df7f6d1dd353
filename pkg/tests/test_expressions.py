import math

import numpy as np
import pytest

from fracsolve.expressions import ExpressionError, compile_expression


class TestArithmetic:
    def test_precedence(self):
        assert compile_expression("1 + 2 * 3")() == 7.0
        assert compile_expression("(1 + 2) * 3")() == 9.0
        assert compile_expression("8 / 4 / 2")() == 1.0
        assert compile_expression("1 - 2 - 3")() == -4.0

    def test_power_binds_tighter_than_unary_times(self):
        assert compile_expression("2 * 3 ^ 2")() == 18.0
        assert compile_expression("-2 ^ 2")() == -4.0

    def test_power_right_associative(self):
        assert compile_expression("2 ^ 3 ^ 2")() == 512.0

    def test_unary(self):
        assert compile_expression("--3")() == 3.0
        assert compile_expression("+4")() == 4.0

    def test_scientific_notation(self):
        assert compile_expression("1.5e-2")() == 0.015
        assert compile_expression("2E3")() == 2000.0


class TestVariablesAndFunctions:
    def test_variables(self):
        fn = compile_expression("x * t + u")
        assert fn(x=2.0, t=3.0, u=1.0) == 7.0

    def test_vectorized_in_x(self):
        fn = compile_expression("sin(pi * x)")
        x = np.linspace(0.0, 1.0, 5)
        assert np.allclose(fn(x=x), np.sin(np.pi * x), atol=1e-15)

    def test_pi(self):
        assert compile_expression("pi")() == math.pi

    def test_functions(self):
        assert compile_expression("exp(1)")() == pytest.approx(math.e, rel=1e-15)
        assert compile_expression("cos(0)")() == 1.0
        assert compile_expression("gamma(0.5)")() == pytest.approx(
            math.sqrt(math.pi), rel=1e-14)
        assert compile_expression("pow(2, 10)")() == 1024.0

    def test_fractional_power_of_t(self):
        fn = compile_expression("t ^ 0.5 / gamma(1.5)")
        assert fn(t=4.0) == pytest.approx(2.0 / math.gamma(1.5), rel=1e-14)

    def test_source_attribute(self):
        fn = compile_expression("x + 1")
        assert fn.source == "x + 1"


class TestErrors:
    @pytest.mark.parametrize("text", [
        "1 +",
        "sin(",
        "(1 + 2",
        "foo(1)",
        "y + 1",
        "1 2",
        "1 @ 2",
        "",
    ])
    def test_rejected(self, text):
        with pytest.raises(ExpressionError):
            compile_expression(text)

    def test_expression_error_is_value_error(self):
        assert issubclass(ExpressionError, ValueError)
