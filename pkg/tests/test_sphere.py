import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from roughfrac.errors import NonIntegrable, ZeroVector
from roughfrac.expr import Expression, ExpressionError
from roughfrac.sphere import RoughKernel, eval_homogeneous, sphere_norm

KERNELS_2D = [
    RoughKernel.constant(2, 1.0),
    RoughKernel.expression(2, "cos(theta)"),
    RoughKernel.tabulate(2, "sign(cos(theta))", 64),
    RoughKernel.expression(2, "1 + sin(theta)**2"),
]


def test_eval_examples():
    assert eval_homogeneous(RoughKernel.constant(2), (3, 4)) == 1.0
    assert abs(eval_homogeneous(RoughKernel.expression(2, "cos(theta)"), (0, 2))) < 1e-15
    with pytest.raises(ZeroVector):
        eval_homogeneous(RoughKernel.constant(2), (0, 0))


@given(
    st.sampled_from(range(len(KERNELS_2D))),
    st.tuples(st.floats(-10, 10), st.floats(-10, 10)).filter(lambda y: math.hypot(*y) > 1e-3),
    st.floats(1e-3, 1e3),
)
def test_degree_zero_homogeneity(k, y, lam):
    ker = KERNELS_2D[k]
    a = eval_homogeneous(ker, y)
    b = eval_homogeneous(ker, (lam * y[0], lam * y[1]))
    assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12) or ker.kind == "table"


def test_homogeneity_seven():
    for ker in KERNELS_2D:
        for y in [(1.0, 2.0), (-3.0, 0.5), (0.2, -0.7)]:
            assert eval_homogeneous(ker, y) == pytest.approx(eval_homogeneous(ker, (7 * y[0], 7 * y[1])), abs=1e-14)


def test_three_dimensional_kernel():
    k = RoughKernel.expression(3, "cos(theta)")
    assert eval_homogeneous(k, (0, 0, 5)) == pytest.approx(1.0)
    assert eval_homogeneous(k, (1, 0, 0)) == pytest.approx(0.0, abs=1e-15)
    assert sphere_norm(RoughKernel.constant(3), 2) == pytest.approx(math.sqrt(4 * math.pi), rel=1e-4)


def test_sphere_norm_examples():
    assert sphere_norm(RoughKernel.constant(2), 2) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert sphere_norm(RoughKernel.expression(2, "cos(theta)"), 2) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    assert sphere_norm(RoughKernel.expression(2, "cos(theta)"), math.inf) == 1.0


def test_tabulated_sign_kernel_norm():
    k = RoughKernel.tabulate(2, "sign(cos(theta))", 64)
    assert set(np.unique(k.table)) == {-1.0, 1.0}
    assert sphere_norm(k, 2) == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
    assert sphere_norm(k, math.inf) == 1.0


@given(st.sampled_from(range(len(KERNELS_2D))), st.floats(-50, 50), st.sampled_from([1.5, 2.0, 4.0, math.inf]))
def test_sphere_norm_scaling(k, c, s):
    ker = KERNELS_2D[k]
    assert sphere_norm(ker.scaled(c), s) == pytest.approx(abs(c) * sphere_norm(ker, s), rel=1e-12, abs=1e-300)


@given(st.sampled_from(range(len(KERNELS_2D))), st.floats(1.01, 40))
def test_sphere_norm_bounded_by_sup(k, s):
    ker = KERNELS_2D[k]
    assert sphere_norm(ker, s) <= (2 * math.pi) ** (1 / s) * sphere_norm(ker, math.inf) * (1 + 1e-12)


def test_sample_doubling_converges():
    k = RoughKernel.expression(2, "exp(cos(theta)) * (1 + sin(2*theta)**2)")
    assert abs(sphere_norm(k, 2, 1024) - sphere_norm(k, 2, 2048)) < 1e-6


def test_sphere_norm_errors():
    with pytest.raises(ValueError):
        sphere_norm(RoughKernel.constant(2), 1.0)
    with pytest.raises(ValueError):
        sphere_norm(RoughKernel.constant(2), 2, samples=64)
    with pytest.raises(NonIntegrable):
        sphere_norm(RoughKernel.expression(2, "log(theta)"), 2)


def test_abs_kernel():
    k = RoughKernel.expression(2, "cos(theta)").abs()
    assert eval_homogeneous(k, (-1, 0)) == 1.0
    assert np.isclose(k.angular_mean(), 2 / math.pi)


def test_expression_grammar_is_closed():
    with pytest.raises(ExpressionError):
        Expression("__import__('os')", ["theta"])
    with pytest.raises(ExpressionError):
        Expression("theta.real", ["theta"])
    with pytest.raises(ExpressionError):
        Expression("phi", ["theta"])
    e = Expression("(r <= 1) * x + max(y, 0)", ["x", "y", "r"])
    assert e(x=np.array([2.0]), y=np.array([-1.0]), r=np.array([0.5]))[0] == 2.0
