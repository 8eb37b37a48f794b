from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from diffmoment import catalog
from diffmoment.difflab import (FieldSyntaxError, JetOrderError, central_stencil, compose_affine,
                                compose_projective, eval_deriv_expr, fd_jet, jet, parse_field,
                                random_polynomial_field)
from diffmoment.transforms import PoleError, ProjectiveMap, sample_point, sample_projective, sample_rational_affine

F = Fraction


def test_stencils():
    assert central_stencil(1) == ((-1, F(-1, 2)), (1, F(1, 2)))
    assert central_stencil(2) == ((-1, F(1)), (0, F(-2)), (1, F(1)))
    assert central_stencil(3) == ((-2, F(-1, 2)), (-1, F(1)), (1, F(-1)), (2, F(1, 2)))


def test_exact_jet_by_hand():
    h = parse_field("3/2*x^2*y - y^3 + x")
    j = jet(h, (F(1), F(2)), 2)
    assert j[(0, 0)] == F(3) - 8 + 1
    assert j[(1, 0)] == 3 * 1 * 2 + 1
    assert j[(0, 1)] == F(3, 2) - 12
    assert j[(2, 0)] == 6
    assert j[(1, 1)] == 3
    assert j[(0, 2)] == -12
    with pytest.raises(JetOrderError):
        j[(3, 0)]


def test_rational_field_quotient_rule():
    h = parse_field("1/(1 + x^2)")
    assert jet(h, (F(1),), 1)[(1,)] == F(-1, 2)
    with pytest.raises(PoleError):
        parse_field("1/x").evaluate((F(0),))


@pytest.mark.parametrize("text,col", [("x^2 + ", 7), ("3*x$", 4), ("(x + y", 7)])
def test_field_syntax_errors(text, col):
    with pytest.raises(FieldSyntaxError) as info:
        parse_field(text)
    assert info.value.column == col


def test_render_roundtrip():
    h = parse_field("3/2*x^2*y - y^3 + x")
    assert parse_field(h.render()).equals(h)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_affine_composition_pointwise(seed):
    rng = np.random.default_rng(seed)
    h = random_polynomial_field(rng, 2, 3)
    T = sample_rational_affine(rng, 2)
    x = sample_point(rng, 2, exact=True)
    assert compose_affine(h, T).evaluate(x) == h.evaluate(T(x))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_projective_composition_pointwise(seed):
    rng = np.random.default_rng(seed)
    h = random_polynomial_field(rng, 2, 3)
    P = ProjectiveMap([[F(v).limit_denominator(16) for v in r] for r in sample_projective(rng, 2).matrix])
    x = sample_point(rng, 2, P, exact=True)
    assert compose_projective(h, P).evaluate(x) == h.evaluate(P(x))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_exact_jet_agrees_with_finite_differences(seed):
    rng = np.random.default_rng(seed)
    h = compose_projective(random_polynomial_field(rng, 2, 3), sample_projective(rng, 2))
    x = sample_point(rng, 2)
    exact = jet(h, x, 2)
    approx = fd_jet(h.evaluate, x, 2)
    for idx, v in exact.derivatives.items():
        assert abs(approx[idx] - v) <= 1e-4 * max(1.0, abs(v))


def test_curvature_nonzero_on_generic_cubic():
    h = parse_field("x^3 + 2*x*y^2 - y^2 + x")
    # H_x = 11/6, H_y = -1/3, H_xx = 2, H_xy = 2, H_yy = -2/3 at (1/3, 1/2).
    value = eval_deriv_expr(catalog.get("affine_curvature"), jet(h, (F(1, 3), F(1, 2)), 2))
    assert value == F(23, 54)


def test_eval_requires_enough_order():
    with pytest.raises(JetOrderError):
        eval_deriv_expr(catalog.get("affine_curvature"), jet(parse_field("x*y"), (F(0), F(0)), 1))
