from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from diffmoment import catalog
from diffmoment.generators import enumerate_specs, expand, parse
from diffmoment.translator import (DERIVATIVES, MOMENTS, InvariantExpr, central_shift_note, moment_poly,
                                   to_derivatives, to_moments)


def translate(text, dim=None):
    spec = parse(text, dim)
    return to_moments(expand(spec), spec)


def test_single_point_inner_product():
    e = translate("f(1,1)")
    assert e.render() == "mu20 + mu02"
    assert e.power == 0


def test_area_square_to_moments():
    e = translate("g(1,2)*g(1,2)")
    assert e.render() == "(mu20*mu02 - mu11^2) / mu00^4"
    assert e.meta["constant"] == "2"
    assert catalog.get("ami1").same_terms(e)


def test_curvature_spec_to_moments():
    e = translate("g(2,1)*g(2,3)")
    assert e.render() == "(mu20*mu01^2 - 2*mu11*mu10*mu01 + mu02*mu10^2) / mu00^5"
    assert e.meta["constant"] == "1"
    assert catalog.get("affine_curvature_moments").same_terms(e)


def test_curvature_spec_to_derivatives():
    d = to_derivatives(translate("g(2,1)*g(2,3)"))
    assert d.form == DERIVATIVES
    assert d.render() == "(H_xx*H_y^2 - 2*H_xy*H_x*H_y + H_yy*H_x^2) / J^2"
    assert catalog.get("affine_curvature").same_terms(d)


def test_bordered_hessian_from_3d_spec():
    e = translate("1/2*g(1,2,3)*g(2,3,4)")
    assert len(e.terms) == 12
    assert e.meta["constant"] == "1"
    assert catalog.get("bordered_hessian").same_terms(to_derivatives(e))


def test_zero_translation_is_flagged():
    e = translate("g(1,2)*g(2,3)*g(3,1)")
    assert e.meta["zero"] and not e.terms


def test_laplacian_from_first_hu_invariant():
    d = to_derivatives(translate("f(1,1)"))
    assert d.render() == "H_xx + H_yy"
    assert d.power == 0


def test_weights():
    assert translate("g(1,2)*g(1,2)").weight() == 0
    assert to_derivatives(translate("g(2,1)*g(2,3)")).weight() == 2
    assert catalog.get("hu1").weight() == 2
    assert catalog.get("hu2").weight() == 4


def test_central_shift_note():
    assert central_shift_note(translate("g(2,1)*g(2,3)"))
    assert not central_shift_note(translate("g(1,2)*g(1,2)"))


@pytest.mark.parametrize("name", sorted(catalog.all_expressions()))
def test_json_roundtrip(name):
    e = catalog.get(name)
    back = InvariantExpr.loads(e.dumps())
    assert back.same_terms(e)
    assert back.dumps() == e.dumps()
    assert back.form == e.form and back.power == e.power


def test_json_schema_fields():
    data = translate("g(1,2)*g(1,2)").to_json()
    assert data["form"] == MOMENTS
    assert data["normalization"] == {"kind": "mu00", "power": 4}
    assert data["terms"][0] == {"coeff": "1", "symbols": [[2, 0], [0, 2]]}


def test_to_derivatives_rejects_derivative_form():
    with pytest.raises(ValueError):
        to_derivatives(catalog.get("affine_curvature"))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(enumerate_specs(2, 3, 2)), st.permutations([1, 2, 3]))
def test_relabeling_does_not_change_translation(spec, perm):
    # Moments do not depend on which integration variable a point is called.
    mapping = {i + 1: p for i, p in enumerate(perm)}
    p = expand(spec)
    assert moment_poly(p).ordered() == moment_poly(p.rename_points(mapping)).ordered()


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(enumerate_specs(2, 3, 2, affine_only=True)))
def test_translated_moment_orders_match_frequencies(spec):
    e = to_moments(expand(spec), spec)
    want = tuple(sorted(spec.freq.values(), reverse=True))
    for profile in e.order_profiles():
        assert tuple(sorted(profile, reverse=True)) == want
    assert e.degree == spec.m
    assert Fraction(e.meta["constant"]) != 0
