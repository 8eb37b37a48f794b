import pytest

from diffmoment.generators import (GenFactor, PISpec, SpecSyntaxError, canonical_spec, enumerate_specs, eval_f,
                                   eval_g, expand, parse, parse_spec)


def test_inner_product_and_determinant():
    assert eval_f(1, 2, 2).render() == "x1*x2 + y1*y2"
    assert eval_f(1, 1, 2).render() == "x1^2 + y1^2"
    assert eval_g((1, 2), 2).render() == "x1*y2 - x2*y1"
    assert eval_g((1, 1), 2).is_zero()


def test_determinant_3d_is_alternating():
    g = eval_g((1, 2, 3), 3)
    assert len(g) == 6
    assert eval_g((2, 1, 3), 3) == -g


def test_expand_square_of_area():
    # Term-for-term golden output for g(1,2)^2.
    assert expand(parse("g(1,2)*g(1,2)")).render() == "x1^2*y2^2 - 2*x1*x2*y1*y2 + x2^2*y1^2"


def test_expand_three_point_curvature_spec():
    expected = "x1*x3*y2^2 - x1*x2*y2*y3 - x2*x3*y1*y2 + x2^2*y1*y3"
    got = expand(parse("g(2,1)*g(2,3)"))
    # Same four terms and coefficients as the worked expansion; order is ours.
    assert sorted(got.render().replace(" - ", " + -").split(" + ")) == \
        sorted(expected.replace(" - ", " + -").split(" + "))


def test_parse_properties():
    s = parse_spec("g(2,1) * g(2,3)")
    assert (s.dim, s.k, s.l, s.m) == (2, 2, 0, 3)
    assert s.freq == {1: 1, 2: 2, 3: 1}
    assert s.is_affine
    assert parse("g(1,2,3)*g(2,3,4)").dim == 3
    assert parse("f(1,2)^2").k == 0


def test_parse_linear_combination():
    form = parse("f(1,2)^2 - 2*g(1,2)^2")
    assert len(form.terms) == 2


@pytest.mark.parametrize("text,col", [("g(1,2)*h(1)", 8), ("g(1,", 5), ("g(0,1)", 3), ("g(1,2)**", 8)])
def test_syntax_errors_carry_position(text, col):
    with pytest.raises(SpecSyntaxError) as info:
        parse(text)
    assert info.value.line == 1
    assert info.value.column == col


def test_wrong_arity_rejected():
    with pytest.raises(SpecSyntaxError):
        parse("g(1,2,3)", dim=2)


def test_canonical_spec_merges_relabelings():
    a = canonical_spec(parse_spec("g(2,1)*g(2,3)"))
    b = canonical_spec(parse_spec("g(1,3)*g(1,2)"))
    assert str(a) == str(b)


def test_enumerate_small_affine():
    assert [str(s) for s in enumerate_specs(2, 2, 2, affine_only=True)] == ["g(1,2)*g(1,2)"]
    assert enumerate_specs(2, 1, 2, affine_only=True) == []


def test_enumerate_excludes_zero_translations():
    # g(1,2)g(2,3)g(3,1) expands to a nonzero polynomial whose moment image cancels.
    from diffmoment.translator import moment_poly
    assert not expand(parse("g(1,2)*g(2,3)*g(3,1)")).is_zero()
    assert not moment_poly(expand(parse("g(1,2)*g(2,3)*g(3,1)"))).terms
    for s in enumerate_specs(2, 3, 2):
        assert moment_poly(expand(s)).terms


def test_enumerate_affine_specs_are_even():
    for s in enumerate_specs(2, 3, 3, affine_only=True):
        assert s.l == 0 and s.k % 2 == 0


def test_spec_json_fields():
    s = PISpec(2, (GenFactor("g", (1, 2)), GenFactor("g", (1, 2))))
    assert s.to_json() == {"dim": 2, "spec": "g(1,2)*g(1,2)", "m": 2, "k": 2, "l": 0, "freq": {"1": 2, "2": 2}}
