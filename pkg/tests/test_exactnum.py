from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppcert.errors import NotSquarefree, UnsupportedField
from ppcert.exactnum import (
    AlgebraicNumber,
    Q,
    adjoin_sqrt,
    enclose,
    field_ops,
    format_number,
    is_squarefree,
    join_tags,
    parse_number,
    sign_of,
    sqrt,
    squarefree_decompose,
)

from props import algebraic, check_field_axioms, check_sign


def test_sqrt_simplifies():
    assert sqrt(8) == 2 * sqrt(2)
    assert sqrt(Fraction(1, 4)) == Q(Fraction(1, 2))
    assert sqrt(12) * sqrt(3) == 6
    assert sqrt(2) * sqrt(3) == sqrt(6)


def test_negative_radicand_rejected():
    with pytest.raises(UnsupportedField):
        sqrt(-2)


def test_radical_cap():
    x = sqrt(2) + sqrt(3) + sqrt(5) + sqrt(7)
    assert x.dimension == 16
    with pytest.raises(UnsupportedField):
        x + sqrt(11)


def test_squarefree_helpers():
    f, s = squarefree_decompose(72)
    assert f * f * s == 72 or s * s * f == 72
    assert is_squarefree(30) and not is_squarefree(12)


def test_tags_are_canonical():
    # Q(sqrt 2, sqrt 3) = Q(sqrt 2, sqrt 6) = Q(sqrt 3, sqrt 6)
    t1 = adjoin_sqrt(adjoin_sqrt((), 2), 3)
    t2 = adjoin_sqrt(adjoin_sqrt((), 2), 6)
    t3 = adjoin_sqrt(adjoin_sqrt((), 6), 3)
    assert t1 == t2 == t3
    assert join_tags(adjoin_sqrt((), 2), adjoin_sqrt((), 3)) == t1


def test_product_example():
    a = parse_number("1 + √2")
    b = parse_number("√3 - 1/2√6")
    assert a * b == parse_number("1/2√6")
    assert a.inverse() == parse_number("-1 + √2")


def test_format_round_trip():
    for text in ["0", "3/2 + 1/2√5", "-√3", "2 - √3", "1 - 8/65√15", "3 + 2√2"]:
        assert format_number(parse_number(text)) == text


def test_parse_accepts_sqrt_call():
    assert parse_number("1 + sqrt(5)") == parse_number("1 + √5")


@pytest.mark.parametrize("bad", ["", "1 +", "x", "1 2"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        parse_number(bad)


def test_sign_of_close_values():
    # sqrt2 + sqrt3 ~ 3.1463, sqrt10 ~ 3.1623
    assert sign_of(sqrt(2) + sqrt(3) - sqrt(10)) == -1
    assert sign_of((sqrt(2) + sqrt(3)) ** 2 - (5 + 2 * sqrt(6))) == 0
    # 1 - 8/65 sqrt15 - 1/130 sqrt5 is positive but small
    assert sign_of(parse_number("1/2 - 1/130√5 - 8/65√15")) == 1


def test_enclosure_width():
    iv = enclose(sqrt(2), Fraction(1, 10**12))
    assert iv.width <= Fraction(1, 10**12)
    assert iv.lo * iv.lo <= 2 <= iv.hi * iv.hi


def test_field_ops_dispatch():
    a, b = sqrt(2), sqrt(3)
    assert field_ops(a, b, "add") == a + b
    assert field_ops(a, b, "mul") == sqrt(6)
    assert field_ops(a, b, "inv") == sqrt(2) / 2
    with pytest.raises(ValueError):
        field_ops(a, b, "pow")


def test_rational_coercion_and_hash():
    assert Q(3) == 3 and hash(Q(3)) == hash(AlgebraicNumber.rational(3))
    assert {sqrt(8): 1}[2 * sqrt(2)] == 1


@settings(max_examples=2000)
@given(algebraic(), algebraic(), algebraic())
def test_field_axioms(a, b, c):
    check_field_axioms(a, b, c)


@settings(max_examples=2000)
@given(algebraic(), algebraic())
def test_sign_determination(a, b):
    check_sign(a, b)
