from fractions import Fraction

import pytest
from hypothesis import given, settings

from ppcert.errors import NotProximal, PowerCapExceeded, Singular, SourceTouchesRepelling
from ppcert.exactnum import parse_number, sign_of
from ppcert.matqz import IntMatrix
from ppcert.oraclekit import empirical_contraction
from ppcert.presets import PLANE, SPACE
from ppcert.projdyn import (
    Ball,
    ProjHyperplane,
    ProjPoint,
    Region,
    act,
    analyze_proximal,
    auto_epsilon,
    ball_disjoint_margin,
    ball_hyperplane_margin,
    ball_inside_margin,
    certify_contraction,
    dist2_point_hyperplane,
    dist2_points,
    is_orthogonal,
    lipschitz_bound,
    region_checks,
)

from props import check_equivariance, check_metric, int_vectors, lipschitz_never_violated, signed_permutation


def test_points_are_canonical():
    assert ProjPoint([1, 2, 3]) == ProjPoint([-2, -4, -6])
    assert ProjPoint([0, 1, 1]) != ProjPoint([0, 1, -1])
    with pytest.raises(ValueError):
        ProjPoint([0, 0, 0])


def test_distances():
    p = ProjPoint([1, 2, 3])
    assert dist2_points(p, ProjPoint([1, 0, 0])) == Fraction(13, 14)
    h = ProjHyperplane([1, 0, 0])
    assert dist2_point_hyperplane(p, h) == Fraction(1, 14)
    assert h.contains(ProjPoint([0, 1, 1]))


def test_act_on_hyperplane_preserves_incidence():
    A = PLANE["A"]
    h = ProjHyperplane([1, 1, 0])
    p = ProjPoint([1, -1, 5])
    assert h.contains(p) and act(A, h).contains(act(A, p))
    with pytest.raises(Singular):
        act(IntMatrix([[1, 0], [0, 0]]), ProjPoint([1, 1]))


def test_proximal_plane_a():
    plus, minus = analyze_proximal(PLANE["A"])
    assert str(plus.lambda1) == "3/2 + 1/2√5"
    assert plus.attracting == ProjPoint([parse_number("1 + √5"), 2, 0])
    assert plus.repelling == ProjHyperplane([2, parse_number("√5 - 1"), 0])
    assert plus.self_check() and minus.self_check()
    assert minus.attracting == ProjPoint([parse_number("1 - √5"), 2, 0])


def test_not_proximal():
    with pytest.raises(NotProximal):
        analyze_proximal(SPACE["J"] @ SPACE["J"] @ SPACE["J"])
    with pytest.raises(NotProximal):
        analyze_proximal(IntMatrix([[-1, 0], [0, 1]]))


def test_lipschitz_bound():
    assert lipschitz_bound(SPACE["I"]) == 1 and is_orthogonal(SPACE["I"])
    assert lipschitz_bound(SPACE["J"]) == 25
    assert lipschitz_bound(PLANE["U"]) == 1


def test_ball_margins():
    c = ProjPoint([1, 0, 0])
    b1 = Ball(c, Fraction(1, 10))
    b2 = Ball(c, Fraction(1, 5))
    far = Ball(ProjPoint([0, 1, 0]), Fraction(1, 10))
    assert sign_of(ball_inside_margin(b1, b2)) >= 0
    assert ball_inside_margin(b2, b1) is None
    assert sign_of(ball_disjoint_margin(b1, far)) > 0
    assert sign_of(ball_hyperplane_margin(b1, ProjHyperplane([1, 0, 0]))) > 0
    assert sign_of(ball_hyperplane_margin(b1, ProjHyperplane([0, 1, 0]))) < 0
    with pytest.raises(ValueError):
        Ball(c, Fraction(1))


def test_region_checks():
    c = ProjPoint([1, 0, 0])
    r_small = Region({"a": Ball(c, Fraction(1, 10))})
    r_big = Region({"b": Ball(c, Fraction(1, 5))})
    r_far = Region({"c": Ball(ProjPoint([0, 1, 0]), Fraction(1, 10))})
    assert region_checks(r_small, r_big).kind == "r1_subset_r2"
    assert region_checks(r_small, r_far).kind == "disjoint"
    assert region_checks(r_big, r_small).kind == "overlap-witness"


def _source():
    bp, bm = analyze_proximal(PLANE["B"])
    return Region({"x": Ball(bp.attracting, Fraction(1, 100)), "y": Ball(bm.attracting, Fraction(1, 100))})


def test_contraction_certified_vs_sampled():
    plus, _ = analyze_proximal(PLANE["A"])
    R = _source()
    for eps in (Fraction(1, 100), Fraction(1, 1000), Fraction(1, 10**6)):
        c = certify_contraction(plus, R, eps)
        assert c.bound() <= eps and (c.k == 1 or c.bound(c.k - 1) > eps)
        assert empirical_contraction(PLANE["A"], R, eps, 1000) <= c.k


def test_contraction_monotone_in_eps():
    plus, _ = analyze_proximal(PLANE["A"])
    R = _source()
    ks = [certify_contraction(plus, R, Fraction(1, 10**j)).k for j in range(1, 8)]
    assert ks == sorted(ks)


def test_contraction_errors():
    plus, minus = analyze_proximal(PLANE["A"])
    touching = Region({"p": Ball(minus.attracting, Fraction(1, 100))})
    with pytest.raises(SourceTouchesRepelling):
        certify_contraction(plus, touching, Fraction(1, 100))
    with pytest.raises(PowerCapExceeded):
        certify_contraction(plus, _source(), Fraction(1, 10**40), max_power=16)


def test_empirical_conventions():
    R = _source()
    assert empirical_contraction(PLANE["A"], R, Fraction(1, 100), 0) == 0
    assert empirical_contraction(PLANE["A"], R, 1, 100) in (0, 1)


def test_auto_epsilon():
    eps = auto_epsilon([Fraction(1, 4), Fraction(0), Fraction(9, 16)], 1)
    assert eps == Fraction(1, 16)
    assert auto_epsilon([Fraction(1, 4)], 24) == Fraction(1, 200)
    for bad in ([0], [Fraction(1, 10**20)]):
        with pytest.raises(ValueError):
            auto_epsilon(bad, 1)


@settings(max_examples=1000)
@given(int_vectors, int_vectors, int_vectors)
def test_metric_axioms(u, v, w):
    check_metric(u, v, w)


@settings(max_examples=500)
@given(signed_permutation(), int_vectors, int_vectors)
def test_orthogonal_equivariance(g, u, v):
    check_equivariance(g, u, v)


def test_lipschitz_sampling():
    lipschitz_never_violated({**{f"3 {k}": v for k, v in PLANE.items()}, **{f"4 {k}": v for k, v in SPACE.items()}}, 2000)
