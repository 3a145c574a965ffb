import random
from fractions import Fraction

import pytest

from ppcert.errors import NotDiagonalizable, NotPrimitive, UnsupportedField
from ppcert.exactnum import parse_number
from ppcert.matqz import (
    IntMatrix,
    Matrix,
    RatPolynomial,
    adjugate,
    charpoly,
    det,
    eigen_decompose,
    factor_charpoly,
    integer_kernel,
    inverse,
    kernel,
    lll_reduce,
    order_of,
    primitive_extend,
    rank,
    smith_normal_form,
)
from ppcert.oraclekit import reference_charpoly, reference_det, reference_snf
from ppcert.presets import EF_PAIR, PLANE, SPACE

ALL = {**{f"plane {k}": v for k, v in PLANE.items()}, **{f"space {k}": v for k, v in SPACE.items()}, **EF_PAIR}


def _random(rng, n, bound=4):
    return IntMatrix([[rng.randint(-bound, bound) for _ in range(n)] for _ in range(n)])


@pytest.mark.parametrize("name", sorted(ALL))
def test_oracles_agree_on_builtin(name):
    M = ALL[name]
    assert det(M) == reference_det(M) == 1
    assert list(charpoly(M).coeffs) == reference_charpoly(M)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_oracles_agree_on_random(n):
    rng = random.Random(1000 + n)
    for _ in range(1000):
        M = _random(rng, n)
        assert det(M) == reference_det(M)
        assert list(charpoly(M).coeffs) == reference_charpoly(M)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_smith_form_agrees(n):
    rng = random.Random(2000 + n)
    for _ in range(200 if n == 4 else 1000):
        M = _random(rng, n, 6)
        U, D, V = smith_normal_form(M)
        assert U @ M @ V == D
        assert abs(det(U)) == 1 and abs(det(V)) == 1
        assert [D[i, i] for i in range(n)] == reference_snf(M)


def test_smith_edge_cases():
    assert reference_snf([[0]]) == [0]
    assert smith_normal_form(IntMatrix([[0]]))[1] == IntMatrix([[0]])
    assert reference_snf([[2, 4], [6, 8]]) == [2, 4]
    U, D, V = smith_normal_form(IntMatrix([[2, 4, 6]]))
    assert D.rows == ((2, 0, 0),)


def test_reference_det_identity():
    assert reference_det(IntMatrix.identity(4)) == 1


def test_charpoly_examples():
    assert str(charpoly(SPACE["D"])) == "x^4 - 10x^3 + 26x^2 - 10x + 1"
    assert [str(f.poly) for f in factor_charpoly(charpoly(SPACE["D"]))] == ["x^2 - 6x + 1", "x^2 - 4x + 1"]
    fs = factor_charpoly(charpoly(SPACE["A"]))
    assert [(str(f.poly), f.multiplicity) for f in fs] == [("x - 1", 2), ("x^2 - 3x + 1", 1)]


def test_factor_flags_quartic():
    fs = factor_charpoly(RatPolynomial([1, -1, 0, 0, 1]))
    assert len(fs) == 1 and fs[0].flagged


def test_factor_repeated_quadratic():
    p = RatPolynomial([1, -4, 1]) ** 2
    fs = factor_charpoly(p)
    assert [(str(f.poly), f.multiplicity) for f in fs] == [("x^2 - 4x + 1", 2)]


def test_polynomial_arithmetic():
    p = RatPolynomial([1, 0, 1])
    q, r = divmod(p * RatPolynomial([-2, 1]) + RatPolynomial([3]), RatPolynomial([-2, 1]))
    assert q == p and r == RatPolynomial([3])
    assert p(2) == 5
    assert RatPolynomial([0]).degree == -1


def test_eigen_decompose_space_d():
    ed = eigen_decompose(SPACE["D"])
    assert [str(x) for x in ed.eigenvalues] == ["3 + 2√2", "2 + √3", "2 - √3", "3 - 2√2"]
    assert SPACE["D"] @ ed.S == ed.S @ Matrix.diag(list(ed.eigenvalues))


def test_eigen_decompose_errors():
    with pytest.raises(NotDiagonalizable):
        eigen_decompose(IntMatrix([[1, 1], [0, 1]]))
    with pytest.raises(UnsupportedField):
        eigen_decompose(IntMatrix([[0, 0, 0, -1], [1, 0, 0, 1], [0, 1, 0, 0], [0, 0, 1, 0]]))
    with pytest.raises(UnsupportedField):
        eigen_decompose(IntMatrix([[0, -1], [1, 0]]))


def test_inverse_and_adjugate():
    J = SPACE["J"]
    assert inverse(J) @ J == Matrix.identity(4)
    A = SPACE["A"]
    assert A @ adjugate(A) == Matrix.identity(4) * det(A)
    assert order_of(J) == 3 and order_of(SPACE["I"]) == 2 and order_of(SPACE["A"]) is None


def test_algebraic_entries():
    r = parse_number("√2")
    M = Matrix([[r, 1], [0, r]])
    assert det(M) == 2
    assert inverse(M) @ M == Matrix.identity(2)


def test_kernels():
    M = IntMatrix([[1, 2], [2, 4]])
    assert rank(M) == 1
    assert kernel(M) == [(Fraction(-2), 1)]
    ker = integer_kernel(IntMatrix([[2, 4, 6]]))
    assert len(ker) == 2
    assert all(2 * v[0] + 4 * v[1] + 6 * v[2] == 0 for v in ker)


def test_primitive_extend():
    P = primitive_extend((3, 5, 7))
    assert P.col(0) == (3, 5, 7) and abs(det(P)) == 1
    assert primitive_extend((1, 0, 0)) == IntMatrix.identity(3)
    with pytest.raises(NotPrimitive):
        primitive_extend((2, 4, 6))


def test_lll_spans_same_lattice():
    basis = [(1, 1, 1), (-1, 0, 2), (3, 5, 6)]
    red = lll_reduce(basis)
    assert abs(det(IntMatrix(red))) == abs(det(IntMatrix(basis)))
    assert sum(x * x for x in red[0]) <= sum(x * x for x in basis[2])
