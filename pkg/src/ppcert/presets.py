"""Built-in matrices and their expected eigen-data, written out exactly."""

from __future__ import annotations

from .exactnum import parse_number
from .matqz import IntMatrix
from .projdyn import ProjHyperplane, ProjPoint


def _pt(*coords: str) -> ProjPoint:
    return ProjPoint([parse_number(c) for c in coords])


def _hp(*coords: str) -> ProjHyperplane:
    return ProjHyperplane([parse_number(c) for c in coords])


def _nums(*xs: str) -> list:
    return [parse_number(x) for x in xs]


# --- SL_3(Z): (F_2 x Z/2) * F_2 ----------------------------------------------

PLANE = {
    "I": IntMatrix([[-1, 0, 0], [0, -1, 0], [0, 0, 1]]),
    "A": IntMatrix([[2, 1, 0], [1, 1, 0], [0, 0, 1]]),
    "B": IntMatrix([[3, 2, 0], [1, 1, 0], [0, 0, 1]]),
    "U": IntMatrix([[0, 0, -1], [0, 1, 0], [1, 0, 0]]),
}

# name -> (P+, H+, P-, H-); hyperplanes by normal vectors of their equations
PLANE_EXPECTED = {
    "A": (
        _pt("1 + √5", "2", "0"),
        _hp("2", "√5 - 1", "0"),
        _pt("1 - √5", "2", "0"),
        _hp("2", "-√5 - 1", "0"),
    ),
    "B": (
        _pt("1 + √3", "1", "0"),
        _hp("1", "√3 - 1", "0"),
        _pt("1 - √3", "1", "0"),
        _hp("1", "-√3 - 1", "0"),
    ),
    "C": (
        _pt("0", "1", "1 + √3"),
        _hp("0", "√3 - 1", "1"),
        _pt("0", "1", "1 - √3"),
        _hp("0", "√3 + 1", "-1"),
    ),
}

# --- SL_4(Z): ((F_2 x Z/3) *_{Z/3} S_3 *_{Z/2} (Z/2 x F_2)) * F_2 -------------

SPACE = {
    "I": IntMatrix([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]),
    "J": IntMatrix([[0, -1, 0, 0], [1, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]),
    "A": IntMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 2, 1], [0, 0, 1, 1]]),
    "B": IntMatrix([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 3, 1], [0, 0, 2, 1]]),
    "C": IntMatrix([[2, -1, 1, 0], [-1, 2, -1, 0], [1, -1, 1, 0], [0, 0, 0, 1]]),
    "D": IntMatrix([[4, -1, 1, 1], [-1, 4, -1, 1], [2, -2, 1, 0], [1, 1, 0, 1]]),
}

SPACE_EIGENVALUES = {
    "A": _nums("3/2 + 1/2√5", "1", "1", "3/2 - 1/2√5"),
    "B": _nums("2 + √3", "1", "1", "2 - √3"),
    "C": _nums("2 + √3", "1", "1", "2 - √3"),
    "D": _nums("3 + 2√2", "2 + √3", "2 - √3", "3 - 2√2"),
}

SPACE_EXPECTED = {
    "A": (
        _pt("0", "0", "1 + √5", "2"),
        _hp("0", "0", "2", "√5 - 1"),
        _pt("0", "0", "1 - √5", "2"),
        _hp("0", "0", "2", "-1 - √5"),
    ),
    "B": (
        _pt("0", "0", "1 + √3", "2"),
        _hp("0", "0", "2", "√3 - 1"),
        _pt("0", "0", "1 - √3", "2"),
        _hp("0", "0", "2", "-1 - √3"),
    ),
    "C": (
        _pt("1", "-1", "√3 - 1", "0"),
        _hp("√3 + 1", "-√3 - 1", "2", "0"),
        _pt("1", "-1", "-√3 - 1", "0"),
        _hp("1 - √3", "√3 - 1", "2", "0"),
    ),
    "D": (
        _pt("1", "-1", "2√2 - 2", "0"),
        _hp("1", "-1", "√2 - 1", "0"),
        _pt("1", "-1", "-2√2 - 2", "0"),
        _hp("1", "-1", "-1 - √2", "0"),
    ),
}

# The free factor on E, F: a pair found by the seeded search (seed 42, bound 3)
# and frozen here together with its characteristic polynomials.
EF_SEED = 42
EF_BOUND = 3
EF_PAIR = {
    "E": IntMatrix([[2, -5, -11, 36], [2, -3, -8, 28], [-1, 10, 21, -61], [0, 2, 4, -11]]),
    "F": IntMatrix([[-53, 3, 36, -27], [-24, 1, 9, -9], [126, -6, -67, 56], [294, -15, -173, 138]]),
}
EF_CHARPOLYS = {
    "E": "x^4 - 9x^3 + 20x^2 - 9x + 1",
    "F": "x^4 - 19x^3 + 90x^2 - 19x + 1",
}
