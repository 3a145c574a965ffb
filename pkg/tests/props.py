"""Strategies and property bodies shared by the unit suites and the acceptance gate."""

import math
from fractions import Fraction

from hypothesis import strategies as st

from ppcert.exactnum import AlgebraicNumber, sign_of
from ppcert.groupcheck import (
    CyclicFactor,
    DirectFactor,
    FreeFactor,
    ProductStructure,
    evaluate_word,
    inv_word,
    normal_form,
)
from ppcert.matqz import IntMatrix
from ppcert.projdyn import ProjPoint, dist2_points, act
from ppcert import oraclekit

RADICALS = (2, 3, 5, 6, 7, 10, 15)

_q = st.tuples(st.integers(-20, 20), st.integers(1, 12)).map(lambda t: Fraction(*t))


def _build(t):
    m1, m2, q0, q1, q2, k = t
    x = AlgebraicNumber.rational(q0)
    if k >= 1:
        x = x + AlgebraicNumber.sqrt(m1) * q1
    if k >= 2:
        x = x + AlgebraicNumber.sqrt(m2) * q2
    return x


def algebraic(radicals=RADICALS):
    """q0 + q1 sqrt(m1) + q2 sqrt(m2) with k of the radical terms kept, so fields stay small."""
    r = st.sampled_from(radicals)
    return st.tuples(r, r, _q, _q, _q, st.integers(0, 2)).map(_build)


def check_field_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + (-a) == 0
    assert a - b == -(b - a)
    if not a.is_zero():
        assert a * a.inverse() == 1
        assert (b / a) * a == b
    # floats are only a sanity net, never used for decisions
    assert math.isclose(float(a * b), float(a) * float(b), rel_tol=1e-9, abs_tol=1e-6)


def check_sign(a, b):
    s = sign_of(a - b)
    if s == 0:
        assert a == b
    else:
        assert s == -sign_of(b - a)
        f = float(a) - float(b)
        if abs(f) > 1e-6:
            assert s == (1 if f > 0 else -1)
    assert sign_of(a * a) >= 0
    assert sign_of(a - a) == 0


ints = st.integers(min_value=-6, max_value=6)
int_vectors = st.lists(ints, min_size=3, max_size=3).filter(any)


def check_metric(u, v, w):
    p, q, r = ProjPoint(u), ProjPoint(v), ProjPoint(w)
    dpq = dist2_points(p, q)
    assert sign_of(dpq) >= 0 and sign_of(dpq - 1) <= 0
    assert dpq == dist2_points(q, p)
    assert (sign_of(dpq) == 0) == (p == q)
    assert dist2_points(p, p) == 0
    # triangle inequality for sin of angles, checked with a tiny float slack
    d = lambda x, y: math.sqrt(max(0.0, float(dist2_points(x, y))))
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-12


# signed permutation matrices are the integer orthogonal matrices
@st.composite
def signed_permutation(draw, n=3):
    perm = draw(st.permutations(range(n)))
    signs = draw(st.lists(st.sampled_from([1, -1]), min_size=n, max_size=n))
    return IntMatrix([[signs[i] if perm[i] == j else 0 for j in range(n)] for i in range(n)])


def check_equivariance(g, u, v):
    p, q = ProjPoint(u), ProjPoint(v)
    assert dist2_points(act(g, p), act(g, q)) == dist2_points(p, q)


# normal-form confluence in (F(a, b) x Z/2) * Z/3 * Z
def structure():
    return ProductStructure(
        [DirectFactor("H", ["a", "b"], "i", 2), CyclicFactor("T", "t", 3), FreeFactor("K", ["c"])]
    )


LETTERS = ("a", "a^-1", "b", "b^-1", "i", "t", "t^-1", "c", "c^-1")
words = st.lists(st.sampled_from(LETTERS), max_size=14).map(tuple)


def check_confluence(u, v, w):
    S = structure()
    nf = lambda x: normal_form(x, S)
    # reducing a subword first does not change the result
    assert nf(u + v + w) == nf(u + nf(v).letters() + w)
    assert nf(nf(u).letters() + nf(v).letters()) == nf(u + v)
    assert nf(u + inv_word(u)).is_identity()
    assert nf(nf(u).letters()) == nf(u)


# evaluate_word is a homomorphism on the SL_4 letters
def check_homomorphism(letters, u, v):
    assert evaluate_word(u + v, letters) == evaluate_word(u, letters) @ evaluate_word(v, letters)
    assert (evaluate_word(u, letters) @ evaluate_word(inv_word(u), letters)).is_identity()


def lipschitz_never_violated(matrices: dict, pairs: int, seed: int = 0) -> dict:
    """Sampled d(gx, gy)/d(x, y) against the certified bound, per matrix."""
    from ppcert.projdyn import lipschitz_bound

    out = {}
    for name, m in matrices.items():
        bound = float(lipschitz_bound(m))
        worst = oraclekit.lipschitz_ratio(m, pairs, seed)
        assert worst <= bound * (1 + 1e-9), (name, worst, bound)
        out[name] = (worst, bound)
    return out


def contraction_comparison(result, samples: int = 1000) -> list:
    """(letter, source, k_cert, k_emp) for every certified contraction of a scenario run."""
    U = result.extra["universe"]
    letters = result.extra["letters"]
    rows = []
    for t in result.extra["table"]:
        if t.justification != "contraction-certificate":
            continue
        L = letters[t.letter]
        base = L.base_matrix if L.sign > 0 else L.base_matrix.inverse()
        eps = U.balls[t.target].radius
        k_emp = oraclekit.empirical_contraction(
            base, U.sub([t.source]), eps, samples, target=L.cert.attracting.floats(), seed=len(rows)
        )
        rows.append((t.letter, t.source, L.exponent, k_emp))
    return rows


def mutations(count: int = 20, seed: int = 2024) -> list:
    """Deterministic single-entry +-1 corruptions spread over every built-in matrix."""
    import random

    from ppcert.presets import EF_PAIR, PLANE, SPACE

    pool = [("thm-2-2", k, m) for k, m in PLANE.items()]
    pool += [("thm-3-5", k, m) for k, m in SPACE.items()]
    pool += [("thm-3-5", k, m) for k, m in EF_PAIR.items()]
    rng = random.Random(seed)
    out = []
    for i in range(count):
        scenario, name, m = pool[i % len(pool)]
        r, c = rng.randrange(m.n), rng.randrange(m.n)
        delta = rng.choice((1, -1))
        rows = [list(row) for row in m.rows]
        rows[r][c] += delta
        out.append((scenario, name, (r, c, delta), IntMatrix(rows)))
    return out


def run_mutation(mutation):
    from ppcert.scenarios import Options, run_scenario

    scenario, name, _, m = mutation
    res = run_scenario(scenario, Options(matrices={name: m}))
    failed = next((c.name for c in res.checks if not c.passed), res.error)
    return res.exit_code, failed
