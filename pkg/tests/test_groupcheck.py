import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppcert.errors import NoOrder3Element, NotPrime, TooLarge
from ppcert.groupcheck import (
    Atom,
    CyclicFactor,
    DirectFactor,
    FiniteAction,
    FiniteMatrixFactor,
    FreeFactor,
    ProductStructure,
    centralizer_witnesses,
    commutator,
    compose,
    cyclic_action,
    elements_of_order,
    evaluate_word,
    inv_letter,
    inv_word,
    nontriviality_sweep,
    normal_form,
    parse_word,
    perm_inverse,
    pgl2_action,
    relation_check,
    sharply_transitive_check,
    symmetric_action,
)
from ppcert.matqz import IntMatrix
from ppcert.presets import SPACE

from props import LETTERS, check_confluence, check_homomorphism, structure, words


def test_word_helpers():
    assert inv_letter("A") == "A^-1" and inv_letter("A^-1") == "A"
    assert inv_word(("A", "B^-1")) == ("B", "A^-1")
    assert parse_word("A·B^-1 I") == ("A", "B^-1", "I")
    assert commutator("A", "J") == ("A", "J", "A^-1", "J^-1")


def test_normal_form_examples():
    S = structure()
    nf = normal_form(("a", "i", "a^-1", "i"), S)
    assert nf.is_identity()
    nf = normal_form(("a", "t", "t", "t", "b"), S)
    assert [s.factor for s in nf.syllables] == ["H"] and nf.letters() == ("a", "b")
    nf = normal_form(("c", "a", "c^-1"), S)
    assert len(nf) == 3 and str(nf) == "(c) (a) (c^-1)"


def test_finite_matrix_factor():
    S3 = FiniteMatrixFactor("S3", {"I": SPACE["I"], "J": SPACE["J"]})
    assert S3.order == 6
    structure = ProductStructure([S3, FreeFactor("F", ["E"])])
    assert normal_form(("I", "J", "I", "J"), structure).is_identity()
    assert len(normal_form(("I", "E", "J"), structure)) == 3


def test_evaluate_and_relations():
    L = {"I": SPACE["I"], "J": SPACE["J"], "A": SPACE["A"]}
    assert evaluate_word(("J", "J", "J"), L).is_identity()
    assert evaluate_word(("J", "J^-1"), L).is_identity()
    res = relation_check([("I J I^-1 = J^2", ("I", "J", "I^-1"), ("J", "J")), ("A = J", ("A",), ("J",))], L)
    assert [r.holds for r in res] == [True, False]


def test_sweep_finds_identity():
    L = {"I": SPACE["I"], "J": SPACE["J"]}
    # I and J are not free: (I J)^2 = 1
    res = nontriviality_sweep([Atom("a", ("I",)), Atom("b", ("J",))], L, 4)
    assert not res.passed and res.counterexample == ("I", "J", "I", "J")


def test_sweep_passes_on_free_pair():
    L = {"x": IntMatrix([[1, 2], [0, 1]]), "y": IntMatrix([[1, 0], [2, 1]])}
    atoms = [Atom("x", ("x",)), Atom("x", ("x^-1",)), Atom("y", ("y",)), Atom("y", ("y^-1",))]
    res = nontriviality_sweep(atoms, L, 6)
    assert res.passed and res.words_checked == sum(4 * 2 ** (k - 1) for k in range(1, 7))


def test_permutations():
    p, q = (1, 2, 0), (0, 2, 1)
    assert compose(p, perm_inverse(p)) == (0, 1, 2)
    assert compose(p, q) == (1, 0, 2)


@pytest.mark.parametrize("q, order, order3, fixed", [(3, 24, 8, 1), (5, 120, 20, 0), (7, 336, 56, 2)])
def test_pgl2(q, order, order3, fixed):
    act = pgl2_action(q)
    assert len(act.elements) == order == (q + 1) * q * (q - 1)
    assert act.is_faithful() and act.is_group()
    rep = sharply_transitive_check(act, 3)
    assert rep.passed and rep.counting_identity
    g3 = elements_of_order(act, 3)
    assert len(g3) == order3
    for g in g3:
        w = centralizer_witnesses(act, g)
        assert w.passed and len(w.fixed_points) == fixed


def test_pgl2_errors():
    with pytest.raises(NotPrime):
        pgl2_action(4)
    with pytest.raises(TooLarge):
        pgl2_action(29)


def test_transitivity_edge_cases():
    assert sharply_transitive_check(symmetric_action(3), 3).passed
    assert sharply_transitive_check(symmetric_action(4), 3).passed
    assert not sharply_transitive_check(symmetric_action(4), 2).passed
    # regular but not 2-transitive
    rep = sharply_transitive_check(cyclic_action(4), 2)
    assert not rep.passed and rep.failure[2] == 0
    with pytest.raises(ValueError):
        sharply_transitive_check(cyclic_action(2), 3)


def test_witness_needs_order_three():
    act = symmetric_action(4)
    with pytest.raises(NoOrder3Element):
        centralizer_witnesses(act, (1, 0, 2, 3))


@settings(max_examples=2000)
@given(words, words, words)
def test_normal_form_confluence(u, v, w):
    check_confluence(u, v, w)


SL4 = {k: SPACE[k] for k in "IJAB"}
sl4_words = st.lists(st.sampled_from(["I", "J", "J^-1", "A", "A^-1", "B", "B^-1"]), max_size=6).map(tuple)


@settings(max_examples=300)
@given(sl4_words, sl4_words)
def test_evaluate_word_homomorphism(u, v):
    check_homomorphism(SL4, u, v)
