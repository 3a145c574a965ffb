import json
from fractions import Fraction

import pytest

from ppcert.certio import dumps_json
from ppcert.errors import SearchExhausted
from ppcert.matqz import IntMatrix, charpoly
from ppcert.presets import EF_CHARPOLYS, EF_PAIR, PLANE, SPACE
from ppcert.scenarios import (
    Options,
    PLANE_CONCLUSION,
    SPACE_CONCLUSION,
    SearchConfig,
    g1_automaton,
    g1_language,
    h_automaton,
    h_language,
    k_language,
    replay,
    run_scenario,
    search_ef,
)

from props import contraction_comparison


def _checks(doc, kind):
    return [c for c in doc["checks"] if c["kind"] == kind]


# built-in matrices, entry by entry
def test_golden_plane():
    assert PLANE["I"].rows == ((-1, 0, 0), (0, -1, 0), (0, 0, 1))
    assert PLANE["A"].rows == ((2, 1, 0), (1, 1, 0), (0, 0, 1))
    assert PLANE["B"].rows == ((3, 2, 0), (1, 1, 0), (0, 0, 1))
    assert PLANE["U"].rows == ((0, 0, -1), (0, 1, 0), (1, 0, 0))


def test_golden_space():
    assert SPACE["I"].rows == ((0, 1, 0, 0), (1, 0, 0, 0), (0, 0, -1, 0), (0, 0, 0, 1))
    assert SPACE["J"].rows == ((0, -1, 0, 0), (1, -1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1))
    assert SPACE["A"].rows == ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 2, 1), (0, 0, 1, 1))
    assert SPACE["B"].rows == ((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 3, 1), (0, 0, 2, 1))
    assert SPACE["C"].rows == ((2, -1, 1, 0), (-1, 2, -1, 0), (1, -1, 1, 0), (0, 0, 0, 1))
    assert SPACE["D"].rows == ((4, -1, 1, 1), (-1, 4, -1, 1), (2, -2, 1, 0), (1, 1, 0, 1))


def test_fixture_charpolys():
    for k, m in EF_PAIR.items():
        assert str(charpoly(m)) == EF_CHARPOLYS[k]


def test_plane_certificate(plane_result):
    assert plane_result.ok, plane_result.error
    doc = plane_result.document()
    assert doc["conclusion"] == PLANE_CONCLUSION
    assert len(_checks(doc, "formula")) == 12
    bullets = _checks(doc, "disjointness")
    assert len(bullets) == 3 and all(c["status"] == "pass" for c in bullets)
    assert all(c["status"] == "pass" for c in doc["checks"])
    assert set(doc["powers"]) == {"A", "B", "C"}


def test_space_certificate(space_result):
    assert space_result.ok, space_result.error
    doc = space_result.document()
    assert doc["conclusion"] == SPACE_CONCLUSION
    names = {c["name"] for c in _checks(doc, "formula")}
    assert {f"eigenvalues of {n}" for n in "ABCD"} <= names
    assert len([n for n in names if n.endswith("displayed formula")]) == 16
    assert set(doc["powers"]) == set("ABCDEF")
    stages = {c["name"].split(":")[0] for c in _checks(doc, "word-coverage")}
    assert stages == {"F(A^k, B^k)", "<I> * F(A^k, B^k)", "F(C^k, D^k)", "H *_<I> K", "G_1 * F(E^k, F^k)"}


def test_certified_powers_dominate_sampling(plane_result):
    rows = contraction_comparison(plane_result, samples=200)
    assert rows and all(k_emp <= k for _, _, k, k_emp in rows)


def test_replay_plane(plane_result):
    doc = json.loads(dumps_json(plane_result.document()))
    again = replay(doc)
    assert again.ok
    assert dumps_json(again.document()) == dumps_json(plane_result.document())


def test_replay_detects_tampering(plane_result):
    doc = json.loads(dumps_json(plane_result.document()))
    doc["powers"]["A"] = 1
    assert replay(doc).exit_code == 1
    doc = json.loads(dumps_json(plane_result.document()))
    doc["matrices"]["B"][0][0] += 1
    assert replay(doc).exit_code == 1


def test_replay_space(space_result):
    doc = json.loads(dumps_json(space_result.document()))
    assert replay(doc).ok


def test_half_epsilon_still_verifies(plane_result):
    eps = Fraction(plane_result.document()["epsilon"])
    res = run_scenario("thm-2-2", Options(epsilon=eps / 2))
    assert res.ok
    smaller = res.document()["powers"]
    base = plane_result.document()["powers"]
    assert all(smaller[k] >= base[k] for k in base)


def test_large_epsilon_fails():
    res = run_scenario("thm-2-2", Options(epsilon=Fraction(1, 2)))
    assert res.exit_code == 1 and "separation" in res.error


def test_power_cap():
    res = run_scenario("thm-2-2", Options(max_power=4))
    assert res.exit_code == 4


def test_byte_determinism(plane_result):
    again = run_scenario("thm-2-2", Options())
    assert dumps_json(again.document()) == dumps_json(plane_result.document())


def test_unknown_scenario():
    assert run_scenario("thm-9-9").exit_code == 3


def test_order3_report():
    res = run_scenario("lemma-3-3", Options())
    assert res.ok
    doc = res.document()
    assert doc["epsilon"] is None
    text = " ".join(c["lhs"] + " " + c["name"] for c in doc["checks"])
    assert "12" in text and "6" in text


def test_combined_report():
    res = run_scenario("thm-3-1", Options())
    assert res.ok and all(c.passed for c in res.checks)


@pytest.mark.parametrize("q", [3, 5, 7])
def test_pgl2_report(q):
    res = run_scenario("pgl2", Options(q=q))
    assert res.ok
    assert any(c.lhs == str((q + 1) * q * (q - 1)) for c in res.checks)


def test_languages_match_automata():
    import itertools

    for auto, lang in ((h_automaton(), h_language), (g1_automaton(), g1_language)):
        words = set(auto.words(3))
        brute = {w for n in range(1, 4) for w in itertools.product(auto.alphabet, repeat=n) if lang(w)}
        assert words == brute
    assert not h_language(("I",)) and h_language(("J",)) and h_language(("J", "A"))
    assert not h_language(("I", "I"))
    assert k_language(("I", "C")) and not k_language(("I",))
    # I is central in K, so C I C^-1 = I must not count as a normal form
    assert not g1_language(("C^-1", "I", "C"))


def test_search_is_deterministic():
    E1, F1, cert = search_ef(SearchConfig(seed=42, bound=3))
    E2, F2, _ = search_ef(SearchConfig(seed=42, bound=3))
    assert (E1, F1) == (E2, F2)
    assert cert.passed
    assert (E1, F1) == (EF_PAIR["E"], EF_PAIR["F"])


def test_search_exhausted_under_inflated_epsilon():
    with pytest.raises(SearchExhausted) as info:
        search_ef(SearchConfig(seed=42, bound=3, candidates=60), base_epsilon=Fraction(999, 1000))
    assert info.value.misses["context"] > 0
