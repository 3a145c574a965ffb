import pytest

from ppcert.certio import dumps_json, dumps_text, emit, parse_matrix_file, parse_matrix_text
from ppcert.errors import IoFailure, ParseError
from ppcert.presets import PLANE

PLANE_FILE = """\
# I
-1 0 0
0 -1 0
0 0 1

# A
2 1 0
1 1 0
0 0 1

# B
3 2 0
1 1 0
0 0 1

# U  (C = U B U^-1)
0 0 -1
0 1 0
1 0 0
"""


def test_plane_file(tmp_path):
    path = tmp_path / "plane.txt"
    path.write_text(PLANE_FILE)
    mats = parse_matrix_file(path)
    assert list(mats) == ["I", "A", "B", "U"]
    assert mats == PLANE


def test_unnamed_blocks():
    mats = parse_matrix_text("1 0\n0 1\n\n0 1\n1 0\n")
    assert list(mats) == ["M1", "M2"]


@pytest.mark.parametrize(
    "text, line, column",
    [
        ("1.5 0\n0 1\n", 1, 1),
        ("1 0\n0 1.5\n", 2, 3),
        ("", 1, 1),
        ("# only a comment\n", 1, 1),
        ("1 2\n3\n", 2, 1),
        ("1 2\n", 1, 1),
        ("# X\n1\n\n# X\n2\n", 5, 1),
    ],
)
def test_parse_errors(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_matrix_text(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailure):
        parse_matrix_file(tmp_path / "nope.txt")


def test_emit_is_byte_stable(tmp_path):
    doc = {"scenario": "x", "checks": [], "conclusion": "ok", "powers": {"B": 2, "A": 1}, "version": "0.1.0"}
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    emit(doc, "json", p1)
    emit(dict(reversed(list(doc.items()))), "json", p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().endswith("}\n")


def test_text_lists_margins():
    doc = {
        "scenario": "x",
        "conclusion": "ok",
        "epsilon": "1/2",
        "powers": {"A": 3},
        "checks": [{"name": "n", "kind": "k", "lhs": "l", "rhs": "r", "margin": "1/4", "status": "pass"}],
        "version": "0.1.0",
    }
    text = dumps_text(doc)
    assert "[pass] k: n  (l | r)  margin 1/4" in text
    assert "A^3" in text


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit({}, "xml", None)
    with pytest.raises(IoFailure):
        emit({"a": 1}, "json", tmp_path / "missing" / "dir" / "x.json")
