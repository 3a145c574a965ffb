import json
import subprocess
import sys

import pytest

from ppcert.cli import build_parser, parse_epsilon, run

from test_certio import PLANE_FILE


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_epsilon_flag():
    from fractions import Fraction

    assert parse_epsilon("auto") is None
    assert parse_epsilon("1/200") == Fraction(1, 200)
    for bad in ("0", "1", "x", "1/0"):
        with pytest.raises(Exception):
            parse_epsilon(bad)


def test_flags_before_and_after_subcommand():
    p = build_parser()
    a = p.parse_args(["--format", "text", "verify", "thm-2-2"])
    b = p.parse_args(["verify", "thm-2-2", "--format", "text"])
    assert a.format == b.format == "text"
    assert p.parse_args(["verify", "thm-2-2"]).max_power == 4096


def test_verify_plane(capsys, tmp_path):
    out = tmp_path / "cert.json"
    code, _, _ = _run(capsys, "verify", "thm-2-2", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["conclusion"] == "(F₂ × ℤ/2ℤ) ∗ F₂"
    code, text, _ = _run(capsys, "replay", str(out), "--format", "text")
    assert code == 0 and "checks:" in text


def test_verification_failure_exit_code(capsys):
    code, out, err = _run(capsys, "verify", "thm-2-2", "--epsilon", "1/2")
    assert code == 1
    assert json.loads(out)["conclusion"].startswith("not verified")


def test_pgl2(capsys):
    code, out, _ = _run(capsys, "oracle", "pgl2", "--q", "7")
    assert code == 0 and json.loads(out)["checks"][1]["lhs"] == "336"
    code, _, _ = _run(capsys, "oracle", "pgl2", "--q", "4")
    assert code == 2


def test_centralizer_and_classify(capsys, tmp_path):
    f = tmp_path / "m.txt"
    f.write_text("# P\n1 0 0\n0 0 -1\n0 1 -1\n\n# Q\n1 1 0\n0 0 -1\n0 1 -1\n")
    code, out, _ = _run(capsys, "centralizer", str(f))
    doc = json.loads(out)
    assert code == 0 and doc["centralizers"]["P"]["order"] == 12 and doc["centralizers"]["Q"]["order"] == 6
    code, out, _ = _run(capsys, "classify-order3", str(f))
    assert code == 0 and {k: v["class"] for k, v in json.loads(out)["classes"].items()} == {"P": "M'1", "Q": "M'2"}


def test_input_errors(capsys, tmp_path):
    f = tmp_path / "bad.txt"
    f.write_text("1 0\n0 1.5\n")
    code, _, err = _run(capsys, "centralizer", str(f))
    assert code == 2 and "line 2, column 3" in err
    plane = tmp_path / "plane.txt"
    plane.write_text(PLANE_FILE)
    code, _, _ = _run(capsys, "classify-order3", str(plane))
    assert code == 2
    code, _, _ = _run(capsys, "replay", str(f))
    assert code == 2


def test_write_failure(capsys, tmp_path):
    code, _, _ = _run(capsys, "oracle", "pgl2", "--q", "3", "--out", str(tmp_path / "no" / "x.json"))
    assert code == 2


def test_search_exhausted_exit_code(capsys):
    code, _, err = _run(capsys, "search-ef", "--seed", "1", "--candidates", "20", "--epsilon", "999/1000")
    assert code == 4 and "no certified pair" in err


def test_console_script_module():
    proc = subprocess.run([sys.executable, "-m", "ppcert.cli", "verify", "lemma-3-3", "--format", "text"], capture_output=True, text=True)
    assert proc.returncode == 0 and "finite centralizer" in proc.stdout
