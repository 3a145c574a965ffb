"""Command-line entry point: ``ppcert``.

Exit codes: 0 verified, 1 verification failed, 2 input error,
3 unsupported input, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .certio import emit, parse_matrix_file
from .errors import InputError, IoFailure, PPCertError
from .gl3z import centralizer_enumerate, order3_normalize
from .pingpong import record
from .scenarios import Options, SearchConfig, replay, run_scenario, search_ef

VERIFY_IDS = ("thm-2-2", "thm-3-5", "lemma-3-3", "thm-3-1")


def parse_epsilon(text: str) -> Fraction | None:
    if text == "auto":
        return None
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected p/q or 'auto', got {text!r}")
    if not 0 < eps < 1:
        raise argparse.ArgumentTypeError("epsilon must lie strictly between 0 and 1")
    return eps


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _common(defaults: bool) -> argparse.ArgumentParser:
    # Subcommands get SUPPRESS defaults so flags given before the subcommand survive.
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: v) if defaults else (lambda v: argparse.SUPPRESS)
    p.add_argument("--epsilon", type=parse_epsilon, default=d(None), metavar="p/q|auto")
    p.add_argument("--max-power", type=_positive, default=d(4096))
    p.add_argument("--word-sweep", type=_positive, default=d(4))
    p.add_argument("--out", default=d(None), metavar="PATH")
    p.add_argument("--format", choices=("json", "text"), default=d("json"))
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppcert",
        description="Exact ping-pong certificates for free products in SL_n(Z).",
        parents=[_common(True)],
    )
    parser.add_argument("--version", action="version", version=f"ppcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    flags = _common(False)

    p = sub.add_parser("verify", parents=[flags], help="run a built-in scenario")
    p.add_argument("scenario", choices=VERIFY_IDS)

    p = sub.add_parser("oracle", parents=[flags], help="finite group oracles")
    p.add_argument("family", choices=("pgl2",))
    p.add_argument("--q", type=int, required=True, help="prime order of the field")

    p = sub.add_parser("search-ef", parents=[flags], help="seeded search for the E, F free factor")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--bound", type=_positive, default=3)
    p.add_argument("--candidates", type=_positive, default=400)

    p = sub.add_parser("centralizer", parents=[flags], help="finite centralizers in GL_n(Z)")
    p.add_argument("matrix_file")
    p.add_argument("--bound", type=_positive, default=5)

    p = sub.add_parser("classify-order3", parents=[flags], help="normal form of order-3 elements of GL_3(Z)")
    p.add_argument("matrix_file")

    p = sub.add_parser("replay", parents=[flags], help="re-run a JSON certificate")
    p.add_argument("certificate")
    return parser


def _doc(name: str, checks: list, conclusion: str, extra: dict | None = None) -> dict:
    doc = {
        "scenario": name,
        "epsilon": None,
        "powers": {},
        "checks": [c.as_dict() for c in checks],
        "conclusion": conclusion,
        "notes": [],
        "matrices": {},
        "version": __version__,
    }
    doc.update(extra or {})
    return doc


def _rows(m) -> list:
    return [list(map(int, r)) for r in m.rows]


def _centralizer(args) -> tuple[int, dict]:
    mats = parse_matrix_file(args.matrix_file)
    checks, results = [], {}
    for name, m in mats.items():
        res = centralizer_enumerate(m, bound=args.bound)
        results[name] = {
            "order": res.order,
            "cyclic": res.is_cyclic(),
            "bound": res.bound,
            "rounds": [list(r) for r in res.rounds],
            "elements": [_rows(x) for x in res.elements],
        }
        checks.append(record(f"centralizer of {name} is closed", "closure", f"{res.order} elements", "group", ok=res.closed))
    doc = _doc("centralizer", checks, "centralizers enumerated", {"centralizers": results})
    doc["matrices"] = {k: _rows(v) for k, v in mats.items()}
    return 0, doc


def _classify(args) -> tuple[int, dict]:
    mats = parse_matrix_file(args.matrix_file)
    checks, results = [], {}
    for name, m in mats.items():
        cls = order3_normalize(m)
        results[name] = {
            "class": cls.tag,
            "conjugator": _rows(cls.conjugator),
            "residual_row": list(cls.residual_row),
        }
        checks.append(record(f"P^-1 {name} P = {cls.tag}", "conjugacy", name, cls.tag, ok=cls.verify()))
    doc = _doc("classify-order3", checks, "order-3 classes determined", {"classes": results})
    doc["matrices"] = {k: _rows(v) for k, v in mats.items()}
    return 0, doc


def _search(args, opts: Options) -> tuple[int, dict]:
    config = SearchConfig(seed=args.seed, bound=args.bound, candidates=args.candidates)
    E, F, cert = search_ef(config, base_epsilon=opts.epsilon, opts=opts)
    doc = cert.as_dict()
    doc["version"] = __version__
    doc["search"] = {"seed": args.seed, "bound": args.bound, "E": _rows(E), "F": _rows(F)}
    return 0, doc


def _replay(args) -> tuple[int, dict]:
    try:
        document = json.loads(Path(args.certificate).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {args.certificate}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.certificate} is not JSON: {exc}") from exc
    if not isinstance(document, dict) or "scenario" not in document:
        raise InputError("certificate has no scenario field")
    result = replay(document)
    return result.exit_code, result.document()


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = Options(epsilon=args.epsilon, max_power=args.max_power, word_sweep=args.word_sweep)
    name = getattr(args, "scenario", None) or args.command
    try:
        if args.command == "verify":
            result = run_scenario(args.scenario, opts)
            code, doc = result.exit_code, result.document()
        elif args.command == "oracle":
            opts.q = args.q
            result = run_scenario("pgl2", opts)
            code, doc = result.exit_code, result.document()
        elif args.command == "search-ef":
            code, doc = _search(args, opts)
        elif args.command == "centralizer":
            code, doc = _centralizer(args)
        elif args.command == "classify-order3":
            code, doc = _classify(args)
        else:
            code, doc = _replay(args)
    except PPCertError as exc:
        code, doc = exc.exit_code, _doc(name, [], f"not verified: {exc}")
    if code:
        print(f"ppcert: {doc['conclusion']}", file=sys.stderr)
    try:
        emit(doc, args.format, args.out)
    except IoFailure as exc:
        print(f"ppcert: {exc}", file=sys.stderr)
        return exc.exit_code
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
