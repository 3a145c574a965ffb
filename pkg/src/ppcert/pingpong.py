"""Ping-pong verification for free and amalgamated products acting on projective space.

Words are handled in application order: the first letter of a path is the
first matrix applied, so a path (l1, l2, l3) corresponds to the group element
l3*l2*l1.  Regions are finite sets of labelled closed balls inside one shared
ball universe; every letter transition is checked ball by ball.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

from .errors import (
    ContainmentFails,
    CoverageGap,
    IncompleteChecks,
    NormalFormCollapse,
    SourceTouchesRepelling,
    WitnessesCollide,
    WitnessInC,
)
from .exactnum import AlgebraicNumber, format_number, sign_of
from .groupcheck import (
    CyclicFactor,
    DirectFactor,
    ProductStructure,
    inv_letter,
    normal_form,
)
from .matqz import Matrix
from .projdyn import (
    Ball,
    ProximalCert,
    Region,
    act,
    ball_disjoint_margin,
    ball_hyperplane_margin,
    ball_inside_margin,
    certify_contraction,
    is_orthogonal,
    lipschitz_bound,
)


def fmt(x) -> str:
    if isinstance(x, AlgebraicNumber):
        return format_number(x)
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    return str(x)


@dataclass(frozen=True)
class CheckRecord:
    name: str
    kind: str
    lhs: str
    rhs: str
    margin: str
    status: str

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "status": self.status,
        }


def record(name, kind, lhs, rhs, margin="", ok=True) -> CheckRecord:
    return CheckRecord(name, kind, str(lhs), str(rhs), fmt(margin) if margin != "" else "", "pass" if ok else "fail")


# ---------------------------------------------------------------------------
# letters


@dataclass(frozen=True)
class Letter:
    """A generator of one factor: a power of a proximal matrix or a finite-order matrix."""

    name: str
    kind: str  # "proximal" | "finite"
    side: str
    base_matrix: Matrix
    sign: int = 1
    exponent: int = 1
    cert: ProximalCert | None = None
    order: int | None = None

    @cached_property
    def matrix(self) -> Matrix:
        m = self.base_matrix if self.sign > 0 else self.base_matrix.inverse()
        return m**self.exponent

    @cached_property
    def lipschitz(self) -> Fraction:
        if is_orthogonal(self.matrix):
            return Fraction(1)
        return lipschitz_bound(self.matrix)

    def with_exponent(self, k: int) -> "Letter":
        return Letter(self.name, self.kind, self.side, self.base_matrix, self.sign, k, self.cert, self.order)

    def validate(self) -> None:
        if self.kind == "finite":
            if self.order is None or not (self.matrix**self.order).is_identity():
                raise ValueError(f"letter {self.name} does not have order {self.order}")
        elif self.cert is None or not self.cert.self_check():
            raise ValueError(f"letter {self.name} lacks a valid proximal certificate")


def proximal_letters(name: str, matrix: Matrix, certs, side: str, exponent: int = 1):
    """The pair (M^k, M^-k) named `name` and `name^-1`."""
    plus, minus = certs
    return [
        Letter(name, "proximal", side, matrix, 1, exponent, plus),
        Letter(inv_letter(name), "proximal", side, matrix, -1, exponent, minus),
    ]


def finite_letter(name: str, matrix: Matrix, order: int, side: str) -> Letter:
    return Letter(name, "finite", side, matrix, 1, 1, None, order)


# ---------------------------------------------------------------------------
# normal-form automata


@dataclass
class WordAutomaton:
    """Deterministic automaton accepting normal forms of a factor minus the amalgamated subgroup."""

    start: object
    transitions: dict  # (state, letter) -> state
    accepting: frozenset
    alphabet: tuple

    @classmethod
    def from_rule(cls, alphabet: Sequence[str], start, step: Callable, accept: Callable) -> "WordAutomaton":
        """Explore `step(state, letter) -> state | None` from `start`."""
        trans = {}
        seen = {start}
        todo = [start]
        while todo:
            q = todo.pop()
            for a in alphabet:
                r = step(q, a)
                if r is None:
                    continue
                trans[(q, a)] = r
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        acc = frozenset(q for q in seen if accept(q))
        return cls(start, trans, acc, tuple(alphabet))

    @property
    def states(self) -> set:
        out = {self.start}
        for (q, _), r in self.transitions.items():
            out.add(q)
            out.add(r)
        return out

    def run(self, word: Sequence[str]):
        q = self.start
        for a in word:
            q = self.transitions.get((q, a))
            if q is None:
                return None
        return q

    def accepts(self, word: Sequence[str]) -> bool:
        q = self.run(word)
        return q is not None and q in self.accepting

    def words(self, max_len: int) -> list[tuple]:
        """Accepted words of length <= max_len in application order."""
        out = []
        layer = [((), self.start)]
        for _ in range(max_len):
            nxt = []
            for w, q in layer:
                for a in self.alphabet:
                    r = self.transitions.get((q, a))
                    if r is not None:
                        nxt.append((w + (a,), r))
            layer = nxt
            out.extend(w for w, q in layer if q in self.accepting)
        return out


def reduced_automaton(alphabet: Sequence[str], head: Sequence[str] = (), head_alone: bool = True) -> WordAutomaton:
    """Freely reduced nonempty words over `alphabet`, optionally preceded by one letter of `head`.

    Head letters are applied first (they are the rightmost factor of the
    element).  With head_alone=False a head letter by itself is rejected.
    """

    def step(q, a):
        if q == "^":
            return ("h", a) if a in head else a if a in alphabet else None
        if isinstance(q, tuple):
            return a if a in alphabet else None
        if a in alphabet and a != inv_letter(q):
            return a
        return None

    def accept(q):
        if q == "^":
            return False
        if isinstance(q, tuple):
            return head_alone
        return True

    return WordAutomaton.from_rule(tuple(head) + tuple(alphabet), "^", step, accept)


# ---------------------------------------------------------------------------
# factor and amalgam descriptions


@dataclass
class FactorSide:
    name: str
    letters: dict  # name -> Letter
    automaton: WordAutomaton
    region: frozenset  # ball labels
    language: Callable | None = None  # independent membership predicate for cross-checks


@dataclass
class AmalgamSpec:
    name: str
    side_a: FactorSide
    side_b: FactorSide
    universe: Region
    amalgam: list = field(default_factory=list)  # the subgroup C as explicit matrices
    witnesses_a: tuple = ()  # ((label, matrix), (label, matrix))
    witness_b: tuple = ()  # (label, matrix)

    @property
    def letters(self) -> dict:
        return {**self.side_a.letters, **self.side_b.letters}

    @property
    def dim(self) -> int:
        return next(iter(self.letters.values())).base_matrix.n


def _in(x: Matrix, group: Sequence[Matrix]) -> bool:
    return any(x == c for c in group)


def verify_amalgam_closure(spec: AmalgamSpec) -> list[CheckRecord]:
    C = spec.amalgam or [Matrix.identity(spec.dim)]
    ok = _in(Matrix.identity(spec.dim), C)
    ok = ok and all(_in(x @ y, C) for x in C for y in C) and all(_in(x.inverse(), C) for x in C)
    if not ok:
        raise IncompleteChecks(f"{spec.name}: amalgamated subgroup is not closed")
    return [record(f"{spec.name}: amalgamated subgroup closed", "closure", f"|C| = {len(C)}", "closed")]


def verify_coset_witnesses(spec: AmalgamSpec) -> list[CheckRecord]:
    """[A:C] > 2 via a1 C, a2 C, C pairwise distinct; [B:C] >= 2 via b1 not in C."""
    C = spec.amalgam or [Matrix.identity(spec.dim)]
    (n1, a1), (n2, a2) = spec.witnesses_a
    nb, b1 = spec.witness_b
    for name, w in ((n1, a1), (n2, a2), (nb, b1)):
        if _in(w, C):
            raise WitnessInC(f"{spec.name}: witness {name} lies in the amalgamated subgroup")
    if _in(a2.inverse() @ a1, C):
        raise WitnessesCollide(f"{spec.name}: witnesses {n1} and {n2} give the same coset")
    return [
        record(f"{spec.name}: {n1} C != C", "coset", n1, "C", ok=True),
        record(f"{spec.name}: {n2} C != C", "coset", n2, "C", ok=True),
        record(f"{spec.name}: {n1} C != {n2} C", "coset", f"({n2})^-1 ({n1})", "C", ok=True),
        record(f"{spec.name}: {nb} C != C", "coset", nb, "C", ok=True),
    ]


# ---------------------------------------------------------------------------
# transitions


@dataclass(frozen=True)
class Transition:
    letter: str
    source: str
    target: str
    justification: str  # "contraction-certificate" | "exact-isometry" | "lipschitz-enclosure" | "planned"
    margin: object = None
    detail: tuple = ()


@dataclass
class TransitionTable:
    entries: dict = field(default_factory=dict)  # (letter, source) -> Transition

    def get(self, letter: str, source: str) -> Transition | None:
        return self.entries.get((letter, source))

    def add(self, t: Transition) -> None:
        self.entries[(t.letter, t.source)] = t

    def restricted(self, letters: Iterable[str]) -> "TransitionTable":
        keep = set(letters)
        return TransitionTable({k: v for k, v in self.entries.items() if k[0] in keep})

    def __iter__(self):
        return iter(sorted(self.entries.values(), key=lambda t: (t.letter, t.source)))

    def __len__(self):
        return len(self.entries)


def _attracting_ball(letter: Letter, universe: Region) -> str:
    lab = universe.find(letter.cert.attracting)
    if lab is None:
        raise ContainmentFails(f"no ball of the universe is centred at the attracting point of {letter.name}")
    return lab


def image_ball(g: Matrix, ball: Ball, lipschitz: Fraction | None = None) -> Ball:
    """A closed ball containing g(ball)."""
    if lipschitz is None:
        lipschitz = Fraction(1) if is_orthogonal(g) else lipschitz_bound(g)
    r = ball.radius * lipschitz
    if r >= 1:
        raise ContainmentFails("enclosure radius reaches 1")
    return Ball(act(g, ball.center), r)


def find_container(img: Ball, universe: Region, allowed: Iterable[str] | None = None):
    """Label and margin of a universe ball containing `img`; same-centre balls are tried first."""
    labels = list(allowed) if allowed is not None else universe.labels()
    same = [lab for lab in labels if universe.balls[lab].center == img.center]
    for lab in same + [x for x in labels if x not in same]:
        m = ball_inside_margin(img, universe.balls[lab])
        if m is not None and sign_of(m) >= 0:
            return lab, m
    return None, None


def finite_transition(letter: Letter, label: str, universe: Region) -> Transition | None:
    img = image_ball(letter.matrix, universe.balls[label], letter.lipschitz)
    target, margin = find_container(img, universe)
    if target is None:
        return None
    kind = "exact-isometry" if letter.lipschitz == 1 else "lipschitz-enclosure"
    return Transition(letter.name, label, target, kind, margin, (("lipschitz", fmt(letter.lipschitz)),))


def plan_transitions(letters: Iterable[Letter], universe: Region) -> TransitionTable:
    """Uncertified table: where each letter sends each ball, when that is decidable without powers.

    Proximal letters are planned towards their attracting ball from every ball
    missing the repelling hyperplane; finite letters are exact.
    """
    table = TransitionTable()
    for letter in letters:
        if letter.kind == "proximal":
            target = _attracting_ball(letter, universe)
            for label, ball in universe:
                m = ball_hyperplane_margin(ball, letter.cert.repelling)
                if sign_of(m) > 0:
                    table.add(Transition(letter.name, label, target, "planned", m))
        else:
            for label in universe.labels():
                t = finite_transition(letter, label, universe)
                if t is not None:
                    table.add(t)
    return table


def required_power(letter: Letter, universe: Region, sources: Iterable[str], max_power: int = 4096) -> int:
    src = universe.sub(sorted(sources))
    target = universe.balls[_attracting_ball(letter, universe)]
    return certify_contraction(letter.cert, src, target.radius, max_power).k


def verify_letter_transitions(
    letters: Iterable[Letter],
    universe: Region,
    sources: dict | None = None,
    max_power: int = 4096,
) -> TransitionTable:
    """Certified table at the letters' current exponents.

    `sources` maps letter name to the ball labels that must be handled; by
    default proximal letters take every ball missing their repelling
    hyperplane and finite letters every ball with a containing image.
    """
    table = TransitionTable()
    for letter in letters:
        wanted = None if sources is None else sorted(sources.get(letter.name, ()))
        if letter.kind == "proximal":
            if wanted is None:
                wanted = [
                    lab
                    for lab, b in universe
                    if sign_of(ball_hyperplane_margin(b, letter.cert.repelling)) > 0
                ]
            if not wanted:
                continue
            for lab in wanted:
                if sign_of(ball_hyperplane_margin(universe.balls[lab], letter.cert.repelling)) <= 0:
                    raise SourceTouchesRepelling(f"{letter.name}: ball {lab} meets the repelling hyperplane")
            target = _attracting_ball(letter, universe)
            radius = universe.balls[target].radius
            # one contraction certificate per source ball keeps margins local
            for lab in wanted:
                c = certify_contraction(letter.cert, universe.sub([lab]), radius, max_power)
                bound = c.bound(letter.exponent)
                if bound > radius:
                    raise ContainmentFails(
                        f"{letter.name} with exponent {letter.exponent} does not map {lab} into {target}"
                        f" (needs {c.k})"
                    )
                table.add(
                    Transition(
                        letter.name,
                        lab,
                        target,
                        "contraction-certificate",
                        radius - bound,
                        (("k", letter.exponent), ("k_min", c.k), ("delta", fmt(c.delta)), ("bound", fmt(bound))),
                    )
                )
        else:
            for lab in wanted if wanted is not None else universe.labels():
                t = finite_transition(letter, lab, universe)
                if t is None:
                    if wanted is not None:
                        raise ContainmentFails(f"{letter.name}({lab}) lies in no ball of the universe")
                    continue
                table.add(t)
    return table


def table_records(spec_name: str, table: TransitionTable, universe: Region) -> list[CheckRecord]:
    out = []
    for t in table:
        out.append(
            record(
                f"{spec_name}: {t.letter} sends {t.source} into {t.target}",
                t.justification,
                f"{t.letter}({t.source})",
                t.target,
                t.margin,
                ok=t.margin is None or sign_of(t.margin) >= 0,
            )
        )
    return out


# ---------------------------------------------------------------------------
# regions and coverage


def verify_disjoint(spec: AmalgamSpec) -> list[CheckRecord]:
    """Ping-pong hypothesis: the two sides' regions are disjoint and nonempty."""
    U = spec.universe
    if not spec.side_a.region or not spec.side_b.region:
        raise ContainmentFails(f"{spec.name}: empty ping-pong region")
    best = None
    for la in sorted(spec.side_a.region):
        for lb in sorted(spec.side_b.region):
            if la == lb:
                raise ContainmentFails(f"{spec.name}: ball {la} lies in both regions")
            m = ball_disjoint_margin(U.balls[la], U.balls[lb])
            if sign_of(m) <= 0:
                raise ContainmentFails(f"{spec.name}: balls {la} and {lb} intersect")
            if best is None or m < best:
                best = m
    return [
        record(
            f"{spec.name}: X_{spec.side_a.name} and X_{spec.side_b.name} disjoint",
            "disjoint",
            f"X_{spec.side_a.name}",
            f"X_{spec.side_b.name}",
            best,
        )
    ]


def verify_c_stability(spec: AmalgamSpec) -> list[CheckRecord]:
    """Every element of C maps each side's region into itself (ball by ball)."""
    out = []
    U = spec.universe
    for i, c in enumerate(spec.amalgam or []):
        if c.is_identity():
            continue
        lip = Fraction(1) if is_orthogonal(c) else lipschitz_bound(c)
        for side in (spec.side_a, spec.side_b):
            worst = None
            for lab in sorted(side.region):
                img = image_ball(c, U.balls[lab], lip)
                tgt, m = find_container(img, U, sorted(side.region))
                if tgt is None:
                    raise ContainmentFails(f"{spec.name}: C element {i} moves {lab} out of X_{side.name}")
                if worst is None or m < worst:
                    worst = m
            out.append(record(f"{spec.name}: c{i}(X_{side.name}) in X_{side.name}", "c-stability", f"c{i}", f"X_{side.name}", worst))
    return out


def render_path(path: Sequence[str]) -> str:
    """Group element of an application-order path, written as a product."""
    return "·".join(reversed(path)) if path else "1"


@dataclass
class CoverageProof:
    side: str
    start_region: str
    states_visited: int
    used: dict  # letter -> set of source labels
    crosschecked_words: int = 0

    def record(self, spec_name: str) -> CheckRecord:
        return record(
            f"{spec_name}: words of {self.side} map X_{self.start_region} into X_{self.side}",
            "word-coverage",
            f"{self.states_visited} product states",
            f"X_{self.side}",
            ok=True,
        )


def _coverage_side(spec: AmalgamSpec, side: FactorSide, other: FactorSide, table: TransitionTable) -> CoverageProof:
    auto = side.automaton
    parent = {}
    queue = deque()
    for lab in sorted(other.region):
        s = (auto.start, lab)
        parent[s] = None
        queue.append(s)
    used: dict[str, set] = {}

    def path_of(state, extra=None):
        path = []
        while parent[state] is not None:
            state, a = parent[state]
            path.append(a)
        path.reverse()
        if extra:
            path.append(extra)
        return path

    while queue:
        q, lab = state = queue.popleft()
        if q in auto.accepting and lab not in side.region:
            word = path_of(state)
            raise CoverageGap(
                f"{spec.name}: {render_path(word)} sends a ball of X_{other.name} to {lab}, outside X_{side.name}",
                render_path(word),
            )
        for a in auto.alphabet:
            q2 = auto.transitions.get((q, a))
            if q2 is None:
                continue
            t = table.get(a, lab)
            if t is None:
                word = path_of(state, a)
                raise CoverageGap(
                    f"{spec.name}: no certified image of ball {lab} under {a} (word {render_path(word)})",
                    render_path(word),
                )
            used.setdefault(a, set()).add(lab)
            nxt = (q2, t.target)
            if nxt not in parent:
                parent[nxt] = (state, a)
                queue.append(nxt)
    return CoverageProof(side.name, other.name, len(parent), used)


def verify_word_coverage(spec: AmalgamSpec, table: TransitionTable) -> list[CoverageProof]:
    """Every accepted word of side A maps X_B into X_A, and symmetrically."""
    return [
        _coverage_side(spec, spec.side_a, spec.side_b, table),
        _coverage_side(spec, spec.side_b, spec.side_a, table),
    ]


def apply_path(path: Sequence[str], label: str, table: TransitionTable) -> str | None:
    for a in path:
        t = table.get(a, label)
        if t is None:
            return None
        label = t.target
    return label


def crosscheck_coverage(spec: AmalgamSpec, table: TransitionTable, max_len: int = 4) -> int:
    """Brute-force route: enumerate words by the independent language predicate and push balls through."""
    total = 0
    for side, other in ((spec.side_a, spec.side_b), (spec.side_b, spec.side_a)):
        auto_words = set(side.automaton.words(max_len))
        if side.language is not None:
            brute = {
                w
                for n in range(1, max_len + 1)
                for w in itertools.product(side.automaton.alphabet, repeat=n)
                if side.language(w)
            }
            if brute != auto_words:
                diff = sorted(brute ^ auto_words, key=len)[0]
                raise CoverageGap(f"{spec.name}: automaton and language disagree on {render_path(diff)}", render_path(diff))
        for w in sorted(auto_words):
            for lab in sorted(other.region):
                out = apply_path(w, lab, table)
                if out is None or out not in side.region:
                    raise CoverageGap(f"{spec.name}: {render_path(w)} fails on {lab}", render_path(w))
            total += 1
    return total


# ---------------------------------------------------------------------------
# symbolic conjugate-generator step


def subgroup_free_factor_check(
    h_sample: Sequence[tuple] = (("a",), ("a^-1",), ("b",), ("i",)),
    max_syllables: int = 6,
) -> tuple[int, tuple | None]:
    """In (F(a,b) x Z/2<i>) * Z<c>, H together with x = a c a^-1, y = b c b^-1 generate H * F(x, y).

    Enumerates alternating products of H-sample syllables and reduced
    syllables in x, y up to `max_syllables` atoms and checks each normal form
    is nontrivial.  Returns (count, None); raises NormalFormCollapse otherwise.
    """
    structure = ProductStructure([DirectFactor("H", ["a", "b"], "i", 2), CyclicFactor("K", "c", 0)])
    gens = {
        "x": ("a", "c", "a^-1"),
        "x^-1": ("a", "c^-1", "a^-1"),
        "y": ("b", "c", "b^-1"),
        "y^-1": ("b", "c^-1", "b^-1"),
    }
    atoms = [("H", tuple(h)) for h in h_sample] + [("F", k) for k in gens]

    def expand(seq):
        out = []
        for tag, a in seq:
            out.extend(a if tag == "H" else gens[a])
        return out

    count = 0
    layer = [()]
    for _ in range(max_syllables):
        nxt = []
        for seq in layer:
            for atom in atoms:
                if seq:
                    prev = seq[-1]
                    if prev[0] == "H" and atom[0] == "H":
                        continue
                    if prev[0] == "F" and atom[0] == "F" and atom[1] == inv_letter(prev[1]):
                        continue
                s = seq + (atom,)
                nf = normal_form(expand(s), structure)
                count += 1
                if nf.is_identity():
                    word = " ".join(a if t == "F" else "·".join(a) for t, a in s)
                    raise NormalFormCollapse(f"{word} reduces to the identity")
                nxt.append(s)
        layer = nxt
    return count, None


# ---------------------------------------------------------------------------
# certificates


@dataclass
class PingPongCertificate:
    scenario: str
    epsilon: Fraction | None
    powers: dict
    checks: list
    conclusion: str
    notes: list = field(default_factory=list)
    matrices: dict = field(default_factory=dict)
    version: str = "1"

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "epsilon": None if self.epsilon is None else f"{self.epsilon.numerator}/{self.epsilon.denominator}",
            "powers": dict(sorted(self.powers.items())),
            "checks": [c.as_dict() for c in self.checks],
            "conclusion": self.conclusion,
            "notes": list(self.notes),
            "matrices": {k: [list(map(int, row)) for row in m.rows] for k, m in sorted(self.matrices.items())},
            "version": self.version,
        }


def assemble_certificate(
    scenario: str,
    epsilon: Fraction,
    powers: dict,
    checks: Sequence[CheckRecord],
    conclusion: str,
    notes: Sequence[str] = (),
    matrices: dict | None = None,
    required: Sequence[str] = (),
) -> PingPongCertificate:
    """Fold check records into a certificate; any failed or missing required check aborts."""
    checks = list(checks)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        raise IncompleteChecks(f"failed checks: {', '.join(failed[:5])}")
    kinds = {c.kind for c in checks}
    missing = [k for k in required if k not in kinds]
    if missing:
        raise IncompleteChecks(f"missing check kinds: {', '.join(missing)}")
    eps = None if epsilon is None else Fraction(epsilon)
    return PingPongCertificate(scenario, eps, dict(powers), checks, conclusion, list(notes), dict(matrices or {}))
