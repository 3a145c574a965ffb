"""Symbolic words, free-product normal forms and finite permutation-group oracles.

Letters are strings; the inverse of ``"x"`` is ``"x^-1"``.  A word is a
tuple of letters read as a product from left to right.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import NoOrder3Element, NotPrime, TooLarge
from .matqz import Matrix


def inv_letter(letter: str) -> str:
    return letter[:-3] if letter.endswith("^-1") else letter + "^-1"


def inv_word(word: Sequence[str]) -> tuple:
    return tuple(inv_letter(x) for x in reversed(word))


def parse_word(text: str) -> tuple:
    """'A B^-1 I' or 'A·B^-1·I' -> ('A', 'B^-1', 'I')."""
    return tuple(t for t in text.replace("·", " ").replace("*", " ").split() if t)


# ---------------------------------------------------------------------------
# factor groups


class FreeFactor:
    """Free group on named generators; elements are freely reduced tuples."""

    def __init__(self, name: str, gens: Sequence[str]):
        self.name = name
        self.gens = tuple(gens)
        self._letters = set(self.gens) | {inv_letter(g) for g in self.gens}

    def owns(self, letter: str) -> bool:
        return letter in self._letters

    def identity(self):
        return ()

    def mul(self, x, letter):
        if x and x[-1] == inv_letter(letter):
            return x[:-1]
        return x + (letter,)

    def is_identity(self, x) -> bool:
        return not x

    def render(self, x) -> tuple:
        return tuple(x)


class CyclicFactor:
    """Z/n generated by one letter (n=0 for infinite cyclic)."""

    def __init__(self, name: str, gen: str, order: int):
        self.name = name
        self.gen = gen
        self.order = order

    def owns(self, letter):
        return letter in (self.gen, inv_letter(self.gen))

    def identity(self):
        return 0

    def mul(self, x, letter):
        x += 1 if letter == self.gen else -1
        return x % self.order if self.order else x

    def is_identity(self, x):
        return x == 0

    def render(self, x):
        if self.order:
            return (self.gen,) * x
        return (self.gen,) * x if x > 0 else (inv_letter(self.gen),) * (-x)


class DirectFactor:
    """F(gens) x Z/n with the cyclic generator central (e.g. F_2 x Z/2Z)."""

    def __init__(self, name: str, gens: Sequence[str], central: str, order: int):
        self.name = name
        self.free = FreeFactor(name, gens)
        self.cyc = CyclicFactor(name, central, order)

    def owns(self, letter):
        return self.free.owns(letter) or self.cyc.owns(letter)

    def identity(self):
        return ((), 0)

    def mul(self, x, letter):
        w, e = x
        if self.cyc.owns(letter):
            return (w, self.cyc.mul(e, letter))
        return (self.free.mul(w, letter), e)

    def is_identity(self, x):
        return not x[0] and x[1] == 0

    def render(self, x):
        return tuple(x[0]) + self.cyc.render(x[1])


class FiniteMatrixFactor:
    """Finite group given by faithful matrices (elements compared as matrices)."""

    def __init__(self, name: str, letters: dict):
        self.name = name
        self.letters = dict(letters)
        n = next(iter(self.letters.values())).n
        self._id = Matrix.identity(n)
        # BFS for short names of elements
        self.names = {self._id: ()}
        frontier = [self._id]
        while frontier:
            nxt = []
            for g in frontier:
                for a, m in self.letters.items():
                    h = g @ m
                    if h not in self.names:
                        self.names[h] = self.names[g] + (a,)
                        nxt.append(h)
            frontier = nxt

    def owns(self, letter):
        return letter in self.letters

    def identity(self):
        return self._id

    def mul(self, x, letter):
        return x @ self.letters[letter]

    def is_identity(self, x):
        return x == self._id

    def render(self, x):
        return self.names[x]

    @property
    def order(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class Syllable:
    factor: str
    element: object
    word: tuple

    def __str__(self):
        return "·".join(self.word)


@dataclass(frozen=True)
class GroupWord:
    """Free-product normal form: alternating nontrivial syllables."""

    syllables: tuple = ()

    def __len__(self):
        return len(self.syllables)

    def is_identity(self) -> bool:
        return not self.syllables

    def letters(self) -> tuple:
        return tuple(x for s in self.syllables for x in s.word)

    def __str__(self):
        return " ".join(f"({s})" for s in self.syllables) or "1"


class ProductStructure:
    """Free product of factor groups, each owning a disjoint set of letters."""

    def __init__(self, factors: Sequence):
        self.factors = list(factors)

    def factor_of(self, letter):
        for f in self.factors:
            if f.owns(letter):
                return f
        raise KeyError(f"letter {letter!r} belongs to no factor")


def normal_form(word: Iterable[str], structure: ProductStructure) -> GroupWord:
    stack: list[list] = []  # [factor, element]
    for letter in word:
        f = structure.factor_of(letter)
        if stack and stack[-1][0] is f:
            stack[-1][1] = f.mul(stack[-1][1], letter)
            if f.is_identity(stack[-1][1]):
                stack.pop()
        else:
            e = f.mul(f.identity(), letter)
            if not f.is_identity(e):
                stack.append([f, e])
    return GroupWord(tuple(Syllable(f.name, _freeze(e), f.render(e)) for f, e in stack))


def _freeze(e):
    return e if not isinstance(e, list) else tuple(e)


# ---------------------------------------------------------------------------
# matrices


def evaluate_word(word: Sequence[str], letters: dict, n: int | None = None) -> Matrix:
    """Exact product of the letter matrices (inverse letters resolved automatically)."""
    if n is None:
        n = next(iter(letters.values())).n
    out = Matrix.identity(n)
    cache = {}
    for a in word:
        m = letters.get(a)
        if m is None:
            if a not in cache:
                cache[a] = letters[inv_letter(a)].inverse()
            m = cache[a]
        out = out @ m
    return out


@dataclass(frozen=True)
class RelationResult:
    name: str
    lhs: tuple
    rhs: tuple
    holds: bool


def relation_check(relations: Sequence, letters: dict) -> list[RelationResult]:
    """Each relation is (name, lhs word, rhs word); exact matrix equality."""
    out = []
    for name, lhs, rhs in relations:
        lhs, rhs = tuple(lhs), tuple(rhs)
        ok = evaluate_word(lhs, letters) == evaluate_word(rhs, letters)
        out.append(RelationResult(name, lhs, rhs, ok))
    return out


def commutator(x: str, y: str) -> tuple:
    return (x, y, inv_letter(x), inv_letter(y))


@dataclass(frozen=True)
class Atom:
    """A syllable for enumeration: factor tag plus a word known nontrivial in that factor."""

    tag: str
    word: tuple


@dataclass
class SweepResult:
    passed: bool
    words_checked: int
    counterexample: tuple | None = None
    by_length: dict = field(default_factory=dict)


def nontriviality_sweep(
    atoms: Sequence[Atom],
    letters: dict,
    max_syllables: int,
    may_follow: Callable[[str, str], bool] | None = None,
) -> SweepResult:
    """Every alternating product of <= max_syllables atoms must evaluate to a non-identity matrix.

    `may_follow(prev_tag, next_tag)` restricts adjacency (default: tags differ),
    so that every enumerated sequence is a normal form in the claimed product.
    """
    if may_follow is None:
        may_follow = lambda a, b: a != b  # noqa: E731
    mats = [evaluate_word(a.word, letters) for a in atoms]
    n = mats[0].n
    ident = Matrix.identity(n)
    count = 0
    by_length: dict[int, int] = {}

    def rec(prefix_idx, prod, depth):
        nonlocal count
        for i, atom in enumerate(atoms):
            if prefix_idx and not may_follow(atoms[prefix_idx[-1]].tag, atom.tag):
                continue
            m = prod @ mats[i] if prefix_idx else mats[i]
            idx = prefix_idx + (i,)
            count += 1
            by_length[depth] = by_length.get(depth, 0) + 1
            if m == ident:
                return idx
            if depth < max_syllables:
                bad = rec(idx, m, depth + 1)
                if bad is not None:
                    return bad
        return None

    bad = rec((), ident, 1)
    if bad is not None:
        word = tuple(x for i in bad for x in atoms[i].word)
        return SweepResult(False, count, word, by_length)
    return SweepResult(True, count, None, by_length)


# ---------------------------------------------------------------------------
# finite permutation actions


def compose(p: tuple, q: tuple) -> tuple:
    """(p o q)(x) = p(q(x))."""
    return tuple(p[i] for i in q)


def perm_inverse(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


@dataclass
class FiniteAction:
    elements: list
    points: list
    labels: list = field(default_factory=list)

    @property
    def degree(self) -> int:
        return len(self.points)

    def identity(self) -> tuple:
        return tuple(range(self.degree))

    def is_group(self) -> bool:
        s = set(self.elements)
        if self.identity() not in s:
            return False
        return all(perm_inverse(g) in s for g in s) and all(compose(g, h) in s for g in s for h in s)

    def is_faithful(self) -> bool:
        return len(set(self.elements)) == len(self.elements)


@dataclass
class TransitivityReport:
    n: int
    passed: bool
    group_order: int
    expected_order: int
    tuples_checked: int
    failure: tuple | None = None

    @property
    def counting_identity(self) -> bool:
        return self.group_order == self.expected_order


def sharply_transitive_check(action: FiniteAction, n: int) -> TransitivityReport:
    """Exhaustive: every ordered n-tuple of distinct points maps to every other by exactly one element."""
    X = range(action.degree)
    if action.degree < n:
        raise ValueError("need at least n points")
    tuples = list(itertools.permutations(X, n))
    expected = 1
    for i in range(n):
        expected *= action.degree - i
    passed = True
    failure = None
    for src in tuples:
        hits: dict[tuple, int] = {}
        for g in action.elements:
            img = tuple(g[x] for x in src)
            hits[img] = hits.get(img, 0) + 1
        for dst in tuples:
            c = hits.get(dst, 0)
            if c != 1:
                passed = False
                failure = (src, dst, c)
                break
        if not passed:
            break
    return TransitivityReport(n, passed, len(action.elements), expected, len(tuples), failure)


@dataclass
class CentralizerWitnessReport:
    g: tuple
    fixed_points: tuple
    base_point: int
    witnesses: dict  # y -> h_y
    all_centralize: bool
    injective: bool

    @property
    def passed(self) -> bool:
        return len(self.fixed_points) <= 2 and self.all_centralize and self.injective


def centralizer_witnesses(action: FiniteAction, g: tuple, x: int | None = None) -> CentralizerWitnessReport:
    """Centralizer witnesses h_y with h_y(y, gy, g^2 y) = (x, gx, g^2 x) for y outside Fix(g)."""
    e = action.identity()
    g = tuple(g)
    if g == e or compose(g, compose(g, g)) != e:
        raise NoOrder3Element("g must have order exactly 3")
    F = tuple(p for p in range(action.degree) if g[p] == p)
    free = [p for p in range(action.degree) if g[p] != p]
    if x is None:
        x = free[0]
    target = (x, g[x], g[g[x]])
    index = {}
    for h in action.elements:
        for y in free:
            if (h[y], h[g[y]], h[g[g[y]]]) == target:
                index.setdefault(y, []).append(h)
    witnesses = {}
    for y in free:
        found = index.get(y, [])
        if len(found) != 1:
            raise ValueError(f"action is not sharply 3-transitive at y={y}")
        witnesses[y] = found[0]
    central = all(compose(h, g) == compose(g, h) for h in witnesses.values())
    injective = len(set(witnesses.values())) == len(witnesses)
    return CentralizerWitnessReport(g, F, x, witnesses, central, injective)


def _is_prime(q: int) -> bool:
    return q >= 2 and all(q % d for d in range(2, math.isqrt(q) + 1))


def pgl2_action(q: int) -> FiniteAction:
    """PGL_2(F_q) acting on the q+1 points of P^1(F_q); point q is infinity."""
    if not _is_prime(q):
        raise NotPrime(f"{q} is not prime")
    if q > 23:
        raise TooLarge(f"q = {q} exceeds 23")
    inf = q

    def apply(a, b, c, d, x):
        if x == inf:
            return inf if c == 0 else a * pow(c, -1, q) % q
        den = (c * x + d) % q
        if den == 0:
            return inf
        return (a * x + b) * pow(den, -1, q) % q

    seen = {}
    for a, b, c, d in itertools.product(range(q), repeat=4):
        if (a * d - b * c) % q == 0:
            continue
        perm = tuple(apply(a, b, c, d, x) for x in range(q + 1))
        if perm not in seen:
            seen[perm] = (a, b, c, d)
    elements = list(seen)
    labels = [seen[p] for p in elements]
    points = list(range(q)) + ["∞"]
    return FiniteAction(elements, points, labels)


def symmetric_action(n: int) -> FiniteAction:
    elements = list(itertools.permutations(range(n)))
    return FiniteAction(elements, list(range(n)))


def cyclic_action(n: int) -> FiniteAction:
    elements = [tuple((i + s) % n for i in range(n)) for s in range(n)]
    return FiniteAction(elements, list(range(n)))


def elements_of_order(action: FiniteAction, k: int) -> list:
    e = action.identity()
    out = []
    for g in action.elements:
        p = g
        for i in range(1, k + 1):
            if p == e:
                if i == k:
                    out.append(g)
                break
            p = compose(p, g)
    return out
