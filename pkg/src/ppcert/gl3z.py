"""Order-3 elements of GL_3(Z): normal forms and exact centralizers."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from .errors import BoundCapExceeded, ClosureFails, NoIntegerFixedVector, NotOrderThree
from .matqz import IntMatrix, Matrix, det, integer_kernel, lll_reduce, primitive_extend

M2 = IntMatrix([[0, -1], [1, -1]])
M1_PRIME = IntMatrix([[1, 0, 0], [0, 0, -1], [0, 1, -1]])
M2_PRIME = IntMatrix([[1, 1, 0], [0, 0, -1], [0, 1, -1]])
CANONICAL = {"M'1": M1_PRIME, "M'2": M2_PRIME}


@dataclass(frozen=True)
class Order3Class:
    tag: str
    conjugator: IntMatrix
    matrix: IntMatrix
    residual_row: tuple  # (x, y) after the block is brought to M
    steps: tuple = ()

    def verify(self) -> bool:
        P = self.conjugator
        return det(P) in (1, -1) and P.inverse() @ self.matrix @ P == CANONICAL[self.tag]


@dataclass
class CentralizerResult:
    matrix: IntMatrix
    basis: list
    elements: list
    order: int
    closed: bool
    bound: int
    rounds: list = field(default_factory=list)  # (bound, new elements found)

    @property
    def contains_required(self) -> bool:
        """The group contains the input matrix and -id."""
        n = self.matrix.n
        s = set(self.elements)
        return self.matrix in s and IntMatrix.identity(n) * -1 in s

    def is_cyclic(self) -> bool:
        return any(_order(x) == self.order for x in self.elements)

    def generated_by(self, gens) -> bool:
        return _closure(gens) == set(self.elements)


def _order(x: Matrix, cap: int = 64) -> int | None:
    ident = Matrix.identity(x.n)
    p = x
    for k in range(1, cap + 1):
        if p == ident:
            return k
        p = p @ x
    return None


def _closure(gens) -> set:
    gens = list(gens)
    n = gens[0].n
    out = {IntMatrix.identity(n)}
    frontier = list(out)
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                x = g @ h
                if x not in out:
                    out.add(x)
                    nxt.append(x)
        frontier = nxt
    return out


def _check_int_square(M) -> IntMatrix:
    M = M if isinstance(M, Matrix) else Matrix(M)
    if not M.is_square() or not M.is_integral():
        raise NotOrderThree("expected a square integer matrix")
    return IntMatrix(M.rows)


def commutant_basis(M: Matrix) -> list[IntMatrix]:
    """LLL-reduced Z-basis of the integer matrices X with XM = MX."""
    M = IntMatrix(M.rows)
    n = M.n
    rows = []
    # coefficient of X[k][l] in (XM - MX)[i][j]
    for i in range(n):
        for j in range(n):
            row = [0] * (n * n)
            for l in range(n):
                row[i * n + l] += M[l, j]
            for k in range(n):
                row[k * n + j] -= M[i, k]
            rows.append(row)
    ker = integer_kernel(IntMatrix(rows))
    ker = lll_reduce(ker) if ker else []
    return [IntMatrix([v[i * n : (i + 1) * n] for i in range(n)]) for v in ker]


def _combos(basis, bound, inner=-1):
    """Coefficient vectors with inner < max-norm <= bound."""
    d = len(basis)
    for c in itertools.product(range(-bound, bound + 1), repeat=d):
        if max(map(abs, c)) > inner:
            yield c


def _combine(basis, c) -> IntMatrix:
    n = basis[0].n
    rows = [[sum(ci * b[i, j] for ci, b in zip(c, basis)) for j in range(n)] for i in range(n)]
    return IntMatrix(rows)


def _units(basis, bound, inner=-1) -> list:
    out = []
    for c in _combos(basis, bound, inner):
        X = _combine(basis, c)
        if det(X) in (1, -1):
            out.append(X)
    return out


def _is_group(elems) -> bool:
    s = set(elems)
    return all(x @ y in s for x in s for y in s) and all(x.inverse() in s for x in s)


def centralizer_enumerate(M: Matrix, bound: int = 5, cap: int = 9) -> CentralizerResult:
    """Unit group of the commutant by bounded enumeration, escalating until two quiet rounds."""
    M = _check_int_square(M)
    if bound < 1:
        raise ValueError("bound must be at least 1")
    cap = max(cap, bound + 4)
    basis = commutant_basis(M)
    found = set(_units(basis, bound))
    rounds = [(bound, len(found))]
    quiet = 0
    B = bound
    while quiet < 2:
        if B + 2 > cap:
            raise BoundCapExceeded(f"centralizer search did not stabilise by bound {cap}")
        new = set(_units(basis, B + 2, B)) - found
        B += 2
        rounds.append((B, len(new)))
        found |= new
        quiet = quiet + 1 if not new else 0
    elems = sorted(found, key=lambda x: x.rows)
    closed = _is_group(elems)
    if not closed:
        raise ClosureFails("enumerated unit set is not closed under products and inverses")
    return CentralizerResult(M, basis, elems, len(elems), closed, B, rounds)


def _gl2_conjugator(Mpp: IntMatrix, max_bound: int = 50) -> IntMatrix:
    """X in GL_2(Z) with X^-1 Mpp X = M, found in the lattice {X : Mpp X = X M}."""
    if Mpp == M2:
        return IntMatrix.identity(2)
    rows = []
    for i in range(2):
        for j in range(2):
            row = [0] * 4
            for k in range(2):
                row[k * 2 + j] += Mpp[i, k]  # (Mpp X)[i][j]
                row[i * 2 + k] -= M2[k, j]  # (X M)[i][j]
            rows.append(row)
    ker = lll_reduce(integer_kernel(IntMatrix(rows)))
    basis = [IntMatrix([v[0:2], v[2:4]]) for v in ker]
    inner = -1
    B = 1
    while B <= max_bound:
        for c in _combos(basis, B, inner):
            X = _combine(basis, c)
            if det(X) in (1, -1):
                return X
        inner, B = B, B + 1
    raise NotOrderThree("no GL_2(Z) conjugator to the standard order-3 matrix")


def order3_normalize(Mp: Matrix) -> Order3Class:
    """Conjugate an order-3 element of GL_3(Z) to M'1 or M'2."""
    Mp = _check_int_square(Mp)
    ident = IntMatrix.identity(Mp.n)
    if Mp.n != 3 or Mp == ident or Mp @ Mp @ Mp != ident:
        raise NotOrderThree("matrix is not a 3x3 element of order 3")
    steps = []
    # (i) primitive fixed vector
    if Mp.col(0) == (1, 0, 0):
        v = (1, 0, 0)
    else:
        ker = integer_kernel(Mp - ident)
        if len(ker) != 1:
            raise NoIntegerFixedVector("fixed lattice of an order-3 matrix must have rank 1")
        v = tuple(ker[0])
        if next(x for x in v if x) < 0:
            v = tuple(-x for x in v)
    steps.append(("fixed vector", v))
    # (ii) unimodular completion
    P0 = primitive_extend(v)
    N = P0.inverse() @ Mp @ P0
    if N[1, 0] != 0 or N[2, 0] != 0 or N[0, 0] != 1:
        raise NoIntegerFixedVector("completion did not produce block upper-triangular form")
    Mpp = IntMatrix([[N[1, 1], N[1, 2]], [N[2, 1], N[2, 2]]])
    # (iii) bring the 2x2 block to M
    X = _gl2_conjugator(Mpp)
    P1 = P0 @ IntMatrix([[1, 0, 0], [0, X[0, 0], X[0, 1]], [0, X[1, 0], X[1, 1]]])
    N1 = P1.inverse() @ Mp @ P1
    x, y = N1[0, 1], N1[0, 2]
    steps.append(("block conjugator", X.rows))
    # (iv) residual row modulo the lattice Z^2 (M - id)
    cls = (x - y) % 3
    target = {0: (0, 0), 1: (1, 0), 2: (-1, 0)}[cls]
    # t (M - id) = r - target, (M - id)^-1 = adj / 3
    dx, dy = x - target[0], y - target[1]
    tx, ty = (-2 * dx - dy), (dx - dy)
    if tx % 3 or ty % 3:
        raise NoIntegerFixedVector("residual row outside the expected coset")  # pragma: no cover
    t = (tx // 3, ty // 3)
    T = IntMatrix([[1, t[0], t[1]], [0, 1, 0], [0, 0, 1]])
    P = P1 @ T
    if cls == 2:
        P = P @ IntMatrix([[-1, 0, 0], [0, 1, 0], [0, 0, 1]])
    tag = "M'1" if cls == 0 else "M'2"
    steps.append(("residual row", (x, y), "x - y mod 3", cls))
    out = Order3Class(tag, P, Mp, (x, y), tuple(steps))
    if not out.verify():
        raise NoIntegerFixedVector("conjugator check failed")  # pragma: no cover
    return out


def residual_obstruction() -> bool:
    """(1, 0) is not in the row lattice of M - id, whose index is |det(M - id)| = 3."""
    D = M2 - IntMatrix.identity(2)
    d = det(D)
    # t = (1, 0) adj(D) / d must be integral for (1, 0) to be reachable
    adj = ((D[1, 1], -D[0, 1]), (-D[1, 0], D[0, 0]))
    return abs(d) == 3 and (adj[0][0] % d != 0 or adj[0][1] % d != 0)


def random_unimodular(rng: random.Random, n: int = 3, bound: int = 5) -> IntMatrix:
    """Random integer matrix with det +-1 and entries bounded by `bound` (rejection sampling)."""
    while True:
        Q = IntMatrix([[rng.randint(-bound, bound) for _ in range(n)] for _ in range(n)])
        if det(Q) in (1, -1):
            return Q


def classification_battery(seed: int = 0, count: int = 100, bound: int = 5) -> dict:
    """Round-trip random conjugates of each canonical form; returns tag counts per form."""
    rng = random.Random(seed)
    out = {}
    for tag, C in CANONICAL.items():
        hits = 0
        for _ in range(count):
            Q = random_unimodular(rng, 3, bound)
            cls = order3_normalize(Q @ C @ Q.inverse())
            if cls.tag == tag and cls.verify():
                hits += 1
        out[tag] = hits
    return out
