"""Exact linear algebra over Z, Q and multi-quadratic fields."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotDiagonalizable, NotPrimitive, Singular, UnsupportedField
from .exactnum import AlgebraicNumber, sign_of, squarefree_decompose


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _zero(x) -> bool:
    return not x


def _recip(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(1) / x
    return x.inverse()


class Matrix:
    """Immutable dense matrix; entries are ints, Fractions or AlgebraicNumbers."""

    __slots__ = ("rows", "_hash")

    def __init__(self, rows: Iterable[Iterable]):
        rows = tuple(tuple(r) for r in rows)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("matrix rows must be nonempty and of equal length")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    # construction ---------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return _wrap([[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, entries: Sequence) -> "Matrix":
        n = len(entries)
        return _wrap([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence]) -> "Matrix":
        return _wrap(list(zip(*cols)))

    # shape / access -------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0])

    @property
    def n(self) -> int:
        return len(self.rows)

    def is_square(self) -> bool:
        return len(self.rows) == len(self.rows[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def row(self, i: int) -> tuple:
        return self.rows[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.rows)

    def entries(self):
        return [x for r in self.rows for x in r]

    def is_integral(self) -> bool:
        return all(_is_int(x) for r in self.rows for x in r)

    # arithmetic -----------------------------------------------------------

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            cols = list(zip(*other.rows))
            if len(self.rows[0]) != len(cols[0]):
                raise ValueError("shape mismatch")
            return _wrap([[_dot(r, c) for c in cols] for r in self.rows])
        # vector
        v = tuple(other)
        return tuple(_dot(r, v) for r in self.rows)

    def __mul__(self, scalar):
        return _wrap([[x * scalar for x in r] for r in self.rows])

    __rmul__ = __mul__

    def __add__(self, other: "Matrix"):
        return _wrap([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "Matrix"):
        return _wrap([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return _wrap([[-a for a in r] for r in self.rows])

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = Matrix.identity(self.n)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    @property
    def T(self) -> "Matrix":
        return _wrap(list(zip(*self.rows)))

    def transpose(self) -> "Matrix":
        return self.T

    def trace(self):
        return sum((self.rows[i][i] for i in range(self.n)), 0)

    def map(self, f) -> "Matrix":
        return _wrap([[f(x) for x in r] for r in self.rows])

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.shape == other.shape and all(
            a == b for r, s in zip(self.rows, other.rows) for a, b in zip(r, s)
        )

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.rows))
        return self._hash

    def is_identity(self) -> bool:
        return self == Matrix.identity(self.n)

    def det(self):
        return det(self)

    def inverse(self) -> "Matrix":
        return inverse(self)

    def frobenius_sq(self):
        return sum((x * x for x in self.entries()), 0)

    def __repr__(self):
        return f"{type(self).__name__}({[list(r) for r in self.rows]})"

    def __str__(self):
        cells = [[str(x) for x in r] for r in self.rows]
        w = max(len(c) for r in cells for c in r)
        return "\n".join(" ".join(c.rjust(w) for c in r) for r in cells)


class IntMatrix(Matrix):
    """Matrix with integer entries (the carrier of every built-in matrix)."""

    __slots__ = ()

    def __init__(self, rows):
        super().__init__(rows)
        if not all(_is_int(x) for r in self.rows for x in r):
            raise TypeError("IntMatrix entries must be integers")


FieldMatrix = Matrix


def _wrap(rows) -> Matrix:
    rows = [list(r) for r in rows]
    for r in rows:
        for i, x in enumerate(r):
            if isinstance(x, Fraction) and x.denominator == 1:
                r[i] = x.numerator
    if all(_is_int(x) for r in rows for x in r):
        return IntMatrix(rows)
    return Matrix(rows)


def _dot(u, v):
    it = iter(zip(u, v))
    a, b = next(it)
    acc = a * b
    for a, b in it:
        if a and b:
            acc = acc + a * b
    return acc


def dot(u, v):
    return _dot(u, v)


# ---------------------------------------------------------------------------
# determinant / inverse / kernels


def det(M: Matrix):
    if not M.is_square():
        raise ValueError("determinant of a non-square matrix")
    if M.is_integral():
        return _bareiss(M)
    a = [list(r) for r in M.rows]
    n = len(a)
    result = 1
    for c in range(n):
        p = next((r for r in range(c, n) if not _zero(a[r][c])), None)
        if p is None:
            return 0 * a[0][0]
        if p != c:
            a[c], a[p] = a[p], a[c]
            result = -result
        piv = a[c][c]
        result = result * piv
        inv = _recip(piv)
        for r in range(c + 1, n):
            if not _zero(a[r][c]):
                f = a[r][c] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return result


def _bareiss(M: Matrix) -> int:
    a = [list(r) for r in M.rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def inverse(M: Matrix) -> Matrix:
    """Exact inverse; integer matrices with det ±1 stay integral."""
    n = M.n
    if M.is_integral():
        d = det(M)
        if d == 0:
            raise Singular("matrix is singular")
        adj = adjugate(M)
        if d in (1, -1):
            return adj * d
        return adj.map(lambda x: Fraction(x, d))
    a = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(M.rows)]
    for c in range(n):
        p = next((r for r in range(c, n) if not _zero(a[r][c])), None)
        if p is None:
            raise Singular("matrix is singular")
        a[c], a[p] = a[p], a[c]
        inv = _recip(a[c][c])
        a[c] = [x * inv for x in a[c]]
        for r in range(n):
            if r != c and not _zero(a[r][c]):
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return _wrap([r[n:] for r in a])


def adjugate(M: Matrix) -> Matrix:
    n = M.n
    if n == 1:
        return _wrap([[1]])
    rows = M.rows
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = Matrix([[rows[r][c] for c in range(n) if c != j] for r in range(n) if r != i])
            out[j][i] = (-1) ** (i + j) * det(minor)
    return _wrap(out)


def rref(rows: Sequence[Sequence]):
    """Reduced row echelon form over a field; returns (rows, pivot columns)."""
    a = [list(r) for r in rows]
    m = len(a)
    ncols = len(a[0]) if a else 0
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, m) if not _zero(a[i][c])), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = _recip(a[r][c])
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and not _zero(a[i][c]):
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return a, pivots


def kernel(M: Matrix) -> list[tuple]:
    """Basis of the right null space over the field generated by the entries."""
    rows = [[Fraction(x) if _is_int(x) else x for x in r] for r in M.rows]
    red, pivots = rref(rows)
    ncols = M.shape[1]
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][f]
        basis.append(tuple(v))
    return basis


def rank(M: Matrix) -> int:
    rows = [[Fraction(x) if _is_int(x) else x for x in r] for r in M.rows]
    return len(rref(rows)[1])


# ---------------------------------------------------------------------------
# polynomials


class RatPolynomial:
    """Polynomial with rational coefficients, stored low degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        c = [Fraction(x) for x in coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        if not c:
            c = [Fraction(0)]
        object.__setattr__(self, "coeffs", tuple(c))

    def __setattr__(self, name, value):
        raise AttributeError("RatPolynomial is immutable")

    @classmethod
    def x(cls) -> "RatPolynomial":
        return cls([0, 1])

    @classmethod
    def from_roots(cls, roots) -> "RatPolynomial":
        p = cls([1])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return self.coeffs == (0,)

    @property
    def lead(self) -> Fraction:
        return self.coeffs[-1]

    def is_monic(self) -> bool:
        return self.lead == 1

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return RatPolynomial([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return RatPolynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return RatPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = RatPolynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, other):
        other = _as_poly(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(1, len(rem) - len(other.coeffs) + 1)
        d = other.degree
        while len(rem) - 1 >= d and any(rem):
            shift = len(rem) - 1 - d
            f = rem[-1] / other.lead
            q[shift] = f
            for i, c in enumerate(other.coeffs):
                rem[shift + i] -= f * c
            rem.pop()
        return RatPolynomial(q), RatPolynomial(rem or [0])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __call__(self, x):
        acc = 0 * x if isinstance(x, AlgebraicNumber) else Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = RatPolynomial([other])
        if not isinstance(other, RatPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def monic(self) -> "RatPolynomial":
        return RatPolynomial([c / self.lead for c in self.coeffs])

    def __repr__(self):
        return f"RatPolynomial({str(self)!r})"

    def __str__(self):
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if not c:
                continue
            mag = abs(c)
            cs = str(mag)
            if i == 0:
                body = cs
            else:
                mon = "x" if i == 1 else f"x^{i}"
                body = mon if mag == 1 else f"{cs}{mon}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        if not terms:
            return "0"
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for s, b in terms[1:]:
            out += f" {s} {b}"
        return out


def _as_poly(x) -> RatPolynomial:
    return x if isinstance(x, RatPolynomial) else RatPolynomial([x])


def charpoly(M: Matrix) -> RatPolynomial:
    """det(x*I - M) by the Faddeev-LeVerrier recurrence."""
    n = M.n
    if any(isinstance(x, AlgebraicNumber) for x in M.entries()):
        raise TypeError("charpoly expects rational entries")
    A = M.map(Fraction)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = Matrix([[Fraction(0)] * n for _ in range(n)])
    ident = Matrix.identity(n)
    c = Fraction(1)
    for k in range(1, n + 1):
        Mk = A @ Mk + ident * c if k > 1 else ident
        AM = A @ Mk
        c = -Fraction(AM.trace()) / k
        coeffs[n - k] = c
    return RatPolynomial(coeffs)


@dataclass(frozen=True)
class Factor:
    poly: RatPolynomial
    multiplicity: int = 1

    @property
    def flagged(self) -> bool:
        """Degree >= 3: not split into quadratics (eigen-analysis unsupported)."""
        return self.poly.degree >= 3


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, math.isqrt(n) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _rational_roots(p: RatPolynomial) -> list[Fraction]:
    den = math.lcm(*(c.denominator for c in p.coeffs))
    ints = [int(c * den) for c in p.coeffs]
    while ints and ints[0] == 0:
        ints.pop(0)
    roots = {Fraction(0)} if p.coeffs[0] == 0 else set()
    if len(ints) <= 1:
        return sorted(roots)
    for a in _divisors(ints[0]):
        for b in _divisors(ints[-1]):
            for r in (Fraction(a, b), Fraction(-a, b)):
                if p(r) == 0:
                    roots.add(r)
    return sorted(roots)


def cauchy_bound(p: RatPolynomial) -> Fraction:
    q = p.monic()
    return 1 + max((abs(c) for c in q.coeffs[:-1]), default=Fraction(0))


def _quadratic_pair(p: RatPolynomial):
    """Split a monic integral quartic into two integral monic quadratics, or None.

    (x^2+bx+c)(x^2+dx+e): c*e = a0 and b, d are the roots of
    t^2 - a3 t + (a2 - c - e); c runs over divisors of a0 (bounded by the
    square of the Cauchy root bound).
    """
    a0, a1, a2, a3 = (int(c) for c in p.coeffs[:4])
    bound = cauchy_bound(p) ** 2
    for c0 in _divisors(a0):
        for c in (c0, -c0):
            if abs(c) > bound:
                continue
            e = a0 // c
            s = a2 - c - e
            disc = a3 * a3 - 4 * s
            if disc < 0:
                continue
            r = math.isqrt(disc)
            if r * r != disc or (a3 + r) % 2:
                continue
            for b in {(a3 + r) // 2, (a3 - r) // 2}:
                d = a3 - b
                if b * e + c * d == a1:
                    f1 = RatPolynomial([c, b, 1])
                    f2 = RatPolynomial([e, d, 1])
                    return tuple(sorted((f1, f2), key=lambda f: f.coeffs))
    return None


def factor_charpoly(p: RatPolynomial) -> list[Factor]:
    """Irreducible factorization over Q of a monic polynomial of degree <= 4."""
    if p.degree < 1:
        return []
    p = p.monic()
    factors: list[Factor] = []
    rest = p
    for r in _rational_roots(p):
        lin = RatPolynomial([-r, 1])
        mult = 0
        while True:
            q, rem = divmod(rest, lin)
            if not rem.is_zero():
                break
            rest, mult = q, mult + 1
        factors.append(Factor(lin, mult))
    if rest.degree == 4:
        scaled, scale = _make_integral(rest)
        pair = _quadratic_pair(scaled)
        if pair is not None:
            quads = [_unscale(f, scale) for f in pair]
            if quads[0] == quads[1]:
                factors.append(Factor(quads[0], 2))
            else:
                factors.extend(Factor(f, 1) for f in quads)
            rest = RatPolynomial([1])
    if rest.degree >= 1:
        factors.append(Factor(rest, 1))
    factors.sort(key=lambda f: (f.poly.degree, f.poly.coeffs))
    return factors


def _make_integral(p: RatPolynomial):
    """Monic p(x) -> (L^n p(y/L), L) with integral coefficients."""
    L = math.lcm(*(c.denominator for c in p.coeffs))
    n = p.degree
    return RatPolynomial([c * L ** (n - i) for i, c in enumerate(p.coeffs)]), L


def _unscale(f: RatPolynomial, L: int) -> RatPolynomial:
    n = f.degree
    return RatPolynomial([c / Fraction(L) ** (n - i) for i, c in enumerate(f.coeffs)])


def expand_factors(factors: Sequence[Factor]) -> RatPolynomial:
    out = RatPolynomial([1])
    for f in factors:
        out = out * f.poly ** f.multiplicity
    return out


def roots_of(f: RatPolynomial) -> list[AlgebraicNumber]:
    """Real roots of a linear or quadratic factor, as exact field elements (descending)."""
    f = f.monic()
    if f.degree == 1:
        return [AlgebraicNumber.rational(-f.coeffs[0])]
    if f.degree == 2:
        c, b = f.coeffs[0], f.coeffs[1]
        disc = b * b - 4 * c
        if disc < 0:
            raise UnsupportedField(f"{f} has complex roots")
        r = AlgebraicNumber.sqrt(disc)
        return [(-b + r) / 2, (-b - r) / 2]
    raise UnsupportedField(f"{f} has degree {f.degree}; only quadratic eigenvalue fields are supported")


# ---------------------------------------------------------------------------
# eigen-decomposition


def primitive_vector(v: Sequence) -> tuple:
    """Rescale a nonzero vector: first nonzero entry 1, then clear denominators and content."""
    v = [AlgebraicNumber.coerce(x) for x in v]
    lead = next((x for x in v if not x.is_zero()), None)
    if lead is None:
        raise ValueError("zero vector")
    if not (lead.is_rational() and lead.to_fraction() == 1):
        inv = lead.inverse()
        v = [x * inv for x in v]
    den = 1
    num_gcd = 0
    for x in v:
        for c in x.coords:
            if c:
                den = math.lcm(den, c.denominator)
    for x in v:
        for c in x.coords:
            if c:
                num_gcd = math.gcd(num_gcd, (c * den).numerator)
    scale = Fraction(den, num_gcd or 1)
    return tuple(_simplify(x * scale) for x in v)


def _simplify(x: AlgebraicNumber):
    x = x.minimal()
    if x.is_rational():
        f = x.to_fraction()
        return f.numerator if f.denominator == 1 else f
    return x


@dataclass(frozen=True)
class EigenData:
    eigenvalues: tuple  # descending, with multiplicity
    S: Matrix  # columns are eigenvectors, aligned with eigenvalues
    factors: tuple

    def eigenvectors_for(self, value) -> list[tuple]:
        return [self.S.col(j) for j, lam in enumerate(self.eigenvalues) if lam == value]


def eigen_decompose(M: Matrix) -> EigenData:
    """Exact diagonalization over the splitting field (quadratic factors only)."""
    if not M.is_square():
        raise ValueError("expected a square matrix")
    n = M.n
    factors = factor_charpoly(charpoly(M))
    pairs = []
    for f in factors:
        roots = roots_of(f.poly)
        for lam in roots:
            shifted = _shift(M, lam)
            basis = kernel(shifted)
            if len(basis) < f.multiplicity:
                raise NotDiagonalizable(
                    f"eigenvalue {lam}: geometric multiplicity {len(basis)} < algebraic {f.multiplicity}"
                )
            for v in basis:
                pairs.append((lam, primitive_vector(v)))
    pairs.sort(key=_SortKey)
    values = tuple(_simplify(lam) for lam, _ in pairs)
    S = Matrix.from_columns([v for _, v in pairs])
    # self-check: M S == S diag(values)
    lhs = M @ S
    rhs = S @ Matrix.diag(list(values))
    if lhs != rhs:
        raise AssertionError("eigen-decomposition self-check failed")
    return EigenData(values, S, tuple(factors))


class _SortKey:
    __slots__ = ("lam", "vec")

    def __init__(self, pair):
        self.lam, self.vec = pair

    def __lt__(self, other):
        s = sign_of(AlgebraicNumber.coerce(self.lam) - other.lam)
        return s > 0


def _shift(M: Matrix, lam) -> Matrix:
    n = M.n
    return Matrix(
        [[(M[i, j] - lam) if i == j else AlgebraicNumber.coerce(M[i, j]) for j in range(n)] for i in range(n)]
    )


def left_kernel(M: Matrix) -> list[tuple]:
    return kernel(M.T)


# ---------------------------------------------------------------------------
# integer normal forms


def smith_normal_form(M: Matrix):
    """(U, D, V) with U @ M @ V == D, U and V unimodular, D diagonal with d_i | d_{i+1}."""
    a = [list(r) for r in M.rows]
    m, n = len(a), len(a[0])
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, f):  # row_dst += f * row_src
        a[dst] = [x + f * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + f * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, f):
        for r in a:
            r[dst] += f * r[src]
        for r in V:
            r[dst] += f * r[src]

    for t in range(min(m, n)):
        while True:
            nz = [(abs(a[i][j]), i, j) for i in range(t, m) for j in range(t, n) if a[i][j]]
            if not nz:
                break
            _, pi, pj = min(nz)
            swap_rows(t, pi)
            swap_cols(t, pj)
            done = True
            for i in range(t + 1, m):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // a[t][t]))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, n):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // a[t][t]))
                    if a[t][j]:
                        done = False
            if not done:
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % a[t][t]), None
            )
            if bad is not None:
                add_row(t, bad, 1)
                continue
            break
        if t < m and t < n and a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
    return IntMatrix(U), IntMatrix(a), IntMatrix(V)


def integer_kernel(M: Matrix) -> list[tuple]:
    """Z-basis of {x in Z^n : M x = 0} (a saturated lattice)."""
    U, D, V = smith_normal_form(M)
    r = sum(1 for i in range(min(D.shape)) if D[i, i])
    return [V.col(j) for j in range(r, M.shape[1])]


def primitive_extend(v: Sequence[int], n: int | None = None) -> IntMatrix:
    """Unimodular matrix whose first column is the primitive vector v."""
    v = [int(x) for x in v]
    n = n or len(v)
    if len(v) != n:
        raise ValueError("vector length does not match n")
    if math.gcd(*v) != 1:
        raise NotPrimitive(f"gcd of {tuple(v)} is not 1")
    if v == [1] + [0] * (n - 1):
        return IntMatrix.identity(n)
    U, D, V = smith_normal_form(IntMatrix([[x] for x in v]))
    # U v V = e1 with V = (±1)
    P = U.inverse()
    s = V[0, 0]
    cols = [P.col(j) for j in range(n)]
    cols[0] = tuple(s * x for x in cols[0])
    if det(Matrix.from_columns(cols)) < 0 and n > 1:
        cols[1] = tuple(-x for x in cols[1])
    out = Matrix.from_columns(cols)
    assert list(out.col(0)) == v and det(out) in (1, -1)
    return out


def lll_reduce(basis: Sequence[Sequence[int]]) -> list[tuple]:
    """LLL-reduced basis of the integer lattice spanned by `basis` (rows)."""
    if not basis:
        return []
    from sympy.polys.domains import ZZ
    from sympy.polys.matrices import DomainMatrix

    dm = DomainMatrix([[ZZ(int(x)) for x in r] for r in basis], (len(basis), len(basis[0])), ZZ)
    red = dm.lll()
    return [tuple(int(x) for x in r) for r in red.to_list()]


def order_of(M: Matrix, cap: int = 64) -> int | None:
    """Multiplicative order of M (None if > cap)."""
    ident = Matrix.identity(M.n)
    P = M
    for k in range(1, cap + 1):
        if P == ident:
            return k
        P = P @ M
    return None
