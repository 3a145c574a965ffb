"""Exact arithmetic in real multi-quadratic fields Q(sqrt(m_1), ..., sqrt(m_k)).

An element is stored as its coordinate vector in the 2^k-dimensional
Q-basis whose element for a bitmask S is the product of sqrt(m_i), i in S.
Generators of a field are kept in a canonical form (reduced row echelon
form of the prime-exponent parity vectors), so each field has exactly one
tag and each element exactly one representation.  Zero testing is a
coordinate check; signs of nonzero elements are found by refining rational
enclosures of the square roots, which always terminates.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, total_ordering
from typing import Iterable, Union

from .errors import NotSquarefree, UnsupportedField

MAX_RADICALS = 4

Rational = Union[int, Fraction]


# ---------------------------------------------------------------------------
# field tags


def _prime_factors(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@lru_cache(maxsize=None)
def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return (s, m) with n == s*s*m and m squarefree, for n >= 1."""
    if n < 1:
        raise ValueError("expected a positive integer")
    s, m = 1, 1
    for p, e in _prime_factors(n).items():
        s *= p ** (e // 2)
        if e % 2:
            m *= p
    return s, m


def is_squarefree(n: int) -> bool:
    return n >= 1 and squarefree_decompose(n)[0] == 1


def _primes_of(m: int) -> frozenset:
    return frozenset(_prime_factors(m))


def _rref(vectors: Iterable[frozenset]) -> tuple[frozenset, ...]:
    """Reduced echelon basis over GF(2) of sets of primes (pivot = min prime)."""
    rows: list[set] = []
    for v in vectors:
        v = set(v)
        for r in rows:
            if min(r) in v:
                v ^= r
        if not v:
            continue
        p = min(v)
        for r in rows:
            if p in r:
                r ^= v
        rows.append(v)
    return tuple(frozenset(r) for r in rows)


@lru_cache(maxsize=None)
def _canonical_tag(gens: frozenset) -> tuple[int, ...]:
    rows = _rref(_primes_of(g) for g in gens)
    return tuple(sorted(math.prod(r) for r in rows))


@lru_cache(maxsize=None)
def _express(tag: tuple[int, ...], m: int):
    """Write sqrt(m) (m squarefree) as coeff * basis(mask) in `tag`, or None."""
    if m == 1:
        return Fraction(1), 0
    target = set(_primes_of(m))
    rows = [set(_primes_of(g)) for g in tag]
    # tags are in RREF, so each row owns its pivot prime
    mask = 0
    for i, r in enumerate(rows):
        if min(r) in target:
            target ^= r
            mask |= 1 << i
    if target:
        return None
    prod = math.prod(tag[i] for i in range(len(tag)) if mask >> i & 1)
    s2, rem = divmod(prod, m)
    assert rem == 0
    s = math.isqrt(s2)
    assert s * s == s2
    # basis(mask) = sqrt(prod) = s*sqrt(m)
    return Fraction(1, s), mask


def adjoin_sqrt(tag: tuple[int, ...], m: int) -> tuple[int, ...]:
    """Field tag of tag(sqrt(m)); idempotent when sqrt(m) already lies in the field."""
    if m <= 1 or not is_squarefree(m):
        raise NotSquarefree(f"{m} is not a squarefree integer > 1")
    if _express(tuple(tag), m) is not None:
        return tuple(tag)
    new = _canonical_tag(frozenset(tag) | {m})
    if len(new) > MAX_RADICALS:
        raise UnsupportedField(f"field would need {len(new)} radicals (cap {MAX_RADICALS})")
    return new


@lru_cache(maxsize=None)
def join_tags(t1: tuple[int, ...], t2: tuple[int, ...]) -> tuple[int, ...]:
    if t1 == t2 or not t2:
        return t1
    if not t1:
        return t2
    new = _canonical_tag(frozenset(t1) | frozenset(t2))
    if len(new) > MAX_RADICALS:
        raise UnsupportedField(f"field would need {len(new)} radicals (cap {MAX_RADICALS})")
    return new


@lru_cache(maxsize=None)
def _mul_table(tag: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    """table[S][T] = product of generators in S & T (basis(S)*basis(T) = that * basis(S^T))."""
    n = 1 << len(tag)
    return tuple(
        tuple(math.prod(tag[i] for i in range(len(tag)) if (s & t) >> i & 1) for t in range(n))
        for s in range(n)
    )


@lru_cache(maxsize=None)
def _basis_products(tag: tuple[int, ...]) -> tuple[int, ...]:
    """Integer N_S with basis(S) = sqrt(N_S)."""
    return tuple(
        math.prod(tag[i] for i in range(len(tag)) if s >> i & 1) for s in range(1 << len(tag))
    )


def _mul_coords(tag, x, y):
    n = len(x)
    table = _mul_table(tag)
    out = [Fraction(0)] * n
    for s in range(n):
        xs = x[s]
        if not xs:
            continue
        row = table[s]
        for t in range(n):
            yt = y[t]
            if yt:
                out[s ^ t] += xs * yt * row[t]
    return out


@lru_cache(maxsize=None)
def _embedding(src: tuple[int, ...], dst: tuple[int, ...]):
    """For each mask of src: (coeff, mask in dst) with basis_src(S) = coeff * basis_dst(mask)."""
    gens = []
    for g in src:
        e = _express(dst, g)
        if e is None:
            raise ValueError(f"{src} is not a subfield of {dst}")
        gens.append(e)
    table = _mul_table(dst)
    out = []
    for s in range(1 << len(src)):
        c, m = Fraction(1), 0
        for i in range(len(src)):
            if s >> i & 1:
                gc, gm = gens[i]
                c *= gc * table[m][gm]
                m ^= gm
        out.append((c, m))
    return tuple(out)


def _convert(coords, src, dst):
    if src == dst:
        return coords
    emb = _embedding(src, dst)
    out = [Fraction(0)] * (1 << len(dst))
    for s, c in enumerate(coords):
        if c:
            ec, em = emb[s]
            out[em] += c * ec
    return out


# ---------------------------------------------------------------------------
# rational helpers


def sqrt_lower(q: Rational, bits: int = 64) -> Fraction:
    """Rational lower bound for sqrt(q), q >= 0, accurate to 2**-bits."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative argument")
    num = q.numerator * q.denominator  # sqrt(q) = sqrt(num)/den
    r = math.isqrt(num << (2 * bits))
    return Fraction(r, q.denominator << bits)


def sqrt_upper(q: Rational, bits: int = 64) -> Fraction:
    q = Fraction(q)
    if q < 0:
        raise ValueError("negative argument")
    num = q.numerator * q.denominator
    scaled = num << (2 * bits)
    r = math.isqrt(scaled)
    if r * r != scaled:
        r += 1
    return Fraction(r, q.denominator << bits)


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("empty interval")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0


# ---------------------------------------------------------------------------


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} exactly")


@total_ordering
class AlgebraicNumber:
    """Immutable element of a real multi-quadratic field."""

    __slots__ = ("tag", "coords", "_hash")

    def __init__(self, tag: tuple[int, ...] = (), coords: Iterable[Rational] | None = None):
        tag = tuple(tag)
        if coords is None:
            coords = [0] * (1 << len(tag))
        coords = tuple(_frac(c) for c in coords)
        if len(coords) != 1 << len(tag):
            raise ValueError("coordinate vector has wrong length for field tag")
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "_hash", None)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraicNumber is immutable")

    # construction ----------------------------------------------------------

    @classmethod
    def rational(cls, q: Rational) -> "AlgebraicNumber":
        return cls((), (q,))

    @classmethod
    def sqrt(cls, n: Rational) -> "AlgebraicNumber":
        """Exact square root of a nonnegative rational."""
        q = Fraction(n)
        if q < 0:
            raise UnsupportedField("square root of a negative number is not real")
        if q == 0:
            return cls.rational(0)
        s, m = squarefree_decompose(q.numerator * q.denominator)
        coeff = Fraction(s, q.denominator)
        if m == 1:
            return cls.rational(coeff)
        return cls((m,), (0, coeff))

    @classmethod
    def coerce(cls, x) -> "AlgebraicNumber":
        if isinstance(x, AlgebraicNumber):
            return x
        return cls.rational(_frac(x))

    # inspection ------------------------------------------------------------

    @property
    def dimension(self) -> int:
        return len(self.coords)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def is_rational(self) -> bool:
        return not any(self.coords[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is irrational")
        return self.coords[0]

    def in_field(self, tag: tuple[int, ...]) -> "AlgebraicNumber":
        tag = tuple(tag)
        if tag == self.tag:
            return self
        return AlgebraicNumber(tag, _convert(self.coords, self.tag, tag))

    def minimal(self) -> "AlgebraicNumber":
        """Same value, expressed in the smallest field containing it."""
        support = [s for s, c in enumerate(self.coords) if c and s]
        prods = _basis_products(self.tag)
        gens = set()
        for s in support:
            gens.add(squarefree_decompose(prods[s])[1])
        tag = _canonical_tag(frozenset(gens))
        if tag == self.tag:
            return self
        out = [Fraction(0)] * (1 << len(tag))
        for s, c in enumerate(self.coords):
            if c:
                sq, m = squarefree_decompose(prods[s])
                ec, em = _express(tag, m)
                out[em] += c * sq * ec
        return AlgebraicNumber(tag, out)

    # arithmetic ------------------------------------------------------------

    def _pair(self, other):
        other = AlgebraicNumber.coerce(other)
        if other.tag == self.tag:
            return self.tag, self.coords, other.coords
        tag = join_tags(self.tag, other.tag)
        return tag, _convert(self.coords, self.tag, tag), _convert(other.coords, other.tag, tag)

    def __add__(self, other):
        try:
            tag, x, y = self._pair(other)
        except TypeError:
            return NotImplemented
        return AlgebraicNumber(tag, [a + b for a, b in zip(x, y)])

    __radd__ = __add__

    def __neg__(self):
        return AlgebraicNumber(self.tag, [-a for a in self.coords])

    def __pos__(self):
        return self

    def __sub__(self, other):
        try:
            tag, x, y = self._pair(other)
        except TypeError:
            return NotImplemented
        return AlgebraicNumber(tag, [a - b for a, b in zip(x, y)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlgebraicNumber(self.tag, [a * other for a in self.coords])
        try:
            tag, x, y = self._pair(other)
        except TypeError:
            return NotImplemented
        return AlgebraicNumber(tag, _mul_coords(tag, x, y))

    __rmul__ = __mul__

    def inverse(self) -> "AlgebraicNumber":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return AlgebraicNumber(self.tag, _invert(self.tag, list(self.coords)))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return AlgebraicNumber(self.tag, [a / other for a in self.coords])
        try:
            other = AlgebraicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return AlgebraicNumber.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result = AlgebraicNumber.rational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def square(self):
        return self * self

    # order -----------------------------------------------------------------

    def sign(self) -> int:
        return sign_of(self)

    def __eq__(self, other):
        try:
            other = AlgebraicNumber.coerce(other)
        except TypeError:
            return NotImplemented
        if other.tag == self.tag:
            return self.coords == other.coords
        return (self - other).is_zero()

    def __lt__(self, other):
        try:
            return sign_of(self - other) < 0
        except TypeError:
            return NotImplemented

    def __hash__(self):
        h = self._hash
        if h is None:
            m = self.minimal()
            h = hash(m.coords[0]) if m.is_rational() else hash((m.tag, m.coords))
            object.__setattr__(self, "_hash", h)
        return h

    def __bool__(self):
        return not self.is_zero()

    def __float__(self):
        prods = _basis_products(self.tag)
        return float(sum(float(c) * math.sqrt(prods[s]) for s, c in enumerate(self.coords) if c))

    # text ------------------------------------------------------------------

    def terms(self):
        """Nonzero (coefficient, squarefree radicand) pairs, radicand 1 first."""
        prods = _basis_products(self.tag)
        acc: dict[int, Fraction] = {}
        for s, c in enumerate(self.coords):
            if c:
                sq, m = squarefree_decompose(prods[s])
                acc[m] = acc.get(m, Fraction(0)) + c * sq
        return [(c, m) for m, c in sorted(acc.items()) if c]

    def __str__(self):
        return format_number(self)

    def __repr__(self):
        return f"AlgebraicNumber({format_number(self)!r})"


def _invert(tag, coords):
    """Inverse via the conjugate in the last generator: (u + v r)^-1 = (u - v r)/(u^2 - g v^2)."""
    k = len(tag)
    if k == 0:
        return [1 / coords[0]]
    half = 1 << (k - 1)
    sub = tag[:-1]
    u = coords[:half]
    v = coords[half:]
    if not any(v):
        inv_u = _invert(sub, u)
        return inv_u + [Fraction(0)] * half
    g = tag[-1]
    uu = _mul_coords(sub, u, u)
    vv = _mul_coords(sub, v, v)
    norm = [a - g * b for a, b in zip(uu, vv)]
    inv_norm = _invert(sub, norm)
    return _mul_coords(sub, u, inv_norm) + [-c for c in _mul_coords(sub, v, inv_norm)]


# ---------------------------------------------------------------------------
# enclosures and signs


def _enclose_bits(a: AlgebraicNumber, bits: int) -> RationalInterval:
    prods = _basis_products(a.tag)
    den = 1
    for c in a.coords:
        if c:
            den = den * c.denominator // math.gcd(den, c.denominator)
    lo = hi = 0
    for s, c in enumerate(a.coords):
        if not c:
            continue
        n = c.numerator * (den // c.denominator)
        if s == 0:
            lo += n << bits
            hi += n << bits
            continue
        scaled = prods[s] << (2 * bits)
        r = math.isqrt(scaled)
        r_hi = r if r * r == scaled else r + 1
        if n > 0:
            lo += n * r
            hi += n * r_hi
        else:
            lo += n * r_hi
            hi += n * r
    scale = den << bits
    return RationalInterval(Fraction(lo, scale), Fraction(hi, scale))


def enclose(a, width: Rational) -> RationalInterval:
    """Rational interval of width <= `width` containing the value of `a`."""
    a = AlgebraicNumber.coerce(a)
    width = Fraction(width)
    if width <= 0:
        raise ValueError("width must be positive")
    if a.is_rational():
        return RationalInterval(a.coords[0], a.coords[0])
    total = sum(abs(c) for c in a.coords[1:])
    # interval width is at most total / 2**bits
    ratio = total / width
    bits = max(1, (ratio.numerator // ratio.denominator).bit_length() + 1)
    return _enclose_bits(a, bits)


def sign_of(a) -> int:
    a = AlgebraicNumber.coerce(a)
    if a.is_zero():
        return 0
    if a.is_rational():
        return 1 if a.coords[0] > 0 else -1
    bits = 48
    while True:
        iv = _enclose_bits(a, bits)
        if iv.lo > 0:
            return 1
        if iv.hi < 0:
            return -1
        bits *= 2


def lower_bound(a, bits: int = 64) -> Fraction:
    return _enclose_bits(AlgebraicNumber.coerce(a), bits).lo


def upper_bound(a, bits: int = 64) -> Fraction:
    return _enclose_bits(AlgebraicNumber.coerce(a), bits).hi


def field_ops(a, b, op: str) -> AlgebraicNumber:
    """Dispatch helper: op in {'add', 'sub', 'mul', 'inv'} ('inv' ignores b)."""
    a = AlgebraicNumber.coerce(a)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# text syntax:  "3/2 + 1/2√5 - √15"


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_number(a) -> str:
    items = AlgebraicNumber.coerce(a).terms()
    if not items:
        return "0"
    parts = []
    for i, (c, m) in enumerate(items):
        neg = c < 0
        mag = -c if neg else c
        if m == 1:
            body = _fmt_q(mag)
        elif mag == 1:
            body = f"√{m}"
        else:
            body = f"{_fmt_q(mag)}√{m}"
        if i == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


_TERM = re.compile(
    r"\s*([+-])?\s*(?:(\d+)(?:/(\d+))?)?\s*(?:(?:√|sqrt\()\s*(\d+)\s*\)?)?\s*"
)


def parse_number(text: str) -> AlgebraicNumber:
    """Inverse of :func:`format_number` (also accepts ``sqrt(m)``)."""
    s = text.strip()
    if not s:
        raise ValueError("empty number")
    pos = 0
    total = AlgebraicNumber.rational(0)
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {text!r} at offset {pos}")
        sgn, num, den, rad = m.groups()
        if num is None and rad is None:
            raise ValueError(f"cannot parse {text!r} at offset {pos}")
        if sgn is None and not first:
            raise ValueError(f"missing operator in {text!r} at offset {pos}")
        coeff = Fraction(int(num), int(den) if den else 1) if num is not None else Fraction(1)
        if sgn == "-":
            coeff = -coeff
        term = AlgebraicNumber.sqrt(int(rad)) * coeff if rad is not None else coeff
        total = total + term
        pos = m.end()
        first = False
    return total


def sqrt(n: Rational) -> AlgebraicNumber:
    return AlgebraicNumber.sqrt(n)


def Q(x: Rational) -> AlgebraicNumber:
    return AlgebraicNumber.rational(x)
