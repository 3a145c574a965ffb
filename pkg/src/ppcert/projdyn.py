"""Projective geometry with the chordal metric, and proximal dynamics.

Distances are handled through their squares, which are field elements, so
comparisons against rational radii are exact.  The chordal distance between
lines [u], [v] is the sine of the angle between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import NotProximal, PowerCapExceeded, Singular, SourceTouchesRepelling
from .exactnum import AlgebraicNumber, lower_bound, sign_of, sqrt_lower, sqrt_upper, upper_bound
from .matqz import Matrix, dot, eigen_decompose, inverse, primitive_vector


def _an(x) -> AlgebraicNumber:
    return AlgebraicNumber.coerce(x)


class _Projective:
    __slots__ = ("coords",)

    def __init__(self, coords: Iterable):
        coords = tuple(coords)
        if all(not x for x in coords):
            raise ValueError("projective coordinates must not all vanish")
        object.__setattr__(self, "coords", primitive_vector(coords))

    def __setattr__(self, name, value):
        raise AttributeError("immutable")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return proportional(self.coords, other.coords)

    def __hash__(self):
        return hash(self.coords)

    def __str__(self):
        return "[" + " : ".join(str(x) for x in self.coords) + "]"

    def floats(self):
        return [float(_an(x)) for x in self.coords]


class ProjPoint(_Projective):
    """Point of P^{n-1}(R), canonicalized (first nonzero coordinate positive, content 1)."""

    def __repr__(self):
        return f"ProjPoint({self})"


class ProjHyperplane(_Projective):
    """Hyperplane {x : normal . x = 0}."""

    @property
    def normal(self):
        return self.coords

    def contains(self, p: ProjPoint) -> bool:
        return not dot(self.coords, p.coords)

    def equation(self, names=None) -> str:
        names = names or [f"x{i + 1}" for i in range(self.dim)]
        terms = [f"({c})·{v}" for c, v in zip(self.coords, names) if c]
        return " + ".join(terms) + " = 0"

    def __repr__(self):
        return f"ProjHyperplane({self})"


def proportional(u: Sequence, v: Sequence) -> bool:
    """All 2x2 minors of the stacked rows vanish."""
    n = len(u)
    for i in range(n):
        for j in range(i + 1, n):
            if u[i] * v[j] != u[j] * v[i]:
                return False
    return True


def dist2_points(p: ProjPoint, q: ProjPoint) -> AlgebraicNumber:
    """Squared chordal distance 1 - (p.q)^2 / ((p.p)(q.q))."""
    pq = dot(p.coords, q.coords)
    pp = dot(p.coords, p.coords)
    qq = dot(q.coords, q.coords)
    return _an(1) - _an(pq * pq) / (pp * qq)


def dist2_point_hyperplane(p: ProjPoint, h: ProjHyperplane) -> AlgebraicNumber:
    """Squared sine of the angle between p and h: (n.p)^2 / ((n.n)(p.p))."""
    np_ = dot(h.coords, p.coords)
    return _an(np_ * np_) / (dot(h.coords, h.coords) * dot(p.coords, p.coords))


def act(g: Matrix, x):
    """Image of a point (g x) or hyperplane (normal -> g^{-T} normal)."""
    if isinstance(x, ProjPoint):
        if not g.det():
            raise Singular("acting matrix is singular")
        return ProjPoint(g @ x.coords)
    if isinstance(x, ProjHyperplane):
        ginv = inverse(g)
        return ProjHyperplane(ginv.T @ x.coords)
    raise TypeError(f"cannot act on {type(x).__name__}")


def is_orthogonal(g: Matrix) -> bool:
    return (g.T @ g).is_identity()


def lipschitz_bound(g: Matrix) -> Fraction:
    """Certified Lipschitz constant of g on P^{n-1} for the chordal metric.

    d(gx, gy) <= (s_max/s_min)^2 d(x, y) <= |g|_F^2 |g^-1|_F^2 d(x, y); exactly 1
    for orthogonal g.
    """
    if not g.det():
        raise Singular("matrix is singular")
    if is_orthogonal(g):
        return Fraction(1)
    return Fraction(g.frobenius_sq()) * Fraction(inverse(g).frobenius_sq())


def sqrt_lo(x: AlgebraicNumber, bits: int = 64) -> Fraction:
    lo = lower_bound(x, bits)
    return sqrt_lower(max(lo, Fraction(0)), bits)


def sqrt_hi(x: AlgebraicNumber, bits: int = 64) -> Fraction:
    return sqrt_upper(max(upper_bound(x, bits), Fraction(0)), bits)


# ---------------------------------------------------------------------------
# balls and regions


@dataclass(frozen=True)
class Ball:
    center: ProjPoint
    radius: Fraction

    def __post_init__(self):
        r = Fraction(self.radius)
        object.__setattr__(self, "radius", r)
        if not 0 < r < 1:
            raise ValueError("ball radius must lie in (0, 1)")

    @property
    def radius2(self) -> Fraction:
        return self.radius * self.radius


def ball_disjoint_margin(b1: Ball, b2: Ball) -> AlgebraicNumber:
    """d^2(c1, c2) - (r1 + r2)^2; positive iff the closed balls are disjoint."""
    s = b1.radius + b2.radius
    return dist2_points(b1.center, b2.center) - s * s


def ball_inside_margin(b1: Ball, b2: Ball) -> AlgebraicNumber | None:
    """(r2 - r1)^2 - d^2(c1, c2); >= 0 certifies b1 within b2.  None if r1 > r2."""
    gap = b2.radius - b1.radius
    if gap < 0:
        return None
    return _an(gap * gap) - dist2_points(b1.center, b2.center)


def ball_hyperplane_margin(b: Ball, h: ProjHyperplane) -> AlgebraicNumber:
    """d^2(c, H) - r^2; positive iff the closed ball misses H."""
    return dist2_point_hyperplane(b.center, h) - b.radius2


@dataclass
class Region:
    """Finite union of labelled closed balls."""

    balls: dict = field(default_factory=dict)

    def __post_init__(self):
        self.balls = dict(self.balls)

    def add(self, label: str, ball: Ball) -> str:
        if label in self.balls:
            raise ValueError(f"duplicate ball label {label!r}")
        self.balls[label] = ball
        return label

    def find(self, center: ProjPoint, radius: Fraction | None = None):
        for lab, b in self.balls.items():
            if b.center == center and (radius is None or b.radius == radius):
                return lab
        return None

    def sub(self, labels: Iterable[str]) -> "Region":
        return Region({lab: self.balls[lab] for lab in labels})

    def labels(self) -> list[str]:
        return list(self.balls)

    def __iter__(self):
        return iter(self.balls.items())

    def __len__(self):
        return len(self.balls)


@dataclass(frozen=True)
class RegionRelation:
    kind: str  # "disjoint" | "r1_subset_r2" | "overlap-witness"
    witness: tuple = ()
    margin: AlgebraicNumber | None = None


def region_checks(r1: Region, r2: Region) -> RegionRelation:
    """Classify r1 against r2 by pairwise ball tests (conservative)."""
    inside = True
    for l1, b1 in r1:
        if not any(
            (m := ball_inside_margin(b1, b2)) is not None and sign_of(m) >= 0 for _, b2 in r2
        ):
            inside = False
            break
    if inside and len(r1):
        return RegionRelation("r1_subset_r2")
    best = None
    for l1, b1 in r1:
        for l2, b2 in r2:
            m = ball_disjoint_margin(b1, b2)
            if sign_of(m) <= 0:
                return RegionRelation("overlap-witness", (l1, l2), m)
            if best is None or m < best:
                best = m
    return RegionRelation("disjoint", (), best)


# ---------------------------------------------------------------------------
# proximal analysis


@dataclass(frozen=True)
class ProximalCert:
    """Eigen-data of a proximal matrix plus constants for the contraction bound.

    For w in the repelling hyperplane, |M^k w| <= lambda2_mod^k * K * |w| with
    K = sum_j |r_j| |s_j| over the non-dominant eigenpairs (r_j rows of S^-1).
    """

    matrix: Matrix
    lambda1: AlgebraicNumber
    lambda2_mod: AlgebraicNumber
    attracting: ProjPoint
    repelling: ProjHyperplane
    dominant_vector: tuple
    normal: tuple
    K_hi: Fraction
    gamma_hi: Fraction  # upper bound of |cos angle(normal, dominant_vector)|
    rho_hi: Fraction  # upper bound of lambda2_mod / |lambda1|

    def self_check(self) -> bool:
        M = self.matrix
        return (
            act(M, self.attracting) == self.attracting
            and act(M, self.repelling) == self.repelling
            and sign_of(abs(self.lambda1) - self.lambda2_mod) > 0
            and not self.repelling.contains(self.attracting)
        )


def _round_up(q: Fraction, bits: int = 32) -> Fraction:
    scaled = q * (1 << bits)
    n = -((-scaled.numerator) // scaled.denominator)
    return Fraction(n, 1 << bits)


def _cert_from(M: Matrix, values, S: Matrix, Sinv: Matrix, i0: int, invert: bool) -> ProximalCert:
    n = len(values)
    lam = [(_an(v).inverse() if invert else _an(v)) for v in values]
    mods = [abs(x) for x in lam]
    lam1 = lam[i0]
    others = [mods[j] for j in range(n) if j != i0]
    mu = others[0]
    for x in others[1:]:
        if x > mu:
            mu = x
    if not sign_of(mods[i0] - mu) > 0:
        raise NotProximal("no unique eigenvalue of maximal modulus")
    s1 = S.col(i0)
    r1 = Sinv.row(i0)
    K = Fraction(0)
    for j in range(n):
        if j == i0:
            continue
        sj, rj = S.col(j), Sinv.row(j)
        K += sqrt_hi(_an(dot(sj, sj)) * dot(rj, rj), 48)
    ns = dot(r1, s1)
    gamma2 = _an(ns * ns) / (_an(dot(r1, r1)) * dot(s1, s1))
    gamma_hi = min(Fraction(1), sqrt_hi(gamma2, 48))
    rho_hi = _round_up(upper_bound(mu / mods[i0], 48))
    target = M if not invert else inverse(M)
    return ProximalCert(
        matrix=target,
        lambda1=lam1,
        lambda2_mod=mu,
        attracting=ProjPoint(s1),
        repelling=ProjHyperplane(r1),
        dominant_vector=tuple(s1),
        normal=tuple(r1),
        K_hi=_round_up(K),
        gamma_hi=_round_up(gamma_hi),
        rho_hi=rho_hi,
    )


def analyze_proximal(M: Matrix) -> tuple[ProximalCert, ProximalCert]:
    """Certificates for M and M^-1 (attracting point, repelling hyperplane, constants)."""
    if not M.det():
        raise Singular("matrix is singular")
    ed = eigen_decompose(M)
    values = ed.eigenvalues
    S = ed.S
    Sinv = inverse(S)
    mods = [abs(_an(v)) for v in values]
    # values are sorted descending; dominant modulus at one end
    i_max = max(range(len(values)), key=_Key(mods))
    i_min = min(range(len(values)), key=_Key(mods))
    plus = _cert_from(M, values, S, Sinv, i_max, invert=False)
    minus = _cert_from(M, values, S, Sinv, i_min, invert=True)
    for c in (plus, minus):
        if not c.self_check():
            raise AssertionError("proximal certificate failed its self-check")
    return plus, minus


class _Key:
    """Key wrapper ordering indices by exact field values."""

    def __init__(self, vals):
        self.vals = vals

    def __call__(self, i):
        return _Cmp(self.vals[i])


class _Cmp:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return sign_of(self.v - other.v) < 0

    def __gt__(self, other):
        return sign_of(self.v - other.v) > 0


# ---------------------------------------------------------------------------
# contraction powers


@dataclass(frozen=True)
class Contraction:
    k: int
    delta: Fraction  # certified lower bound of d(v, H) over the source
    constant: Fraction  # K * (gamma/delta + 1)
    rho: Fraction
    eps: Fraction

    def bound(self, k: int | None = None) -> Fraction:
        return self.rho ** (self.k if k is None else k) * self.constant


def source_margin(cert: ProximalCert, source: Region) -> Fraction:
    """Rational lower bound of min over source balls of d(center, H) - radius."""
    delta = None
    for label, b in source:
        m = ball_hyperplane_margin(b, cert.repelling)
        if sign_of(m) <= 0:
            raise SourceTouchesRepelling(f"ball {label} meets the repelling hyperplane")
        d2 = dist2_point_hyperplane(b.center, cert.repelling)
        bits = 64
        while True:
            lo = sqrt_lo(d2, bits) - b.radius
            if lo > 0:
                break
            bits *= 2
        delta = lo if delta is None else min(delta, lo)
    if delta is None:
        raise ValueError("empty source region")
    return delta


def certify_contraction(cert: ProximalCert, source: Region, eps, max_power: int = 4096) -> Contraction:
    """Least k with rho^k * K * (gamma/delta + 1) <= eps.

    Writing v = c1*s1 + w (w in H), sin angle(M^k v, s1) <= |M^k w| / (|lambda1|^k |c1| |s1|)
    and |c1||s1| = d(v, H)/gamma, |w| <= 1 + |c1||s1| for unit v.
    """
    eps = Fraction(eps)
    delta = source_margin(cert, source)
    const = cert.K_hi * (cert.gamma_hi / delta + 1)
    rho = cert.rho_hi

    def ok(k):
        return rho**k * const <= eps

    if ok(1):
        return Contraction(1, delta, const, rho, eps)
    hi = 2
    while not ok(hi):
        if hi >= max_power:
            raise PowerCapExceeded(f"contraction needs more than {max_power} iterations")
        hi = min(2 * hi, max_power)
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return Contraction(hi, delta, const, rho, eps)


def contraction_power(cert: ProximalCert, source: Region, eps, max_power: int = 4096) -> int:
    return certify_contraction(cert, source, eps, max_power).k


# ---------------------------------------------------------------------------


def auto_epsilon(separations: Iterable[AlgebraicNumber], lipschitz_max: Fraction) -> Fraction:
    """min_separation / (4 (1 + L_max)), rounded down to denominator <= 10^6.

    `separations` are squared distances (point-point or point-hyperplane); zeros
    are ignored.
    """
    best = None
    for d2 in separations:
        if not d2:
            continue
        lo = sqrt_lo(d2, 64)
        best = lo if best is None else min(best, lo)
    if best is None:
        raise ValueError("no positive separations supplied")
    raw = best / (4 * (1 + Fraction(lipschitz_max)))
    eps = Fraction(math.floor(raw * 10**6), 10**6)
    if eps <= 0:
        raise ValueError("special points too close for a 10^-6 resolution epsilon")
    return eps
