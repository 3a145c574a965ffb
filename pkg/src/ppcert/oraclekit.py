"""Floating-point and brute-force oracles for tests.

Nothing here feeds a certificate.  These are slow, independent mirrors of the
exact code: sampled contraction and Lipschitz ratios in floats, permutation
expansion for determinants and characteristic polynomials, and determinantal
divisors for the Smith form.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np


def _as_array(M) -> np.ndarray:
    rows = M.rows if hasattr(M, "rows") else M
    return np.array([[float(x) for x in r] for r in rows], dtype=float)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def chordal(u: np.ndarray, v: np.ndarray) -> float:
    """sin of the angle between the lines through u and v."""
    u, v = _unit(u), _unit(v)
    # |v - (u.v) u| keeps precision for nearly equal lines
    return min(1.0, float(np.linalg.norm(v - (u @ v) * u)))


@dataclass
class SampleCloud:
    points: list
    seed: int


def sample_sphere(n: int, count: int, seed: int = 0) -> SampleCloud:
    rng = np.random.default_rng(seed)
    pts = [_unit(rng.standard_normal(n)) for _ in range(count)]
    return SampleCloud(pts, seed)


def sample_ball(center, radius: float, count: int, seed: int = 0) -> SampleCloud:
    """Unit representatives within chordal distance `radius` of `center`.

    Every fourth point sits on the boundary sphere, where contraction is slowest.
    """
    c = _unit(np.asarray(center, dtype=float))
    rng = np.random.default_rng(seed)
    top = math.asin(min(1.0, float(radius)))
    pts = []
    for i in range(count):
        t = rng.standard_normal(len(c))
        t = _unit(t - (t @ c) * c)
        theta = top if i % 4 == 0 else top * rng.random()
        pts.append(math.cos(theta) * c + math.sin(theta) * t)
    return SampleCloud(pts, seed)


def region_cloud(region, samples: int, seed: int = 0) -> SampleCloud:
    """Spread `samples` points over the balls of a projdyn Region."""
    balls = [b for _, b in region]
    pts = []
    for i, b in enumerate(balls):
        share = samples // len(balls) + (1 if i < samples % len(balls) else 0)
        pts.extend(sample_ball(b.center.floats(), float(b.radius), share, seed + i).points)
    return SampleCloud(pts, seed)


def empirical_contraction(M, region, eps, samples: int = 1000, target=None, seed: int = 0, horizon: int = 10_000) -> int:
    """Least k such that M^j x lies within eps of the attracting point for all j >= k.

    `target` defaults to the dominant eigenvector of M.  The iteration runs
    until every sample has been inside for a few consecutive steps.
    """
    if samples == 0:
        return 0
    A = _as_array(M)
    eps = float(eps)
    if target is None:
        vals, vecs = np.linalg.eig(A)
        target = np.real(vecs[:, int(np.argmax(np.abs(vals)))])
    target = _unit(np.asarray(target, dtype=float))
    xs = np.array(region_cloud(region, samples, seed).points).T
    last_out = -1
    inside_run = 0
    for k in range(horizon):
        d = [chordal(xs[:, i], target) for i in range(xs.shape[1])]
        if max(d) > eps:
            last_out = k
            inside_run = 0
        else:
            inside_run += 1
            if inside_run >= 8:
                break
        xs = A @ xs
        xs /= np.linalg.norm(xs, axis=0)
    return last_out + 1


def lipschitz_ratio(M, pairs: int = 10_000, seed: int = 0, close: bool = True) -> float:
    """Largest d(Mx, My) / d(x, y) over random pairs; `close` mixes in nearby pairs."""
    A = _as_array(M)
    n = A.shape[0]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(pairs):
        x = _unit(rng.standard_normal(n))
        if close and i % 2:
            y = _unit(x + 10.0 ** rng.uniform(-6, -1) * rng.standard_normal(n))
        else:
            y = _unit(rng.standard_normal(n))
        d = chordal(x, y)
        if d < 1e-9:
            continue
        worst = max(worst, chordal(A @ x, A @ y) / d)
    return worst


def _perm_sign(p) -> int:
    s = 1
    seen = [False] * len(p)
    for i in range(len(p)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        if length % 2 == 0:
            s = -s
    return s


def reference_det(M):
    """Leibniz expansion over all permutations."""
    rows = [list(r) for r in (M.rows if hasattr(M, "rows") else M)]
    n = len(rows)
    total = 0
    for p in itertools.permutations(range(n)):
        term = _perm_sign(p)
        for i in range(n):
            term *= rows[i][p[i]]
            if not term:
                break
        total += term
    return total


def _pmul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def reference_charpoly(M) -> list:
    """Coefficients of det(x id - M), constant term first, by permutation expansion."""
    rows = [list(r) for r in (M.rows if hasattr(M, "rows") else M)]
    n = len(rows)
    entry = [[[Fraction(-rows[i][j]), Fraction(int(i == j))] for j in range(n)] for i in range(n)]
    total = [Fraction(0)] * (n + 1)
    for p in itertools.permutations(range(n)):
        term = [Fraction(_perm_sign(p))]
        for i in range(n):
            term = _pmul(term, entry[i][p[i]])
        for k, c in enumerate(term):
            total[k] += c
    return total


def reference_snf(M) -> list:
    """Invariant factors d_k / d_(k-1), where d_k is the gcd of the k x k minors."""
    rows = [list(r) for r in (M.rows if hasattr(M, "rows") else M)]
    m, n = len(rows), len(rows[0])
    out = []
    prev = 1
    for k in range(1, min(m, n) + 1):
        minors = (
            reference_det([[rows[i][j] for j in cs] for i in rs])
            for rs in itertools.combinations(range(m), k)
            for cs in itertools.combinations(range(n), k)
        )
        dk = reduce(math.gcd, (abs(int(x)) for x in minors), 0)
        if dk == 0:
            out.extend([0] * (min(m, n) - k + 1))
            break
        out.append(dk // prev)
        prev = dk
    return out
