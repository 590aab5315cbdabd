"""Shared helpers: polynomial builders, random corpora, exact oracles."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from gkzint import parse_polynomial


def poly(n, *terms):
    """Build (support, coeffs) from (exponent, complex) pairs."""
    doc = {
        "n": n,
        "terms": [
            {"k": list(k), "c": [complex(c).real, complex(c).imag]} for k, c in terms
        ],
    }
    return parse_polynomial(doc)


def gaussian_1d(a=-1.0):
    return poly(1, ((2,), a))


def random_admissible_doc(rng: random.Random, n: int | None = None) -> dict:
    """Random polynomial admissible on the real axes by construction.

    Diagonal stabilizers -a_v * x_v^(2 m_v) with Re a_v >= 0.3 dominate every
    asymptotic direction because all extra terms have total degree strictly
    below the smallest stabilizer degree.
    """
    if n is None:
        n = rng.choice([1, 2])
    degs = [2 * rng.randint(1, 3) for _ in range(n)]
    dmin = min(degs)
    terms: dict[tuple, complex] = {}
    for v in range(n):
        k = [0] * n
        k[v] = degs[v]
        terms[tuple(k)] = complex(-rng.uniform(0.3, 2.0), rng.uniform(-0.3, 0.3))
    for _ in range(rng.randint(1, 3)):
        for _attempt in range(30):
            k = tuple(rng.randint(0, max(0, dmin - 1)) for _ in range(n))
            if 1 <= sum(k) < dmin and k not in terms:
                terms[k] = complex(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5))
                break
    return {
        "n": n,
        "terms": [{"k": list(k), "c": [c.real, c.imag]} for k, c in terms.items()],
    }


def rational_kernel(matrix: list[list[int]]) -> list[list[Fraction]]:
    """Exact kernel basis of an integer matrix over Q (Gaussian elimination)."""
    if not matrix:
        return []
    rows = [[Fraction(x) for x in row] for row in matrix]
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        rows[r] = [x / rows[r][c] for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(v)
    return basis


def random_integer_kernel_vector(
    matrix: list[list[int]], rng: random.Random
) -> list[int] | None:
    """Random integer vector in the exact rational kernel (denominators cleared)."""
    basis = rational_kernel(matrix)
    if not basis:
        return None
    while True:
        combo = [
            Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(len(basis))
        ]
        if any(combo):
            break
    v = [sum(q * b[j] for q, b in zip(combo, basis)) for j in range(len(matrix[0]))]
    lcm = 1
    for x in v:
        d = x.denominator
        g = _gcd(lcm, d)
        lcm = lcm // g * d
    return [int(x * lcm) for x in v]


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def random_spanning_support_doc(rng: random.Random, n: int, max_terms: int = 10) -> dict:
    """Random spanning support: n diagonal seeds plus distinct random exponents."""
    terms: dict[tuple, complex] = {}
    for v in range(n):
        k = [0] * n
        k[v] = rng.randint(1, 4)
        terms[tuple(k)] = complex(-1.0)
    extra = rng.randint(0, max(0, max_terms - n))
    for _ in range(extra):
        k = tuple(rng.randint(0, 4) for _ in range(n))
        if k not in terms:
            terms[k] = complex(rng.uniform(-1, 1))
    return {
        "n": n,
        "terms": [{"k": list(k), "c": [c.real, c.imag]} for k, c in terms.items()],
    }


@pytest.fixture
def rng():
    return random.Random(20240817)
