"""Polynomial supports and coefficient vectors.

A polynomial S(x_1, ..., x_n) = sum over k in K of c_k * x^k is represented
by its support K (a finite set of exponent multi-indices) together with the
coefficient map k -> c_k. The support carries the exponent matrix whose
columns are the elements of K; the standing assumption downstream is that
those columns span Q^n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

import numpy as np

from . import intlinalg

ExponentIndex = tuple[int, ...]


class InputError(ValueError):
    """Malformed or inconsistent polynomial input."""


def _grlex_key(k: ExponentIndex) -> tuple[int, ExponentIndex]:
    return (sum(k), k)


def _as_exponent(raw: Any, n: int) -> ExponentIndex:
    if not isinstance(raw, (list, tuple)):
        raise InputError(f"exponent must be a list of {n} integers, got {raw!r}")
    if len(raw) != n:
        raise InputError(f"exponent {list(raw)} has length {len(raw)}, expected {n}")
    out = []
    for e in raw:
        if isinstance(e, bool) or not isinstance(e, int):
            raise InputError(f"exponent entries must be integers, got {e!r}")
        if e < 0:
            raise InputError(f"negative exponent entry in {list(raw)}")
        out.append(e)
    return tuple(out)


@dataclass(frozen=True)
class PolynomialSupport:
    """The set K of exponent multi-indices of a polynomial in n variables.

    Exponents are stored in graded lexicographic order so that matrices,
    lattice bases and reports derived from a support are deterministic.
    """

    n: int
    exponents: tuple[ExponentIndex, ...]

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise InputError(f"dimension n must be a positive integer, got {self.n!r}")
        exps = tuple(_as_exponent(k, self.n) for k in self.exponents)
        if not exps:
            raise InputError("empty support")
        if len(set(exps)) != len(exps):
            seen: set[ExponentIndex] = set()
            for k in exps:
                if k in seen:
                    raise InputError(f"duplicate exponent {list(k)}")
                seen.add(k)
        object.__setattr__(self, "exponents", tuple(sorted(exps, key=_grlex_key)))

    @property
    def size(self) -> int:
        return len(self.exponents)

    @property
    def has_constant_term(self) -> bool:
        """True when K contains the zero exponent (a constant term in S)."""
        return (0,) * self.n in set(self.exponents)

    def exponent_matrix(self) -> np.ndarray:
        """n x |K| integer matrix whose column for k is k itself."""
        return np.array(self.exponents, dtype=np.int64).T.reshape(self.n, self.size)

    def exponent_rows(self) -> np.ndarray:
        """|K| x n integer matrix, one row per exponent (engine layout)."""
        return np.array(self.exponents, dtype=np.int64).reshape(self.size, self.n)

    def index_of(self, k: ExponentIndex) -> int:
        try:
            return self.exponents.index(tuple(k))
        except ValueError:
            raise KeyError(f"exponent {tuple(k)} not in support") from None


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients c_k aligned with a support's canonical exponent order."""

    support: PolynomialSupport
    values: tuple[complex, ...]

    def __post_init__(self) -> None:
        vals = tuple(complex(v) for v in self.values)
        if len(vals) != self.support.size:
            raise InputError(
                f"{len(vals)} coefficients for a support of size {self.support.size}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_map(
        cls, support: PolynomialSupport, mapping: Mapping[ExponentIndex, complex]
    ) -> "CoefficientVector":
        keys = {tuple(k) for k in mapping}
        if keys != set(support.exponents):
            raise InputError("coefficient domain does not equal the support")
        return cls(support, tuple(complex(mapping[k]) for k in support.exponents))

    def get(self, k: ExponentIndex) -> complex:
        return self.values[self.support.index_of(k)]

    def as_dict(self) -> dict[ExponentIndex, complex]:
        return dict(zip(self.support.exponents, self.values))

    def vector(self) -> np.ndarray:
        return np.array(self.values, dtype=np.complex128)

    def with_offsets(
        self, offsets: Mapping[ExponentIndex, complex]
    ) -> "CoefficientVector":
        """New coefficient vector with the given exponents' values shifted."""
        vals = list(self.values)
        for k, delta in offsets.items():
            vals[self.support.index_of(tuple(k))] += complex(delta)
        return CoefficientVector(self.support, tuple(vals))

    def conjugated(self) -> "CoefficientVector":
        return CoefficientVector(self.support, tuple(v.conjugate() for v in self.values))


def parse_polynomial(doc: Any) -> tuple[PolynomialSupport, CoefficientVector]:
    """Parse a polynomial document into (support, coefficients).

    The document is either a JSON string/bytes or an already-decoded object
    of the form::

        {"n": 2, "terms": [{"k": [2, 0], "c": [-1.0, 0.0]}, ...]}

    where ``c`` holds the real and imaginary parts of the coefficient.
    Duplicate exponents are an error; there is no silent merging.
    """
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("polynomial document must be an object")
    unknown = set(doc) - {"n", "terms"}
    if unknown:
        raise InputError(f"unknown fields in polynomial document: {sorted(unknown)}")
    if "n" not in doc or "terms" not in doc:
        raise InputError("polynomial document needs fields 'n' and 'terms'")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InputError(f"'n' must be a positive integer, got {n!r}")
    terms = doc["terms"]
    if not isinstance(terms, list) or not terms:
        raise InputError("'terms' must be a nonempty array")
    pairs: list[tuple[ExponentIndex, complex]] = []
    seen: set[ExponentIndex] = set()
    for t in terms:
        if not isinstance(t, dict) or set(t) != {"k", "c"}:
            raise InputError(f"each term must be an object with fields 'k' and 'c': {t!r}")
        k = _as_exponent(t["k"], n)
        if k in seen:
            raise InputError(f"duplicate exponent {list(k)}")
        seen.add(k)
        c = t["c"]
        if (
            not isinstance(c, (list, tuple))
            or len(c) != 2
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in c)
        ):
            raise InputError(f"coefficient must be a [re, im] pair, got {c!r}")
        pairs.append((k, complex(float(c[0]), float(c[1]))))
    support = PolynomialSupport(n, tuple(k for k, _ in pairs))
    by_key = dict(pairs)
    coeffs = CoefficientVector(support, tuple(by_key[k] for k in support.exponents))
    return support, coeffs


def serialize_polynomial(coeffs: CoefficientVector) -> dict:
    """Inverse of :func:`parse_polynomial` (canonical exponent order)."""
    return {
        "n": coeffs.support.n,
        "terms": [
            {"k": list(k), "c": [v.real, v.imag]}
            for k, v in zip(coeffs.support.exponents, coeffs.values)
        ],
    }


def check_spanning(support: PolynomialSupport) -> bool:
    """True iff the exponents span Q^n, i.e. the exponent matrix has rank n.

    Computed in exact integer arithmetic; floating point never enters.
    """
    rows = [list(map(int, row)) for row in support.exponent_matrix()]
    return intlinalg.integer_rank(rows) == support.n


def iter_exponents(support: PolynomialSupport) -> Iterable[ExponentIndex]:
    return iter(support.exponents)
