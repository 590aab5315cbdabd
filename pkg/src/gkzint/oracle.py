"""Closed-form ground truth for quadratic and one-variable integrands.

These are the classical cases with known values:

  * Gaussian: for S(x) = x^T A x with Re A negative definite,
    int exp(x^T A x) dx = pi^(n/2) / sqrt(det(-A)) over the real axes,
    and moments follow from Wick pairing with covariance -A^{-1}/2.
  * One variable, even monomial: int_R exp(-a x^(2m)) dx
    = Gamma(1/(2m)) a^(-1/(2m)) / m for Re a > 0, with moment versions
    int_R x^p exp(-a x^(2m)) dx = Gamma((p+1)/(2m)) a^(-(p+1)/(2m)) / m
    for even p (odd moments vanish by symmetry).

The quadrature engine is judged against these values, so they must be an
order of magnitude more accurate than the quadrature tolerance; the math
library's Gamma (Lanczos) delivers near machine precision in the argument
range used here.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .support import InputError


@dataclass(frozen=True)
class GaussianForm:
    """A complex symmetric matrix A with Re A negative definite: S = x^T A x."""

    matrix: tuple[tuple[complex, ...], ...]

    def __post_init__(self) -> None:
        a = np.array(self.matrix, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("Gaussian form matrix must be square")
        if not np.array_equal(a, a.T):
            raise InputError("Gaussian form matrix must be symmetric (exactly)")
        # Sylvester criterion on -Re A: all leading principal minors positive.
        neg_re = -a.real
        for j in range(1, a.shape[0] + 1):
            if np.linalg.det(neg_re[:j, :j]) <= 0.0:
                raise InputError("real part of the form is not negative definite")
        object.__setattr__(
            self, "matrix", tuple(tuple(complex(x) for x in row) for row in a)
        )

    @classmethod
    def diagonal(cls, entries) -> "GaussianForm":
        n = len(entries)
        return cls(
            tuple(
                tuple(complex(entries[i]) if i == j else 0j for j in range(n))
                for i in range(n)
            )
        )

    @property
    def n(self) -> int:
        return len(self.matrix)

    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=np.complex128)


def gaussian_Z(form: GaussianForm) -> complex:
    """pi^(n/2) / sqrt(det(-A)), principal square root."""
    det = complex(np.linalg.det(-form.array()))
    return math.pi ** (form.n / 2.0) / cmath.sqrt(det)


def _isserlis(indices: tuple[int, ...], cov: np.ndarray) -> complex:
    """E[x_{i1} ... x_{i2m}] for a centered Gaussian via recursive pairing."""
    if not indices:
        return 1.0 + 0j
    first, rest = indices[0], indices[1:]
    total = 0j
    for t in range(len(rest)):
        total += cov[first, rest[t]] * _isserlis(rest[:t] + rest[t + 1 :], cov)
    return total


def gaussian_moment(form: GaussianForm, j) -> complex:
    """Closed-form moment int x^j exp(x^T A x) dx over the real axes.

    Odd total degree gives exactly zero by symmetry. Even moments are
    Z * E[x^j] with E taken under the Gaussian of covariance -A^{-1}/2
    (Wick/Isserlis pairing).
    """
    j = tuple(int(e) for e in j)
    if len(j) != form.n:
        raise InputError(f"moment index of length {len(j)}, expected {form.n}")
    if any(e < 0 for e in j):
        raise InputError("moment index entries must be nonnegative")
    if sum(j) % 2 == 1:
        return 0j
    cov = -0.5 * np.linalg.inv(form.array())
    flat: list[int] = []
    for var, e in enumerate(j):
        flat.extend([var] * e)
    return gaussian_Z(form) * _isserlis(tuple(flat), cov)


def monomial_Z(m: int, a: complex) -> complex:
    """int_R exp(-a x^(2m)) dx = Gamma(1/(2m)) a^(-1/(2m)) / m for Re a > 0."""
    return monomial_moment(m, a, 0)


def monomial_moment(m: int, a: complex, p: int = 0) -> complex:
    """int_R x^p exp(-a x^(2m)) dx; zero for odd p, Gamma formula for even p."""
    if not isinstance(m, int) or m < 1:
        raise InputError(f"monomial half-degree m must be a positive integer, got {m!r}")
    if not isinstance(p, int) or p < 0:
        raise InputError(f"moment power must be a nonnegative integer, got {p!r}")
    a = complex(a)
    if a.real <= 0.0:
        raise InputError("decay coefficient must have positive real part")
    if p % 2 == 1:
        return 0j
    s = (p + 1) / (2.0 * m)
    return math.gamma(s) * a ** (-s) / m
