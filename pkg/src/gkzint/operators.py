"""The hypergeometric system's operators as plain data.

Two families act on the integral Z(c) = int exp(S(x)) dx as a function of
the coefficients:

  * toric pairs: for a kernel lattice vector (n_k), the product of
    d/dc_k repeated n_k times over the positive part equals the analogous
    product over the negative part. Under differentiation under the
    integral sign both sides are the moment integral indexed by the sum of
    the exponents involved, and those sums agree exactly because the vector
    lies in the kernel of the exponent matrix.
  * Euler operators: sum_k k_i c_k dZ/dc_k = -Z for each axis i, the
    integration-by-parts identity in the i-th variable.

Operators are represented as index multisets and weight maps rather than
callables so they can be serialized into reports and checked exactly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from .support import CoefficientVector, ExponentIndex, InputError, PolynomialSupport

if TYPE_CHECKING:  # pragma: no cover
    from .integrator import MomentTable

Multiset = tuple[tuple[ExponentIndex, int], ...]  # (exponent, multiplicity), sorted


@dataclass(frozen=True)
class MomentSymbol:
    """Symbolic moment M_j = int x^j exp(S(x)) dx; the zero index is Z."""

    index: tuple[int, ...]

    @property
    def is_partition_function(self) -> bool:
        return not any(self.index)


@dataclass(frozen=True)
class ToricPair:
    """Positive/negative split of a kernel lattice vector.

    ``lhs`` collects exponents with positive multiplicity, ``rhs`` those
    with negative multiplicity (as positive counts). ``lhs_index`` and
    ``rhs_index`` are the moment indices of the two derivative products;
    they are equal for every genuine kernel vector.
    """

    lattice_vector: tuple[int, ...]
    lhs: Multiset
    rhs: Multiset
    lhs_index: tuple[int, ...]
    rhs_index: tuple[int, ...]

    @property
    def index_equal(self) -> bool:
        return self.lhs_index == self.rhs_index

    @property
    def lhs_order(self) -> int:
        return sum(m for _, m in self.lhs)

    @property
    def rhs_order(self) -> int:
        return sum(m for _, m in self.rhs)

    def lhs_expanded(self) -> list[ExponentIndex]:
        return [k for k, m in self.lhs for _ in range(m)]

    def rhs_expanded(self) -> list[ExponentIndex]:
        return [k for k, m in self.rhs for _ in range(m)]

    def to_document(self) -> dict:
        return {
            "v": list(self.lattice_vector),
            "lhs": [list(k) for k in self.lhs_expanded()],
            "rhs": [list(k) for k in self.rhs_expanded()],
            "moment_index": list(self.lhs_index),
        }


@dataclass(frozen=True)
class EulerOperator:
    """sum_k (weight_k) c_k d/dc_k acting on Z, with right-hand side rhs_scalar * Z."""

    axis: int  # 1-based
    exponents: tuple[ExponentIndex, ...]
    weights: tuple[int, ...]
    rhs_scalar: int = -1

    def weight_map(self) -> dict[ExponentIndex, int]:
        return dict(zip(self.exponents, self.weights))

    def to_document(self) -> dict:
        return {
            "axis": self.axis,
            "weights": {",".join(map(str, k)): w for k, w in zip(self.exponents, self.weights)},
            "rhs": self.rhs_scalar,
        }


def _normalize_multiset(derivs) -> Counter:
    if isinstance(derivs, Mapping):
        counted = Counter({tuple(k): int(m) for k, m in derivs.items() if m})
    else:
        counted = Counter(tuple(k) for k in derivs)
    for k, m in counted.items():
        if m < 0:
            raise InputError(f"negative multiplicity for {k}")
    return counted


def moment_index(derivs, n: int) -> tuple[int, ...]:
    """Sum of a multiset of exponent vectors; the empty multiset gives 0.

    This is the moment index reached by applying the corresponding
    coefficient derivatives to Z: each d/dc_k inserts a factor x^k under
    the integral.
    """
    total = [0] * n
    for k, m in _normalize_multiset(derivs).items():
        if len(k) != n:
            raise InputError(f"exponent {k} has length {len(k)}, expected {n}")
        for j in range(n):
            total[j] += m * k[j]
    return tuple(total)


def toric_pair(support: PolynomialSupport, v) -> ToricPair:
    """Split a nonzero kernel lattice vector into its toric relation.

    ``v`` is indexed by the support's canonical exponent order. Vectors
    outside the kernel of the exponent matrix are rejected; the kernel is
    checked directly (exact integer arithmetic), which is equivalent to
    lattice membership because the kernel lattice is saturated.
    """
    v = tuple(int(x) for x in v)
    if len(v) != support.size:
        raise InputError(f"lattice vector of length {len(v)}, expected {support.size}")
    if not any(v):
        raise InputError("the zero vector induces no toric relation")
    sums = [0] * support.n
    for nk, k in zip(v, support.exponents):
        for j in range(support.n):
            sums[j] += nk * k[j]
    if any(sums):
        raise InputError(f"vector {list(v)} is not in the kernel lattice")
    return _toric_pair_unchecked(support, v)


def _toric_pair_unchecked(support: PolynomialSupport, v) -> ToricPair:
    """Build the split without the kernel check (verifier mutation tests)."""
    v = tuple(int(x) for x in v)
    lhs = tuple((k, nk) for k, nk in zip(support.exponents, v) if nk > 0)
    rhs = tuple((k, -nk) for k, nk in zip(support.exponents, v) if nk < 0)
    return ToricPair(
        lattice_vector=v,
        lhs=lhs,
        rhs=rhs,
        lhs_index=moment_index(dict(lhs), support.n),
        rhs_index=moment_index(dict(rhs), support.n),
    )


def euler_operator(support: PolynomialSupport, axis: int) -> EulerOperator:
    """The axis-th Euler operator: weight k_i on each exponent, rhs -1."""
    if not 1 <= axis <= support.n:
        raise InputError(f"axis {axis} out of range 1..{support.n}")
    return EulerOperator(
        axis=axis,
        exponents=support.exponents,
        weights=tuple(k[axis - 1] for k in support.exponents),
        rhs_scalar=-1,
    )


def euler_residual(
    op: EulerOperator, coeffs: CoefficientVector, moments: "MomentTable"
) -> complex:
    """r_i = sum_k k_i c_k M_k - rhs_scalar * Z (zero exactly, analytically).

    ``moments`` must contain M_k for every exponent with nonzero weight and
    the zero index (Z itself); a missing entry raises KeyError.
    """
    if op.exponents != coeffs.support.exponents:
        raise InputError("operator and coefficients disagree on the support")
    n = coeffs.support.n
    total = 0j
    for k, w, c in zip(op.exponents, op.weights, coeffs.values):
        if w:
            total += w * c * moments.value(k)
    z = moments.value((0,) * n)
    return total - op.rhs_scalar * z


def euler_residual_scale(
    op: EulerOperator, coeffs: CoefficientVector, moments: "MomentTable"
) -> float:
    """Absolute-value budget sum_k |k_i c_k M_k| + |Z| for honest residual scaling."""
    n = coeffs.support.n
    scale = 0.0
    for k, w, c in zip(op.exponents, op.weights, coeffs.values):
        if w:
            scale += abs(w * c * moments.value(k))
    return scale + abs(moments.value((0,) * n))


def multiset_from_expanded(derivs: Iterable[ExponentIndex]) -> Counter:
    """Counter view of an iterable of exponents with repetition."""
    return _normalize_multiset(derivs)


def total_order(derivs) -> int:
    return int(sum(_normalize_multiset(derivs).values()))


def as_index_array(index: Iterable[int]) -> np.ndarray:
    return np.asarray(tuple(int(i) for i in index), dtype=np.int64)
