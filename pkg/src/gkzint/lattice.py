"""Combinatorial data attached to a polynomial support.

From the exponent matrix of a support this module derives:

  * the full integer kernel lattice (vectors (n_k) with sum n_k * k = 0),
    which indexes the toric relations of the hypergeometric system;
  * the n coordinate rows a_k = k_i, which index the Euler relations;
  * the parameter vector (-1, ..., -1) fixing the Euler right-hand sides.

The kernel basis is saturated: every integer kernel vector is an integer
combination of the basis rows. That matters because the toric relations are
indexed by all lattice vectors, not just a finite-index sublattice.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import intlinalg
from .support import ExponentIndex, InputError, PolynomialSupport, check_spanning


@dataclass(frozen=True)
class LatticeBasis:
    """Integer basis of the kernel lattice of an exponent matrix.

    Rows are stored in Hermite normal form: first nonzero entry of each row
    positive, rows sorted by pivot position. The basis is therefore a
    canonical function of the support alone.
    """

    width: int
    vectors: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        for v in self.vectors:
            if len(v) != self.width:
                raise InputError(
                    f"basis row of length {len(v)} in a lattice of width {self.width}"
                )

    def __len__(self) -> int:
        return len(self.vectors)

    def to_document(self) -> list[list[int]]:
        return [list(v) for v in self.vectors]


@dataclass(frozen=True)
class EulerRow:
    """Weights a_k = k_i of the i-th coordinate functional on the support."""

    axis: int  # 1-based
    exponents: tuple[ExponentIndex, ...]
    weights: tuple[int, ...]

    def weight_map(self) -> dict[ExponentIndex, int]:
        return dict(zip(self.exponents, self.weights))


@dataclass(frozen=True)
class AlphaParameter:
    """The hypergeometric parameter (-1, ..., -1)."""

    entries: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(e != -1 for e in self.entries):
            raise InputError("every parameter entry must equal -1")

    @classmethod
    def for_dimension(cls, n: int) -> "AlphaParameter":
        return cls((-1,) * n)

    def pairing(self, row: EulerRow) -> int:
        """<a, alpha> for the coordinate functional a = e_i, which is -1."""
        return self.entries[row.axis - 1]


def kernel_basis(support: PolynomialSupport) -> LatticeBasis:
    """Saturated integer kernel basis of the support's exponent matrix.

    Requires the spanning assumption (exponent matrix of rank n); the basis
    then has exactly |K| - n rows. Computed by exact integer normal-form
    reduction, never floating point.
    """
    if not check_spanning(support):
        raise InputError(
            "exponents do not span the ambient space; the kernel lattice is "
            "only defined under the spanning assumption"
        )
    rows = [list(map(int, row)) for row in support.exponent_matrix()]
    kernel = intlinalg.integer_kernel(rows)
    basis = LatticeBasis(support.size, tuple(tuple(v) for v in kernel))
    assert len(basis) == support.size - support.n
    return basis


def euler_rows(support: PolynomialSupport) -> list[EulerRow]:
    """The n coordinate rows: row i assigns weight k_i to each exponent k."""
    return [
        EulerRow(
            axis=i + 1,
            exponents=support.exponents,
            weights=tuple(k[i] for k in support.exponents),
        )
        for i in range(support.n)
    ]


def random_lattice_vector(
    basis: LatticeBasis, bound: int, seed: int
) -> tuple[int, ...]:
    """Deterministic random integer combination of basis rows, never zero.

    Combination coefficients are drawn uniformly from [-bound, bound]; the
    all-zero draw is rejected and redrawn, so the result is a nonzero lattice
    vector. Fixed seed gives a fixed vector.
    """
    if len(basis) == 0:
        raise InputError("empty lattice basis")
    if bound < 1:
        raise InputError("bound must be a positive integer")
    rng = random.Random(seed)
    while True:
        coeffs = [rng.randint(-bound, bound) for _ in range(len(basis))]
        if any(coeffs):
            break
    width = basis.width
    out = [0] * width
    for c, row in zip(coeffs, basis.vectors):
        if c:
            for j in range(width):
                out[j] += c * row[j]
    return tuple(out)


def lattice_membership(basis: LatticeBasis, v) -> bool:
    """True iff ``v`` is an integer combination of the basis rows (exact)."""
    v = [int(x) for x in v]
    if len(v) != basis.width:
        raise InputError(f"vector of length {len(v)} in a lattice of width {basis.width}")
    return intlinalg.in_row_span([list(r) for r in basis.vectors], v)
