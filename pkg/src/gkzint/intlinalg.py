"""Exact integer linear algebra on small dense matrices.

Everything here runs on plain Python ints (arbitrary precision), so all
results are exact. Matrices are lists of lists; sizes stay tiny (tens of
rows), so no attempt is made to be clever about performance.
"""

from __future__ import annotations

from typing import Sequence

IntMatrix = list[list[int]]


def row_hermite_form(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style Hermite normal form via unimodular row operations.

    The result is row-equivalent to ``rows`` over the integers and is in
    echelon form with positive pivots; entries above each pivot are reduced
    into ``[0, pivot)``. Zero rows collect at the bottom. With this
    normalization the nonzero rows are the unique HNF basis of the row
    lattice, so any two inputs spanning the same lattice give identical
    output (https://en.wikipedia.org/wiki/Hermite_normal_form).
    """
    m = [[int(x) for x in row] for row in rows]
    if not m:
        return []
    nrows, ncols = len(m), len(m[0])
    if any(len(row) != ncols for row in m):
        raise ValueError("ragged matrix")
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        # Euclidean elimination below row r in column c. Repeatedly moves a
        # minimal-|entry| row into position r and reduces the others mod it;
        # terminates because the minimal |entry| strictly decreases.
        while True:
            piv = None
            for i in range(r, nrows):
                if m[i][c] != 0 and (piv is None or abs(m[i][c]) < abs(m[piv][c])):
                    piv = i
            if piv is None:
                break
            if piv != r:
                m[r], m[piv] = m[piv], m[r]
            p = m[r][c]
            clear = True
            for i in range(r + 1, nrows):
                if m[i][c] != 0:
                    q = m[i][c] // p
                    m[i] = [a - q * b for a, b in zip(m[i], m[r])]
                    if m[i][c] != 0:
                        clear = False
            if clear:
                break
        if m[r][c] != 0:
            if m[r][c] < 0:
                m[r] = [-a for a in m[r]]
            p = m[r][c]
            # Reduce entries above the pivot into [0, p). Rows above have
            # zeros in this row's earlier pivot columns, so earlier
            # normalizations survive.
            for i in range(r):
                q = m[i][c] // p
                if q:
                    m[i] = [a - q * b for a, b in zip(m[i], m[r])]
            r += 1
    return m


def integer_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank over the rationals (= rank over Z), computed exactly."""
    h = row_hermite_form(rows)
    return sum(1 for row in h if any(row))


def integer_kernel(rows: Sequence[Sequence[int]]) -> IntMatrix:
    """Canonical basis of the full integer kernel lattice {v : rows @ v = 0}.

    Row-reduces the augmented matrix [rows^T | I]. Augmented rows whose left
    block vanished carry, in their right block, kernel vectors; because only
    unimodular row operations were used, those vectors generate every integer
    kernel vector (the kernel lattice is saturated by definition, and the
    invertibility of the accumulated transform transfers that to the basis).
    The returned rows are in Hermite normal form of the kernel lattice, hence
    canonical: pivots positive, sorted by pivot position.
    """
    if not rows:
        return []
    nr, nc = len(rows), len(rows[0])
    aug = [
        [rows[i][j] for i in range(nr)] + [1 if t == j else 0 for t in range(nc)]
        for j in range(nc)
    ]
    h = row_hermite_form(aug)
    return [row[nr:] for row in h if not any(row[:nr])]


def reduce_against_hnf(hnf_rows: Sequence[Sequence[int]], v: Sequence[int]) -> list[int]:
    """Residue of ``v`` after subtracting integer multiples of HNF rows.

    ``hnf_rows`` must be in row echelon form with pivots in increasing column
    position (as produced by :func:`row_hermite_form`). The residue is zero
    iff ``v`` lies in the integer row span.
    """
    res = [int(x) for x in v]
    for row in hnf_rows:
        p = next((i for i, x in enumerate(row) if x != 0), None)
        if p is None:
            continue
        q = res[p] // row[p]
        if q:
            res = [a - q * b for a, b in zip(res, row)]
    return res


def in_row_span(basis_rows: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    """True iff ``v`` is an integer combination of ``basis_rows`` (exact)."""
    if not basis_rows:
        return not any(int(x) for x in v)
    h = [row for row in row_hermite_form(basis_rows) if any(row)]
    return not any(reduce_against_hnf(h, v))
