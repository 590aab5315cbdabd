import math
from fractions import Fraction

import pytest

from gkzint import (
    InputError,
    euler_operator,
    euler_residual,
    moment_index,
    toric_pair,
)
from gkzint.integrator import Contour, IntegralResult, MomentTable
from gkzint.operators import _toric_pair_unchecked

from conftest import poly


def _table(coeffs, entries):
    contour = Contour.real_axes(coeffs.support.n)
    table = MomentTable(coeffs=coeffs, contour=contour, tol=1e-9)
    for k, v in entries.items():
        table.entries[tuple(k)] = IntegralResult(complex(v), 0.0, True, 0)
    return table


def test_toric_pair_full_quadratic():
    s, _ = poly(2, ((2, 0), -1.0), ((1, 1), 0.3), ((0, 2), -1.0))
    # canonical order ((0,2),(1,1),(2,0))
    pair = toric_pair(s, (1, -2, 1))
    assert dict(pair.lhs) == {(0, 2): 1, (2, 0): 1}
    assert dict(pair.rhs) == {(1, 1): 2}
    assert pair.lhs_index == pair.rhs_index == (2, 2)


def test_toric_pair_unequal_orders():
    s, _ = poly(1, ((1,), 1.0), ((2,), -1.0))
    pair = toric_pair(s, (2, -1))
    assert dict(pair.lhs) == {(1,): 2}
    assert dict(pair.rhs) == {(2,): 1}
    assert pair.lhs_index == pair.rhs_index == (2,)
    assert pair.lhs_order == 2 and pair.rhs_order == 1


def test_toric_pair_rejects_zero_and_non_kernel():
    s, _ = poly(2, ((2, 0), -1.0), ((1, 1), 0.3), ((0, 2), -1.0))
    with pytest.raises(InputError, match="zero"):
        toric_pair(s, (0, 0, 0))
    with pytest.raises(InputError, match="kernel"):
        toric_pair(s, (1, -2, 0))
    with pytest.raises(InputError, match="length"):
        toric_pair(s, (1, -2))


def test_unchecked_pair_detects_corruption():
    s, _ = poly(2, ((2, 0), -1.0), ((1, 1), 0.3), ((0, 2), -1.0))
    bad = _toric_pair_unchecked(s, (1, -1, 0))
    assert not bad.index_equal


def test_moment_index():
    assert moment_index([], 2) == (0, 0)
    assert moment_index([(2, 0), (0, 2)], 2) == (2, 2)
    assert moment_index([(1,), (1,)], 1) == moment_index([(2,)], 1) == (2,)
    assert moment_index({(1, 1): 2}, 2) == (2, 2)
    with pytest.raises(InputError):
        moment_index([(1, 2, 3)], 2)


def test_euler_operator_examples():
    s, _ = poly(1, ((2,), -1.0))
    op = euler_operator(s, 1)
    assert op.weights == (2,) and op.rhs_scalar == -1

    s2, _ = poly(1, ((0,), 1.0), ((4,), -1.0))
    op2 = euler_operator(s2, 1)
    assert op2.weight_map() == {(0,): 0, (4,): 4}

    s3, _ = poly(2, ((2, 0), -1.0), ((1, 1), 0.3), ((0, 2), -1.0))
    op3 = euler_operator(s3, 2)
    assert op3.weight_map() == {(0, 2): 2, (1, 1): 1, (2, 0): 0}

    with pytest.raises(InputError):
        euler_operator(s3, 3)
    with pytest.raises(InputError):
        euler_operator(s3, 0)


def test_euler_residual_gaussian_closed_form():
    s, c = poly(1, ((2,), -1.0))
    table = _table(c, {(0,): math.sqrt(math.pi), (2,): math.sqrt(math.pi) / 2})
    r = euler_residual(euler_operator(s, 1), c, table)
    assert abs(r) < 1e-15


def test_euler_residual_quartic_closed_form():
    s, c = poly(1, ((4,), -1.0))
    z = math.gamma(0.25) / 2
    m4 = math.gamma(0.25) / 8
    table = _table(c, {(0,): z, (4,): m4})
    r = euler_residual(euler_operator(s, 1), c, table)
    assert abs(r) < 1e-15


def test_euler_residual_missing_moment():
    s, c = poly(1, ((2,), -1.0))
    table = _table(c, {(0,): math.sqrt(math.pi)})
    with pytest.raises(KeyError):
        euler_residual(euler_operator(s, 1), c, table)


def test_euler_residual_degenerate_constant_only_weights():
    # A support holding only the constant term has all-zero Euler weights;
    # the residual then equals Z and is caught upstream by the spanning
    # check. Verified here at the operator level.
    s, c = poly(1, ((0,), 1.0))
    table = _table(c, {(0,): 2.5})
    r = euler_residual(euler_operator(s, 1), c, table)
    assert r == pytest.approx(2.5)


def test_euler_residual_linearity(rng):
    # Residual of a rational combination of coordinate rows equals the same
    # combination of per-axis residuals (algebraic identity, synthetic data).
    s, c = poly(2, ((2, 0), -0.7 + 0.1j), ((1, 1), 0.4), ((0, 2), -1.3))
    moments = {
        (0, 0): 1.7 - 0.2j,
        (2, 0): 0.4 + 0.1j,
        (1, 1): -0.2 + 0.3j,
        (0, 2): 0.9,
    }
    table = _table(c, moments)
    ops = [euler_operator(s, i) for i in (1, 2)]
    residuals = [euler_residual(op, c, table) for op in ops]
    for _ in range(10):
        q = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(2)]
        combo = 0j
        for k in s.exponents:
            weight = sum(float(qi) * op.weight_map()[k] for qi, op in zip(q, ops))
            combo += weight * c.get(k) * moments[k]
        combo += float(sum(q)) * moments[(0, 0)]  # rhs <a, alpha> = -sum(q)
        expected = sum(float(qi) * r for qi, r in zip(q, residuals))
        assert combo == pytest.approx(expected, abs=1e-12)


def test_operator_serialization_shapes():
    s, _ = poly(1, ((1,), 1.0), ((2,), -1.0))
    pair = toric_pair(s, (2, -1))
    doc = pair.to_document()
    assert doc == {
        "v": [2, -1],
        "lhs": [[1], [1]],
        "rhs": [[2]],
        "moment_index": [2],
    }
    op = euler_operator(s, 1)
    assert op.to_document() == {"axis": 1, "weights": {"1": 1, "2": 2}, "rhs": -1}
