import pytest

from gkzint import (
    CoefficientVector,
    InputError,
    PolynomialSupport,
    check_spanning,
    parse_polynomial,
    serialize_polynomial,
)

from conftest import poly


def test_parse_single_monomial():
    support, coeffs = parse_polynomial({"n": 1, "terms": [{"k": [2], "c": [-1, 0]}]})
    assert support.n == 1
    assert support.exponents == ((2,),)
    assert coeffs.get((2,)) == -1.0


def test_parse_two_variable_gaussian():
    support, coeffs = parse_polynomial(
        {"n": 2, "terms": [{"k": [2, 0], "c": [-1, 0]}, {"k": [0, 2], "c": [-1, 0]}]}
    )
    assert set(support.exponents) == {(2, 0), (0, 2)}
    assert coeffs.get((2, 0)) == -1.0
    assert coeffs.get((0, 2)) == -1.0


def test_parse_accepts_json_text():
    support, _ = parse_polynomial('{"n": 1, "terms": [{"k": [2], "c": [-1.5, 0.25]}]}')
    assert support.exponents == ((2,),)


def test_duplicate_exponent_rejected():
    with pytest.raises(InputError, match="duplicate"):
        parse_polynomial(
            {"n": 1, "terms": [{"k": [2], "c": [1, 0]}, {"k": [2], "c": [1, 0]}]}
        )


def test_negative_exponent_rejected():
    with pytest.raises(InputError, match="negative"):
        parse_polynomial({"n": 1, "terms": [{"k": [-1], "c": [1, 0]}]})


def test_empty_support_rejected():
    with pytest.raises(InputError):
        parse_polynomial({"n": 1, "terms": []})


@pytest.mark.parametrize(
    "doc",
    [
        "not json at all {",
        {"terms": [{"k": [1], "c": [1, 0]}]},
        {"n": 0, "terms": [{"k": [], "c": [1, 0]}]},
        {"n": 1, "terms": [{"k": [1.5], "c": [1, 0]}]},
        {"n": 1, "terms": [{"k": [1], "c": [1]}]},
        {"n": 1, "terms": [{"k": [1], "c": "x"}]},
        {"n": 2, "terms": [{"k": [1], "c": [1, 0]}]},
        {"n": 1, "terms": [{"k": [1], "c": [1, 0], "extra": 1}]},
        {"n": 1, "terms": [{"k": [1], "c": [1, 0]}], "junk": True},
    ],
)
def test_malformed_documents_rejected(doc):
    with pytest.raises(InputError):
        parse_polynomial(doc)


def test_round_trip_identity(rng):
    for _ in range(25):
        n = rng.choice([1, 2, 3])
        exps = set()
        while len(exps) < rng.randint(1, 6):
            exps.add(tuple(rng.randint(0, 5) for _ in range(n)))
        doc = {
            "n": n,
            "terms": [
                {"k": list(k), "c": [rng.uniform(-2, 2), rng.uniform(-2, 2)]}
                for k in exps
            ],
        }
        s1, c1 = parse_polynomial(doc)
        s2, c2 = parse_polynomial(serialize_polynomial(c1))
        assert s1 == s2
        assert c1.values == c2.values


def test_canonical_order_is_input_independent(rng):
    terms = [((2, 0), -1.0), ((1, 1), 0.5), ((0, 2), -2.0), ((0, 0), 0.25)]
    s1, c1 = poly(2, *terms)
    shuffled = terms[:]
    rng.shuffle(shuffled)
    s2, c2 = poly(2, *shuffled)
    assert s1.exponents == s2.exponents
    assert c1.values == c2.values
    # graded lex: degree first, then lex
    assert s1.exponents == ((0, 0), (0, 2), (1, 1), (2, 0))


def test_spanning_examples():
    s, _ = poly(1, ((2,), -1.0))
    assert check_spanning(s)
    s, _ = poly(2, ((1, 1), 1.0))
    assert not check_spanning(s)
    s, _ = poly(2, ((2, 0), -1.0), ((1, 1), 1.0), ((0, 2), -1.0))
    assert check_spanning(s)


def test_spanning_permutation_invariant(rng):
    base = [((2, 0, 0), 1.0), ((0, 3, 0), 1.0), ((1, 1, 1), 1.0), ((0, 0, 2), 1.0)]
    s1, _ = poly(3, *base)
    for _ in range(5):
        shuffled = base[:]
        rng.shuffle(shuffled)
        s2, _ = poly(3, *shuffled)
        assert check_spanning(s1) == check_spanning(s2)


def test_spanning_unaffected_by_constant_term():
    s1, _ = poly(2, ((2, 0), -1.0), ((0, 2), -1.0))
    s2, _ = poly(2, ((2, 0), -1.0), ((0, 2), -1.0), ((0, 0), 5.0))
    assert check_spanning(s1) == check_spanning(s2) is True
    s3, _ = poly(2, ((1, 1), 1.0))
    s4, _ = poly(2, ((1, 1), 1.0), ((0, 0), 1.0))
    assert check_spanning(s3) == check_spanning(s4) is False


def test_constant_term_flagged():
    s, _ = poly(1, ((0,), 1.0), ((2,), -1.0))
    assert s.has_constant_term
    s2, _ = poly(1, ((2,), -1.0))
    assert not s2.has_constant_term


def test_exponent_matrix_columns_are_exponents():
    s, _ = poly(2, ((2, 0), -1.0), ((1, 1), 0.3), ((0, 2), -1.0))
    m = s.exponent_matrix()
    assert m.shape == (2, 3)
    for col, k in enumerate(s.exponents):
        assert tuple(m[:, col]) == k


def test_coefficient_vector_domain_mismatch():
    s, _ = poly(2, ((2, 0), -1.0), ((0, 2), -1.0))
    with pytest.raises(InputError):
        CoefficientVector(s, (1.0,))
    with pytest.raises(InputError):
        CoefficientVector.from_map(s, {(2, 0): 1.0})


def test_with_offsets_is_functional():
    s, c = poly(1, ((2,), -1.0))
    shifted = c.with_offsets({(2,): 0.5})
    assert shifted.get((2,)) == -0.5
    assert c.get((2,)) == -1.0


def test_support_rejects_bad_dimension():
    with pytest.raises(InputError):
        PolynomialSupport(0, ((0,),))
    with pytest.raises(InputError):
        PolynomialSupport(2, ((1,),))
