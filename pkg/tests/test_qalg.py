"""Coefficient ring tests: exact Laurent arithmetic, quantum integers,
permutation words."""

from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qspider.qalg import (
    ArithmeticMismatch,
    InexactDivision,
    LaurentPoly,
    RankContext,
    identity_perm,
    perm_compose,
    perm_inverse,
    perm_length,
    positive_braid_word,
    qbinom,
    qfact,
    qint,
    transposition_perm,
)

N2 = RankContext(2)
N3 = RankContext(3)


def poly(ctx: RankContext, terms: dict[int, int]) -> LaurentPoly:
    return LaurentPoly(terms, ctx.exponent_denominator)


# -- construction and lattice discipline --------------------------------------


def test_rank_context_rejects_small_n():
    with pytest.raises(ValueError):
        RankContext(1)


def test_exponent_denominator_is_2n():
    assert N2.exponent_denominator == 4
    assert RankContext(5).exponent_denominator == 10


def test_cross_lattice_arithmetic_is_an_error():
    with pytest.raises(ArithmeticMismatch):
        N2.one() + N3.one()
    with pytest.raises(ArithmeticMismatch):
        qint(N2, 2) * qint(N3, 2)


def test_q_power_respects_lattice():
    assert N3.q_power(-1, 3) == N3.monomial(-2)
    assert N2.q_power(1, 2) == N2.monomial(2)
    with pytest.raises(ValueError):
        N2.q_power(1, 3)


def test_polys_are_immutable():
    p = qint(N2, 2)
    with pytest.raises(AttributeError):
        p.denom = 6


# -- rendering: bit-exact golden contract --------------------------------------


def test_render_quantum_two():
    assert qint(N2, 2).render() == "q^-1 + q"


def test_render_circle_value_rank_three():
    assert qint(N3, 3).render() == "q^-2 + 1 + q^2"


def test_render_fractional_exponent():
    assert (2 + N2.q_power(1, 2)).render() == "2 + q^1/2"


def test_render_zero_and_signs():
    assert N2.zero().render() == "0"
    assert (-qint(N2, 2)).render() == "-q^-1 - q"
    assert (qint(N2, 2) - 3).render() == "q^-1 - 3 + q"


def test_render_coefficient_next_to_power():
    p = poly(N2, {-8: 1, -4: 2, 0: 3, 4: 2, 8: 1})
    assert p.render() == "q^-2 + 2*q^-1 + 3 + 2*q + q^2"


def test_json_round_trip():
    p = qbinom(N3, 4, 2) - 7 * N3.q_power(1, 3)
    assert LaurentPoly.from_json(p.to_json()) == p
    assert all(isinstance(k, str) for k in p.to_json()["coeffs"])


# -- arithmetic ---------------------------------------------------------------


def test_exact_div_of_factorials():
    assert qfact(N3, 4).exact_div(qfact(N3, 2)) == qint(N3, 3) * qint(N3, 4)


def test_exact_div_detects_remainder():
    with pytest.raises(InexactDivision):
        (N2.monomial(4) + 1).exact_div(N2.monomial(4) - 1)


def test_exact_div_detects_rational_coefficients():
    with pytest.raises(InexactDivision):
        qint(N2, 2).exact_div(2 * N2.one())


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        N2.one().exact_div(N2.zero())


small_coeff = st.integers(min_value=-9, max_value=9)
small_units = st.integers(min_value=-12, max_value=12)


@st.composite
def rank3_polys(draw):
    n_terms = draw(st.integers(min_value=0, max_value=5))
    terms = {}
    for _ in range(n_terms):
        terms[draw(small_units)] = draw(small_coeff)
    return LaurentPoly(terms, N3.exponent_denominator)


@given(rank3_polys(), rank3_polys(), rank3_polys())
@settings(max_examples=120)
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + N3.zero() == a
    assert a * N3.one() == a


@given(rank3_polys(), rank3_polys())
@settings(max_examples=120)
def test_exact_div_inverts_multiplication(a, b):
    if b.is_zero():
        return
    assert (a * b).exact_div(b) == a


@given(rank3_polys(), st.integers(min_value=0, max_value=4))
@settings(max_examples=60)
def test_power_matches_repeated_product(a, k):
    expected = N3.one()
    for _ in range(k):
        expected = expected * a
    assert a**k == expected


# -- quantum integers ----------------------------------------------------------


def test_quantum_integer_values():
    assert qint(N2, 0).is_zero()
    assert qint(N2, 1).is_one()
    assert qint(N2, 2) == N2.q_power(-1) + N2.q_power(1)
    assert qint(N2, -3) == -qint(N2, 3)


def test_quantum_integers_satisfy_three_term_recursion():
    # [2][j] = [j+1] + [j-1], hence [2][j] - [j+1] = [j-1]
    for j in range(2, 21):
        assert qint(N3, 2) * qint(N3, j) - qint(N3, j + 1) == qint(N3, j - 1)


def test_factorial_base_cases():
    assert qfact(N2, 0).is_one()
    assert qfact(N2, 1).is_one()
    assert qfact(N2, 2) == qint(N2, 2)
    with pytest.raises(ValueError):
        qfact(N2, -1)


def test_qbinom_edges_and_symmetry():
    assert qbinom(N3, 4, 0).is_one()
    assert qbinom(N3, 4, 4).is_one()
    assert qbinom(N3, 4, 5).is_zero()
    assert qbinom(N3, 4, -1).is_zero()
    assert qbinom(N3, 2, 1) == qint(N3, 2)
    for m in range(8):
        for k in range(m + 1):
            assert qbinom(N3, m, k) == qbinom(N3, m, m - k)


def test_qbinom_is_bar_invariant():
    # coefficients symmetric under q -> 1/q
    for m in range(1, 9):
        for k in range(m + 1):
            p = qbinom(N3, m, k)
            assert p == LaurentPoly({-e: c for e, c in p.terms.items()}, p.denom)


def test_q_pascal_up_to_twelve():
    d = N3.exponent_denominator
    for m in range(2, 13):
        for k in range(1, m):
            lhs = qbinom(N3, m, k)
            rhs = N3.monomial(k * d) * qbinom(N3, m - 1, k) + N3.monomial(
                (k - m) * d
            ) * qbinom(N3, m - 1, k - 1)
            assert lhs == rhs


def test_negative_top_binomial_reflection():
    for j in range(1, 5):
        for t in range(0, 5):
            sign = -1 if t % 2 else 1
            assert qbinom(N3, -j, t) == sign * qbinom(N3, j + t - 1, t)


# -- permutations ----------------------------------------------------------------


def test_perm_basics():
    p = (2, 0, 1)
    assert perm_length(p) == 2
    assert perm_compose(p, perm_inverse(p)) == identity_perm(3)
    assert perm_inverse(p) == (1, 2, 0)


def test_braid_words_exhaustive_s4():
    for p in itertools.permutations(range(4)):
        word = positive_braid_word(p)
        assert len(word) == perm_length(p)
        cur = identity_perm(4)
        for i in word:
            cur = perm_compose(cur, transposition_perm(4, i))
        assert cur == p


def test_braid_words_random_s7():
    rng = random.Random(11)
    for _ in range(25):
        p = tuple(rng.sample(range(7), 7))
        word = positive_braid_word(p)
        assert len(word) == perm_length(p)
        cur = identity_perm(7)
        for i in word:
            cur = perm_compose(cur, transposition_perm(7, i))
        assert cur == p
