"""Representation-matrix oracle tests.

Every identity the rewrite engine relies on is pinned here as an exact
matrix fact at n = 2, 3.  Values come out of the oracle itself; the tests
freeze them so a gauge change cannot drift silently.
"""

from __future__ import annotations

import itertools

import pytest

from qspider.diagram import (
    CKM,
    DOWN,
    MOY,
    SIKORA,
    UP,
    DiagramWord,
    LinCombo,
    cap,
    crossing,
    cup,
    merge,
    sink,
    source,
    split,
    tag,
)
from qspider.oracle import (
    ORACLE_MAX_RANK,
    OracleRangeError,
    RepMatrix,
    combos_equal,
    gen_matrix,
    strand_dim,
    subsets,
    word_matrix,
)
from qspider.qalg import (
    RankContext,
    perm_length,
    positive_braid_word,
    qbinom,
    qfact,
)

N2 = RankContext(2)
N3 = RankContext(3)


def W(n, dom, layers, category=MOY):
    return DiagramWord(category, n, tuple(dom), tuple(layers))


def ident_matrix(n, dom, category=MOY):
    return word_matrix(W(n, dom, (), category))


def is_scalar_multiple(n, wd, value):
    return word_matrix(wd) == ident_matrix(n, wd.dom, wd.category).scale(value)


# -- pinned gauge entries ---------------------------------------------------


def test_merge_entries_pinned():
    m = gen_matrix(2, merge(1, 1))
    # e1 (x) e2 -> q^(0 - 1/2) e12 ; e2 (x) e1 -> q^(1 - 1/2) e12
    assert m.get(0, 1) == N2.q_power(-1, 2)
    assert m.get(0, 2) == N2.q_power(1, 2)
    assert m.get(0, 0).is_zero() and m.get(0, 3).is_zero()


def test_cup_entries_pinned():
    c = gen_matrix(2, cup(1, True))
    assert c.get(0, 0) == N2.q_power(-1, 2)  # S={1}, wt=1/2
    assert c.get(3, 0) == N2.q_power(1, 2)   # S={2}, wt=-1/2
    c2 = gen_matrix(2, cup(1, False))
    assert c2.get(0, 0) == N2.q_power(1, 2)


def test_split_is_transpose_of_merge():
    assert gen_matrix(3, split(1, 2)) == gen_matrix(3, merge(1, 2)).transpose()


def test_rank_cap():
    with pytest.raises(OracleRangeError):
        gen_matrix(ORACLE_MAX_RANK + 1, merge(1, 1))


# -- bubbles ------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("direction", [UP, DOWN])
def test_digon_values(n, direction):
    ctx = RankContext(n)
    for k in range(1, n):
        for l in range(1, n - k + 1):
            wd = W(n, ((k + l, direction),),
                   [(0, split(k, l, direction)), (0, merge(k, l, direction))])
            assert is_scalar_multiple(n, wd, qbinom(ctx, k + l, k))


@pytest.mark.parametrize("n", [2, 3])
def test_circle_values_all_orientations(n):
    ctx = RankContext(n)
    for k in range(1, n + 1):
        for flag in (True, False):
            loop = W(n, (), [(0, cup(k, flag)), (0, cap(k, flag))])
            assert word_matrix(loop).scalar() == qbinom(ctx, n, k)


@pytest.mark.parametrize("n", [2, 3])
def test_leaf_values_all_orientations(n):
    ctx = RankContext(n)
    for m in range(1, n):
        for l in range(1, n - m + 1):
            value = qbinom(ctx, n - m, l)
            cases = [
                W(n, ((m, UP),), [(1, cup(l, True)), (0, merge(m, l)),
                                  (0, split(m, l)), (1, cap(l, True))]),
                W(n, ((m, UP),), [(0, cup(l, False)), (1, merge(l, m)),
                                  (1, split(l, m)), (0, cap(l, False))]),
                W(n, ((m, DOWN),), [(1, cup(l, False)), (0, merge(m, l, DOWN)),
                                    (0, split(m, l, DOWN)), (1, cap(l, False))]),
                W(n, ((m, DOWN),), [(0, cup(l, True)), (1, merge(l, m, DOWN)),
                                    (1, split(l, m, DOWN)), (0, cap(l, True))]),
            ]
            for wd in cases:
                assert is_scalar_multiple(n, wd, value)


# -- duality -------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_zigzags_are_identities(n):
    for k in range(1, n + 1):
        zigzags = [
            W(n, ((k, UP),), [(1, cup(k, False)), (0, cap(k, True))]),
            W(n, ((k, UP),), [(0, cup(k, True)), (1, cap(k, False))]),
            W(n, ((k, DOWN),), [(1, cup(k, True)), (0, cap(k, False))]),
            W(n, ((k, DOWN),), [(0, cup(k, False)), (1, cap(k, True))]),
        ]
        for z in zigzags:
            assert word_matrix(z) == ident_matrix(n, z.dom)


# -- vertices associate ---------------------------------------------------------


@pytest.mark.parametrize("direction", [UP, DOWN])
def test_merge_associativity(direction):
    dom = ((1, direction),) * 3
    w1 = W(3, dom, [(0, merge(1, 1, direction)), (0, merge(2, 1, direction))])
    w2 = W(3, dom, [(1, merge(1, 1, direction)), (0, merge(1, 2, direction))])
    assert word_matrix(w1) == word_matrix(w2)


# -- crossings -------------------------------------------------------------------


R2_COLORS = {2: [(1, 1)], 3: [(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)]}


@pytest.mark.parametrize("n", [2, 3])
def test_reidemeister_2(n):
    for k, l in R2_COLORS[n]:
        for first in (1, -1):
            wd = W(n, ((k, UP), (l, UP)),
                   [(0, crossing(k, l, first)), (0, crossing(l, k, -first))])
            assert word_matrix(wd) == ident_matrix(n, wd.dom)


@pytest.mark.parametrize("n", [2, 3])
def test_reidemeister_3(n):
    dom = ((1, UP),) * 3
    for sign in (1, -1):
        x = crossing(1, 1, sign)
        lhs = W(n, dom, [(0, x), (1, x), (0, x)])
        rhs = W(n, dom, [(1, x), (0, x), (1, x)])
        assert word_matrix(lhs) == word_matrix(rhs)


@pytest.mark.parametrize("n", [2, 3])
def test_skein_relation(n):
    ctx = RankContext(n)
    dom = ((1, UP), (1, UP))
    pos = LinCombo.of(W(n, dom, [(0, crossing(1, 1, 1))]), ctx.q_power(1, n))
    neg = LinCombo.of(W(n, dom, [(0, crossing(1, 1, -1))]), ctx.q_power(-1, n))
    ident = LinCombo.of(W(n, dom, []), ctx.q_power(1) - ctx.q_power(-1))
    assert combos_equal(pos - neg, ident)


@pytest.mark.parametrize("n", [2, 3])
def test_kink_scalars(n):
    # one positive curl contributes q^(k(n-k)(n+1)/n) regardless of side
    ctx = RankContext(n)
    for k in range(1, n + 1):
        for sign in (1, -1):
            value = ctx.monomial(sign * 2 * k * (n - k) * (n + 1))
            right = W(n, ((k, UP),),
                      [(1, cup(k, True)), (0, crossing(k, k, sign)), (1, cap(k, True))])
            left = W(n, ((k, UP),),
                     [(0, cup(k, False)), (1, crossing(k, k, sign)), (0, cap(k, False))])
            assert is_scalar_multiple(n, right, value)
            assert is_scalar_multiple(n, left, value)


@pytest.mark.parametrize("n", [2, 3])
def test_crossing_absorption(n):
    ctx = RankContext(n)
    dom = ((1, UP), (1, UP))
    for sign in (1, -1):
        scalar = ctx.q_power(-sign * (n + 1), n) * (-1)
        top = W(n, dom, [(0, crossing(1, 1, sign)), (0, merge(1, 1))])
        assert word_matrix(top) == gen_matrix(n, merge(1, 1)).scale(scalar)
        bot = W(n, ((2, UP),), [(0, split(1, 1)), (0, crossing(1, 1, sign))])
        assert word_matrix(bot) == gen_matrix(n, split(1, 1)).scale(scalar)


# -- rung commutation instances ---------------------------------------------------
#
# The general two-column commutation schema is swept in the rewrite tests;
# here three hand-built instances pin the binomial coefficients.


def test_rung_commutation_box_instance():
    # zone (2,1) at n=3: climb-then-descend = descend-then-climb + id
    dom = ((2, UP), (1, UP))
    lhs = W(3, dom, [(0, split(1, 1)), (1, merge(1, 1)),
                     (1, split(1, 1)), (0, merge(1, 1))])
    rhs = LinCombo.of(W(3, dom, [(0, merge(2, 1)), (0, split(2, 1))])) \
        + LinCombo.of(W(3, dom, []))
    assert combos_equal(lhs, rhs)


def test_rung_commutation_clasp_instance():
    # zone (1,2) at n=3: the full clasp expands through the square minus id
    dom = ((1, UP), (2, UP))
    clasp = W(3, dom, [(0, merge(1, 2)), (0, split(1, 2))])
    square = W(3, dom, [(1, split(1, 1)), (0, merge(1, 1)),
                        (0, split(1, 1)), (1, merge(1, 1))])
    assert combos_equal(
        LinCombo.of(clasp),
        LinCombo.of(square) - LinCombo.of(W(3, dom, [])),
    )


def test_rung_commutation_quantum_two():
    # zone (2,1) at n=3 with a deep climb: collapses to [2] x full merge
    dom = ((2, UP), (1, UP))
    lhs = W(3, dom, [(0, split(1, 1)), (1, merge(1, 1)), (0, merge(1, 2))])
    rhs = LinCombo.of(W(3, dom, [(0, merge(2, 1))]), qbinom(N3, 2, 1))
    assert combos_equal(lhs, rhs)


# -- tags ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_tag_pair_scalars(n):
    ctx = RankContext(n)
    mixed_value = ctx.one() * ((-1) ** (n - 1))
    for direction in (UP, DOWN):
        for s1 in ("L", "R"):
            for s2 in ("L", "R"):
                value = ctx.one() if s1 == s2 else mixed_value
                bubble = W(n, (), [(0, tag(True, direction, s1)),
                                   (0, tag(False, direction, s2))], category=CKM)
                assert word_matrix(bubble).scalar() == value
                strandwise = W(n, ((n, direction),),
                               [(0, tag(False, direction, s1)),
                                (0, tag(True, direction, s2))], category=CKM)
                assert is_scalar_multiple(n, strandwise, value)


# -- n-valent vertices -----------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_source_sink_braid_expansion(n):
    # src after snk equals q^(n(n-1)) * sum over permutations of
    # (-q^(1-1/n))^(-length) times the positive braid of the permutation
    ctx = RankContext(n)
    dom = ((1, UP),) * n
    lhs = word_matrix(W(n, dom, [(0, sink()), (0, source())], SIKORA))
    acc = RepMatrix(n ** n, n ** n, ctx.exponent_denominator)
    for perm in itertools.permutations(range(n)):
        length = perm_length(perm)
        braid = tuple(reversed(positive_braid_word(perm)))
        wpi = W(n, dom, [(i, crossing(1, 1, 1)) for i in braid], SIKORA)
        coeff = ctx.q_power(-length * (n - 1), n) * ((-1) ** length)
        acc = acc + word_matrix(wpi).scale(coeff)
    assert acc.scale(ctx.monomial(2 * n * n * (n - 1))) == lhs


@pytest.mark.parametrize("n", [2, 3])
def test_sink_after_source_scalar(n):
    ctx = RankContext(n)
    closed = W(n, (), [(0, source()), (0, sink())], SIKORA)
    expected = qfact(ctx, n) * ctx.monomial(n * n * (n - 1))  # q^(n(n-1)/2) [n]!
    assert word_matrix(closed).scalar() == expected


# -- matrix plumbing -----------------------------------------------------------------


def test_repmatrix_json_round_trip():
    m = gen_matrix(3, merge(1, 2))
    assert RepMatrix.from_json(m.to_json()) == m


def test_strand_dims():
    assert strand_dim(3, (2, UP)) == 3
    assert strand_dim(3, (3, DOWN)) == 1
    assert len(subsets(3, 2)) == 3


def test_negative_control_detects_perturbation():
    n = 2
    wd = W(n, ((2, UP),), [(0, split(1, 1)), (0, merge(1, 1))])
    good = ident_matrix(n, wd.dom).scale(qbinom(N2, 2, 1))
    bad = good.scale(N2.q_power(1))
    assert word_matrix(wd) == good
    assert word_matrix(wd) != bad
