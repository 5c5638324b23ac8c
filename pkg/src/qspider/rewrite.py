"""Rewrite engine: certified local relations and closed-diagram evaluation.

Rules are concrete instances, not schemas with color variables: colors are
bounded by the rank, so every relation family materializes as a finite list
per rank.  Each rule is validated structurally on construction and can be
certified against the representation-matrix oracle at small rank.

A rule states ``den * lhs == sum(coeff * rhs_word)`` where ``den`` is usually
absent (meaning 1).  Denominator-carrying rules exist because some identities
are only torsion-free: cabling a colored crossing yields the crossing times
a product of quantum factorials, and color expansion inserts a digon at the
cost of a quantum integer.  The reduction loop tracks a single global
denominator and divides exactly at the end; inexact division is a loud error.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
import sys
from dataclasses import dataclass, field

from .qalg import (
    LaurentPoly,
    RankContext,
    perm_length,
    positive_braid_word,
    qbinom,
    qfact,
    qint,
)
from .diagram import (
    DOWN,
    MIXED,
    UP,
    Boundary,
    DiagramTypeError,
    DiagramWord,
    Generator,
    InadmissibleGenerator,
    LinCombo,
    cap,
    crossing,
    cup,
    left_merge_comb,
    left_split_comb,
    merge,
    sink,
    source,
    split,
    tag,
)
from . import diagram as _diagram
from .oracle import ORACLE_MAX_RANK, combos_equal

Layers = tuple[tuple[int, Generator], ...]

MATCH_WINDOW = 4


class RewriteError(Exception):
    """Base class for rewrite-engine failures."""


class StaleSiteError(RewriteError):
    """The redex refers to a word no longer present in the combination."""


class ReductionStuck(RewriteError):
    """A closed diagram reached a form no rule in the active set matches."""


class BudgetExhausted(RewriteError):
    """The reduction loop hit its step budget before terminating."""


class _SelfReferential(Exception):
    # raised internally when an instance would rewrite a word to itself
    pass


# ---------------------------------------------------------------------------
# rules


@dataclass(frozen=True, eq=False)
class RewriteRule:
    """One certified local identity, oriented left to right.

    lhs is a layer fragment relative to pattern_dom; rhs is a list of
    (coefficient, layer fragment) pairs with the same relative boundary.
    den, when present, multiplies the lhs side of the identity.  tier 0
    rules shrink or keep the layer count and are preferred by the
    reduction loop; tier 1 rules may grow it.
    """

    rule_id: str
    family: str
    n: int
    category: str
    pattern_dom: Boundary
    lhs: Layers
    rhs: tuple[tuple[LaurentPoly, Layers], ...]
    den: LaurentPoly | None = None
    source: str = "relation"
    tier: int = 1

    def __repr__(self) -> str:  # pragma: no cover
        return f"RewriteRule({self.rule_id})"

    def lhs_word(self, category: str = MIXED) -> DiagramWord:
        return DiagramWord(category, self.n, self.pattern_dom, self.lhs)

    def rhs_combo(self, category: str = MIXED) -> LinCombo:
        base = self.lhs_word(category)
        out = LinCombo(category, self.n, base.dom, base.cod)
        for coeff, layers in self.rhs:
            out = out + LinCombo.of(
                DiagramWord(category, self.n, self.pattern_dom, layers), coeff
            )
        return out

    def inverted(self) -> "RewriteRule":
        """Reverse orientation; only defined for single-term unit rules."""
        if self.den is not None or len(self.rhs) != 1:
            raise RewriteError(f"{self.rule_id}: not invertible")
        coeff, layers = self.rhs[0]
        ctx = RankContext(self.n)
        inv = ctx.one().exact_div(coeff)
        return RewriteRule(
            rule_id=self.rule_id + ",inv",
            family=self.family,
            n=self.n,
            category=self.category,
            pattern_dom=self.pattern_dom,
            lhs=layers,
            rhs=((inv, self.lhs),),
            den=None,
            source=self.source,
            tier=1,
        )


def make_rule(
    *,
    rule_id: str,
    family: str,
    ctx: RankContext,
    category: str,
    pattern_dom: Boundary,
    lhs,
    rhs,
    den: LaurentPoly | None = None,
    source: str = "relation",
    tier: int = 1,
    drop_invalid_rhs: bool = False,
) -> RewriteRule:
    """Validate and freeze a rule instance.

    Both sides must parse as slice words over pattern_dom with a common
    codomain.  An rhs term identical to the lhs makes the rule useless as
    a rewrite and is rejected.
    """
    lhs = tuple(lhs)
    lhs_word = DiagramWord(MIXED, ctx.n, tuple(pattern_dom), lhs)
    kept: list[tuple[LaurentPoly, Layers]] = []
    for coeff, layers in rhs:
        layers = tuple(layers)
        if coeff.is_zero():
            continue
        try:
            word = DiagramWord(MIXED, ctx.n, tuple(pattern_dom), layers)
        except (DiagramTypeError, InadmissibleGenerator):
            if drop_invalid_rhs:
                continue
            raise
        if word.cod != lhs_word.cod:
            raise DiagramTypeError(
                f"{rule_id}: rhs boundary {word.cod} != lhs boundary {lhs_word.cod}"
            )
        if layers == lhs:
            raise _SelfReferential(rule_id)
        kept.append((coeff, layers))
    return RewriteRule(
        rule_id=rule_id,
        family=family,
        n=ctx.n,
        category=category,
        pattern_dom=tuple(pattern_dom),
        lhs=lhs,
        rhs=tuple(kept),
        den=den,
        source=source,
        tier=tier,
    )


# ---------------------------------------------------------------------------
# layer commutation and matching


def commute_adjacent(word: DiagramWord, j: int) -> DiagramWord | None:
    """Swap layers j and j+1 when they act on disjoint columns, else None."""
    layers = word.layers
    if not 0 <= j < len(layers) - 1:
        return None
    ao, ga = layers[j]
    bo, gb = layers[j + 1]
    n = word.n
    wa_dom = len(ga.dom(n))
    wa_cod = len(ga.cod(n))
    wb_dom = len(gb.dom(n))
    wb_cod = len(gb.cod(n))
    da = wa_cod - wa_dom
    db = wb_cod - wb_dom
    if bo + wb_dom <= ao:
        swapped = ((bo, gb), (ao + db, ga))
    elif bo >= ao + wa_cod:
        swapped = ((bo - da, gb), (ao, ga))
    else:
        return None
    try:
        return DiagramWord(
            word.category, word.n, word.dom, layers[:j] + swapped + layers[j + 2 :]
        )
    except (DiagramTypeError, InadmissibleGenerator):
        return None


def _gen_sig(gen: Generator) -> tuple:
    return (gen.kind, gen.colors, gen.direction, gen.flag, gen.side)


def canonical_word(word: DiagramWord) -> DiagramWord:
    """Sort layers by a fixed key as far as adjacent commutation allows.

    Commutation-equivalent interleavings mostly collapse to one
    representative, which the evaluator uses for memoization and cycle
    detection.  Each accepted swap strictly lowers the layer-key sequence
    lexicographically, so the pass terminates."""
    cur = word
    changed = True
    while changed:
        changed = False
        for j in range(len(cur.layers) - 1):
            o1, g1 = cur.layers[j]
            o2, g2 = cur.layers[j + 1]
            before = ((o1,) + _gen_sig(g1), (o2,) + _gen_sig(g2))
            nxt = commute_adjacent(cur, j)
            if nxt is None:
                continue
            n1, h1 = nxt.layers[j]
            n2, h2 = nxt.layers[j + 1]
            after = ((n1,) + _gen_sig(h1), (n2,) + _gen_sig(h2))
            if after < before:
                cur = nxt
                changed = True
    return cur


@dataclass(frozen=True, eq=False)
class Redex:
    """A located match: rule lhs occupies normalized.layers[start : start+len]."""

    rule: RewriteRule
    original: DiagramWord
    normalized: DiagramWord
    seed_start: int
    start: int
    shift: int


def try_match_at(
    word: DiagramWord, rule: RewriteRule, start: int, *, window: int = MATCH_WINDOW
) -> Redex | None:
    """Match rule.lhs as consecutive layers beginning at start.

    Interleaved unrelated layers are pushed below the block by adjacent
    commutation, at most window times; matching is exact on generators and
    on relative offsets.
    """
    lhs = rule.lhs
    k = len(lhs)
    if k == 0 or rule.n != word.n:
        return None
    cur = word
    s = start
    moves = 0
    while True:
        if s + k > len(cur.layers):
            return None
        shift = cur.layers[s][0] - lhs[0][0]
        if shift < 0:
            return None
        p = 0
        while p < k:
            off, gen = cur.layers[s + p]
            roff, rgen = lhs[p]
            if gen != rgen or off != shift + roff:
                break
            p += 1
        if p == k:
            return Redex(rule, word, cur, start, s, shift)
        if p == 0 or moves >= window:
            return None
        # the layer at s+p does not belong to the block; slide it below
        # the block head, or failing that pull the needed layer up to s+p
        moved = cur
        for t in range(s + p - 1, s - 1, -1):
            nxt = commute_adjacent(moved, t)
            if nxt is None:
                moved = None
                break
            moved = nxt
        if moved is not None:
            cur = moved
            s += 1
            moves += 1
            continue
        roff, rgen = lhs[p]
        pulled = None
        for t in range(s + p + 1, min(len(cur.layers), s + p + 1 + window)):
            cand = cur
            for u in range(t - 1, s + p - 1, -1):
                cand = commute_adjacent(cand, u)
                if cand is None:
                    break
            if cand is None:
                continue
            off, gen = cand.layers[s + p]
            if gen == rgen and off == shift + roff:
                pulled = cand
                break
        if pulled is None:
            return None
        cur = pulled
        moves += 1


def find_redexes(
    word: DiagramWord, rule: RewriteRule, *, window: int = MATCH_WINDOW
) -> list[Redex]:
    """All matches of one rule, top layer first (then left to right is
    forced, since each start yields at most one match)."""
    if not rule.lhs:
        return []
    out = []
    first_gen = rule.lhs[0][1]
    for start in range(len(word.layers) - len(rule.lhs), -1, -1):
        if word.layers[start][1] != first_gen:
            continue
        rx = try_match_at(word, rule, start, window=window)
        if rx is not None:
            out.append(rx)
    return out


def splice(redex: Redex) -> LinCombo:
    """The rhs of the rule substituted into the ambient word."""
    rule = redex.rule
    cur = redex.normalized
    pre = cur.layers[: redex.start]
    post = cur.layers[redex.start + len(rule.lhs) :]
    ctx = RankContext(cur.n)
    terms: dict[DiagramWord, LaurentPoly] = {}
    for coeff, layers in rule.rhs:
        moved = tuple((redex.shift + off, g) for off, g in layers)
        word = DiagramWord(cur.category, cur.n, cur.dom, pre + moved + post)
        terms[word] = terms.get(word, ctx.zero()) + coeff
    return LinCombo(cur.category, cur.n, cur.dom, cur.cod, terms)


def _as_combo(x) -> LinCombo:
    if isinstance(x, DiagramWord):
        return LinCombo.of(x)
    if isinstance(x, LinCombo):
        return x
    raise TypeError(f"expected DiagramWord or LinCombo, got {type(x).__name__}")


def apply_rule(x, rule: RewriteRule, site: Redex) -> LinCombo:
    """Replace the matched term at site by the rule's rhs, linearly extended.

    Denominator-carrying rules change the global normalization and are only
    usable inside the reduction loop, not through this entry point.
    """
    if site.rule is not rule:
        raise RewriteError("site was found with a different rule")
    if rule.den is not None:
        raise RewriteError(
            f"{rule.rule_id} carries a denominator; use the reduction loop"
        )
    combo = _as_combo(x)
    coeff = combo.terms.get(site.original)
    if coeff is None:
        raise StaleSiteError(
            f"term no longer present for {rule.rule_id} at layer {site.start}"
        )
    remaining = {w: c for w, c in combo.terms.items() if w != site.original}
    base = LinCombo(combo.category, combo.n, combo.dom, combo.cod, remaining)
    return base + splice(site).scale(coeff)


# ---------------------------------------------------------------------------
# half-turn transport (spawns arrow-reversed instances mechanically)


def _half_turn_gen(gen: Generator) -> Generator:
    if gen.kind == "merge":
        return split(gen.colors[1], gen.colors[0], -gen.direction)
    if gen.kind == "split":
        return merge(gen.colors[1], gen.colors[0], -gen.direction)
    if gen.kind == "cup":
        return cap(gen.colors[0], gen.flag)
    if gen.kind == "cap":
        return cup(gen.colors[0], gen.flag)
    raise RewriteError(f"no half-turn image for generator kind {gen.kind!r}")


def word_half_turn(word: DiagramWord) -> DiagramWord:
    """Rotate a crossing-free, tag-free word by a half turn.

    Boundaries reverse order and flip direction; layer order reverses;
    merges become splits of swapped colors with flipped direction.
    """
    bs = word.boundaries()
    n = word.n
    new_layers = []
    for i in range(len(word.layers) - 1, -1, -1):
        off, gen = word.layers[i]
        new_off = len(bs[i + 1]) - off - len(gen.cod(n))
        new_layers.append((new_off, _half_turn_gen(gen)))
    new_dom = tuple((c, -d) for c, d in reversed(word.cod))
    return DiagramWord(word.category, n, new_dom, tuple(new_layers))


def _rule_half_turn(rule: RewriteRule, suffix: str = ",down") -> RewriteRule:
    ctx = RankContext(rule.n)
    lw = word_half_turn(rule.lhs_word())
    rhs = []
    for coeff, layers in rule.rhs:
        rw = word_half_turn(DiagramWord(MIXED, rule.n, rule.pattern_dom, layers))
        rhs.append((coeff, rw.layers))
    return make_rule(
        rule_id=rule.rule_id + suffix,
        family=rule.family,
        ctx=ctx,
        category=rule.category,
        pattern_dom=lw.dom,
        lhs=lw.layers,
        rhs=rhs,
        den=rule.den,
        source=rule.source,
        tier=rule.tier,
    )


# ---------------------------------------------------------------------------
# rung routes on a two-column zone


def rung_layers(
    zone: tuple[int, int], move: str, m: int, direction: int = UP
) -> tuple[list[tuple[int, Generator]], tuple[int, int]]:
    """Layers moving m units of color across a (left, right) zone.

    move "R" sends m from the left column to the right one, "L" the
    reverse.  Degenerate sizes collapse to a single vertex or to nothing;
    the returned zone tracks the new column colors.
    """
    a, b = zone
    if m == 0:
        return [], zone
    if move == "R":
        if not 1 <= m <= a:
            raise DiagramTypeError(f"rung R_{m} invalid on zone {zone}")
        new = (a - m, b + m)
        if m == a:
            layers = [(0, merge(a, b, direction))] if b else []
        else:
            layers = [(0, split(a - m, m, direction))]
            if b:
                layers.append((1, merge(m, b, direction)))
    elif move == "L":
        if not 1 <= m <= b:
            raise DiagramTypeError(f"rung L_{m} invalid on zone {zone}")
        new = (a + m, b - m)
        if m == b:
            layers = [(0, merge(a, b, direction))] if a else []
        else:
            if a:
                layers = [(1, split(m, b - m, direction)), (0, merge(a, m, direction))]
            else:
                layers = [(0, split(m, b - m, direction))]
    else:
        raise ValueError(f"move must be 'R' or 'L', got {move!r}")
    return layers, new


def route_layers(
    zone: tuple[int, int], moves, direction: int = UP
) -> tuple[list[tuple[int, Generator]], tuple[int, int]]:
    layers: list[tuple[int, Generator]] = []
    z = zone
    for mv, m in moves:
        step, z = rung_layers(z, mv, m, direction)
        layers.extend(step)
    return layers, z


def zone_boundary(zone: tuple[int, int], direction: int = UP) -> Boundary:
    a, b = zone
    out = []
    if a:
        out.append((a, direction))
    if b:
        out.append((b, direction))
    return tuple(out)


def _ladder_rule(
    ctx: RankContext,
    a: int,
    b: int,
    r: int,
    s: int,
    *,
    mirror: bool,
    family: str,
    source: str,
    direction: int = UP,
) -> RewriteRule | None:
    """One rung-commutation instance on zone (a, b).

    Plain orientation: a size-s right rung below a size-r left rung
    re-sorts into left-below-right routes weighted by quantum binomials.
    mirror swaps the roles of the two columns.
    """
    if a < 1 or b < 1:
        return None
    first, second = ("R", "L") if not mirror else ("L", "R")
    top_arg = (r - s + a - b) if not mirror else (r - s + b - a)
    try:
        lhs, _ = route_layers((a, b), [(first, s), (second, r)], direction)
    except DiagramTypeError:
        return None
    rhs = []
    for t in range(0, min(r, s) + 1):
        coeff = qbinom(ctx, top_arg, t)
        if coeff.is_zero():
            continue
        try:
            layers, _ = route_layers(
                (a, b), [(second, r - t), (first, s - t)], direction
            )
        except DiagramTypeError:
            continue
        rhs.append((coeff, tuple(layers)))
    tag_dir = "" if direction == UP else ",down"
    kind = "mirror," if mirror else ""
    try:
        return make_rule(
            rule_id=f"{family}[{kind}a={a},b={b},r={r},s={s}{tag_dir}]",
            family=family,
            ctx=ctx,
            category=MIXED,
            pattern_dom=zone_boundary((a, b), direction),
            lhs=tuple(lhs),
            rhs=rhs,
            source=source,
            tier=1,
            drop_invalid_rhs=True,
        )
    except (_SelfReferential, DiagramTypeError, InadmissibleGenerator):
        return None


# ---------------------------------------------------------------------------
# cabling


def cable_layers(k: int, l: int, sign: int) -> Layers:
    """A colored crossing as combed color-1 strands braided past each other.

    Splitting both strands into single strands, block-swapping them with
    minimal positive or negative crossings, and merging back equals the
    colored crossing times [k]! * [l]!.
    """
    layers: list[tuple[int, Generator]] = []
    layers.extend(left_split_comb(l, 1))
    layers.extend(left_split_comb(k, 0))
    if sign > 0:
        target = tuple(i + l for i in range(k)) + tuple(range(l))
        braid = list(reversed(positive_braid_word(target)))
    else:
        target = tuple(i + k for i in range(l)) + tuple(range(k))
        braid = list(positive_braid_word(target))
    layers.extend((i, crossing(1, 1, sign)) for i in braid)
    layers.extend(left_merge_comb(l, 0))
    layers.extend(left_merge_comb(k, 1))
    return tuple(layers)


# ---------------------------------------------------------------------------
# rule family builders


def _circle_rules(ctx, colors=None) -> list[RewriteRule]:
    n = ctx.n
    out = []
    for k in colors or range(1, n + 1):
        value = qbinom(ctx, n, k)
        for flag, label in ((True, "lu"), (False, "ld")):
            out.append(
                make_rule(
                    rule_id=f"circle[k={k},{label}]",
                    family="circle",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=(),
                    lhs=((0, cup(k, flag)), (0, cap(k, flag))),
                    rhs=((value, ()),),
                    tier=0,
                )
            )
    return out


def _straighten_rules(ctx) -> list[RewriteRule]:
    n = ctx.n
    out = []
    shapes = [
        ("ne", UP, ((1, cup(0, False)), (0, cap(0, True)))),
        ("nw", UP, ((0, cup(0, True)), (1, cap(0, False)))),
        ("se", DOWN, ((1, cup(0, True)), (0, cap(0, False)))),
        ("sw", DOWN, ((0, cup(0, False)), (1, cap(0, True)))),
    ]
    for k in range(1, n + 1):
        for label, direction, proto in shapes:
            lhs = tuple(
                (off, cup(k, g.flag) if g.kind == "cup" else cap(k, g.flag))
                for off, g in proto
            )
            out.append(
                make_rule(
                    rule_id=f"straighten[k={k},{label}]",
                    family="straighten",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=((k, direction),),
                    lhs=lhs,
                    rhs=((ctx.one(), ()),),
                    tier=0,
                )
            )
    return out


def _digon_rules(ctx) -> list[RewriteRule]:
    n = ctx.n
    out = []
    for k in range(1, n):
        for l in range(1, n - k + 1):
            value = qbinom(ctx, k + l, k)
            for direction, label in ((UP, "up"), (DOWN, "down")):
                out.append(
                    make_rule(
                        rule_id=f"bubble-digon[k={k},l={l},{label}]",
                        family="bubble-digon",
                        ctx=ctx,
                        category=MIXED,
                        pattern_dom=((k + l, direction),),
                        lhs=(
                            (0, split(k, l, direction)),
                            (0, merge(k, l, direction)),
                        ),
                        rhs=((value, ()),),
                        tier=0,
                    )
                )
    return out


def _leaf_rules(ctx) -> list[RewriteRule]:
    # vertex against a bend: a color-l loop hanging off a color-m strand
    n = ctx.n
    out = []
    for m in range(1, n):
        for l in range(1, n - m + 1):
            value = qbinom(ctx, n - m, l)
            variants = [
                (
                    "up-r",
                    UP,
                    (
                        (1, cup(l, True)),
                        (0, merge(m, l)),
                        (0, split(m, l)),
                        (1, cap(l, True)),
                    ),
                ),
                (
                    "up-l",
                    UP,
                    (
                        (0, cup(l, False)),
                        (1, merge(l, m)),
                        (1, split(l, m)),
                        (0, cap(l, False)),
                    ),
                ),
                (
                    "down-r",
                    DOWN,
                    (
                        (1, cup(l, False)),
                        (0, merge(m, l, DOWN)),
                        (0, split(m, l, DOWN)),
                        (1, cap(l, False)),
                    ),
                ),
                (
                    "down-l",
                    DOWN,
                    (
                        (0, cup(l, True)),
                        (1, merge(l, m, DOWN)),
                        (1, split(l, m, DOWN)),
                        (0, cap(l, True)),
                    ),
                ),
            ]
            for label, direction, lhs in variants:
                out.append(
                    make_rule(
                        rule_id=f"bubble-leaf[m={m},l={l},{label}]",
                        family="bubble-leaf",
                        ctx=ctx,
                        category=MIXED,
                        pattern_dom=((m, direction),),
                        lhs=lhs,
                        rhs=((value, ()),),
                        tier=0,
                    )
                )
    return out


def _pivot_rules(ctx) -> list[RewriteRule]:
    # vertex rotation around a bend, scalar-free in this gauge: a vertex
    # whose outer leg is bent rewrites to the half-turned vertex with the
    # bends moved to the other two legs
    n = ctx.n
    out = []
    for k in range(1, n):
        for l in range(1, n - k + 1):
            variants = [
                (
                    "merge-cap-r",
                    ((k, UP), (l, UP), (k + l, DOWN)),
                    ((0, merge(k, l)), (0, cap(k + l, True))),
                    (
                        (2, split(l, k, DOWN)),
                        (1, cap(l, True)),
                        (0, cap(k, True)),
                    ),
                ),
                (
                    "merge-cap-l",
                    ((k + l, DOWN), (k, UP), (l, UP)),
                    ((1, merge(k, l)), (0, cap(k + l, False))),
                    (
                        (0, split(l, k, DOWN)),
                        (1, cap(k, False)),
                        (0, cap(l, False)),
                    ),
                ),
                (
                    "split-cup-r",
                    (),
                    ((0, cup(k + l, True)), (0, split(k, l))),
                    (
                        (0, cup(k, True)),
                        (1, cup(l, True)),
                        (2, merge(l, k, DOWN)),
                    ),
                ),
                (
                    "split-cup-l",
                    (),
                    ((0, cup(k + l, False)), (1, split(k, l))),
                    (
                        (0, cup(l, False)),
                        (1, cup(k, False)),
                        (0, merge(l, k, DOWN)),
                    ),
                ),
            ]
            for label, dom, lhs, rhs_layers in variants:
                rule = make_rule(
                    rule_id=f"pivot[k={k},l={l},{label}]",
                    family="pivot",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=dom,
                    lhs=lhs,
                    rhs=((ctx.one(), rhs_layers),),
                    tier=1,
                )
                shrink = make_rule(
                    rule_id=f"pivot[k={k},l={l},{label},shrink]",
                    family="pivot",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=dom,
                    lhs=rhs_layers,
                    rhs=((ctx.one(), lhs),),
                    tier=0,
                )
                out.extend((rule, shrink))
                out.append(_rule_half_turn(rule))
                out.append(_rule_half_turn(shrink))
    return out


def _assoc_rules(ctx) -> list[RewriteRule]:
    # reassociation toward left-leaning trees; offsets strictly decrease
    n = ctx.n
    out = []
    for a in range(1, n - 1):
        for b in range(1, n - a):
            for c in range(1, n - a - b + 1):
                for direction, label in ((UP, "up"), (DOWN, "down")):
                    dom3 = ((a, direction), (b, direction), (c, direction))
                    out.append(
                        make_rule(
                            rule_id=f"assoc[merge,{a},{b},{c},{label}]",
                            family="assoc",
                            ctx=ctx,
                            category=MIXED,
                            pattern_dom=dom3,
                            lhs=(
                                (1, merge(b, c, direction)),
                                (0, merge(a, b + c, direction)),
                            ),
                            rhs=(
                                (
                                    ctx.one(),
                                    (
                                        (0, merge(a, b, direction)),
                                        (0, merge(a + b, c, direction)),
                                    ),
                                ),
                            ),
                            tier=1,
                        )
                    )
                    out.append(
                        make_rule(
                            rule_id=f"assoc[split,{a},{b},{c},{label}]",
                            family="assoc",
                            ctx=ctx,
                            category=MIXED,
                            pattern_dom=((a + b + c, direction),),
                            lhs=(
                                (0, split(a, b + c, direction)),
                                (1, split(b, c, direction)),
                            ),
                            rhs=(
                                (
                                    ctx.one(),
                                    (
                                        (0, split(a + b, c, direction)),
                                        (0, split(a, b, direction)),
                                    ),
                                ),
                            ),
                            tier=1,
                        )
                    )
    return out


def _box_rules(ctx) -> list[RewriteRule]:
    """Square switches (size-1 rungs) in both mirror orientations, plus
    their half-turned arrow reversals."""
    out = []
    n = ctx.n
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            for mirror in (False, True):
                rule = _ladder_rule(
                    ctx, a, b, 1, 1, mirror=mirror, family="box", source="relation"
                )
                if rule is None:
                    continue
                out.append(rule)
                try:
                    out.append(_rule_half_turn(rule))
                except (RewriteError, _SelfReferential):
                    pass
    return out


def _ladder_rules(ctx, *, mirror_too: bool = True) -> list[RewriteRule]:
    out = []
    n = ctx.n
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            for s in range(1, a + 1):
                for r in range(1, min(b + s, n) + 1):
                    rule = _ladder_rule(
                        ctx, a, b, r, s, mirror=False, family="ladder", source="derived"
                    )
                    if rule is not None:
                        out.append(rule)
            if mirror_too:
                for s in range(1, b + 1):
                    for r in range(1, min(a + s, n) + 1):
                        rule = _ladder_rule(
                            ctx,
                            a,
                            b,
                            r,
                            s,
                            mirror=True,
                            family="ladder",
                            source="derived",
                        )
                        if rule is not None:
                            out.append(rule)
    return out


def _clasp_expander_rules(ctx) -> list[RewriteRule]:
    """Mirror-orientation rung instances whose lhs degenerates to a bare
    merge-then-split pair.  These are the only rewrites that can open such
    a pair, so the evaluator needs them even though the plain orientation
    can recreate the pair; the cycle is broken by the evaluator's
    ancestor check."""
    out = []
    n = ctx.n
    for a in range(1, n + 1):
        for b in range(1, n - a + 1):
            for r in range(1, a + b):
                rule = _ladder_rule(
                    ctx, a, b, r, b, mirror=True, family="clasp", source="derived"
                )
                if rule is not None and len(rule.lhs) == 2:
                    out.append(rule)
    return out


def transposition_ladder(zone: tuple[int, int], t: int) -> Layers | None:
    """Two-rung ladder carrying zone (a, b) to (b, a), with t strands
    doubling back.  None when an intermediate color is inadmissible."""
    a, b = zone
    if b >= a:
        moves = (("L", b - a + t), ("R", t))
    else:
        moves = (("R", a - b + t), ("L", t))
    try:
        layers, end = route_layers(zone, moves)
    except (DiagramTypeError, InadmissibleGenerator, ValueError):
        return None
    if end != (b, a):
        return None
    return tuple(layers)


def _braid_rules(ctx, colors=None) -> list[RewriteRule]:
    """Crossings decomposed into two-column ladder webs.

    A color (a, b) crossing is an alternating monomial combination of the
    transposition ladders; at colors (1, 1) this is the familiar two-term
    identity-plus-double-vertex form.  Coefficients are fitted against the
    representation oracle and certified below rank 4.
    """
    n = ctx.n
    out = []
    pairs = colors or [(k, l) for k in range(1, n + 1) for l in range(1, n + 1)]
    for k, l in pairs:
        m = min(k, l)
        for sign, label in ((1, "pos"), (-1, "neg")):
            rhs = []
            for t in range(0, m + 1):
                layers = transposition_ladder((k, l), t)
                if layers is None:
                    continue
                coeff = ctx.q_power(sign * (n * (m - t) - k * l), n)
                if (k * l - m + t) % 2:
                    coeff = coeff * -1
                rhs.append((coeff, layers))
            out.append(
                make_rule(
                    rule_id=f"braid[k={k},l={l},{label}]",
                    family="braid",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=((k, UP), (l, UP)),
                    lhs=((0, crossing(k, l, sign)),),
                    rhs=tuple(rhs),
                    tier=1,
                    drop_invalid_rhs=True,
                )
            )
    return out


def _cable_rules(ctx, colors=None) -> list[RewriteRule]:
    """Crossings as cabled color-1 braids, carrying a factorial denominator.

    Redundant with the ladder decomposition but kept as an independent
    certified route through the color-1 subcategory.
    """
    n = ctx.n
    out = []
    pairs = colors or [
        (k, l) for k in range(1, n + 1) for l in range(1, n + 1) if k * l > 1
    ]
    for k, l in pairs:
        for sign, label in ((1, "pos"), (-1, "neg")):
            out.append(
                make_rule(
                    rule_id=f"cable[k={k},l={l},{label}]",
                    family="braid",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=((k, UP), (l, UP)),
                    lhs=((0, crossing(k, l, sign)),),
                    rhs=((ctx.one(), cable_layers(k, l, sign)),),
                    den=qfact(ctx, k) * qfact(ctx, l),
                    source="derived",
                    tier=1,
                )
            )
    return out


def _slide2_rules(ctx, colors=None) -> list[RewriteRule]:
    n = ctx.n
    out = []
    pairs = colors or [(k, l) for k in range(1, n + 1) for l in range(1, n + 1)]
    for k, l in pairs:
        for sign, label in ((1, "pos"), (-1, "neg")):
            out.append(
                make_rule(
                    rule_id=f"slide2[k={k},l={l},{label}-first]",
                    family="slide2",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=((k, UP), (l, UP)),
                    lhs=((0, crossing(k, l, sign)), (0, crossing(l, k, -sign))),
                    rhs=((ctx.one(), ()),),
                    tier=0,
                )
            )
    return out


def _slide3_rules(ctx) -> list[RewriteRule]:
    out = []
    dom = ((1, UP), (1, UP), (1, UP))
    for sign, label in ((1, "pos"), (-1, "neg")):
        x = crossing(1, 1, sign)
        out.append(
            make_rule(
                rule_id=f"slide3[{label}]",
                family="slide3",
                ctx=ctx,
                category=MIXED,
                pattern_dom=dom,
                lhs=((0, x), (1, x), (0, x)),
                rhs=((ctx.one(), ((1, x), (0, x), (1, x))),),
                tier=1,
            )
        )
    return out


def _twist_rules(ctx, colors=None, *, base_rules=None) -> list[RewriteRule]:
    n = ctx.n
    out = []
    for k in colors or range(1, n + 1):
        for sign, slabel in ((1, "pos"), (-1, "neg")):
            value = kink_scalar(ctx, k, sign, _rules=base_rules)
            shapes = [
                (
                    "right",
                    (
                        (1, cup(k, True)),
                        (0, crossing(k, k, sign)),
                        (1, cap(k, True)),
                    ),
                ),
                (
                    "left",
                    (
                        (0, cup(k, False)),
                        (1, crossing(k, k, sign)),
                        (0, cap(k, False)),
                    ),
                ),
            ]
            for side, lhs in shapes:
                out.append(
                    make_rule(
                        rule_id=f"twist[k={k},{slabel},{side}]",
                        family="twist",
                        ctx=ctx,
                        category=MIXED,
                        pattern_dom=((k, UP),),
                        lhs=lhs,
                        rhs=((value, ()),),
                        tier=0,
                    )
                )
    return out


def _tag_pair_rules(ctx) -> list[RewriteRule]:
    n = ctx.n
    out = []
    mixed_sign = ctx.one() if n % 2 else ctx.one() * -1
    for s1 in ("L", "R"):
        for s2 in ("L", "R"):
            value = ctx.one() if s1 == s2 else mixed_sign
            for direction, dl in ((UP, "up"), (DOWN, "down")):
                out.append(
                    make_rule(
                        rule_id=f"tag-pair[birth-first,{dl},{s1}{s2}]",
                        family="tag-pair",
                        ctx=ctx,
                        category=MIXED,
                        pattern_dom=(),
                        lhs=(
                            (0, tag(True, direction, s1)),
                            (0, tag(False, direction, s2)),
                        ),
                        rhs=((value, ()),),
                        tier=0,
                    )
                )
                out.append(
                    make_rule(
                        rule_id=f"tag-pair[kill-first,{dl},{s1}{s2}]",
                        family="tag-pair",
                        ctx=ctx,
                        category=MIXED,
                        pattern_dom=((n, direction),),
                        lhs=(
                            (0, tag(False, direction, s1)),
                            (0, tag(True, direction, s2)),
                        ),
                        rhs=((value, ()),),
                        tier=0,
                    )
                )
    return out


def _tag_slide_rules(ctx) -> list[RewriteRule]:
    # a tag slides around a full-color bend with no scalar cost
    n = ctx.n
    out = []
    one = ctx.one()
    for s in ("L", "R"):
        cup_cases = [
            ("cup,lu,k-up", ((0, cup(n, True)), (0, tag(False, UP, s))), (0, tag(True, DOWN, s))),
            ("cup,lu,k-dn", ((0, cup(n, True)), (1, tag(False, DOWN, s))), (0, tag(True, UP, s))),
            ("cup,ld,k-dn", ((0, cup(n, False)), (0, tag(False, DOWN, s))), (0, tag(True, UP, s))),
            ("cup,ld,k-up", ((0, cup(n, False)), (1, tag(False, UP, s))), (0, tag(True, DOWN, s))),
        ]
        for label, lhs, rhs_gen in cup_cases:
            out.append(
                make_rule(
                    rule_id=f"tag-slide[{label},{s}]",
                    family="tag-slide",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=(),
                    lhs=lhs,
                    rhs=((one, (rhs_gen,)),),
                    tier=0,
                )
            )
        cap_cases = [
            ("cap,lu,b-up", ((n, DOWN),), ((0, tag(True, UP, s)), (0, cap(n, True))), (0, tag(False, DOWN, s))),
            ("cap,lu,b-dn", ((n, UP),), ((1, tag(True, DOWN, s)), (0, cap(n, True))), (0, tag(False, UP, s))),
            ("cap,ld,b-dn", ((n, UP),), ((0, tag(True, DOWN, s)), (0, cap(n, False))), (0, tag(False, UP, s))),
            ("cap,ld,b-up", ((n, DOWN),), ((1, tag(True, UP, s)), (0, cap(n, False))), (0, tag(False, DOWN, s))),
        ]
        for label, dom, lhs, rhs_gen in cap_cases:
            out.append(
                make_rule(
                    rule_id=f"tag-slide[{label},{s}]",
                    family="tag-slide",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=dom,
                    lhs=lhs,
                    rhs=((one, (rhs_gen,)),),
                    tier=0,
                )
            )
    return out


def _tag_flip_rules(ctx) -> list[RewriteRule]:
    # switching the side of a tag across an adjacent full vertex costs
    # (-1)^(k*(n-k)); certified at oracle ranks
    n = ctx.n
    out = []
    for k in range(1, n):
        sign = ctx.one() if (k * (n - k)) % 2 == 0 else ctx.one() * -1
        for s1, s2 in (("L", "R"), ("R", "L")):
            out.append(
                make_rule(
                    rule_id=f"tag-flip[merge,k={k},{s1}{s2}]",
                    family="tag-flip",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=((k, UP), (n - k, UP)),
                    lhs=((0, merge(k, n - k)), (0, tag(False, UP, s1))),
                    rhs=((sign, ((0, merge(k, n - k)), (0, tag(False, UP, s2)))),),
                    tier=1,
                )
            )
            out.append(
                make_rule(
                    rule_id=f"tag-flip[split,k={k},{s1}{s2}]",
                    family="tag-flip",
                    ctx=ctx,
                    category=MIXED,
                    pattern_dom=(),
                    lhs=((0, tag(True, UP, s1)), (0, split(k, n - k))),
                    rhs=((sign, ((0, tag(True, UP, s2)), (0, split(k, n - k)))),),
                    tier=1,
                )
            )
    return out


def _skein_rules(ctx, category: str) -> list[RewriteRule]:
    # positive crossing in terms of the negative one plus the identity
    n = ctx.n
    dom = ((1, UP), (1, UP))
    qdq = ctx.q_power(1) - ctx.q_power(-1)
    return [
        make_rule(
            rule_id="skein[pos]",
            family="skein",
            ctx=ctx,
            category=category,
            pattern_dom=dom,
            lhs=((0, crossing(1, 1, 1)),),
            rhs=(
                (ctx.q_power(-2, n), ((0, crossing(1, 1, -1)),)),
                (ctx.q_power(-1, n) * qdq, ()),
            ),
            tier=1,
        )
    ]


def _source_sink_rules(ctx) -> list[RewriteRule]:
    """A sink stacked under a source explodes into a sum over braids."""
    n = ctx.n
    dom = tuple((1, UP) for _ in range(n))
    base = ctx.monomial(2 * n * n * (n - 1))
    rhs = []
    for perm in itertools.permutations(range(n)):
        length = perm_length(perm)
        coeff = base * ctx.q_power(-length * (n - 1), n)
        if length % 2:
            coeff = coeff * -1
        layers = tuple(
            (i, crossing(1, 1, 1)) for i in reversed(positive_braid_word(perm))
        )
        rhs.append((coeff, layers))
    return [
        make_rule(
            rule_id="source-sink[expand]",
            family="source-sink",
            ctx=ctx,
            category="SIKORA",
            pattern_dom=dom,
            lhs=((0, sink()), (0, source())),
            rhs=tuple(rhs),
            tier=1,
        )
    ]


def _color_expansion_rules(ctx) -> list[RewriteRule]:
    """Strand rules: a color-i identity equals a digon over 1 and i-1,
    divided by [i].  lhs is empty, so the generic matcher skips these;
    translation code applies them at chosen strand positions."""
    out = []
    for i in range(3, ctx.n + 1):
        out.append(
            RewriteRule(
                rule_id=f"color-expansion[i={i}]",
                family="color-expansion",
                n=ctx.n,
                category=MIXED,
                pattern_dom=((i, UP),),
                lhs=(),
                rhs=(
                    (ctx.one(), ((0, split(1, i - 1)), (0, merge(1, i - 1)))),
                ),
                den=qint(ctx, i),
                source="derived",
                tier=1,
            )
        )
    return out


# ---------------------------------------------------------------------------
# catalogs


def builtin_rules(ctx: RankContext, category: str) -> tuple[RewriteRule, ...]:
    """The defining relation families of one presentation, instantiated at
    rank ctx.n.  Tagged families only appear for the tagged category; the
    tangle categories get exactly their own defining families."""
    if category in (_diagram.CKM, _diagram.MOY):
        rules = (
            _circle_rules(ctx)
            + _straighten_rules(ctx)
            + _digon_rules(ctx)
            + _leaf_rules(ctx)
            + _assoc_rules(ctx)
            + _box_rules(ctx)
            + _braid_rules(ctx)
            + _twist_rules(ctx)
            + _slide2_rules(ctx)
            + _slide3_rules(ctx)
        )
        if category == _diagram.CKM:
            rules += _tag_pair_rules(ctx) + _tag_slide_rules(ctx) + _tag_flip_rules(ctx)
        return tuple(rules)
    if category == _diagram.SIKORA:
        return tuple(
            _skein_rules(ctx, _diagram.SIKORA)
            + _twist_rules(ctx, colors=(1,))
            + _source_sink_rules(ctx)
            + _circle_rules(ctx, colors=(1,))
        )
    if category == _diagram.HOMFLY:
        return tuple(
            _skein_rules(ctx, _diagram.HOMFLY)
            + _twist_rules(ctx, colors=(1,))
            + _circle_rules(ctx, colors=(1,))
        )
    raise ValueError(f"no builtin relation catalog for category {category!r}")


def _recursion_rules(ctx) -> list[RewriteRule]:
    """Thin-zone clasp recursion: the (1, j) clasp word rewrites to the
    square minus a multiple of the identity."""
    out = []
    for j in range(2, ctx.n):
        rule = _ladder_rule(
            ctx, 1, j, 1, 1, mirror=False, family="recursion", source="derived"
        )
        if rule is not None:
            out.append(rule)
    return out


def derived_rules(ctx: RankContext) -> tuple[RewriteRule, ...]:
    """Consequences proved from the builtin families: the thin-zone clasp
    recursion, its generalization expanding any full clasp over rung words,
    the box base case at every zone, and color expansion."""
    out: list[RewriteRule] = []
    out.extend(_recursion_rules(ctx))
    out.extend(_clasp_expander_rules(ctx))
    for a in range(1, ctx.n + 1):
        for b in range(1, ctx.n + 1):
            rule = _ladder_rule(
                ctx, a, b, 1, 1, mirror=False, family="box-base", source="derived"
            )
            if rule is not None:
                out.append(rule)
    out.extend(_color_expansion_rules(ctx))
    return tuple(out)


_BASE_EVAL_CACHE: dict[int, tuple[RewriteRule, ...]] = {}
_WEB_EVAL_CACHE: dict[int, tuple[RewriteRule, ...]] = {}
_EVAL_CACHE: dict[int, tuple[RewriteRule, ...]] = {}


def _web_eval_rules(ctx: RankContext) -> tuple[RewriteRule, ...]:
    # the crossing-free reduction set the backtracking evaluator runs with
    if ctx.n not in _WEB_EVAL_CACHE:
        rules = (
            _circle_rules(ctx)
            + _straighten_rules(ctx)
            + _digon_rules(ctx)
            + _leaf_rules(ctx)
            + _pivot_rules(ctx)
            + _tag_pair_rules(ctx)
            + _tag_slide_rules(ctx)
            + _assoc_rules(ctx)
            + _ladder_rules(ctx)
            + _clasp_expander_rules(ctx)
        )
        _WEB_EVAL_CACHE[ctx.n] = tuple(rules)
    return _WEB_EVAL_CACHE[ctx.n]


def _base_eval_rules(ctx: RankContext) -> tuple[RewriteRule, ...]:
    # everything the loop needs except twist rules, which are bootstrapped
    # from these via the curl closure
    if ctx.n not in _BASE_EVAL_CACHE:
        rules = (
            _web_eval_rules(ctx)
            + tuple(_slide2_rules(ctx))
            + tuple(_braid_rules(ctx))
        )
        _BASE_EVAL_CACHE[ctx.n] = rules
    return _BASE_EVAL_CACHE[ctx.n]


def eval_rules(ctx: RankContext) -> tuple[RewriteRule, ...]:
    """The rule set the evaluation loop runs with (mixed category)."""
    if ctx.n not in _EVAL_CACHE:
        base = _base_eval_rules(ctx)
        _EVAL_CACHE[ctx.n] = base + tuple(_twist_rules(ctx, base_rules=base))
    return _EVAL_CACHE[ctx.n]


# ---------------------------------------------------------------------------
# reduction loop


def _index_rules(rules) -> dict:
    index: dict = {}
    for rule in rules:
        if not rule.lhs:
            continue
        index.setdefault(rule.lhs[0][1], []).append(rule)
    return index


def _collect_tiers(
    word: DiagramWord, index: dict, window: int
) -> tuple[list[Redex], list[Redex]]:
    tier0: list[Redex] = []
    tier1: list[Redex] = []
    for start in range(len(word.layers) - 1, -1, -1):
        gen = word.layers[start][1]
        for rule in index.get(gen, ()):
            if start + len(rule.lhs) > len(word.layers):
                continue
            rx = try_match_at(word, rule, start, window=window)
            if rx is None:
                continue
            (tier0 if rule.tier == 0 else tier1).append(rx)
    return tier0, tier1


def _collect_redexes(word: DiagramWord, index: dict, window: int) -> list[Redex]:
    tier0, tier1 = _collect_tiers(word, index, window)
    return tier0 if tier0 else tier1


def _word_digest(word: DiagramWord) -> str:
    return hashlib.sha256(word.text().encode()).hexdigest()[:12]


@dataclass
class ReductionTrace:
    """Deterministic record of one reduction or evaluation run.

    Each step pins the rule, the matched term (by digest), and the match
    seed position; replaying the steps against the same input reproduces
    the result exactly.
    """

    seed: int
    steps: list[dict] = field(default_factory=list)
    denominator: LaurentPoly | None = None
    result: LinCombo | None = None
    value: LaurentPoly | None = None

    def to_json(self) -> dict:
        out = {"seed": self.seed, "steps": self.steps}
        if self.denominator is not None:
            out["denominator"] = self.denominator.to_json()
        if self.result is not None:
            out["result"] = [
                [w.to_json(), c.to_json()] for w, c in sorted(
                    self.result.terms.items(), key=lambda item: item[0].text()
                )
            ]
        if self.value is not None:
            out["value"] = self.value.to_json()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def reduce_fully(
    x,
    *,
    rules=None,
    seed: int = 0,
    budget: int = 10**6,
    window: int = MATCH_WINDOW,
    stuck_error: bool = False,
) -> tuple[LinCombo, LaurentPoly, ReductionTrace]:
    """Rewrite until no rule matches any term.

    Returns (result, denominator, trace); the input equals result divided
    by the denominator.  Rule and site choices are drawn from a seeded
    generator, so equal seeds give equal runs.
    """
    combo = _as_combo(x)
    ctx = RankContext(combo.n)
    if rules is None:
        rules = eval_rules(ctx)
    index = _index_rules(rules)
    rng = random.Random(seed)
    trace = ReductionTrace(seed=seed)
    den = ctx.one()
    work: dict[DiagramWord, LaurentPoly] = dict(combo.terms)
    done: dict[DiagramWord, LaurentPoly] = {}
    steps = 0
    while work:
        word = next(iter(work))
        coeff = work.pop(word)
        if coeff.is_zero():
            continue
        redexes = _collect_redexes(word, index, window)
        if not redexes:
            if stuck_error and word.layers:
                raise ReductionStuck(
                    f"no rule matches remaining word:\n{word.text()}"
                )
            done[word] = done.get(word, ctx.zero()) + coeff
            continue
        redex = rng.choice(redexes)
        steps += 1
        if steps > budget:
            raise BudgetExhausted(f"reduction exceeded {budget} steps")
        rule = redex.rule
        if rule.den is not None:
            den = den * rule.den
            for w in list(work):
                work[w] = work[w] * rule.den
            for w in list(done):
                done[w] = done[w] * rule.den
        trace.steps.append(
            {
                "rule": rule.rule_id,
                "word": _word_digest(word),
                "seed_start": redex.seed_start,
                "start": redex.start,
                "shift": redex.shift,
            }
        )
        for new_word, rc in splice(redex).terms.items():
            acc = work.get(new_word, done.pop(new_word, None))
            if acc is None:
                acc = ctx.zero()
            work[new_word] = acc + coeff * rc
    result = LinCombo(combo.category, combo.n, combo.dom, combo.cod, done)
    trace.denominator = den
    trace.result = result
    return result, den, trace


def replay_reduction(x, trace: ReductionTrace, *, rules=None) -> LinCombo:
    """Re-run a recorded reduction step by step, without randomness."""
    combo = _as_combo(x)
    ctx = RankContext(combo.n)
    if rules is None:
        rules = eval_rules(ctx)
    by_id = {r.rule_id: r for r in rules}
    den = ctx.one()
    terms = dict(combo.terms)
    for step in trace.steps:
        rule = by_id[step["rule"]]
        target = None
        for w in terms:
            if _word_digest(w) == step["word"]:
                target = w
                break
        if target is None:
            raise StaleSiteError(f"replay lost the term for step {step}")
        redex = try_match_at(target, rule, step["seed_start"])
        if redex is None or redex.start != step["start"]:
            raise RewriteError(f"replay failed to re-find redex for step {step}")
        coeff = terms.pop(target)
        if rule.den is not None:
            den = den * rule.den
            for w in list(terms):
                terms[w] = terms[w] * rule.den
        for new_word, rc in splice(redex).terms.items():
            terms[new_word] = terms.get(new_word, ctx.zero()) + coeff * rc
    clean = {w: c for w, c in terms.items() if not c.is_zero()}
    result = LinCombo(combo.category, combo.n, combo.dom, combo.cod, clean)
    if trace.denominator is not None and not (den == trace.denominator):
        raise RewriteError("replay accumulated a different denominator")
    return result


def upcast_exotic(x) -> LinCombo:
    """Rewrite source/sink marks as tagged split/merge combs and relabel
    everything into the mixed category, folding normalization scalars into
    the coefficients."""
    combo = _as_combo(x)
    n = combo.n
    ctx = RankContext(n)
    half = n * n * (n - 1) // 2
    terms: dict[DiagramWord, LaurentPoly] = {}
    for word, coeff in combo.terms.items():
        scale = ctx.one()
        layers: list[tuple[int, Generator]] = []
        for off, gen in word.layers:
            if gen.kind == "src":
                scale = scale * ctx.monomial(half)
                layers.append((off, tag(True, UP, "L")))
                layers.extend(left_split_comb(n, off))
            elif gen.kind == "snk":
                scale = scale * ctx.monomial(half)
                layers.extend(left_merge_comb(n, off))
                layers.append((off, tag(False, UP, "L")))
            else:
                layers.append((off, gen))
        new_word = DiagramWord(MIXED, n, word.dom, tuple(layers))
        terms[new_word] = terms.get(new_word, ctx.zero()) + coeff * scale
    return LinCombo(MIXED, n, combo.dom, combo.cod, terms)


_CYCLE = object()  # dead under the current ancestry only
_STUCK = object()  # dead regardless of ancestry; safe to memoize


class _ClosedEvaluator:
    """Backtracking evaluator for closed words.

    Words are canonicalized under layer commutation before lookup, so
    interleaving noise shares one memo entry.  A cycle (a word reappearing
    in its own reduction ancestry) makes the evaluator back off and try
    another redex, so rule pairs that are mutually inverse cannot loop.
    Dead ends that never touched the ancestry are stuck everywhere and are
    memoized as such.
    """

    def __init__(self, ctx, index, rng, budget, window, choices=None):
        self.ctx = ctx
        self.index = index
        self.rng = rng
        self.budget = budget
        self.window = window
        self.steps = 0
        self.memo: dict[str, LaurentPoly] = {}
        self.stuck: set[str] = set()
        self.trace_steps: list[dict] = []
        self.dead_ends: list[str] = []
        self.choices = choices  # digest -> (rule_id, seed_start) for replay
        self.rules_by_id: dict[str, RewriteRule] = {}

    def eval_word(self, word: DiagramWord, stack: set[str]):
        if not word.layers:
            return self.ctx.one()
        word = canonical_word(word)
        key = word.text()
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if key in self.stuck:
            return _STUCK
        if key in stack:
            return _CYCLE
        if self.choices is not None:
            candidates = [self._replay_redex(word)]
        else:
            tier0, tier1 = _collect_tiers(word, self.index, self.window)
            self.rng.shuffle(tier0)
            self.rng.shuffle(tier1)
            candidates = tier0 + tier1
            if not candidates:
                if len(self.dead_ends) < 8:
                    self.dead_ends.append(word.text())
                self.stuck.add(key)
                return _STUCK
        stack.add(key)
        cycle_seen = False
        try:
            for redex in candidates:
                self.steps += 1
                if self.steps > self.budget:
                    raise BudgetExhausted(
                        f"evaluation exceeded {self.budget} steps"
                    )
                acc = self.ctx.zero()
                dead = None
                for part, coeff in splice(redex).terms.items():
                    val = self.eval_word(part, stack)
                    if val is _CYCLE or val is _STUCK:
                        dead = val
                        break
                    acc = acc + coeff * val
                if dead is not None:
                    cycle_seen = cycle_seen or dead is _CYCLE
                    continue
                if redex.rule.den is not None:
                    acc = acc.exact_div(redex.rule.den)
                self.memo[key] = acc
                self.trace_steps.append(
                    {
                        "rule": redex.rule.rule_id,
                        "word": _word_digest(word),
                        "seed_start": redex.seed_start,
                        "start": redex.start,
                        "shift": redex.shift,
                    }
                )
                return acc
        finally:
            stack.discard(key)
        if not cycle_seen:
            self.stuck.add(key)
            return _STUCK
        return _CYCLE

    def _replay_redex(self, word: DiagramWord) -> Redex:
        digest = _word_digest(word)
        entry = self.choices.get(digest)
        if entry is None:
            raise RewriteError(f"replay has no recorded step for word {digest}")
        rule_id, seed_start = entry
        rule = self.rules_by_id[rule_id]
        redex = try_match_at(word, rule, seed_start, window=self.window)
        if redex is None:
            raise RewriteError(f"replay failed to re-find redex {rule_id}")
        return redex


def _flatten_crossings(combo: LinCombo, ctx: RankContext, seed: int) -> LinCombo:
    """Erase every crossing by braid expansion.  Deterministic for a fixed
    seed and always terminates: each replacement is crossing-free."""
    braid = _braid_rules(ctx)
    out = combo.zero_like()
    for word, coeff in combo.terms.items():
        if any(gen.kind == "x" for _, gen in word.layers):
            flat, den, _ = reduce_fully(word, rules=braid, seed=seed)
            if not (den == ctx.one()):
                raise RewriteError("crossing expansion produced a denominator")
            out = out + flat.scale(coeff)
        else:
            out = out + LinCombo.of(word, coeff)
    return out


def evaluate_closed(
    x,
    *,
    seed: int = 0,
    budget: int = 10**6,
    rules=None,
    window: int = MATCH_WINDOW,
    return_trace: bool = False,
):
    """Exact value of a closed diagram (or combination) as a Laurent
    polynomial.  Raises on non-closed input, on a stuck reduction, and on
    budget exhaustion; never silently returns a partial answer.

    With the default rule set, crossings are expanded away first and the
    backtracking pass runs on web rules alone; an explicit rules argument
    skips that split and drives the whole evaluation with what was given.
    """
    combo = _as_combo(x)
    if combo.dom or combo.cod:
        raise DiagramTypeError(
            f"evaluate_closed needs a closed diagram, got {combo.dom} -> {combo.cod}"
        )
    ctx = RankContext(combo.n)
    mixed = upcast_exotic(combo)
    if rules is None:
        mixed = _flatten_crossings(mixed, ctx, seed)
        rules = _web_eval_rules(ctx)
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    evaluator = _ClosedEvaluator(
        ctx, _index_rules(rules), random.Random(seed), budget, window
    )
    total = ctx.zero()
    for word, coeff in mixed.terms.items():
        val = evaluator.eval_word(word, set())
        if val is _CYCLE or val is _STUCK:
            detail = "\n--\n".join(evaluator.dead_ends)
            raise ReductionStuck(
                "every reduction path dead-ends for word:\n"
                f"{word.text()}\nunmatched forms reached:\n{detail}"
            )
        total = total + coeff * val
    if return_trace:
        trace = ReductionTrace(seed=seed, steps=evaluator.trace_steps, value=total)
        return total, trace
    return total


def replay_evaluation(x, trace: ReductionTrace, *, rules=None) -> LaurentPoly:
    """Re-run a recorded closed evaluation following its step choices."""
    combo = _as_combo(x)
    ctx = RankContext(combo.n)
    mixed = upcast_exotic(combo)
    if rules is None:
        mixed = _flatten_crossings(mixed, ctx, trace.seed)
        rules = _web_eval_rules(ctx)
    choices = {step["word"]: (step["rule"], step["seed_start"]) for step in trace.steps}
    evaluator = _ClosedEvaluator(
        ctx, _index_rules(rules), random.Random(trace.seed), 10**9, MATCH_WINDOW,
        choices=choices,
    )
    evaluator.rules_by_id = {r.rule_id: r for r in rules}
    total = ctx.zero()
    for word, coeff in mixed.terms.items():
        val = evaluator.eval_word(word, set())
        if val is _CYCLE or val is _STUCK:
            raise RewriteError("replay dead-ended")
        total = total + coeff * val
    return total


_KINK_CACHE: dict[tuple[int, int, int], LaurentPoly] = {}


def kink_scalar(
    ctx: RankContext, k: int = 1, sign: int = 1, *, _rules=None
) -> LaurentPoly:
    """Scalar of a curl on a color-k strand, computed by the engine.

    Closing the curled strand and dividing out the circle value pins the
    framing normalization."""
    key = (ctx.n, k, sign)
    if key in _KINK_CACHE:
        return _KINK_CACHE[key]
    word = DiagramWord(
        MIXED,
        ctx.n,
        (),
        (
            (0, cup(k, True)),
            (1, cup(k, True)),
            (0, crossing(k, k, sign)),
            (1, cap(k, True)),
            (0, cap(k, True)),
        ),
    )
    value = evaluate_closed(word, rules=_rules or _base_eval_rules(ctx))
    value = value.exact_div(qbinom(ctx, ctx.n, k))
    _KINK_CACHE[key] = value
    return value


# ---------------------------------------------------------------------------
# certification


@dataclass(frozen=True)
class RuleReport:
    rule_id: str
    rank: int
    checked: bool
    ok: bool | None
    detail: str = ""

    def line(self) -> str:
        status = "SKIP" if not self.checked else ("ok" if self.ok else "FAIL")
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status:4s} n={self.rank} {self.rule_id}{extra}"


def check_rule_numeric(rule: RewriteRule, ctx: RankContext | None = None) -> RuleReport:
    """Compare both sides of a rule as representation matrices.

    Rules above the oracle's rank cap are reported unchecked rather than
    silently trusted."""
    if ctx is not None and ctx.n != rule.n:
        raise ValueError("context rank differs from rule rank")
    if rule.n > ORACLE_MAX_RANK:
        return RuleReport(rule.rule_id, rule.n, False, None, "rank above oracle cap")
    lhs = LinCombo.of(rule.lhs_word())
    if rule.den is not None:
        lhs = lhs.scale(rule.den)
    ok = combos_equal(lhs, rule.rhs_combo())
    return RuleReport(rule.rule_id, rule.n, True, ok, "" if ok else "matrix mismatch")


def certify_rules(rules, ctx: RankContext | None = None) -> list[RuleReport]:
    return [check_rule_numeric(rule, ctx) for rule in rules]


# ---------------------------------------------------------------------------
# re-derivation of the square-switch relations from crossings


@dataclass
class DerivationCase:
    name: str
    zone: tuple[int, int]
    ok: bool
    note: str = ""
    scale: LaurentPoly | None = None

    def line(self) -> str:
        status = "ok" if self.ok else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"{status:4s} {self.name} zone={self.zone}{extra}"


@dataclass
class DerivationReport:
    n: int
    cases: list[DerivationCase]

    @property
    def ok(self) -> bool:
        return all(case.ok for case in self.cases)

    def text(self) -> str:
        lines = [f"square-switch derivation at n={self.n}"]
        lines += ["  " + case.line() for case in self.cases]
        lines.append("  all derived" if self.ok else "  DERIVATION FAILED")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "ok": self.ok,
            "cases": [
                {
                    "name": c.name,
                    "zone": list(c.zone),
                    "ok": c.ok,
                    "note": c.note,
                }
                for c in self.cases
            ],
        }


def _proportionality(left: LinCombo, right: LinCombo) -> LaurentPoly | None:
    """Monomial u with left == right * u, or None."""
    if set(left.terms) != set(right.terms):
        return None
    unit = None
    for word, lc in left.terms.items():
        rc = right.terms[word]
        try:
            ratio = lc.exact_div(rc)
        except Exception:
            return None
        if unit is None:
            unit = ratio
        elif not (unit == ratio):
            return None
    return unit


def verify_theorem_4(
    ctx: RankContext, *, budget: int = 10**6, negative_control: bool = False
) -> DerivationReport:
    """Re-derive the thin-zone switch relations from crossing expansion.

    Chain, mirroring the proof order: for each thin zone the two-crossing
    composite that straightens under regular isotopy is expanded and
    reduced with bend, bubble, and reassociation rules only; the leftover
    must be a unit multiple of the full-rung switch instance at that zone
    (at j=2 that instance is the familiar single-rung recursion).  Then
    the clasp expansion one rung out is rewritten to zero using the web
    rules plus the derived relations.  The relation list is closed under
    mirror reflection, so deriving one chirality of each zone settles
    both.  Zones with both colors above 1, and sub-maximal rung
    instances, sit outside the two-rung rewrite schema; those stay with
    the numeric certification.  With negative_control set, a crossing
    coefficient is perturbed and the recursion cases must all fail."""
    n = ctx.n
    if n > 4:
        raise ValueError("derivation check is sized for rank <= 4")
    braid = _braid_rules(ctx)
    if negative_control:
        perturbed = []
        for rule in braid:
            if rule.rule_id.startswith("braid[") and rule.rule_id.endswith(",pos]"):
                (c0, w0), *rest = rule.rhs
                rule = RewriteRule(
                    rule_id=rule.rule_id,
                    family=rule.family,
                    n=rule.n,
                    category=rule.category,
                    pattern_dom=rule.pattern_dom,
                    lhs=rule.lhs,
                    rhs=((c0 * ctx.q_power(1), w0),) + tuple(rest),
                    den=rule.den,
                    source=rule.source,
                    tier=rule.tier,
                )
            perturbed.append(rule)
        braid = perturbed
    web = (
        _circle_rules(ctx)
        + _straighten_rules(ctx)
        + _digon_rules(ctx)
        + _leaf_rules(ctx)
        + _assoc_rules(ctx)
    )
    cases = []
    derived: list[RewriteRule] = []
    # stage 1: per zone, the switch instance Reidemeister II forces (full
    # size rungs; at j=2 this is the familiar single-rung recursion)
    for j in range(2, n):
        zone = (j, 1)
        dom = ((j, UP), (1, UP))
        seed_word = DiagramWord(
            MIXED,
            n,
            dom,
            ((0, crossing(j, 1, 1)), (0, crossing(1, j, -1))),
        )
        expanded, den1, _ = reduce_fully(seed_word, rules=braid, seed=0, budget=budget)
        reduced, den2, _ = reduce_fully(expanded, rules=web, seed=0, budget=budget)
        den = den1 * den2
        residue = reduced - LinCombo.of(DiagramWord(MIXED, n, dom, ()), den)
        reference = _ladder_rule(
            ctx, j, 1, j - 1, j - 1, mirror=False, family="box", source="relation"
        )
        name = f"recursion[j={j}]"
        if reference is None:
            cases.append(DerivationCase(name, zone, False, "missing switch instance"))
            continue
        ref_residue = LinCombo.of(reference.lhs_word()) - reference.rhs_combo()
        unit = _proportionality(residue, ref_residue)
        ok = unit is not None
        if ok:
            derived.append(reference)
            mirror = _ladder_rule(
                ctx, 1, j, j - 1, j - 1, mirror=True, family="box", source="relation"
            )
            if mirror is not None:
                derived.append(mirror)
        note = "" if ok else f"{len(residue.terms)} residue terms do not match"
        if ok and negative_control:
            note = "control failed to break it"
        cases.append(
            DerivationCase(name, zone, ok != negative_control, note, unit)
        )
    # stage 2: the clasp expansion one rung out, rewritten to zero from the
    # derived relations; deeper inductive steps need moves outside the
    # two-rung schema and stay with the numeric certification
    if not negative_control and n >= 3:
        allowed = tuple(web) + tuple(derived)
        rule = _ladder_rule(
            ctx, 2, 1, 1, 1, mirror=True, family="clasp", source="derived"
        )
        if rule is not None:
            target = LinCombo.of(rule.lhs_word()) - rule.rhs_combo()
            ok = False
            for seed in range(5):
                red, _, _ = reduce_fully(target, rules=allowed, seed=seed, budget=budget)
                if red.is_zero():
                    ok = True
                    break
            note = "" if ok else "difference does not rewrite to zero"
            cases.append(DerivationCase("generalized[2,1]", (2, 1), ok, note))
    return DerivationReport(n, cases)
