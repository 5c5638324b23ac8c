"""Presentation-changing functors between the diagram categories.

Color elimination rewrites every edge of one fixed color into webs of
strictly smaller colors, one color at a time, until only colors 1 and 2
survive; a final pass trades the remaining two-strand fusion bubbles for
crossings, landing in the crossing-only category.  In the other
direction, n-valent sources and sinks are rendered as tagged fusion
trees, and tags are dissolved back into sources and sinks.

Every structural step is an application of a certified rewrite rule.
Normalization scalars that are not Laurent polynomials (the fusion-tree
weight, the factorial denominators of the peeling moves) are carried on
an explicit report object instead of being folded into coefficients;
the reported output equals the image times the reported denominator.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .diagram import (
    CKM,
    DOWN,
    HOMFLY,
    MIXED,
    MOY,
    SIKORA,
    UP,
    DiagramTypeError,
    DiagramWord,
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
from .qalg import LaurentPoly, RankContext, qfact, qint
from .rewrite import (
    RewriteError,
    RewriteRule,
    _braid_rules,
    _ladder_rule,
    builtin_rules,
    certify_rules,
    evaluate_closed,
    make_rule,
    reduce_fully,
    upcast_exotic,
)

__all__ = [
    "FunctorReport",
    "HomflyParams",
    "grading_transport",
    "phi",
    "phi_to_colors12",
    "tau",
    "tau_inv",
    "to_homfly",
    "verify_functors",
]


# ---------------------------------------------------------------------------
# small helpers


def _as_combo(x) -> LinCombo:
    if isinstance(x, LinCombo):
        return x
    if isinstance(x, DiagramWord):
        return LinCombo.of(x)
    raise TypeError(f"expected a diagram word or combination, got {type(x).__name__}")


def _unit_inverse(p: LaurentPoly) -> LaurentPoly:
    ((units, coeff),) = p.terms.items()
    if coeff not in (1, -1):
        raise ValueError("inverse needs a unit monomial")
    return LaurentPoly({-units: coeff}, p.denom)


def _is_unit(p: LaurentPoly) -> bool:
    return len(p.terms) == 1 and abs(next(iter(p.terms.values()))) == 1


def _word_colors(word: DiagramWord) -> set[int]:
    # every edge is visible in at least one horizontal slice
    out: set[int] = set()
    for boundary in word.boundaries():
        out.update(c for c, _ in boundary)
    return out


def _combo_colors(combo: LinCombo) -> set[int]:
    out: set[int] = set()
    for word in combo.terms:
        out.update(_word_colors(word))
    return out


def _digest(combo: LinCombo) -> str:
    blob = [combo.category, combo.n]
    for word in sorted(combo.terms, key=lambda w: w.text()):
        blob.append(word.text())
        blob.append(combo.terms[word].to_json())
    raw = json.dumps(blob, sort_keys=True).encode()
    return hashlib.sha256(raw).hexdigest()[:16]


def _check_unit_boundary(combo: LinCombo) -> None:
    for boundary in (combo.dom, combo.cod):
        for color, _ in boundary:
            if color >= 2:
                raise DiagramTypeError(
                    f"boundary carries color {color}; only color-1 boundaries translate"
                )


def _crossing_colors(combo: LinCombo) -> set[tuple[int, int]]:
    out = set()
    for word in combo.terms:
        for _, gen in word.layers:
            if gen.kind == "x":
                out.add(gen.colors)
    return out


# ---------------------------------------------------------------------------
# parameter records and reports


@dataclass(frozen=True)
class HomflyParams:
    """The three unit parameters of the two-variable skein, as Laurent
    monomials in the working root of q.  The specialized instance sends
    a to q^(-1/n), s to q and v to q^(-n)."""

    a: LaurentPoly
    s: LaurentPoly
    v: LaurentPoly

    def __post_init__(self):
        for name, p in (("a", self.a), ("s", self.s), ("v", self.v)):
            if not _is_unit(p):
                raise ValueError(f"parameter {name} must be a unit monomial")
        if self.skein_gap().is_zero():
            raise ValueError("s - 1/s vanishes; the skein relation degenerates")

    @classmethod
    def standard(cls, ctx: RankContext) -> "HomflyParams":
        return cls(
            a=ctx.q_power(-1, ctx.n),
            s=ctx.q_power(1),
            v=ctx.q_power(-ctx.n),
        )

    def skein_gap(self) -> LaurentPoly:
        return self.s - _unit_inverse(self.s)


@dataclass(frozen=True)
class FunctorReport:
    """Result of one functor application.

    output equals the image of the input scaled by den, so callers that
    need the bare image divide evaluations by den; scalars lists the
    normalizations applied, rendered as text, for audit and replay."""

    op: str
    n: int
    input_digest: str
    output: LinCombo
    den: LaurentPoly
    scalars: tuple[tuple[str, str], ...] = ()

    @property
    def exact(self) -> bool:
        return self.den == RankContext(self.n).one()

    def folded(self) -> LinCombo:
        if not self.exact:
            raise RewriteError(
                f"{self.op} carries denominator {self.den.to_json()}; "
                "use output and den separately"
            )
        return self.output

    def to_json(self) -> dict:
        return {
            "op": self.op,
            "n": self.n,
            "input": self.input_digest,
            "den": self.den.to_json(),
            "scalars": [list(pair) for pair in self.scalars],
            "output": self.output.to_json(),
        }


def _report(op, combo, output, den, scalars=()) -> FunctorReport:
    return FunctorReport(
        op=op,
        n=combo.n,
        input_digest=_digest(combo),
        output=output,
        den=den,
        scalars=tuple(scalars),
    )


# ---------------------------------------------------------------------------
# the color-elimination rule set
#
# After normalization every edge of the target color i runs from a
# merge((i-1),1) below to a split((i-1),1) above, and the mirror rung
# identity on the zone (i-1, 1) opens that pair into webs of colors
# < i: a double rung minus [i-2] times the identity.  Peeling moves
# bring arbitrary fork shapes into the normalized form at the cost of a
# quantum-integer denominator, and full-color bends are first widened
# into a bend of color i-1 next to a bend of color 1.


def _peel_merge_rule(ctx: RankContext, a: int, b: int, direction: int) -> RewriteRule:
    i = a + b
    tail = ",down" if direction == DOWN else ""
    return make_rule(
        rule_id=f"phi-peel[merge,a={a},b={b}{tail}]",
        family="phi-peel",
        ctx=ctx,
        category=MIXED,
        pattern_dom=((a, direction), (b, direction)),
        lhs=((0, merge(a, b, direction)),),
        rhs=(
            (
                ctx.one(),
                (
                    (1, split(b - 1, 1, direction)),
                    (0, merge(a, b - 1, direction)),
                    (0, merge(i - 1, 1, direction)),
                ),
            ),
        ),
        den=qint(ctx, b),
        source="derived",
        tier=1,
    )


def _peel_split_rule(ctx: RankContext, c: int, d: int, direction: int) -> RewriteRule:
    i = c + d
    tail = ",down" if direction == DOWN else ""
    return make_rule(
        rule_id=f"phi-peel[split,c={c},d={d}{tail}]",
        family="phi-peel",
        ctx=ctx,
        category=MIXED,
        pattern_dom=((i, direction),),
        lhs=((0, split(c, d, direction)),),
        rhs=(
            (
                ctx.one(),
                (
                    (0, split(i - 1, 1, direction)),
                    (0, split(c, d - 1, direction)),
                    (1, merge(d - 1, 1, direction)),
                ),
            ),
        ),
        den=qint(ctx, d),
        source="derived",
        tier=1,
    )


def _thicken_layers(i: int, kind: str, flag: bool):
    """A full-color bend widened into an (i-1)-bend nested with a 1-bend."""
    if kind == "cup" and flag:
        return (
            (0, cup(i - 1, True)),
            (1, cup(1, True)),
            (0, merge(i - 1, 1, UP)),
            (1, merge(1, i - 1, DOWN)),
        )
    if kind == "cup":
        return (
            (0, cup(i - 1, False)),
            (1, cup(1, False)),
            (0, merge(i - 1, 1, DOWN)),
            (1, merge(1, i - 1, UP)),
        )
    if kind == "cap" and flag:
        return (
            (0, split(i - 1, 1, UP)),
            (2, split(1, i - 1, DOWN)),
            (1, cap(1, True)),
            (0, cap(i - 1, True)),
        )
    return (
        (0, split(i - 1, 1, DOWN)),
        (2, split(1, i - 1, UP)),
        (1, cap(1, False)),
        (0, cap(i - 1, False)),
    )


_THICKEN_SCALE: dict[tuple[int, int, str, bool], LaurentPoly] = {}


def _thicken_scalar(ctx: RankContext, i: int, kind: str, flag: bool) -> LaurentPoly:
    """Proportionality constant between a full-color bend and its widened
    form, pinned by closing both against the opposite bend."""
    key = (ctx.n, i, kind, flag)
    if key not in _THICKEN_SCALE:
        circle = DiagramWord(
            MIXED, ctx.n, (), ((0, cup(i, flag)), (0, cap(i, flag)))
        )
        wide = _thicken_layers(i, kind, flag)
        if kind == "cup":
            closed = DiagramWord(MIXED, ctx.n, (), wide + ((0, cap(i, flag)),))
        else:
            closed = DiagramWord(MIXED, ctx.n, (), ((0, cup(i, flag)),) + wide)
        value = evaluate_closed(closed)
        _THICKEN_SCALE[key] = value.exact_div(evaluate_closed(circle))
    return _THICKEN_SCALE[key]


def _thicken_rule(ctx: RankContext, i: int, kind: str, flag: bool) -> RewriteRule:
    gen = cup(i, flag) if kind == "cup" else cap(i, flag)
    dom = () if kind == "cup" else gen.dom(ctx.n)
    scale = _thicken_scalar(ctx, i, kind, flag)
    layers = _thicken_layers(i, kind, flag)
    if _is_unit(scale):
        rhs = ((_unit_inverse(scale), layers),)
        den = None
    else:
        rhs = ((ctx.one(), layers),)
        den = scale
    return make_rule(
        rule_id=f"phi-widen[{kind},i={i},{'ud' if flag else 'du'}]",
        family="phi-widen",
        ctx=ctx,
        category=MIXED,
        pattern_dom=dom,
        lhs=((0, gen),),
        rhs=rhs,
        den=den,
        source="derived",
        tier=1,
    )


_PHI_RULES: dict[tuple[int, int], tuple[RewriteRule, ...]] = {}


def _phi_rules(ctx: RankContext, i: int) -> tuple[RewriteRule, ...]:
    key = (ctx.n, i)
    if key not in _PHI_RULES:
        rules: list[RewriteRule] = []
        for direction in (UP, DOWN):
            opener = _ladder_rule(
                ctx,
                i - 1,
                1,
                1,
                1,
                mirror=True,
                family="phi-open",
                source="derived",
                direction=direction,
            )
            if opener is None:
                raise RewriteError(f"no opening rule at color {i}, rank {ctx.n}")
            rules.append(opener)
            for b in range(2, i):
                rules.append(_peel_merge_rule(ctx, i - b, b, direction))
                rules.append(_peel_split_rule(ctx, i - b, b, direction))
        for flag in (True, False):
            rules.append(_thicken_rule(ctx, i, "cup", flag))
            rules.append(_thicken_rule(ctx, i, "cap", flag))
        _PHI_RULES[key] = tuple(rules)
    return _PHI_RULES[key]


def phi(i: int, d, *, seed: int = 0, budget: int = 10**6) -> FunctorReport:
    """Eliminate every color-i edge, the identity on smaller colors.

    Diagrams without color-i material pass through untouched.  Crossings
    that involve color i are expanded first, which is only possible at
    the top color where the ladder expansion cannot overflow; below the
    top color, route such inputs through phi_to_colors12 instead.
    """
    combo = _as_combo(d)
    ctx = RankContext(combo.n)
    if not 3 <= i <= ctx.n:
        raise ValueError(f"color elimination needs 3 <= i <= n, got i={i} at n={ctx.n}")
    _check_unit_boundary(combo)
    colors = _combo_colors(combo)
    high = {c for c in colors if c > i}
    if high:
        raise DiagramTypeError(f"input carries colors {sorted(high)} above i={i}")
    if i not in colors:
        return _report("phi", combo, combo, ctx.one(), (("i", str(i)), ("action", "identity")))
    scalars = [("i", str(i))]
    den = ctx.one()
    work = combo
    touching = {pair for pair in _crossing_colors(combo) if i in pair}
    if touching:
        if i < ctx.n:
            raise ValueError(
                f"crossings of colors {sorted(touching)} touch color {i} below the "
                "top color; use phi_to_colors12"
            )
        work, dflat, _ = reduce_fully(
            work, rules=_braid_rules(ctx, colors=sorted(touching)), seed=seed, budget=budget
        )
        den = den * dflat
        scalars.append(("crossings expanded", str(sorted(touching))))
    out, dphi, _ = reduce_fully(work, rules=_phi_rules(ctx, i), seed=seed, budget=budget)
    den = den * dphi
    left = {c for c in _combo_colors(out) if c >= i}
    if left:
        raise RewriteError(f"color {sorted(left)} survived elimination at i={i}")
    scalars.append(("den", json.dumps(den.to_json())))
    return _report("phi", combo, out, den, scalars)


def phi_to_colors12(d, *, seed: int = 0, budget: int = 10**6) -> FunctorReport:
    """Descend through phi at every color from n down to 3.

    Crossings wider than (1, 1) are expanded once at the ambient rank
    before the descent; (1, 1) crossings survive to the output.
    """
    combo = _as_combo(d)
    ctx = RankContext(combo.n)
    _check_unit_boundary(combo)
    scalars = []
    den = ctx.one()
    work = combo
    wide = sorted(pair for pair in _crossing_colors(combo) if pair != (1, 1))
    if wide:
        work, dflat, _ = reduce_fully(
            work, rules=_braid_rules(ctx, colors=wide), seed=seed, budget=budget
        )
        den = den * dflat
        scalars.append(("crossings expanded", str(wide)))
    for i in range(ctx.n, 2, -1):
        if i not in _combo_colors(work):
            continue
        stage = phi(i, work, seed=seed, budget=budget)
        work = stage.output
        den = den * stage.den
        scalars.append((f"phi[{i}] den", json.dumps(stage.den.to_json())))
    left = {c for c in _combo_colors(work) if c >= 3}
    if left:
        raise RewriteError(f"colors {sorted(left)} survived the descent")
    return _report("phi_to_colors12", combo, work, den, scalars)


# ---------------------------------------------------------------------------
# the bridge to the crossing-only category


_COLOR1_RULES: dict[int, tuple[RewriteRule, ...]] = {}


def _fuse_rules(ctx: RankContext) -> list[RewriteRule]:
    """The two-strand fusion bubble as a crossing combination, read off by
    inverting the braid expansion at colors (1, 1)."""
    braid_pos = _braid_rules(ctx, colors=[(1, 1)])[0]
    c_id = c_bubble = None
    for coeff, layers in braid_pos.rhs:
        if layers:
            c_bubble = coeff
        else:
            c_id = coeff
    if c_id is None or c_bubble is None:
        raise RewriteError("unexpected shape of the (1,1) braid expansion")
    inv = _unit_inverse(c_bubble)
    rules = [
        make_rule(
            rule_id="fuse-x[up]",
            family="fuse-x",
            ctx=ctx,
            category=MIXED,
            pattern_dom=((1, UP), (1, UP)),
            lhs=((0, merge(1, 1)), (0, split(1, 1))),
            rhs=(
                (inv, ((0, crossing(1, 1, 1)),)),
                (c_id * inv * -1, ()),
            ),
            source="derived",
            tier=1,
        )
    ]
    # the same identity on downward strands, the crossing rotated in place
    bent = (
        (2, cup(1, True)),
        (3, cup(1, True)),
        (2, crossing(1, 1, 1)),
        (1, cap(1, False)),
        (0, cap(1, False)),
    )
    rules.append(
        make_rule(
            rule_id="fuse-x[down]",
            family="fuse-x",
            ctx=ctx,
            category=MIXED,
            pattern_dom=((1, DOWN), (1, DOWN)),
            lhs=((0, merge(1, 1, DOWN)), (0, split(1, 1, DOWN))),
            rhs=(
                (inv, bent),
                (c_id * inv * -1, ()),
            ),
            source="derived",
            tier=1,
        )
    )
    return rules


def _color1_rules(ctx: RankContext) -> tuple[RewriteRule, ...]:
    if ctx.n not in _COLOR1_RULES:
        rules = _fuse_rules(ctx)
        for flag in (True, False):
            rules.append(_thicken_rule(ctx, 2, "cup", flag))
            rules.append(_thicken_rule(ctx, 2, "cap", flag))
        _COLOR1_RULES[ctx.n] = tuple(rules)
    return _COLOR1_RULES[ctx.n]


def to_homfly(d, *, seed: int = 0, budget: int = 10**6) -> FunctorReport:
    """Re-express a web of colors at most 2 in the crossing-only category.

    Color-2 edges are eliminated by trading each fusion bubble for a
    crossing; what remains is relabeled strand for strand."""
    combo = _as_combo(d)
    ctx = RankContext(combo.n)
    _check_unit_boundary(combo)
    colors = _combo_colors(combo)
    high = {c for c in colors if c > 2}
    if high:
        raise DiagramTypeError(
            f"colors {sorted(high)} present; run phi_to_colors12 first"
        )
    bad_x = {pair for pair in _crossing_colors(combo) if pair != (1, 1)}
    if bad_x:
        raise DiagramTypeError(f"crossings {sorted(bad_x)} are wider than (1, 1)")
    out, den, _ = reduce_fully(combo, rules=_color1_rules(ctx), seed=seed, budget=budget)
    left = {c for c in _combo_colors(out) if c >= 2}
    if left:
        raise RewriteError("a color-2 edge survived the bridge")
    terms = {}
    for word, coeff in out.terms.items():
        terms[word.with_category(HOMFLY)] = coeff
    relabeled = LinCombo(HOMFLY, combo.n, combo.dom, combo.cod, terms)
    return _report("to_homfly", combo, relabeled, den)


# ---------------------------------------------------------------------------
# tangles to tagged webs and back


_SIKORA_KINDS = {"cup", "cap", "x", "src", "snk"}


def tau(d, ctx: RankContext | None = None) -> FunctorReport:
    """Render an n-valent tangle as a tagged web.

    Cups, caps and crossings keep their color-1 shapes; every source
    becomes the left-leaning fusion tree under a birth tag, every sink
    the mirrored tree over a kill tag, each weighted by the fusion-tree
    monomial.  The translation is layer-local, so it is a strict functor
    for both composition and juxtaposition."""
    combo = _as_combo(d)
    if ctx is not None and ctx.n != combo.n:
        raise ValueError("context rank differs from the diagram rank")
    n = combo.n
    for word in combo.terms:
        for _, gen in word.layers:
            if gen.kind not in _SIKORA_KINDS:
                raise DiagramTypeError(f"{gen.kind} is not a tangle generator")
            if any(c != 1 for c in gen.colors):
                raise DiagramTypeError("tangle strands are color 1")
    mixed = upcast_exotic(combo)
    terms = {word.with_category(CKM): coeff for word, coeff in mixed.terms.items()}
    out = LinCombo(CKM, n, mixed.dom, mixed.cod, terms)
    half = n * n * (n - 1) // 2
    weight = RankContext(n).monomial(half)
    return _report(
        "tau", combo, out, RankContext(n).one(),
        (("fusion-tree weight", json.dumps(weight.to_json())),),
    )


def grading_transport(d) -> int:
    """Net source count, the grading a translation preserves."""
    combo = _as_combo(d)
    grades = {word.grading() for word in combo.terms}
    if not grades:
        return 0
    if len(grades) != 1:
        raise DiagramTypeError("terms carry different gradings")
    return grades.pop()


def _tag_block(n: int, off: int, gen) -> tuple[LaurentPoly, int, list]:
    """Replacement layers for one tag, with its scalar weight.

    Returns (coefficient, factorial exponent, layers).  A side switch
    next to the full fork costs the usual parity sign."""
    ctx = RankContext(n)
    h = n * n * (n - 1) // 2
    weight = ctx.monomial(-h)
    if gen.side == "R" and (n - 1) % 2:
        weight = weight * -1
    if gen.flag and gen.direction == UP:
        return weight, 1, [(off, source())] + left_merge_comb(n, off)
    if not gen.flag and gen.direction == UP:
        return weight, 1, left_split_comb(n, off) + [(off, sink())]
    if gen.flag:  # a downward birth bends an upward kill around a cup
        layers = [(off, cup(n, True))] + left_split_comb(n, off) + [(off, sink())]
        return weight, 1, layers
    layers = [(off, source())] + left_merge_comb(n, off) + [(off, cap(n, True))]
    return weight, 1, layers


def tau_inv(d, ctx: RankContext | None = None, *, seed: int = 0, budget: int = 10**6) -> FunctorReport:
    """Translate a tagged web over a color-1 boundary back to a tangle.

    Tags dissolve first: each one is cut off its full-color edge by a
    fork pair, leaving a source or sink next to untagged full-color
    material.  The remaining colors are then eliminated by the descent
    and the fusion-bubble bridge, so only color-1 strands, crossings,
    sources and sinks survive."""
    combo = _as_combo(d)
    if ctx is not None and ctx.n != combo.n:
        raise ValueError("context rank differs from the diagram rank")
    n = combo.n
    rk = RankContext(n)
    _check_unit_boundary(combo)
    scalars = []
    bang = qfact(rk, n)
    # stage 1: every tag becomes a source or sink behind a full fork
    staged: dict[DiagramWord, LaurentPoly] = {}
    tag_counts: dict[DiagramWord, int] = {}
    max_tags = 0
    for word, coeff in combo.terms.items():
        layers: list = []
        count = 0
        for off, gen in word.layers:
            if gen.kind != "tag":
                layers.append((off, gen))
                continue
            weight, uses, block = _tag_block(n, off, gen)
            coeff = coeff * weight
            count += uses
            layers.extend(block)
        new_word = DiagramWord(MIXED, n, word.dom, tuple(layers))
        staged[new_word] = staged.get(new_word, rk.zero()) + coeff
        tag_counts[new_word] = count
        max_tags = max(max_tags, count)
    den = bang ** max_tags
    if max_tags:
        scalars.append(("tag fork denominator", json.dumps(den.to_json())))
    terms = {
        word: coeff * bang ** (max_tags - tag_counts[word])
        for word, coeff in staged.items()
    }
    work = LinCombo(MIXED, n, combo.dom, combo.cod, terms)
    # stage 2: expand crossings wider than (1, 1) at the ambient rank
    wide = sorted(pair for pair in _crossing_colors(work) if pair != (1, 1))
    if wide:
        work, dflat, _ = reduce_fully(
            work, rules=_braid_rules(rk, colors=wide), seed=seed, budget=budget
        )
        den = den * dflat
        scalars.append(("crossings expanded", str(wide)))
    # stage 3: color descent, then the fusion-bubble bridge
    for i in range(n, 2, -1):
        if i not in _combo_colors(work):
            continue
        work, dstage, _ = reduce_fully(
            work, rules=_phi_rules(rk, i), seed=seed, budget=budget
        )
        den = den * dstage
        scalars.append((f"descent[{i}] den", json.dumps(dstage.to_json())))
    if 2 in _combo_colors(work):
        work, dtwo, _ = reduce_fully(
            work, rules=_color1_rules(rk), seed=seed, budget=budget
        )
        den = den * dtwo
    left = {c for c in _combo_colors(work) if c >= 2}
    if left:
        raise RewriteError(f"colors {sorted(left)} survived the translation")
    terms = {word.with_category(SIKORA): coeff for word, coeff in work.terms.items()}
    out = LinCombo(SIKORA, n, work.dom, work.cod, terms)
    return _report("tau_inv", combo, out, den, scalars)


# ---------------------------------------------------------------------------
# verification driver


@dataclass(frozen=True)
class FunctorCheck:
    name: str
    n: int
    ok: bool
    note: str = ""

    def line(self) -> str:
        status = "ok" if self.ok else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return f"{status:4s} n={self.n} {self.name}{extra}"


@dataclass
class FunctorsReport:
    cases: list[FunctorCheck]

    @property
    def ok(self) -> bool:
        return all(case.ok for case in self.cases)

    def text(self) -> str:
        lines = ["functor verification"]
        lines += ["  " + case.line() for case in self.cases]
        lines.append("  all checks passed" if self.ok else "  VERIFICATION FAILED")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "cases": [
                {"name": c.name, "n": c.n, "ok": c.ok, "note": c.note}
                for c in self.cases
            ],
        }


def _right_split_comb(m: int, offset: int = 0) -> list:
    return [(offset + k, split(1, m - 1 - k)) for k in range(m - 1)]


def verify_functors(nrange=(2, 3), *, seed: int = 0, samples: int = 4) -> FunctorsReport:
    """Certify the derived rule sets and spot-check the functors against
    the representation oracle at small rank."""
    from . import sampling
    from .oracle import combos_equal
    import random as _random

    cases: list[FunctorCheck] = []
    for n in nrange:
        ctx = RankContext(n)
        rng = _random.Random(seed + 101 * n)
        rules: list[RewriteRule] = list(_color1_rules(ctx))
        for i in range(3, n + 1):
            rules.extend(_phi_rules(ctx, i))
        reports = certify_rules(rules, ctx)
        bad = [r.rule_id for r in reports if r.checked and not r.ok]
        cases.append(
            FunctorCheck(
                "derived translation rules certify",
                n,
                not bad,
                ", ".join(bad[:3]),
            )
        )
        # the tangle relations survive translation
        ok = True
        note = ""
        for rule in builtin_rules(ctx, SIKORA):
            lhs = LinCombo.of(rule.lhs_word())
            if rule.den is not None:
                lhs = lhs.scale(rule.den)
            if not combos_equal(tau(lhs).output, tau(rule.rhs_combo()).output):
                ok = False
                note = rule.rule_id
                break
        cases.append(FunctorCheck("translated tangle relations hold", n, ok, note))
        # round trips preserve evaluation
        ok = True
        note = ""
        for k in range(samples):
            word = sampling.random_closed_tangle(
                n, rng, sources=1 + k % 2, twists=2 + k
            )
            base = evaluate_closed(word)
            rep = tau_inv(tau(word).output, seed=seed)
            value = evaluate_closed(rep.output)
            if value != base * rep.den:
                ok = False
                note = f"sample {k}"
                break
        cases.append(FunctorCheck("round trip preserves evaluation", n, ok, note))
        # gradings agree through the translation
        ok = all(
            grading_transport(w) == grading_transport(tau(w).output)
            for w in (
                DiagramWord(SIKORA, n, (), ((0, source()), (0, sink()))),
                DiagramWord(
                    SIKORA,
                    n,
                    ((1, UP), (1, UP)),
                    ((0, crossing(1, 1, 1)),),
                ),
            )
        )
        cases.append(FunctorCheck("grading agrees with translation", n, ok))
        # the fusion tree is independent of the comb shape
        lw = DiagramWord(
            MIXED, n, (), ((0, tag(True, UP, "L")),) + tuple(left_split_comb(n))
        )
        rw = DiagramWord(
            MIXED, n, (), ((0, tag(True, UP, "L")),) + tuple(_right_split_comb(n))
        )
        cases.append(
            FunctorCheck("fusion tree independent of comb shape", n, combos_equal(lw, rw))
        )
        if n >= 3:
            ok = True
            note = ""
            for k in range(samples):
                web = sampling.random_closed_web(n, rng, crossings=False)
                base = evaluate_closed(web)
                rep = phi_to_colors12(web, seed=seed)
                value = evaluate_closed(rep.output)
                if value != base * rep.den:
                    ok = False
                    note = f"sample {k}"
                    break
            cases.append(FunctorCheck("color descent preserves evaluation", n, ok, note))
    return FunctorsReport(cases)
