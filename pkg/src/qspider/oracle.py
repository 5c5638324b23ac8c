"""Representation-matrix oracle.

Every generator is assigned an explicit sparse matrix over the exact
coefficient ring; diagrams then evaluate by sparse matrix algebra, and any
proposed diagram identity can be certified by comparing both sides' matrices
entry for entry.  This route shares no code with the rewrite engine, which
is the point: the two must agree independently.

The strand of color k carries the k-th fundamental module, modeled on the
lex-ordered k-subsets of {1..n}.  All matrix conventions below are declared
gauge choices, pinned down by the requirements that two-vertex bubbles give
Gaussian binomials, zigzags give identities, and circles give quantum
binomials; the full rule sweep certifies them.

Rank is capped at n <= 3 so exact entries stay cheap.
"""

from __future__ import annotations

import itertools
from math import comb

from .diagram import (
    DOWN,
    UP,
    Boundary,
    DiagramWord,
    Generator,
    LinCombo,
    crossing,
    merge,
    split,
)
from .qalg import (
    LaurentPoly,
    RankContext,
    perm_length,
    positive_braid_word,
    qfact,
)

ORACLE_MAX_RANK = 3


class OracleRangeError(ValueError):
    """Requested rank exceeds what the oracle supports."""


def _check_rank(n: int) -> None:
    if n > ORACLE_MAX_RANK:
        raise OracleRangeError(f"oracle supports n <= {ORACLE_MAX_RANK}, got {n}")


# -- basis bookkeeping -------------------------------------------------------

Subset = tuple[int, ...]


def subsets(n: int, k: int) -> list[Subset]:
    """Lex-ordered k-subsets of {1..n}; the basis of the color-k strand."""
    return list(itertools.combinations(range(1, n + 1), k))


_INDEX_CACHE: dict[tuple[int, int], dict[Subset, int]] = {}


def subset_index(n: int, k: int) -> dict[Subset, int]:
    key = (n, k)
    if key not in _INDEX_CACHE:
        _INDEX_CACHE[key] = {s: i for i, s in enumerate(subsets(n, k))}
    return _INDEX_CACHE[key]


def strand_dim(n: int, strand: tuple[int, int]) -> int:
    return comb(n, strand[0])


def boundary_dim(n: int, boundary: Boundary) -> int:
    d = 1
    for s in boundary:
        d *= strand_dim(n, s)
    return d


def inversions_between(s: Subset, t: Subset) -> int:
    return sum(1 for a in s for b in t if a > b)


def weight_units(n: int, s: Subset) -> int:
    """Lattice units of the duality weight q^sum((n+1-2i)/2) over i in s."""
    return n * sum(n + 1 - 2 * i for i in s)


# -- sparse matrices -----------------------------------------------------------


class RepMatrix:
    """Sparse matrix with LaurentPoly entries; zero entries are absent."""

    __slots__ = ("rows", "cols", "denom", "entries")

    def __init__(self, rows: int, cols: int, denom: int, entries=None):
        self.rows = rows
        self.cols = cols
        self.denom = denom
        self.entries: dict[tuple[int, int], LaurentPoly] = {}
        if entries:
            for (r, c), v in entries.items():
                self.set(r, c, v)

    def set(self, r: int, c: int, value: LaurentPoly) -> None:
        if not 0 <= r < self.rows or not 0 <= c < self.cols:
            raise IndexError((r, c))
        if value.is_zero():
            self.entries.pop((r, c), None)
        else:
            self.entries[(r, c)] = value

    def get(self, r: int, c: int) -> LaurentPoly:
        return self.entries.get((r, c), LaurentPoly({}, self.denom))

    @classmethod
    def identity(cls, dim: int, denom: int) -> RepMatrix:
        out = cls(dim, dim, denom)
        one = LaurentPoly({0: 1}, denom)
        for i in range(dim):
            out.entries[(i, i)] = one
        return out

    def __matmul__(self, other: RepMatrix) -> RepMatrix:
        if self.cols != other.rows or self.denom != other.denom:
            raise ValueError("shape or lattice mismatch in matrix product")
        by_row: dict[int, list[tuple[int, LaurentPoly]]] = {}
        for (k, c), v in other.entries.items():
            by_row.setdefault(k, []).append((c, v))
        acc: dict[tuple[int, int], LaurentPoly] = {}
        for (r, k), u in self.entries.items():
            for c, v in by_row.get(k, ()):
                key = (r, c)
                prod = u * v
                cur = acc.get(key)
                acc[key] = prod if cur is None else cur + prod
        out = RepMatrix(self.rows, other.cols, self.denom)
        for key, v in acc.items():
            if not v.is_zero():
                out.entries[key] = v
        return out

    def tensor(self, other: RepMatrix) -> RepMatrix:
        out = RepMatrix(self.rows * other.rows, self.cols * other.cols, self.denom)
        for (r1, c1), u in self.entries.items():
            for (r2, c2), v in other.entries.items():
                out.entries[(r1 * other.rows + r2, c1 * other.cols + c2)] = u * v
        return out

    def __add__(self, other: RepMatrix) -> RepMatrix:
        if (self.rows, self.cols, self.denom) != (other.rows, other.cols, other.denom):
            raise ValueError("shape or lattice mismatch in matrix sum")
        out = RepMatrix(self.rows, self.cols, self.denom, dict(self.entries))
        for key, v in other.entries.items():
            out.set(key[0], key[1], out.get(*key) + v)
        return out

    def scale(self, factor: LaurentPoly | int) -> RepMatrix:
        out = RepMatrix(self.rows, self.cols, self.denom)
        for key, v in self.entries.items():
            w = v * factor
            if not w.is_zero():
                out.entries[key] = w
        return out

    def exact_div(self, divisor: LaurentPoly) -> RepMatrix:
        out = RepMatrix(self.rows, self.cols, self.denom)
        for key, v in self.entries.items():
            out.entries[key] = v.exact_div(divisor)
        return out

    def transpose(self) -> RepMatrix:
        out = RepMatrix(self.cols, self.rows, self.denom)
        for (r, c), v in self.entries.items():
            out.entries[(c, r)] = v
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RepMatrix):
            return NotImplemented
        return (
            (self.rows, self.cols, self.denom) == (other.rows, other.cols, other.denom)
            and self.entries == other.entries
        )

    def is_zero(self) -> bool:
        return not self.entries

    def scalar(self) -> LaurentPoly:
        """The unique entry of a 1x1 matrix (zero if empty)."""
        if (self.rows, self.cols) != (1, 1):
            raise ValueError("not a scalar matrix")
        return self.get(0, 0)

    def __repr__(self) -> str:
        return f"RepMatrix({self.rows}x{self.cols}, {len(self.entries)} entries)"

    def to_json(self) -> dict:
        triplets = [
            [r, c, self.entries[(r, c)].to_json()] for r, c in sorted(self.entries)
        ]
        return {"rows": self.rows, "cols": self.cols, "denom": self.denom, "entries": triplets}

    @classmethod
    def from_json(cls, data: dict) -> RepMatrix:
        out = cls(int(data["rows"]), int(data["cols"]), int(data["denom"]))
        for r, c, pj in data["entries"]:
            out.set(int(r), int(c), LaurentPoly.from_json(pj))
        return out


# -- generator matrices -----------------------------------------------------------
#
# Gauge:
#   merge(k,l):  e_S (x) e_T  ->  q^(inv(S,T) - kl/2) e_{S u T}   (disjoint S,T)
#   split(k,l):  the transpose
#   down-oriented merge/split: the planar half-turn of the up vertex with
#       swapped colors, built from cups and caps (the two bending directions
#       agree, so the choice below is immaterial)
#   cup/cap:     diagonal duality weights q^(+-wt(S)), wt(S) = sum (n+1-2i)/2
#   tag:         1x1; side L -> 1, side R -> (-1)^(n-1)
#   crossings:   never independent data; always the web expansion (see below)
#   src/snk:     scaled tagged comb trees (the translation image)

_GEN_CACHE: dict[tuple[int, Generator], RepMatrix] = {}


def gen_matrix(n: int, gen: Generator) -> RepMatrix:
    _check_rank(n)
    key = (n, gen)
    cached = _GEN_CACHE.get(key)
    if cached is None:
        cached = _build_gen_matrix(n, gen)
        _GEN_CACHE[key] = cached
    return cached


def _merge_matrix(n: int, k: int, l: int) -> RepMatrix:
    d = 2 * n
    rows = subset_index(n, k + l)
    out = RepMatrix(comb(n, k + l), comb(n, k) * comb(n, l), d)
    cols_l = comb(n, l)
    for i_s, s in enumerate(subsets(n, k)):
        ss = set(s)
        for i_t, t in enumerate(subsets(n, l)):
            if ss & set(t):
                continue
            u = tuple(sorted(s + t))
            units = d * inversions_between(s, t) - n * k * l
            out.entries[(rows[u], i_s * cols_l + i_t)] = LaurentPoly({units: 1}, d)
    return out


def _cup_cap_matrix(n: int, gen: Generator) -> RepMatrix:
    (k,) = gen.colors
    d = 2 * n
    dim = comb(n, k)
    # left-up ends carry q^{-wt}, left-down q^{+wt}; the opposite orientation
    # breaks the framing (kinks stop being pure powers of q)
    sign = -1 if gen.flag else 1
    diag = [LaurentPoly({sign * weight_units(n, s): 1}, d) for s in subsets(n, k)]
    if gen.kind == "cup":
        out = RepMatrix(dim * dim, 1, d)
        for i, v in enumerate(diag):
            out.entries[(i * dim + i, 0)] = v
    else:
        out = RepMatrix(1, dim * dim, d)
        for i, v in enumerate(diag):
            out.entries[(0, i * dim + i)] = v
    return out


def _block_swap(k: int, l: int) -> tuple[int, ...]:
    return tuple(i + l for i in range(k)) + tuple(range(l))


def _crossing_word(n: int, k: int, l: int, sign: int) -> DiagramWord:
    """Cable word whose matrix, divided by [k]![l]!, is the crossing."""
    from .diagram import MOY, left_merge_comb, left_split_comb

    layers: list[tuple[int, Generator]] = []
    layers += left_split_comb(l, offset=1)
    layers += left_split_comb(k, offset=0)
    # A word (i_1, ..., i_m) composes top-first, so positive layers run through
    # it reversed; the negative block must telescope against the positive one
    # under R2, which the un-reversed word of the transposed swap does.
    if sign > 0:
        word = tuple(reversed(positive_braid_word(_block_swap(k, l))))
    else:
        word = positive_braid_word(_block_swap(l, k))
    assert len(word) == k * l
    layers += [(i, crossing(1, 1, sign)) for i in word]
    layers += left_merge_comb(l, offset=0)
    layers += left_merge_comb(k, offset=1)
    return DiagramWord(MOY, n, ((k, UP), (l, UP)), tuple(layers))


def _crossing_matrix(n: int, k: int, l: int, sign: int) -> RepMatrix:
    ctx = RankContext(n)
    d = ctx.exponent_denominator
    if (k, l) == (1, 1):
        # sigma = q^(-1/n) (q id - H), sigma^(-1) = q^(1/n) (q^(-1) id - H)
        h = _merge_matrix(n, 1, 1).transpose() @ _merge_matrix(n, 1, 1)
        ident = RepMatrix.identity(n * n, d)
        if sign > 0:
            return (ident.scale(ctx.q_power(1)) + h.scale(-1)).scale(ctx.monomial(-2))
        return (ident.scale(ctx.q_power(-1)) + h.scale(-1)).scale(ctx.monomial(2))
    cable = word_matrix(_crossing_word(n, k, l, sign))
    return cable.exact_div(qfact(ctx, k) * qfact(ctx, l))


def _rotated_vertex_matrix(n: int, gen: Generator) -> RepMatrix:
    from .diagram import DOWN, MOY, cap, cup, merge, split

    k, l = gen.colors
    if gen.kind == "merge":
        word = DiagramWord(MOY, n, ((k, DOWN), (l, DOWN)), (
            (0, cup(k + l, False)),
            (1, split(l, k)),
            (2, cap(k, True)),
            (1, cap(l, True)),
        ))
    else:
        word = DiagramWord(MOY, n, ((k + l, DOWN),), (
            (1, cup(l, True)),
            (2, cup(k, True)),
            (1, merge(l, k)),
            (0, cap(k + l, False)),
        ))
    return word_matrix(word)


def _build_gen_matrix(n: int, gen: Generator) -> RepMatrix:
    ctx = RankContext(n)
    d = ctx.exponent_denominator
    kind = gen.kind
    if kind == "merge":
        if gen.direction == DOWN:
            return _rotated_vertex_matrix(n, gen)
        return _merge_matrix(n, *gen.colors)
    if kind == "split":
        if gen.direction == DOWN:
            return _rotated_vertex_matrix(n, gen)
        return _merge_matrix(n, *gen.colors).transpose()
    if kind in ("cup", "cap"):
        return _cup_cap_matrix(n, gen)
    if kind == "x":
        return _crossing_matrix(n, gen.colors[0], gen.colors[1], gen.direction)
    if kind == "tag":
        value = ctx.one() if gen.side == "L" else ctx.one() * ((-1) ** (n - 1))
        out = RepMatrix(1, 1, d)
        out.set(0, 0, value)
        return out
    if kind in ("src", "snk"):
        from .diagram import MIXED, left_merge_comb, left_split_comb, tag

        if kind == "src":
            layers = [(0, tag(True, UP, "L"))] + left_split_comb(n, offset=0)
            word = DiagramWord(MIXED, n, (), tuple(layers))
        else:
            layers = left_merge_comb(n, offset=0) + [(0, tag(False, UP, "L"))]
            word = DiagramWord(MIXED, n, ((1, UP),) * n, tuple(layers))
        scale = ctx.monomial(n * n * (n - 1) // 2)  # q^(n(n-1)/4)
        return word_matrix(word).scale(scale)
    raise ValueError(f"no matrix for generator kind {kind!r}")


# -- evaluating words and combinations ----------------------------------------------


def layer_matrix(n: int, before: Boundary, offset: int, gen: Generator) -> RepMatrix:
    d = 2 * n
    gmat = gen_matrix(n, gen)
    left = boundary_dim(n, before[:offset])
    right = boundary_dim(n, before[offset + len(gen.dom(n)) :])
    out = gmat
    if left > 1:
        out = RepMatrix.identity(left, d).tensor(out)
    if right > 1:
        out = out.tensor(RepMatrix.identity(right, d))
    return out


def word_matrix(word: DiagramWord) -> RepMatrix:
    _check_rank(word.n)
    n = word.n
    mat = RepMatrix.identity(boundary_dim(n, word.dom), 2 * n)
    before = word.dom
    for offset, gen in word.layers:
        mat = layer_matrix(n, before, offset, gen) @ mat
        gdom = gen.dom(n)
        before = before[:offset] + gen.cod(n) + before[offset + len(gdom) :]
    return mat


def combo_matrix(combo: LinCombo | DiagramWord) -> RepMatrix:
    if isinstance(combo, DiagramWord):
        return word_matrix(combo)
    _check_rank(combo.n)
    out = RepMatrix(
        boundary_dim(combo.n, combo.cod), boundary_dim(combo.n, combo.dom), 2 * combo.n
    )
    for word, coeff in combo.terms.items():
        out = out + word_matrix(word).scale(coeff)
    return out


def eval_matrix(x: LinCombo | DiagramWord) -> RepMatrix:
    """Public entry point: exact matrix of a word or combination."""
    return combo_matrix(x)


def combos_equal(a: LinCombo | DiagramWord, b: LinCombo | DiagramWord) -> bool:
    return eval_matrix(a) == eval_matrix(b)
