"""Braid-word algebra modulo the quadratic crossing relation.

Elements live on a fixed number of strands and are finite sums of
positive braid words with scalar coefficients, all over one common
scalar denominator.  The defining skein identity

    a^{-1}. x  -  a . x^{-1}  =  (s - s^{-1}) . id

forces the quadratic relation x^2 = a(s - s^{-1}) x + a^2 on every
positive crossing, which collapses any word to the canonical basis of
reduced words, one per permutation of the strands.  On top of the bare
algebra this module builds the symmetrizer and antisymmetrizer towers
(`f` and `g`), checks their eigenvalue laws, expands the source-sink
composite into a crossing sum, and renders the antisymmetrizer as a
web clasp.

Coefficients come in two modes.  Generic mode works symbolically in the
two unit variables a and s; it exists only inside this module.
Specialized mode substitutes unit Laurent polynomials for a and s (the
parameter record handed over by the functor layer), so everything that
crosses into the diagram engine is an ordinary one-variable scalar.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .diagram import (
    SIKORA,
    CKM,
    UP,
    DiagramWord,
    LinCombo,
    crossing,
    left_merge_comb,
    left_split_comb,
)
from .qalg import (
    LaurentPoly,
    RankContext,
    Perm,
    perm_length,
    positive_braid_word,
    qfact,
)

DEFAULT_STRAND_CAP = 5


# -- two-variable coefficients ----------------------------------------------------


class TwoVarLaurent:
    """Laurent polynomial in the units a and s with integer coefficients.

    Terms map an exponent pair (a-power, s-power) to a coefficient; both
    exponents are plain integers.  The operator surface mirrors the
    one-variable LaurentPoly closely enough that element code never has
    to know which ring it is working over.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: dict[tuple[int, int], int]):
        object.__setattr__(self, "coeffs", {e: c for e, c in coeffs.items() if c})

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("TwoVarLaurent is immutable")

    @classmethod
    def zero(cls) -> TwoVarLaurent:
        return cls({})

    @classmethod
    def one(cls) -> TwoVarLaurent:
        return cls({(0, 0): 1})

    @classmethod
    def from_int(cls, c: int) -> TwoVarLaurent:
        return cls({(0, 0): c})

    @classmethod
    def a(cls, e: int = 1, coeff: int = 1) -> TwoVarLaurent:
        return cls({(e, 0): coeff})

    @classmethod
    def s(cls, e: int = 1, coeff: int = 1) -> TwoVarLaurent:
        return cls({(0, e): coeff})

    def _coerce(self, other: TwoVarLaurent | int) -> TwoVarLaurent:
        if isinstance(other, int):
            return TwoVarLaurent.from_int(other)
        return other

    def __add__(self, other: TwoVarLaurent | int) -> TwoVarLaurent:
        other = self._coerce(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out.get(e, 0) + c
        return TwoVarLaurent(out)

    __radd__ = __add__

    def __neg__(self) -> TwoVarLaurent:
        return TwoVarLaurent({e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: TwoVarLaurent | int) -> TwoVarLaurent:
        return self + (-self._coerce(other))

    def __mul__(self, other: TwoVarLaurent | int) -> TwoVarLaurent:
        other = self._coerce(other)
        out: dict[tuple[int, int], int] = {}
        for (ea1, es1), c1 in self.coeffs.items():
            for (ea2, es2), c2 in other.coeffs.items():
                e = (ea1 + ea2, es1 + es2)
                out[e] = out.get(e, 0) + c1 * c2
        return TwoVarLaurent(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> TwoVarLaurent:
        if k < 0:
            if len(self.coeffs) != 1:
                raise ValueError("negative powers need a unit monomial")
            ((ea, es), c), = self.coeffs.items()
            if c not in (1, -1):
                raise ValueError("negative powers need a unit monomial")
            sign = 1 if c == 1 or k % 2 == 0 else -1
            return TwoVarLaurent({(ea * k, es * k): sign})
        out = TwoVarLaurent.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == {(0, 0): 1}

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = TwoVarLaurent.from_int(other)
        if not isinstance(other, TwoVarLaurent):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(frozenset(self.coeffs.items()))

    def render(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for (ea, es) in sorted(self.coeffs):
            c = self.coeffs[(ea, es)]
            factors = []
            if ea:
                factors.append("a" if ea == 1 else f"a^{ea}")
            if es:
                factors.append("s" if es == 1 else f"s^{es}")
            if not factors or abs(c) != 1:
                factors.insert(0, str(abs(c)))
            monom = "*".join(factors)
            parts.append(f"- {monom}" if c < 0 else f"+ {monom}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    __str__ = render

    def __repr__(self) -> str:
        return f"TwoVarLaurent({self.render()})"

    def to_json(self) -> dict:
        return {"coeffs": {f"{ea},{es}": self.coeffs[(ea, es)] for (ea, es) in sorted(self.coeffs)}}

    def specialize(self, a_unit: LaurentPoly, s_unit: LaurentPoly) -> LaurentPoly:
        """Substitute unit Laurent polynomials for a and s."""
        out = a_unit * 0
        for (ea, es), c in self.coeffs.items():
            out = out + _unit_pow(a_unit, ea) * _unit_pow(s_unit, es) * c
        return out


def _unit_pow(p: LaurentPoly, e: int) -> LaurentPoly:
    """p**e allowing negative e when p is a single ±monomial."""
    if e >= 0:
        return p ** e
    if len(p.terms) != 1:
        raise ValueError("negative power of a non-monomial scalar")
    (units, coeff), = p.terms.items()
    if coeff not in (1, -1):
        raise ValueError("negative power needs coefficient ±1")
    sign = 1 if coeff == 1 or e % 2 == 0 else -1
    return LaurentPoly({units * e: sign}, p.denom)


# -- coefficient-ring adapters ----------------------------------------------------


class _GenericRing:
    """Symbolic two-variable coefficients."""

    mode = "generic"

    def zero(self) -> TwoVarLaurent:
        return TwoVarLaurent.zero()

    def one(self) -> TwoVarLaurent:
        return TwoVarLaurent.one()

    def from_int(self, c: int) -> TwoVarLaurent:
        return TwoVarLaurent.from_int(c)

    def a_pow(self, e: int) -> TwoVarLaurent:
        return TwoVarLaurent.a(e)

    def s_pow(self, e: int) -> TwoVarLaurent:
        return TwoVarLaurent.s(e)

    def qint(self, k: int) -> TwoVarLaurent:
        if k < 0:
            return -self.qint(-k)
        return TwoVarLaurent({(0, k - 1 - 2 * i): 1 for i in range(k)})

    def qfact(self, k: int) -> TwoVarLaurent:
        out = self.one()
        for m in range(2, k + 1):
            out = out * self.qint(m)
        return out

    def skein_gap(self) -> TwoVarLaurent:
        return self.s_pow(1) - self.s_pow(-1)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, _GenericRing)

    def __hash__(self) -> int:
        return hash("generic")


class _SpecializedRing:
    """One-variable coefficients with fixed unit values for a and s."""

    mode = "specialized"

    def __init__(self, a_unit: LaurentPoly, s_unit: LaurentPoly):
        self.a_unit = a_unit
        self.s_unit = s_unit

    def zero(self) -> LaurentPoly:
        return self.a_unit * 0

    def one(self) -> LaurentPoly:
        return _unit_pow(self.a_unit, 0)

    def from_int(self, c: int) -> LaurentPoly:
        return self.one() * c

    def a_pow(self, e: int) -> LaurentPoly:
        return _unit_pow(self.a_unit, e)

    def s_pow(self, e: int) -> LaurentPoly:
        return _unit_pow(self.s_unit, e)

    def qint(self, k: int) -> LaurentPoly:
        if k < 0:
            return -self.qint(-k)
        out = self.zero()
        for i in range(k):
            out = out + self.s_pow(k - 1 - 2 * i)
        return out

    def qfact(self, k: int) -> LaurentPoly:
        out = self.one()
        for m in range(2, k + 1):
            out = out * self.qint(m)
        return out

    def skein_gap(self) -> LaurentPoly:
        return self.s_pow(1) - self.s_pow(-1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, _SpecializedRing):
            return NotImplemented
        return self.a_unit == other.a_unit and self.s_unit == other.s_unit

    def __hash__(self) -> int:
        return hash((self.a_unit, self.s_unit))


def _ring_for(params) -> _GenericRing | _SpecializedRing:
    """None selects generic symbols; otherwise params must carry unit
    Laurent attributes a and s (the functor layer's parameter record)."""
    if params is None:
        return _GenericRing()
    a_unit = getattr(params, "a", None)
    s_unit = getattr(params, "s", None)
    if not isinstance(a_unit, LaurentPoly) or not isinstance(s_unit, LaurentPoly):
        raise TypeError("params must expose LaurentPoly units 'a' and 's'")
    return _SpecializedRing(a_unit, s_unit)


# -- elements ---------------------------------------------------------------------


def _word_perm(word: tuple[int, ...], strands: int) -> Perm:
    """The permutation of a positive word, folding s_i left to right."""
    line = list(range(strands))
    for i in word:
        line[i], line[i + 1] = line[i + 1], line[i]
    return tuple(line)


def _word_key(word: tuple[int, ...]) -> str:
    return "id" if not word else ".".join(f"s{i + 1}" for i in word)


class HeckeElement:
    """Scalar combination of canonical reduced braid words on a fixed
    strand count, over one common scalar denominator.

    terms maps each reduced word (tuple of 0-based generator positions,
    as produced by positive_braid_word) to its numerator coefficient.
    The value of the element is terms / den; arithmetic cross-multiplies
    denominators, so no coefficient division ever happens.
    """

    __slots__ = ("strands", "terms", "den", "ring")

    def __init__(self, strands, terms, den, ring):
        self.strands = strands
        self.terms = {w: c for w, c in terms.items() if not c.is_zero()}
        self.den = den
        self.ring = ring
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")

    def _compatible(self, other: HeckeElement) -> None:
        if self.strands != other.strands:
            raise ValueError(
                f"strand mismatch: {self.strands} vs {other.strands}"
            )
        if self.ring != other.ring:
            raise ValueError("cannot mix generic and specialized elements")

    def __add__(self, other: HeckeElement) -> HeckeElement:
        self._compatible(other)
        if self.den == other.den:
            out = dict(self.terms)
            for w, c in other.terms.items():
                out[w] = out.get(w, self.ring.zero()) + c
            return HeckeElement(self.strands, out, self.den, self.ring)
        out = {w: c * other.den for w, c in self.terms.items()}
        for w, c in other.terms.items():
            out[w] = out.get(w, self.ring.zero()) + c * self.den
        return HeckeElement(self.strands, out, self.den * other.den, self.ring)

    def __neg__(self) -> HeckeElement:
        return HeckeElement(
            self.strands, {w: -c for w, c in self.terms.items()}, self.den, self.ring
        )

    def __sub__(self, other: HeckeElement) -> HeckeElement:
        return self + (-other)

    def scale(self, factor) -> HeckeElement:
        if isinstance(factor, int):
            factor = self.ring.from_int(factor)
        return HeckeElement(
            self.strands,
            {w: c * factor for w, c in self.terms.items()},
            self.den,
            self.ring,
        )

    def over(self, divisor) -> HeckeElement:
        """Divide by a scalar by growing the common denominator."""
        if isinstance(divisor, int):
            divisor = self.ring.from_int(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division by a zero scalar")
        return HeckeElement(self.strands, dict(self.terms), self.den * divisor, self.ring)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HeckeElement):
            return NotImplemented
        if self.strands != other.strands or self.ring != other.ring:
            return False
        words = set(self.terms) | set(other.terms)
        zero = self.ring.zero()
        for w in words:
            left = self.terms.get(w, zero) * other.den
            right = other.terms.get(w, zero) * self.den
            if left != right:
                return False
        return True

    def __hash__(self) -> int:
        raise TypeError("HeckeElement equality is denominator-free; no stable hash")

    def _embed(self, strands: int, shift: int) -> HeckeElement:
        """The same element with identity strands added: shift new strands
        on the left, the rest on the right."""
        if shift < 0 or strands < self.strands + shift:
            raise ValueError("embedding does not fit the target strand count")
        terms = {
            tuple(i + shift for i in w): c for w, c in self.terms.items()
        }
        return HeckeElement(strands, terms, self.den, self.ring)

    def specialize(self, params) -> HeckeElement:
        """Move to the one-variable ring given by a parameter record."""
        ring = _ring_for(params)
        if isinstance(self.ring, _SpecializedRing):
            if self.ring == ring:
                return self
            raise ValueError("element is already specialized at different parameters")
        terms = {
            w: c.specialize(ring.a_unit, ring.s_unit) for w, c in self.terms.items()
        }
        den = self.den.specialize(ring.a_unit, ring.s_unit)
        return HeckeElement(self.strands, terms, den, ring)

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = [
            f"({self.terms[w].render()})·{_word_key(w)}"
            for w in sorted(self.terms, key=lambda w: (len(w), w))
        ]
        body = " + ".join(parts)
        return body if self.den.is_one() else f"[{body}] / ({self.den.render()})"

    __str__ = render

    def __repr__(self) -> str:
        return f"HeckeElement(strands={self.strands}, words={len(self.terms)}, mode={self.ring.mode})"

    def to_json(self) -> dict:
        return {
            "strands": self.strands,
            "mode": self.ring.mode,
            "den": self.den.to_json(),
            "terms": {
                _word_key(w): self.terms[w].to_json()
                for w in sorted(self.terms, key=lambda w: (len(w), w))
            },
        }


def identity_element(strands: int, params=None) -> HeckeElement:
    if strands < 1:
        raise ValueError("strand count must be at least 1")
    ring = _ring_for(params)
    return HeckeElement(strands, {(): ring.one()}, ring.one(), ring)


def generator_element(strands: int, i: int, params=None) -> HeckeElement:
    """The positive crossing of strands i and i+1, i counted from 1."""
    if not 1 <= i < strands:
        raise ValueError(f"generator index {i} out of range for {strands} strands")
    ring = _ring_for(params)
    return HeckeElement(strands, {(i - 1,): ring.one()}, ring.one(), ring)


def word_element(strands: int, letters: tuple[int, ...], params=None) -> HeckeElement:
    """Element of a signed braid word: letter +i is the positive crossing
    of strands i, i+1 and -i its inverse (i counted from 1)."""
    ring = _ring_for(params)
    out = identity_element(strands, params)
    for letter in letters:
        i = abs(letter)
        if letter == 0 or i >= strands:
            raise ValueError(f"letter {letter} out of range for {strands} strands")
        if letter > 0:
            step = generator_element(strands, i, params)
        else:
            # x^{-1} = a^{-2} x - a^{-1}(s - s^{-1}) id, from the skein identity
            step = HeckeElement(
                strands,
                {
                    (i - 1,): ring.a_pow(-2),
                    (): -(ring.a_pow(-1) * ring.skein_gap()),
                },
                ring.one(),
                ring,
            )
        out = hecke_mul(out, step)
    return out


# -- multiplication ----------------------------------------------------------------


def _push_letter(ring, acc: dict[Perm, object], i: int) -> dict[Perm, object]:
    """Right-multiply a permutation-keyed accumulator by one positive
    generator at 0-based position i, applying the quadratic relation on
    descents."""
    out: dict[Perm, object] = {}

    def add(p: Perm, c) -> None:
        prev = out.get(p)
        out[p] = c if prev is None else prev + c

    a2 = ring.a_pow(2)
    bend = ring.a_pow(1) * ring.skein_gap()
    for p, c in acc.items():
        swapped = p[:i] + (p[i + 1], p[i]) + p[i + 2:]
        if p[i] < p[i + 1]:
            add(swapped, c)
        else:
            add(swapped, c * a2)
            add(p, c * bend)
    return {p: c for p, c in out.items() if not c.is_zero()}


def hecke_mul(x: HeckeElement, y: HeckeElement, params=None) -> HeckeElement:
    """Product in the braid algebra modulo the quadratic relation.

    Bilinear; the result is supported on canonical reduced words.  When
    params is given, both factors are specialized first.
    """
    if params is not None:
        x = x.specialize(params)
        y = y.specialize(params)
    x._compatible(y)
    ring = x.ring
    strands = x.strands
    acc: dict[Perm, object] = {}
    for wy, cy in y.terms.items():
        start: dict[Perm, object] = {}
        for wx, cx in x.terms.items():
            p = _word_perm(wx, strands)
            prev = start.get(p)
            c = cx * cy
            start[p] = c if prev is None else prev + c
        for letter in wy:
            start = _push_letter(ring, start, letter)
        for p, c in start.items():
            prev = acc.get(p)
            acc[p] = c if prev is None else prev + c
    terms = {positive_braid_word(p): c for p, c in acc.items()}
    return HeckeElement(strands, terms, x.den * y.den, ring)


# -- symmetrizer and antisymmetrizer towers ----------------------------------------


def _check_strands(j: int, max_strands: int) -> None:
    if j < 1:
        raise ValueError("strand count must be at least 1")
    if j > max_strands:
        raise ValueError(
            f"strand count {j} above the cap {max_strands}; raise max_strands to override"
        )


def _qint_or_die(ring, k: int):
    value = ring.qint(k)
    if value.is_zero():
        raise ValueError(f"quantum integer [{k}] is zero at these parameters")
    return value


def _symmetrizer_pair(ring) -> HeckeElement:
    """[2]·f_2 = s^{-1}·id + a^{-1}·x, divided back by [2]."""
    two = HeckeElement(
        2,
        {(): ring.s_pow(-1), (0,): ring.a_pow(-1)},
        ring.one(),
        ring,
    )
    return two.over(_qint_or_die(ring, 2))


def f(j: int, params=None, *, max_strands: int = DEFAULT_STRAND_CAP) -> HeckeElement:
    """The full symmetrizer on j strands.

    Built by the two-term recursion
        [m+1]·f_{m+1} = -[m-1]·(f_m ⊗ 1) + [2][m]·(f_m ⊗ 1)(1 ⊗ f_2)(f_m ⊗ 1)
    from f_1 = id; absorbs each positive crossing with eigenvalue a·s.
    """
    _check_strands(j, max_strands)
    ring = _ring_for(params)
    if j == 1:
        return identity_element(1, params)
    fm = _symmetrizer_pair(ring)
    for m in range(2, j):
        wide = fm._embed(m + 1, 0)
        pair_right = _symmetrizer_pair(ring)._embed(m + 1, m - 1)
        product = hecke_mul(hecke_mul(wide, pair_right), wide)
        total = (-wide.scale(_qint_or_die(ring, m - 1))) + product.scale(
            _qint_or_die(ring, 2) * _qint_or_die(ring, m)
        )
        fm = total.over(_qint_or_die(ring, m + 1))
    return fm


def _g_sum_on_ring(ring, j: int) -> HeckeElement:
    lead = ring.s_pow(j * (j - 1) // 2)
    terms: dict[tuple[int, ...], object] = {}
    for perm in itertools.permutations(range(j)):
        length = perm_length(perm)
        coeff = lead * ring.a_pow(-length) * ring.s_pow(-length)
        if length % 2:
            coeff = -coeff
        terms[positive_braid_word(perm)] = coeff
    return HeckeElement(j, terms, ring.qfact(j), ring)


def g_sum(j: int, params=None, *, max_strands: int = DEFAULT_STRAND_CAP) -> HeckeElement:
    """The full antisymmetrizer on j strands as an explicit sum:

        g_j = (1/[j]!) s^{j(j-1)/2} Σ_π (-a s)^{-l(π)} w_π

    over all permutations π, with w_π the canonical reduced word and
    l(π) the inversion count.
    """
    _check_strands(j, max_strands)
    ring = _ring_for(params)
    if ring.qfact(j).is_zero():
        raise ValueError(f"quantum factorial [{j}]! is zero at these parameters")
    return _g_sum_on_ring(ring, j)


def g_rec(j: int, params=None, *, max_strands: int = DEFAULT_STRAND_CAP) -> HeckeElement:
    """The full antisymmetrizer on j strands built recursively:

        g_{m+1} = (1 ⊗ g_m) - ([2][m]/[m+1]) (1 ⊗ g_m)(f_2 ⊗ 1)(1 ⊗ g_m)

    from g_1 = id; must agree with g_sum exactly.
    """
    _check_strands(j, max_strands)
    ring = _ring_for(params)
    gm = identity_element(1, params)
    for m in range(1, j):
        wide = gm._embed(m + 1, 1)
        pair_left = _symmetrizer_pair(ring)._embed(m + 1, 0)
        product = hecke_mul(hecke_mul(wide, pair_left), wide)
        correction = product.scale(
            _qint_or_die(ring, 2) * _qint_or_die(ring, m)
        ).over(_qint_or_die(ring, m + 1))
        gm = wide - correction
    return gm


# -- eigenvalue reports -------------------------------------------------------------


@dataclass(frozen=True)
class EigenReport:
    """Outcome of testing an element against the two crossing eigenvalues."""

    strands: int
    ok: bool
    eigenvalue: str | None
    detail: str = ""

    def line(self) -> str:
        status = "ok" if self.ok else "FAIL"
        tag = self.eigenvalue or "-"
        extra = f" ({self.detail})" if self.detail else ""
        return f"eigen[{self.strands}]: {status} eigenvalue={tag}{extra}"


def eigen_check(x: HeckeElement, params=None) -> EigenReport:
    """Test whether every generator absorbs into x with one of the two
    crossing eigenvalues: a·s (symmetrizer law) or -a·s^{-1}
    (antisymmetrizer law), on both sides."""
    if params is not None:
        x = x.specialize(params)
    ring = x.ring
    if x.strands == 1 or x.is_zero():
        return EigenReport(x.strands, True, None, "no generators to test")
    candidates = (
        ("a*s", ring.a_pow(1) * ring.s_pow(1)),
        ("-a/s", -(ring.a_pow(1) * ring.s_pow(-1))),
    )
    failures = []
    for name, lam in candidates:
        target = x.scale(lam)
        good = True
        for i in range(1, x.strands):
            sig = HeckeElement(x.strands, {(i - 1,): ring.one()}, ring.one(), ring)
            if hecke_mul(sig, x) != target or hecke_mul(x, sig) != target:
                good = False
                break
        if good:
            return EigenReport(x.strands, True, name)
        failures.append(name)
    return EigenReport(
        x.strands, False, None, f"neither eigenvalue law holds (tried {', '.join(failures)})"
    )


# -- exports into the diagram engine -------------------------------------------------


def source_sink_expand(
    ctx: RankContext, *, max_strands: int = DEFAULT_STRAND_CAP
) -> LinCombo:
    """The crossing expansion of the source-sink composite on n strands.

    Equals [n]! q^{n(n-1)/2} times the antisymmetrizer at the standard
    specialization a = q^{-1/n}, s = q, rendered with each reduced word
    as a positive braid.  The denominator clears exactly, so every
    coefficient is an honest Laurent scalar.
    """
    n = ctx.n
    _check_strands(n, max_strands)
    ring = _SpecializedRing(ctx.q_power(-1, n), ctx.q_power(1))
    g = _g_sum_on_ring(ring, n)
    scalar = qfact(ctx, n) * ctx.q_power(n * (n - 1), 2)
    dom = tuple((1, UP) for _ in range(n))
    combo = LinCombo(SIKORA, n, dom, dom)
    for word, coeff in g.terms.items():
        layers = tuple((i, crossing(1, 1, 1)) for i in reversed(word))
        value = (coeff * scalar).exact_div(g.den)
        combo = combo + LinCombo.of(DiagramWord(SIKORA, n, dom, layers), value)
    return combo


def web_antisymmetrizer(j: int, ctx: RankContext) -> tuple[LinCombo, LaurentPoly]:
    """The web clasp realizing the antisymmetrizer on j single strands:
    merge them up into one color-j edge and split back down.

    Returns (combo, den) with den = [j]!, since the normalizing scalar
    1/[j]! is not itself a Laurent polynomial.  combo/den is idempotent
    and absorbs the engine's crossing with eigenvalue -q^{-(n+1)/n}.
    """
    if j < 1:
        raise ValueError("strand count must be at least 1")
    if j > ctx.n:
        raise ValueError(f"no antisymmetrizer on {j} strands at rank {ctx.n}")
    dom = tuple((1, UP) for _ in range(j))
    layers = tuple(left_merge_comb(j)) + tuple(left_split_comb(j))
    word = DiagramWord(CKM, ctx.n, dom, layers)
    return LinCombo.of(word), qfact(ctx, j)


# -- identity battery ----------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    """One named identity with its outcome."""

    name: str
    ok: bool
    detail: str = ""

    def line(self) -> str:
        status = "ok" if self.ok else "FAIL"
        extra = f" ({self.detail})" if self.detail else ""
        return f"identity {self.name}: {status}{extra}"


def verify_identities(
    ctx: RankContext | None = None, *, max_strands: int = 4
) -> list[IdentityReport]:
    """Check the algebra's defining identities symbolically, and again at
    the standard specialization when a rank context is supplied.

    Covers: sum and recursion builds of the antisymmetrizer agree;
    symmetrizer and antisymmetrizer are idempotent; both absorb every
    generator with their eigenvalue; the two-strand symmetrizer and
    antisymmetrizer sum to the identity.
    """
    modes: list[tuple[str, object]] = [("generic", None)]
    if ctx is not None:
        modes.append((f"n={ctx.n}", _StandardParams(ctx)))
    out: list[IdentityReport] = []
    for label, params in modes:
        for j in range(1, max_strands + 1):
            gs = g_sum(j, params, max_strands=max_strands)
            gr = g_rec(j, params, max_strands=max_strands)
            out.append(IdentityReport(f"antisym-sum-vs-rec[j={j},{label}]", gs == gr))
            fs = f(j, params, max_strands=max_strands)
            out.append(
                IdentityReport(
                    f"sym-idempotent[j={j},{label}]", hecke_mul(fs, fs) == fs
                )
            )
            out.append(
                IdentityReport(
                    f"antisym-idempotent[j={j},{label}]", hecke_mul(gs, gs) == gs
                )
            )
            if j > 1:
                rf = eigen_check(fs)
                out.append(
                    IdentityReport(
                        f"sym-eigen[j={j},{label}]",
                        rf.ok and rf.eigenvalue == "a*s",
                        rf.detail,
                    )
                )
                rg = eigen_check(gs)
                out.append(
                    IdentityReport(
                        f"antisym-eigen[j={j},{label}]",
                        rg.ok and rg.eigenvalue == "-a/s",
                        rg.detail,
                    )
                )
        pair_sum = f(2, params) + g_sum(2, params)
        out.append(
            IdentityReport(
                f"two-strand-resolution[{label}]",
                pair_sum == identity_element(2, params),
            )
        )
    return out


class _StandardParams:
    """Minimal parameter record for the standard specialization
    a = q^{-1/n}, s = q; the functor layer exposes the full one."""

    def __init__(self, ctx: RankContext):
        self.a = ctx.q_power(-1, ctx.n)
        self.s = ctx.q_power(1)
