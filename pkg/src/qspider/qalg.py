"""Exact coefficient arithmetic for the diagram engine.

Everything downstream (web evaluation, Hecke elements, representation
matrices) reduces to Laurent polynomials in one variable q with fractional
exponents.  For rank parameter n every exponent that occurs lies on the
lattice (1/2n)*Z, so a polynomial is stored as a sparse map from lattice
units (integers) to integer coefficients, together with the lattice
denominator 2n.  Mixing polynomials from different lattices is a hard
error, never a coercion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ArithmeticMismatch(ValueError):
    """Two polynomials live on different exponent lattices."""


class InexactDivision(ArithmeticError):
    """exact_div would need a nonzero remainder or rational coefficients."""


@dataclass(frozen=True)
class RankContext:
    """Fixes the rank parameter n >= 2 and with it the exponent lattice.

    The denominator 2n covers every fractional power the engine needs:
    q**(1/2), q**(1/n), and q**(n*(n-1)/4) (whose doubled numerator
    n*(n-1)/2 is an integer).
    """

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise ValueError(f"rank parameter must be an integer >= 2, got {self.n!r}")

    @property
    def exponent_denominator(self) -> int:
        return 2 * self.n

    def zero(self) -> LaurentPoly:
        return LaurentPoly({}, self.exponent_denominator)

    def one(self) -> LaurentPoly:
        return LaurentPoly({0: 1}, self.exponent_denominator)

    def monomial(self, units: int, coeff: int = 1) -> LaurentPoly:
        """coeff * q**(units / 2n), exponent given directly in lattice units."""
        return LaurentPoly({units: coeff}, self.exponent_denominator)

    def q_power(self, numer: int, denom: int = 1) -> LaurentPoly:
        """q**(numer/denom); raises if the exponent is off the 1/(2n) lattice."""
        units2 = numer * self.exponent_denominator
        if units2 % denom:
            raise ValueError(
                f"exponent {numer}/{denom} is not a multiple of 1/{self.exponent_denominator}"
            )
        return self.monomial(units2 // denom)


class LaurentPoly:
    """Sparse Laurent polynomial in q**(1/denom), integer coefficients.

    terms maps exponents in lattice units (true exponent times denom) to
    nonzero integers.  Instances are treated as immutable; arithmetic always
    returns fresh objects.
    """

    __slots__ = ("terms", "denom")

    def __init__(self, terms: dict[int, int], denom: int):
        if denom <= 0:
            raise ValueError("lattice denominator must be positive")
        object.__setattr__(self, "terms", {e: c for e, c in terms.items() if c != 0})
        object.__setattr__(self, "denom", denom)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("LaurentPoly is immutable")

    # -- lattice discipline ------------------------------------------------

    def _coerce(self, other: LaurentPoly | int) -> LaurentPoly:
        if isinstance(other, int):
            return LaurentPoly({0: other}, self.denom)
        return other

    def _check(self, other: LaurentPoly) -> None:
        if self.denom != other.denom:
            raise ArithmeticMismatch(
                f"lattice mismatch: 1/{self.denom} vs 1/{other.denom}"
            )

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: LaurentPoly | int) -> LaurentPoly:
        other = self._coerce(other)
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out, self.denom)

    __radd__ = __add__

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly({e: -c for e, c in self.terms.items()}, self.denom)

    def __sub__(self, other: LaurentPoly | int) -> LaurentPoly:
        return self + (-self._coerce(other))

    def __rsub__(self, other: int) -> LaurentPoly:
        return self._coerce(other) - self

    def __mul__(self, other: LaurentPoly | int) -> LaurentPoly:
        other = self._coerce(other)
        self._check(other)
        out: dict[int, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = e1 + e2
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPoly(out, self.denom)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> LaurentPoly:
        if k < 0:
            raise ValueError("negative powers are not defined for polynomials")
        out = LaurentPoly({0: 1}, self.denom)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def exact_div(self, other: LaurentPoly | int) -> LaurentPoly:
        """Quotient self/other when it exists in the same ring.

        Raises InexactDivision if the quotient would need a nonzero remainder
        or non-integer coefficients.
        """
        other = self._coerce(other)
        self._check(other)
        if not other.terms:
            raise ZeroDivisionError("division by the zero polynomial")
        if not self.terms:
            return LaurentPoly({}, self.denom)
        lead = max(other.terms)
        lc = other.terms[lead]
        qmin = min(self.terms) - min(other.terms)
        rem = dict(self.terms)
        quot: dict[int, int] = {}
        while rem:
            e = max(rem)
            qe = e - lead
            if qe < qmin:
                raise InexactDivision("nonzero remainder")
            c = rem[e]
            if c % lc:
                raise InexactDivision(f"coefficient {c} not divisible by {lc}")
            k = c // lc
            quot[qe] = k
            for oe, oc in other.terms.items():
                ne = qe + oe
                nc = rem.get(ne, 0) - k * oc
                if nc:
                    rem[ne] = nc
                else:
                    rem.pop(ne, None)
        return LaurentPoly(quot, self.denom)

    # -- predicates and views -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {0: 1}

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = LaurentPoly({0: other}, self.denom)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.denom == other.denom and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.denom, frozenset(self.terms.items())))

    def min_units(self) -> int:
        if not self.terms:
            raise ValueError("zero polynomial has no degree")
        return min(self.terms)

    def max_units(self) -> int:
        if not self.terms:
            raise ValueError("zero polynomial has no degree")
        return max(self.terms)

    # -- rendering and serialization -------------------------------------------

    def render(self) -> str:
        """Canonical text form, part of the golden-file contract.

        Terms sorted by ascending exponent; exponents printed as reduced
        fractions; unit coefficients elided next to a power of q; terms
        joined by " + " / " - ".  Examples: `q^-1 + q`, `2 + q^1/2`.
        """
        if not self.terms:
            return "0"
        rendered: list[tuple[bool, str]] = []
        for e in sorted(self.terms):
            c = self.terms[e]
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                g = math.gcd(abs(e), self.denom)
                num, den = e // g, self.denom // g
                if den == 1:
                    power = "q" if num == 1 else f"q^{num}"
                else:
                    power = f"q^{num}/{den}"
                body = power if mag == 1 else f"{mag}*{power}"
            rendered.append((c < 0, body))
        neg0, body0 = rendered[0]
        out = ("-" if neg0 else "") + body0
        for neg, body in rendered[1:]:
            out += (" - " if neg else " + ") + body
        return out

    def __str__(self) -> str:
        return self.render()

    def __repr__(self) -> str:
        return f"LaurentPoly({self.terms!r}, denom={self.denom})"

    def to_json(self) -> dict:
        return {
            "denom": self.denom,
            "coeffs": {str(e): self.terms[e] for e in sorted(self.terms)},
        }

    @classmethod
    def from_json(cls, data: dict) -> LaurentPoly:
        return cls({int(e): int(c) for e, c in data["coeffs"].items()}, int(data["denom"]))


# -- quantum integers ------------------------------------------------------------


def qint(ctx: RankContext, k: int) -> LaurentPoly:
    """Balanced quantum integer [k] = q^(1-k) + q^(3-k) + ... + q^(k-1).

    Extended to negative arguments by [-k] = -[k]; [0] = 0.
    """
    if k < 0:
        return -qint(ctx, -k)
    d = ctx.exponent_denominator
    return LaurentPoly({(1 - k + 2 * i) * d: 1 for i in range(k)}, d)


def qfact(ctx: RankContext, k: int) -> LaurentPoly:
    """Quantum factorial [k]! = [k][k-1]...[1], with [0]! = 1."""
    if k < 0:
        raise ValueError("quantum factorial needs k >= 0")
    out = ctx.one()
    for j in range(2, k + 1):
        out = out * qint(ctx, j)
    return out


def qbinom(ctx: RankContext, m: int, k: int) -> LaurentPoly:
    """Balanced Gaussian binomial [m choose k].

    Zero for k < 0 or (m >= 0 and k > m).  Negative tops use the reflection
    [-j choose k] = (-1)^k [j+k-1 choose k], which stays polynomial.
    """
    if k < 0:
        return ctx.zero()
    if m < 0:
        flip = qbinom(ctx, k - m - 1, k)
        return -flip if k % 2 else flip
    if k > m:
        return ctx.zero()
    return qfact(ctx, m).exact_div(qfact(ctx, k) * qfact(ctx, m - k))


# -- symmetric-group combinatorics ---------------------------------------------
#
# Permutations are tuples p with p[i] = image of i, 0-based.  Words multiply
# as functions: (p after q)(x) = p[q[x]].


Perm = tuple[int, ...]


def perm_length(perm: Perm) -> int:
    """Inversion count; equals the length of any reduced braid word."""
    m = len(perm)
    return sum(1 for i in range(m) for j in range(i + 1, m) if perm[i] > perm[j])


def perm_compose(p: Perm, q: Perm) -> Perm:
    """p after q: x -> p[q[x]]."""
    return tuple(p[q[x]] for x in range(len(q)))


def perm_inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def identity_perm(m: int) -> Perm:
    return tuple(range(m))


def positive_braid_word(perm: Perm) -> tuple[int, ...]:
    """Canonical reduced word (i_1, ..., i_l): perm = s_{i_1} ∘ ... ∘ s_{i_l}.

    Indices are 0-based strand positions, s_i transposing i and i+1.  Built
    by clearing the leftmost descent of the one-line notation until sorted;
    the length always equals perm_length(perm).
    """
    line = list(perm)
    recorded: list[int] = []
    while True:
        for i in range(len(line) - 1):
            if line[i] > line[i + 1]:
                line[i], line[i + 1] = line[i + 1], line[i]
                recorded.append(i)
                break
        else:
            break
    return tuple(reversed(recorded))


def transposition_perm(m: int, i: int) -> Perm:
    """Adjacent transposition s_i in S_m."""
    line = list(range(m))
    line[i], line[i + 1] = line[i + 1], line[i]
    return tuple(line)
