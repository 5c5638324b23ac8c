"""Diagrams as typed slice words.

A diagram is a word of layers read bottom to top.  Each layer places one
generator at a horizontal offset in the current boundary, which is a tuple
of (color, direction) strand labels with direction +1 for up.  Construction
type-checks the whole word, so an instance that exists is well-formed.

Categories:
  CKM     tagged webs: merges, splits, cups, caps, crossings, tags
  MOY     the same without tags
  SIKORA  n-valent tangles: color-1 crossings, cups, caps, n-valent
          sources and sinks
  HOMFLY  color-1 crossings, cups, caps
  MIXED   internal superset used while translating between presentations
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .qalg import LaurentPoly, RankContext

CKM = "CKM"
MOY = "MOY"
SIKORA = "SIKORA"
HOMFLY = "HOMFLY"
MIXED = "MIXED"

PUBLIC_CATEGORIES = (CKM, MOY, SIKORA, HOMFLY)
ALL_CATEGORIES = PUBLIC_CATEGORIES + (MIXED,)

Strand = tuple[int, int]  # (color, direction), direction in {+1, -1}
Boundary = tuple[Strand, ...]

UP = 1
DOWN = -1


class DiagramTypeError(ValueError):
    """A layer does not fit the boundary it is applied to."""


class InadmissibleGenerator(ValueError):
    """The generator or its colors are not allowed in the category."""


@dataclass(frozen=True)
class Generator:
    """One vertex type.  Use the factory functions below, not the constructor.

    Field use by kind:
      merge/split  colors=(k, l), direction = common strand orientation
      cup/cap      colors=(k,), flag = left end points up
      x            colors=(k, l), direction = crossing sign
      tag          flag = birth (True) or kill, direction = edge orientation,
                   side = "L" or "R"; the edge color is always n
      src/snk      no parameters
    """

    kind: str
    colors: tuple[int, ...] = ()
    direction: int = UP
    flag: bool = True
    side: str = ""

    def dom(self, n: int) -> Boundary:
        k = self.kind
        if k == "merge":
            a, b = self.colors
            return ((a, self.direction), (b, self.direction))
        if k == "split":
            a, b = self.colors
            return ((a + b, self.direction),)
        if k == "cup":
            return ()
        if k == "cap":
            (c,) = self.colors
            return ((c, UP), (c, DOWN)) if self.flag else ((c, DOWN), (c, UP))
        if k == "x":
            a, b = self.colors
            return ((a, UP), (b, UP))
        if k == "tag":
            return () if self.flag else ((n, self.direction),)
        if k == "src":
            return ()
        if k == "snk":
            return ((1, UP),) * n
        raise ValueError(f"unknown generator kind {k!r}")

    def cod(self, n: int) -> Boundary:
        k = self.kind
        if k == "merge":
            a, b = self.colors
            return ((a + b, self.direction),)
        if k == "split":
            a, b = self.colors
            return ((a, self.direction), (b, self.direction))
        if k == "cup":
            (c,) = self.colors
            return ((c, UP), (c, DOWN)) if self.flag else ((c, DOWN), (c, UP))
        if k == "cap":
            return ()
        if k == "x":
            a, b = self.colors
            return ((b, UP), (a, UP))
        if k == "tag":
            return ((n, self.direction),) if self.flag else ()
        if k == "src":
            return ((1, UP),) * n
        if k == "snk":
            return ()
        raise ValueError(f"unknown generator kind {k!r}")

    def grading(self) -> int:
        """Net source/sink count: +1 for sources, -1 for sinks, 0 otherwise."""
        if self.kind == "src":
            return 1
        if self.kind == "snk":
            return -1
        if self.kind == "tag":
            born_up = self.flag and self.direction == UP
            killed_down = (not self.flag) and self.direction == DOWN
            return 1 if (born_up or killed_down) else -1
        return 0

    def text(self) -> str:
        """DSL token form (without the `at <offset>:` prefix)."""
        k = self.kind
        if k in ("merge", "split"):
            a, b = self.colors
            down = " down" if self.direction == DOWN else ""
            return f"{k} {a} {b}{down}"
        if k in ("cup", "cap"):
            (c,) = self.colors
            return f"{k} {c} {'ud' if self.flag else 'du'}"
        if k == "x":
            a, b = self.colors
            return f"x {a} {b} {'+' if self.direction > 0 else '-'}"
        if k == "tag":
            away = self.direction == UP if self.flag else self.direction == DOWN
            inout = "out" if away else "in"
            side = "left" if self.side == "L" else "right"
            return f"tag {inout} {side}"
        return k

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.colors:
            out["colors"] = list(self.colors)
        if self.kind in ("merge", "split", "x", "tag"):
            out["direction"] = self.direction
        if self.kind in ("cup", "cap", "tag"):
            out["flag"] = self.flag
        if self.kind == "tag":
            out["side"] = self.side
        return out

    @classmethod
    def from_json(cls, data: dict) -> Generator:
        return cls(
            kind=data["kind"],
            colors=tuple(data.get("colors", ())),
            direction=int(data.get("direction", UP)),
            flag=bool(data.get("flag", True)),
            side=data.get("side", ""),
        )


# -- generator factories -----------------------------------------------------


def merge(k: int, l: int, direction: int = UP) -> Generator:
    return Generator("merge", (k, l), direction)


def split(k: int, l: int, direction: int = UP) -> Generator:
    return Generator("split", (k, l), direction)


def cup(k: int, left_up: bool = True) -> Generator:
    return Generator("cup", (k,), flag=left_up)


def cap(k: int, left_up: bool = True) -> Generator:
    return Generator("cap", (k,), flag=left_up)


def crossing(k: int, l: int, sign: int = 1) -> Generator:
    if sign not in (1, -1):
        raise ValueError("crossing sign must be +1 or -1")
    return Generator("x", (k, l), sign)


def tag(birth: bool, direction: int = UP, side: str = "L") -> Generator:
    if side not in ("L", "R"):
        raise ValueError("tag side must be 'L' or 'R'")
    return Generator("tag", (), direction, birth, side)


def source() -> Generator:
    return Generator("src")


def sink() -> Generator:
    return Generator("snk")


_CATEGORY_KINDS = {
    CKM: {"merge", "split", "cup", "cap", "x", "tag"},
    MOY: {"merge", "split", "cup", "cap", "x"},
    SIKORA: {"x", "cup", "cap", "src", "snk"},
    HOMFLY: {"x", "cup", "cap"},
    MIXED: {"merge", "split", "cup", "cap", "x", "tag", "src", "snk"},
}


def check_admissible(category: str, n: int, gen: Generator) -> None:
    if gen.kind not in _CATEGORY_KINDS[category]:
        raise InadmissibleGenerator(f"{gen.kind} is not a {category} generator")
    for c in gen.colors:
        if not 1 <= c <= n:
            raise InadmissibleGenerator(f"color {c} out of range 1..{n}")
    if category in (SIKORA, HOMFLY) and any(c != 1 for c in gen.colors):
        raise InadmissibleGenerator(f"{category} strands have color 1 only")
    if gen.kind in ("merge", "split"):
        a, b = gen.colors
        if a + b > n:
            raise InadmissibleGenerator(f"edge color {a + b} exceeds rank {n}")


@dataclass(frozen=True)
class DiagramWord:
    """An immutable, fully type-checked slice word."""

    category: str
    n: int
    dom: Boundary
    layers: tuple[tuple[int, Generator], ...]
    cod: Boundary = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.category not in ALL_CATEGORIES:
            raise ValueError(f"unknown category {self.category!r}")
        if self.n < 2:
            raise ValueError("rank must be >= 2")
        for color, direction in self.dom:
            if not 1 <= color <= self.n or direction not in (UP, DOWN):
                raise DiagramTypeError(f"bad boundary strand ({color}, {direction})")
        current = self.dom
        for idx, (offset, gen) in enumerate(self.layers):
            check_admissible(self.category, self.n, gen)
            gdom = gen.dom(self.n)
            if offset < 0 or offset + len(gdom) > len(current):
                raise DiagramTypeError(
                    f"layer {idx}: offset {offset} does not fit width {len(current)}"
                )
            if current[offset : offset + len(gdom)] != gdom:
                raise DiagramTypeError(
                    f"layer {idx}: {gen.text()} expects {gdom}, found "
                    f"{current[offset:offset + len(gdom)]}"
                )
            current = current[:offset] + gen.cod(self.n) + current[offset + len(gdom) :]
        if self.cod is None:
            object.__setattr__(self, "cod", current)
        elif self.cod != current:
            raise DiagramTypeError(f"declared codomain {self.cod} != computed {current}")

    # -- basic views ------------------------------------------------------

    def is_closed(self) -> bool:
        return not self.dom and not self.cod

    def context(self) -> RankContext:
        return RankContext(self.n)

    def grading(self) -> int:
        return sum(gen.grading() for _, gen in self.layers)

    def boundaries(self) -> list[Boundary]:
        """All len(layers)+1 horizontal slices, bottom to top."""
        out = [self.dom]
        current = self.dom
        for offset, gen in self.layers:
            gdom = gen.dom(self.n)
            current = current[:offset] + gen.cod(self.n) + current[offset + len(gdom) :]
            out.append(current)
        return out

    # -- construction ------------------------------------------------------

    @classmethod
    def identity(cls, category: str, n: int, boundary: Boundary) -> DiagramWord:
        return cls(category, n, tuple(boundary), ())

    def stack(self, offset: int, gen: Generator) -> DiagramWord:
        """Apply one more generator on top."""
        return DiagramWord(self.category, self.n, self.dom, self.layers + ((offset, gen),))

    def with_category(self, category: str) -> DiagramWord:
        """Relabel, re-running admissibility checks for the new category."""
        return DiagramWord(category, self.n, self.dom, self.layers)

    # -- serialization -------------------------------------------------------

    def text(self) -> str:
        """Canonical DSL form, one layer per line, with header."""
        lines = [f"category {self.category} n={self.n}"]
        current = self.dom
        for offset, gen in self.layers:
            token = gen.text()
            if gen.kind == "tag" and gen.flag:
                # a birth re-parses as a kill when an n-edge of the matching
                # orientation happens to sit at the same offset; disambiguate
                want_kill_dir = DOWN if gen.direction == UP else UP
                if offset < len(current) and current[offset] == (self.n, want_kill_dir):
                    token += " up" if gen.direction == UP else " down"
            lines.append(f"at {offset}: {token}")
            gdom = gen.dom(self.n)
            current = current[:offset] + gen.cod(self.n) + current[offset + len(gdom) :]
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "category": self.category,
            "n": self.n,
            "dom": [list(s) for s in self.dom],
            "layers": [[offset, gen.to_json()] for offset, gen in self.layers],
        }

    @classmethod
    def from_json(cls, data: dict) -> DiagramWord:
        return cls(
            category=data["category"],
            n=int(data["n"]),
            dom=tuple((int(c), int(d)) for c, d in data["dom"]),
            layers=tuple(
                (int(offset), Generator.from_json(g)) for offset, g in data["layers"]
            ),
        )


def compose(f: DiagramWord, g: DiagramWord) -> DiagramWord:
    """f after g (g's layers first)."""
    if (f.category, f.n) != (g.category, g.n):
        raise DiagramTypeError("composition across categories or ranks")
    if f.dom != g.cod:
        raise DiagramTypeError(f"cannot compose: {f.dom} != {g.cod}")
    return DiagramWord(f.category, f.n, g.dom, g.layers + f.layers)


def tensor(f: DiagramWord, g: DiagramWord) -> DiagramWord:
    """Horizontal juxtaposition, f on the left."""
    if (f.category, f.n) != (g.category, g.n):
        raise DiagramTypeError("tensor across categories or ranks")
    shift = len(f.cod)
    layers = f.layers + tuple((offset + shift, gen) for offset, gen in g.layers)
    return DiagramWord(f.category, f.n, f.dom + g.dom, layers)


def stitch(word: DiagramWord, position: int, kind: str, color: int, left_up: bool) -> DiagramWord:
    """Append a cup or cap layer at the given position."""
    gen = cup(color, left_up) if kind == "cup" else cap(color, left_up)
    return word.stack(position, gen)


def rotate(word: DiagramWord) -> DiagramWord:
    """Bend the last codomain strand around to the end of the domain."""
    if not word.cod:
        raise DiagramTypeError("nothing to rotate")
    color, direction = word.cod[-1]
    new_dom = word.dom + ((color, -direction),)
    bent = DiagramWord(word.category, word.n, new_dom, word.layers)
    return bent.stack(len(word.cod) - 1, cap(color, left_up=(direction == UP)))


def trace_close(word: DiagramWord) -> DiagramWord:
    """Close an endomorphism into a diagram with empty boundary, wrapping
    each strand around the right, outermost strand first.  Requires
    dom == cod with every strand upward."""
    if word.dom != word.cod:
        raise DiagramTypeError(f"trace needs an endomorphism, got {word.dom} -> {word.cod}")
    if any(direction != UP for _, direction in word.dom):
        raise DiagramTypeError("trace closure expects upward strands")
    s = len(word.dom)
    cups = tuple((i, cup(word.dom[i][0], True)) for i in range(s))
    caps = tuple((i, cap(word.dom[i][0], True)) for i in range(s - 1, -1, -1))
    return DiagramWord(word.category, word.n, (), cups + word.layers + caps)


def left_merge_comb(m: int, offset: int = 0) -> list[tuple[int, Generator]]:
    """Layers fusing m adjacent color-1 up strands into one color-m strand,
    accumulating on the left: (1,1)->2, (2,1)->3, ..."""
    return [(offset, merge(j, 1)) for j in range(1, m)]


def left_split_comb(m: int, offset: int = 0) -> list[tuple[int, Generator]]:
    """Mirror image of left_merge_comb: one color-m strand into m color-1."""
    return [(offset, split(j, 1)) for j in range(m - 1, 0, -1)]


# -- formal linear combinations --------------------------------------------------


class LinCombo:
    """Finite Laurent-linear combination of words sharing one signature."""

    __slots__ = ("category", "n", "dom", "cod", "terms")

    def __init__(
        self,
        category: str,
        n: int,
        dom: Boundary,
        cod: Boundary,
        terms: dict[DiagramWord, LaurentPoly] | None = None,
    ):
        self.category = category
        self.n = n
        self.dom = tuple(dom)
        self.cod = tuple(cod)
        self.terms: dict[DiagramWord, LaurentPoly] = {}
        if terms:
            for word, coeff in terms.items():
                self._accumulate(word, coeff)

    def _accumulate(self, word: DiagramWord, coeff: LaurentPoly) -> None:
        if (word.category, word.n, word.dom, word.cod) != (
            self.category,
            self.n,
            self.dom,
            self.cod,
        ):
            raise DiagramTypeError("term signature does not match the combination")
        acc = self.terms.get(word)
        total = coeff if acc is None else acc + coeff
        if total.is_zero():
            self.terms.pop(word, None)
        else:
            self.terms[word] = total

    @classmethod
    def of(cls, word: DiagramWord, coeff: LaurentPoly | int = 1) -> LinCombo:
        if isinstance(coeff, int):
            coeff = word.context().one() * coeff
        return cls(word.category, word.n, word.dom, word.cod, {word: coeff})

    def zero_like(self) -> LinCombo:
        return LinCombo(self.category, self.n, self.dom, self.cod)

    def __add__(self, other: LinCombo) -> LinCombo:
        out = LinCombo(self.category, self.n, self.dom, self.cod, dict(self.terms))
        for word, coeff in other.terms.items():
            out._accumulate(word, coeff)
        return out

    def __sub__(self, other: LinCombo) -> LinCombo:
        return self + other.scale(-1)

    def scale(self, factor: LaurentPoly | int) -> LinCombo:
        if isinstance(factor, int):
            factor = RankContext(self.n).one() * factor
        return LinCombo(
            self.category,
            self.n,
            self.dom,
            self.cod,
            {w: c * factor for w, c in self.terms.items()},
        )

    def is_zero(self) -> bool:
        return not self.terms

    def map_words(self, fn) -> LinCombo:
        """Apply fn: DiagramWord -> LinCombo to every term, bilinearly."""
        out: LinCombo | None = None
        for word, coeff in self.terms.items():
            image = fn(word).scale(coeff)
            out = image if out is None else out + image
        if out is None:
            raise ValueError("map_words on the empty combination needs a signature")
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinCombo):
            return NotImplemented
        return (
            (self.category, self.n, self.dom, self.cod)
            == (other.category, other.n, other.dom, other.cod)
            and self.terms == other.terms
        )

    def __repr__(self) -> str:
        return f"LinCombo({self.category}, n={self.n}, {len(self.terms)} terms)"


def compose_combo(f: LinCombo, g: LinCombo) -> LinCombo:
    """Bilinear extension of compose (f after g)."""
    out = LinCombo(f.category, f.n, g.dom, f.cod)
    for wf, cf in f.terms.items():
        for wg, cg in g.terms.items():
            out._accumulate(compose(wf, wg), cf * cg)
    return out


def tensor_combo(f: LinCombo, g: LinCombo) -> LinCombo:
    """Bilinear extension of tensor."""
    out = LinCombo(f.category, f.n, f.dom + g.dom, f.cod + g.cod)
    for wf, cf in f.terms.items():
        for wg, cg in g.terms.items():
            out._accumulate(tensor(wf, wg), cf * cg)
    return out
