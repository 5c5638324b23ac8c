"""Random diagram generation for stress tests and experiments.

Words come out closed and type-correct by construction: a random stack of
vertices and crossings is composed with its own vertical flip, giving an
endomorphism, and the trace closure wraps that up.  Sampling never draws
bends mid-word, so admissibility is just the color bound.
"""

from __future__ import annotations

import random

from .diagram import (
    MIXED,
    SIKORA,
    UP,
    DiagramWord,
    Generator,
    crossing,
    merge,
    sink,
    source,
    split,
    trace_close,
)


def _flip_gen(gen: Generator) -> Generator:
    if gen.kind == "merge":
        return split(*gen.colors, gen.direction)
    if gen.kind == "split":
        return merge(*gen.colors, gen.direction)
    if gen.kind == "x":
        k, l = gen.colors
        return crossing(l, k, gen.direction)
    raise ValueError(f"no vertical flip for {gen.kind}")


def u_turn(word: DiagramWord) -> DiagramWord:
    """Vertical flip: a word cod -> dom built from the reversed layers."""
    layers = tuple(
        (offset, _flip_gen(gen)) for offset, gen in reversed(word.layers)
    )
    return DiagramWord(word.category, word.n, word.cod, layers)


def random_web_stack(
    n: int,
    rng: random.Random,
    *,
    steps: int = 6,
    strands: int = 3,
    category: str = MIXED,
    crossings: bool = True,
) -> DiagramWord:
    """Random type-correct word out of merges, splits, and crossings."""
    dom = tuple((rng.randint(1, max(1, n - 1)), UP) for _ in range(strands))
    boundary = [color for color, _ in dom]
    layers = []
    for _ in range(steps):
        moves = []
        for i in range(len(boundary) - 1):
            if boundary[i] + boundary[i + 1] <= n:
                moves.append(("merge", i))
            if crossings:
                moves.append(("x", i))
        for i, color in enumerate(boundary):
            if color >= 2:
                moves.append(("split", i))
        if not moves:
            break
        kind, i = rng.choice(moves)
        if kind == "merge":
            k, l = boundary[i], boundary[i + 1]
            layers.append((i, merge(k, l)))
            boundary[i : i + 2] = [k + l]
        elif kind == "split":
            c = boundary[i]
            a = rng.randint(1, c - 1)
            layers.append((i, split(a, c - a)))
            boundary[i : i + 1] = [a, c - a]
        else:
            k, l = boundary[i], boundary[i + 1]
            layers.append((i, crossing(k, l, rng.choice((1, -1)))))
            boundary[i : i + 2] = [l, k]
    return DiagramWord(category, n, dom, tuple(layers))


def random_closed_web(
    n: int,
    rng: random.Random,
    *,
    steps: int = 6,
    strands: int = 3,
    crossings: bool = True,
) -> DiagramWord:
    """Random closed diagram: stack, undo with the flip, trace-close."""
    stack = random_web_stack(
        n, rng, steps=steps, strands=strands, crossings=crossings
    )
    endo = DiagramWord(
        stack.category,
        stack.n,
        stack.dom,
        stack.layers + u_turn(stack).layers,
    )
    return trace_close(endo)


def random_closed_tangle(
    n: int,
    rng: random.Random,
    *,
    sources: int = 1,
    twists: int = 4,
) -> DiagramWord:
    """Random closed n-valent tangle: sources, a braid, then sinks.

    Everything is color 1, so any adjacent pair can cross and any n
    consecutive strands can feed a sink."""
    layers = []
    width = 0
    for _ in range(sources):
        off = rng.randint(0, width)
        layers.append((off, source()))
        width += n
    for _ in range(twists):
        if width < 2:
            break
        off = rng.randint(0, width - 2)
        layers.append((off, crossing(1, 1, rng.choice((1, -1)))))
    for _ in range(sources):
        off = rng.randint(0, width - n)
        layers.append((off, sink()))
        width -= n
    return DiagramWord(SIKORA, n, (), tuple(layers))
