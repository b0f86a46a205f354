"""Mixed Hamming spaces, word encoding and the Hamming metric.

A space is a ladder of alphabet blocks ``(k, alpha)`` with strictly
increasing ``k``.  Words are printed with the largest alphabet block first,
so the binary/ternary word ``20001010`` has its ternary symbol on the left.
Ranks are mixed-radix integers with the leftmost printed symbol most
significant, which makes the all-zero word rank 0.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class SpaceError(ValueError):
    pass


@dataclass(frozen=True)
class MixedSpace:
    blocks: tuple[tuple[int, int], ...]
    n: int = field(init=False, compare=False)
    cardinality: int = field(init=False, compare=False)

    def __post_init__(self):
        if not self.blocks:
            raise SpaceError("a space needs at least one block")
        prev = 1
        for k, alpha in self.blocks:
            if k < 2:
                raise SpaceError(f"alphabet size must be >= 2, got {k}")
            if alpha < 1:
                raise SpaceError(f"block length must be >= 1, got {alpha}")
            if k <= prev:
                raise SpaceError("alphabet sizes must be strictly increasing")
            prev = k
        object.__setattr__(self, "n", sum(a for _, a in self.blocks))
        object.__setattr__(self, "cardinality", math.prod(k**a for k, a in self.blocks))

    def __str__(self):
        return ",".join(f"{k}^{a}" for k, a in self.blocks)

    @property
    def s(self) -> int:
        return len(self.blocks)

    @cached_property
    def radices(self) -> tuple[int, ...]:
        """Alphabet size of every printed position (largest block first)."""
        out = []
        for k, alpha in reversed(self.blocks):
            out.extend([k] * alpha)
        return tuple(out)

    @cached_property
    def block_of_position(self) -> tuple[int, ...]:
        """Index into ``blocks`` for each printed position."""
        out = []
        for j in reversed(range(self.s)):
            out.extend([j] * self.blocks[j][1])
        return tuple(out)

    def block_positions(self, j: int) -> range:
        """Printed positions belonging to block ``j`` (``blocks[j]``)."""
        start = sum(a for _, a in self.blocks[j + 1:])
        return range(start, start + self.blocks[j][1])

    @cached_property
    def _weights(self) -> tuple[int, ...]:
        w = [1] * self.n
        for p in range(self.n - 2, -1, -1):
            w[p] = w[p + 1] * self.radices[p + 1]
        return tuple(w)

    @cached_property
    def symbol_table(self) -> np.ndarray:
        """``(cardinality, n)`` array of symbols, row ``i`` is the word of rank ``i``."""
        grids = np.indices(self.radices, dtype=np.int16)
        return grids.reshape(self.n, -1).T.copy()

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        table = self.symbol_table
        dist = np.zeros((self.cardinality, self.cardinality), dtype=np.int16)
        for p in range(self.n):
            col = table[:, p]
            dist += col[:, None] != col[None, :]
        return dist

    def marginal_matrix(self, j: int) -> np.ndarray:
        """Pairwise differing-position counts restricted to block ``j``."""
        table = self.symbol_table
        out = np.zeros((self.cardinality, self.cardinality), dtype=np.int16)
        for p in self.block_positions(j):
            col = table[:, p]
            out += col[:, None] != col[None, :]
        return out

    def word(self, value: str | Sequence[int] | int) -> "Codeword":
        if isinstance(value, str):
            return parse_word(self, value)
        if isinstance(value, (int, np.integer)):
            return unrank(self, int(value))
        return Codeword(self, tuple(int(v) for v in value))

    def zero(self) -> "Codeword":
        return unrank(self, 0)

    def words(self) -> Iterable["Codeword"]:
        for i in range(self.cardinality):
            yield unrank(self, i)


@dataclass(frozen=True, order=True)
class Codeword:
    space: MixedSpace = field(compare=False, repr=False)
    symbols: tuple[int, ...]

    def __post_init__(self):
        radices = self.space.radices
        if len(self.symbols) != len(radices):
            raise SpaceError(
                f"word has {len(self.symbols)} symbols, space {self.space} needs {len(radices)}")
        for p, (sym, k) in enumerate(zip(self.symbols, radices)):
            if not 0 <= sym < k:
                raise SpaceError(f"position {p + 1}: symbol {sym} not in 0..{k - 1}")

    def __str__(self):
        return "".join(str(v) if v < 10 else f"[{v}]" for v in self.symbols)

    def __eq__(self, other):
        if not isinstance(other, Codeword):
            return NotImplemented
        return self.space == other.space and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    @cached_property
    def index(self) -> int:
        return sum(s * w for s, w in zip(self.symbols, self.space._weights))


@dataclass(frozen=True)
class MarginalProfile:
    """Differing-position counts per block, indexed like ``MixedSpace.blocks``."""

    per_block: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.per_block)

    def printed(self) -> tuple[int, ...]:
        """Entries in printed order, largest alphabet first."""
        return tuple(reversed(self.per_block))

    def fits(self, space: MixedSpace) -> bool:
        return len(self.per_block) == space.s and all(
            0 <= m <= a for m, (_, a) in zip(self.per_block, space.blocks))


def make_space(spec: Iterable[tuple[int, int]]) -> MixedSpace:
    blocks = [(int(k), int(a)) for k, a in spec]
    if not blocks:
        raise SpaceError("empty space specification")
    ks = [k for k, _ in blocks]
    if len(set(ks)) != len(ks):
        raise SpaceError(f"duplicate alphabet sizes in {ks}")
    return MixedSpace(tuple(sorted(blocks)))


def parse_space(text: str) -> MixedSpace:
    """Parse ``2^7,3^1`` style specifications."""
    blocks = []
    for term in text.replace(" ", "").split(","):
        if not term:
            continue
        k, sep, a = term.partition("^")
        try:
            blocks.append((int(k), int(a) if sep else 1))
        except ValueError:
            raise SpaceError(f"bad space term {term!r} in {text!r}") from None
    prev = 0
    for k, _ in blocks:
        if k <= prev:
            raise SpaceError(f"alphabet sizes must be strictly increasing in {text!r}")
        prev = k
    return make_space(blocks)


def parse_word(space: MixedSpace, text: str) -> Codeword:
    text = text.strip()
    if len(text) != space.n:
        raise SpaceError(f"word {text!r} has length {len(text)}, expected {space.n}")
    symbols = []
    for p, ch in enumerate(text):
        if not ch.isdigit():
            raise SpaceError(f"word {text!r}: position {p + 1} is not a digit")
        symbols.append(int(ch))
    return Codeword(space, tuple(symbols))


def _check_same(w: Codeword, x: Codeword) -> None:
    if w.space != x.space:
        raise SpaceError(f"words from different spaces: {w.space} vs {x.space}")


def distance(w: Codeword, x: Codeword) -> int:
    _check_same(w, x)
    return sum(a != b for a, b in zip(w.symbols, x.symbols))


def marginal_distances(w: Codeword, x: Codeword) -> MarginalProfile:
    _check_same(w, x)
    counts = [0] * w.space.s
    for j, a, b in zip(w.space.block_of_position, w.symbols, x.symbols):
        if a != b:
            counts[j] += 1
    return MarginalProfile(tuple(counts))


def rank(w: Codeword) -> int:
    return w.index


def unrank(space: MixedSpace, i: int) -> Codeword:
    if not 0 <= i < space.cardinality:
        raise SpaceError(f"rank {i} outside [0, {space.cardinality})")
    symbols = []
    for k in reversed(space.radices):
        i, r = divmod(i, k)
        symbols.append(r)
    return Codeword(space, tuple(reversed(symbols)))


def ball(space: MixedSpace, center: Codeword, r: int) -> set[Codeword]:
    """All words within distance ``r`` of ``center``, built by changing at most ``r`` positions."""
    if not 0 <= r <= space.n:
        raise SpaceError(f"radius {r} outside [0, {space.n}]")
    out = {center}
    base = list(center.symbols)
    for m in range(1, r + 1):
        for positions in itertools.combinations(range(space.n), m):
            choices = [[v for v in range(space.radices[p]) if v != base[p]] for p in positions]
            for values in itertools.product(*choices):
                sym = base[:]
                for p, v in zip(positions, values):
                    sym[p] = v
                out.add(Codeword(space, tuple(sym)))
    return out


def ball_ranks(space: MixedSpace, center: int, r: int) -> np.ndarray:
    """Ranks within distance ``r`` of rank ``center`` (vectorised)."""
    return np.flatnonzero(space.distance_matrix[center] <= r)
