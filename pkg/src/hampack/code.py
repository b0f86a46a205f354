"""Codes over a mixed space: minimum distance, verification, contact graphs
and the connectification transform."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .space import Codeword, MixedSpace, SpaceError, distance, parse_word


class CodeError(ValueError):
    pass


@dataclass(frozen=True)
class Code:
    space: MixedSpace
    words: frozenset[Codeword] = field(default_factory=frozenset)

    def __post_init__(self):
        words = frozenset(self.words)
        for w in words:
            if w.space != self.space:
                raise CodeError(f"word {w} belongs to {w.space}, not {self.space}")
        object.__setattr__(self, "words", words)

    def __len__(self):
        return len(self.words)

    def __iter__(self):
        return iter(self.sorted())

    def __contains__(self, w):
        return w in self.words

    def sorted(self) -> list[Codeword]:
        return sorted(self.words)

    def ranks(self) -> list[int]:
        return [w.index for w in self.sorted()]


def make_code(space: MixedSpace, words: Iterable[Codeword | str | int]) -> Code:
    return Code(space, frozenset(w if isinstance(w, Codeword) else space.word(w) for w in words))


def read_code(space: MixedSpace, path: str | Path) -> Code:
    """Read a code file: one printed word per line, ``#`` comments and blank lines skipped."""
    words = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            words.append(parse_word(space, line))
        except SpaceError as exc:
            raise CodeError(f"{path}:{lineno}: {exc}") from None
    return make_code(space, words)


def write_code(code: Code, path: str | Path, header: str | None = None) -> None:
    lines = [f"# {header}"] if header else []
    lines += [str(w) for w in code]
    Path(path).write_text("\n".join(lines) + "\n")


def min_distance(code: Code) -> int:
    if len(code) < 2:
        raise CodeError("minimum distance needs at least two words")
    return min(distance(a, b) for a, b in itertools.combinations(code.words, 2))


def is_feasible(code: Code, d: int) -> bool:
    return len(code) < 2 or min_distance(code) >= d


@dataclass
class VerifyReport:
    cardinality: int
    min_distance: int | None
    d: int
    passed: bool
    violations: list[tuple[Codeword, Codeword, int]]

    def to_dict(self) -> dict:
        return {
            "cardinality": self.cardinality,
            "min_distance": self.min_distance,
            "d": self.d,
            "passed": self.passed,
            "violations": [[str(a), str(b), dist] for a, b, dist in self.violations],
        }


def verify(code: Code, d: int) -> VerifyReport:
    violations = []
    for a, b in itertools.combinations(code.sorted(), 2):
        dist = distance(a, b)
        if 1 <= dist <= d - 1:
            violations.append((a, b, dist))
    md = min_distance(code) if len(code) >= 2 else None
    return VerifyReport(len(code), md, d, not violations, violations)


@dataclass(frozen=True)
class ContactGraph:
    code: Code
    d: int
    adjacency: dict[Codeword, frozenset[Codeword]]

    def edges(self) -> list[tuple[Codeword, Codeword]]:
        return [(a, b) for a in self.code for b in sorted(self.adjacency[a]) if a < b]


def contact_graph(code: Code, d: int) -> ContactGraph:
    if not is_feasible(code, d):
        raise CodeError(f"code has minimum distance below {d}")
    adj: dict[Codeword, set[Codeword]] = {w: set() for w in code.words}
    for a, b in itertools.combinations(code.words, 2):
        if distance(a, b) == d:
            adj[a].add(b)
            adj[b].add(a)
    return ContactGraph(code, d, {w: frozenset(v) for w, v in adj.items()})


def is_connected(g: ContactGraph) -> bool:
    if not g.adjacency:
        raise CodeError("connectivity of an empty graph is undefined")
    start = next(iter(g.adjacency))
    seen = {start}
    stack = [start]
    while stack:
        for nb in g.adjacency[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(g.adjacency)


def symbol_swap(words: Iterable[Codeword], j: int, a: int, b: int) -> set[Codeword]:
    """Exchange symbols ``a`` and ``b`` at position ``j`` in every word.

    This is an isometry of the space, so pairwise distances are preserved.
    """
    words = list(words)
    if not words:
        return set()
    space = words[0].space
    if not 0 <= j < space.n:
        raise CodeError(f"position {j} outside 0..{space.n - 1}")
    k = space.radices[j]
    if a == b or not (0 <= a < k and 0 <= b < k):
        raise CodeError(f"invalid swap {a}<->{b} at position {j} (alphabet size {k})")
    out = set()
    for w in words:
        sym = list(w.symbols)
        if sym[j] == a:
            sym[j] = b
        elif sym[j] == b:
            sym[j] = a
        out.add(Codeword(space, tuple(sym)))
    return out


def _set_distance(c1, c2) -> int:
    return min(distance(a, b) for a in c1 for b in c2)


def connectify(code: Code, d: int, seed: int | None = None, trace: list | None = None) -> Code:
    """Turn a d-feasible code into one of equal size whose contact graph is connected.

    The grown part ``c1`` absorbs words at distance exactly ``d``; when none
    is left, a symbol swap on the remainder pulls it one step closer.  Choices
    are lexicographically smallest unless ``seed`` is given, in which case the
    seed word is drawn at random.  If ``trace`` is a list, the progress measure
    ``(|c2|, d(c1, c2))`` is appended at each outer iteration.
    """
    if len(code) == 0:
        raise CodeError("connectify needs a nonempty code")
    if not is_feasible(code, d):
        raise CodeError(f"code has minimum distance below {d}")
    ordered = code.sorted()
    start = random.Random(seed).choice(ordered) if seed is not None else ordered[0]
    c1 = [start]
    c2 = set(ordered) - {start}
    while c2:
        grown = True
        while grown:
            grown = False
            for w2 in sorted(c2):
                if any(distance(w1, w2) == d for w1 in c1):
                    c1.append(w2)
                    c2.remove(w2)
                    grown = True
                    break
        if not c2:
            break
        gap = _set_distance(c1, c2)
        if trace is not None:
            trace.append((len(c2), gap))
        assert gap > d, "packing lost d-feasibility"
        w2 = min(c2, key=lambda y: (min(distance(x, y) for x in c1), y))
        w1 = min(x for x in c1 if distance(x, w2) == gap)
        j = next(p for p in range(code.space.n) if w1.symbols[p] != w2.symbols[p])
        c2 = symbol_swap(c2, j, w1.symbols[j], w2.symbols[j])
    return Code(code.space, frozenset(c1))
