"""Binary packing models and their LP/MPS serialisation.

Every model maximises ``offset + sum(x_a for free a)`` subject to pairwise
conflicts ``x_a + x_b <= 1``.  Conflicts are kept as one Python-int bitset
per free word (bit ``i`` refers to ``free[i]``), which is the form the
solver consumes; explicit pair lists are produced only for emission.
"""
from __future__ import annotations

import io
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator

import numpy as np

from .code import Code
from .space import Codeword, MarginalProfile, MixedSpace, distance, marginal_distances


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class PackingModel:
    space: MixedSpace
    d: int
    fixed_one: tuple[int, ...]
    fixed_zero: tuple[int, ...]
    free: tuple[int, ...]
    conflicts: tuple[int, ...] = field(repr=False)
    forbidden_profile: MarginalProfile | None = None
    kind: str = "custom"

    @property
    def objective_offset(self) -> int:
        return len(self.fixed_one)

    def words(self, ranks: Iterable[int]) -> list[Codeword]:
        return [self.space.word(int(r)) for r in ranks]

    def conflict_pairs(self) -> Iterator[tuple[int, int]]:
        """Conflicting pairs as (rank, rank) with the first rank smaller."""
        for i, row in enumerate(self.conflicts):
            row >>= i + 1
            j = i + 1
            while row:
                low = row & -row
                j += low.bit_length() - 1
                row >>= low.bit_length()
                yield self.free[i], self.free[j]
                j += 1

    def conflict_count(self) -> int:
        return sum(row.bit_count() for row in self.conflicts) // 2


@dataclass(frozen=True)
class ModelStats:
    free: int
    fixed_one: int
    fixed_zero: int
    conflicts: int


def model_stats(model: PackingModel) -> ModelStats:
    return ModelStats(len(model.free), len(model.fixed_one), len(model.fixed_zero),
                      model.conflict_count())


def _bitset_rows(mask: np.ndarray) -> tuple[int, ...]:
    if mask.shape[0] == 0:
        return ()
    packed = np.packbits(mask, axis=1, bitorder="little")
    return tuple(int.from_bytes(row.tobytes(), "little") for row in packed)


def _assemble(space, d, fixed_one, fixed_zero, dropped=(), profile=None, kind="custom"):
    fixed_one = tuple(sorted(set(fixed_one)))
    fixed_zero = tuple(sorted(set(fixed_zero) - set(fixed_one)))
    taken = set(fixed_one) | set(fixed_zero) | set(dropped)
    free = np.array([r for r in range(space.cardinality) if r not in taken], dtype=np.int64)
    dist = space.distance_matrix
    for a in fixed_one:
        for b in fixed_one:
            if a < b and dist[a, b] < d:
                raise ModelError(f"fixed words {space.word(a)} and {space.word(b)} "
                                 f"are at distance {dist[a, b]} < {d}")
    if fixed_one and len(free):
        near = (dist[np.ix_(list(fixed_one), free)] < d).any(axis=0)
        if near.any():
            raise ModelError("a free word conflicts with a word fixed to one")
    sub = dist[np.ix_(free, free)]
    mask = (sub >= 1) & (sub <= d - 1)
    if profile is not None:
        extra = sub == d
        for j, m in enumerate(profile.per_block):
            extra &= space.marginal_matrix(j)[np.ix_(free, free)] == m
        mask |= extra
    return PackingModel(space, d, fixed_one, fixed_zero, tuple(int(r) for r in free),
                        _bitset_rows(mask), profile, kind)


def _near(space: MixedSpace, centers: Iterable[int], d: int) -> set[int]:
    dist = space.distance_matrix
    out: set[int] = set()
    for c in centers:
        out.update(int(r) for r in np.flatnonzero(dist[c] <= d - 1))
    return out


def build_full(space: MixedSpace, d: int) -> PackingModel:
    if d < 1:
        raise ModelError("d must be >= 1")
    return _assemble(space, d, (), (), kind="full")


def build_zero_fixed(space: MixedSpace, d: int) -> PackingModel:
    if d < 1:
        raise ModelError("d must be >= 1")
    return _assemble(space, d, (0,), _near(space, [0], d) - {0}, kind="zero")


def build_reduced(space: MixedSpace, d: int) -> PackingModel:
    if d < 1:
        raise ModelError("d must be >= 1")
    return _assemble(space, d, (0,), (), dropped=_near(space, [0], d), kind="reduced")


def build_pair(space: MixedSpace, d: int, second: Codeword) -> PackingModel:
    """Fix the zero word and ``second`` (at distance exactly d) and drop every
    word within distance d-1 of either."""
    z = space.zero()
    if distance(z, second) != d:
        raise ModelError(f"second word {second} is at distance {distance(z, second)}, not {d}")
    fixed = (0, second.index)
    return _assemble(space, d, fixed, (), dropped=_near(space, fixed, d), kind="pair")


def build_profile_forbidding(space: MixedSpace, d: int, profile: MarginalProfile,
                             fix_zero: bool = False) -> PackingModel:
    """Full model plus conflicts between words whose contact has ``profile``.

    With ``fix_zero`` the zero word is pinned and its ball dropped; the model
    is translation invariant, so the optimum is unchanged.
    """
    if not profile.fits(space):
        raise ModelError(f"profile {profile.printed()} does not fit {space}")
    if profile.total != d:
        raise ModelError(f"profile total {profile.total} differs from d={d}")
    if not fix_zero:
        return _assemble(space, d, (), (), profile=profile, kind="forbid")
    dist = space.distance_matrix
    dropped = _near(space, [0], d)
    for r in np.flatnonzero(dist[0] == d):
        if marginal_distances(space.zero(), space.word(int(r))) == profile:
            dropped.add(int(r))
    return _assemble(space, d, (0,), (), dropped=dropped, profile=profile, kind="forbid")


def pin(model: PackingModel, words: Iterable[Codeword]) -> PackingModel:
    """Force extra words to one; free words in conflict with them become fixed to zero."""
    add = {w.index for w in words}
    fixed_one = set(model.fixed_one) | add
    if set(model.fixed_zero) & fixed_one:
        raise ModelError("a forced word is fixed to zero in the model")
    if model.forbidden_profile is not None:
        raise ModelError("pinning profile-forbidding models is not supported")
    dist = model.space.distance_matrix
    newly_zero = {r for r in model.free if r not in fixed_one
                  and any(dist[r, f] < model.d for f in add)}
    dropped = set(range(model.space.cardinality)) - set(model.free) - set(model.fixed_zero) \
        - set(model.fixed_one)
    return _assemble(model.space, model.d, fixed_one,
                     set(model.fixed_zero) | newly_zero, dropped=dropped, kind=model.kind)


def var_name(w: Codeword) -> str:
    return f"x_{w}"


_NAME_RE = re.compile(r"^x_(\d+)$")


def _lp_text(model: PackingModel, include_fixed: bool) -> str:
    out = io.StringIO()
    space = model.space
    names = {r: var_name(space.word(r)) for r in model.free}
    out.write(f"\\ packing model '{model.kind}' space {space} d={model.d}\n")
    out.write(f"\\ objective constant {model.objective_offset} "
              f"(words fixed to one: {len(model.fixed_one)}) is not included below\n")
    for r in model.fixed_one:
        out.write(f"\\ fixed 1: {var_name(space.word(r))}\n")
    out.write("Maximize\n obj:")
    obj_vars = [names[r] for r in model.free]
    if include_fixed:
        obj_vars += [var_name(space.word(r)) for r in model.fixed_one]
        obj_vars += [f"0 {var_name(space.word(r))}" for r in model.fixed_zero]
    if not obj_vars:
        out.write(" 0")
    for i, name in enumerate(obj_vars):
        if i and i % 8 == 0:
            out.write("\n     ")
        out.write(f" + {name}" if i else f" {name}")
    out.write("\nSubject To\n")
    for c, (a, b) in enumerate(model.conflict_pairs(), 1):
        out.write(f" c{c}: {names[a]} + {names[b]} <= 1\n")
    if include_fixed:
        for r in model.fixed_one:
            out.write(f" f{r}: {var_name(space.word(r))} = 1\n")
        for r in model.fixed_zero:
            out.write(f" f{r}: {var_name(space.word(r))} = 0\n")
    binaries = [names[r] for r in model.free]
    if include_fixed:
        binaries += [var_name(space.word(r)) for r in model.fixed_one + model.fixed_zero]
    if binaries:
        out.write("Binary\n")
        for name in binaries:
            out.write(f" {name}\n")
    out.write("End\n")
    return out.getvalue()


def _mps_text(model: PackingModel, include_fixed: bool) -> str:
    space = model.space
    cols = [(r, 1) for r in model.free]
    if include_fixed:
        cols += [(r, 1) for r in model.fixed_one] + [(r, 0) for r in model.fixed_zero]
        cols.sort()
    names = {r: var_name(space.word(r)) for r, _ in cols}
    rows_of: dict[int, list[str]] = {r: [] for r, _ in cols}
    rows = []
    for c, (a, b) in enumerate(model.conflict_pairs(), 1):
        rows.append((f"c{c}", "L", 1))
        rows_of[a].append(f"c{c}")
        rows_of[b].append(f"c{c}")
    if include_fixed:
        for r in model.fixed_one + model.fixed_zero:
            rows.append((f"f{r}", "E", 1 if r in model.fixed_one else 0))
            rows_of[r].append(f"f{r}")
    out = io.StringIO()
    out.write(f"* packing model '{model.kind}' space {space} d={model.d}\n")
    out.write(f"* objective constant {model.objective_offset} "
              f"(words fixed to one: {len(model.fixed_one)}) is not included below\n")
    out.write(f"NAME          {model.kind.upper()}\n")
    out.write("OBJSENSE\n    MAX\n")
    out.write("ROWS\n N  OBJ\n")
    for name, sense, _ in rows:
        out.write(f" {sense}  {name}\n")
    out.write("COLUMNS\n")
    out.write("    MARKER                 'MARKER'                 'INTORG'\n")
    for r, coef in cols:
        name = names[r]
        if coef or include_fixed:
            out.write(f"    {name:<8}  {'OBJ':<8}  {coef:>12}\n")
        for row in rows_of[r]:
            out.write(f"    {name:<8}  {row:<8}  {1:>12}\n")
    out.write("    MARKER                 'MARKER'                 'INTEND'\n")
    out.write("RHS\n")
    for name, _, rhs in rows:
        if rhs:
            out.write(f"    {'RHS':<8}  {name:<8}  {rhs:>12}\n")
    out.write("BOUNDS\n")
    for r, _ in cols:
        out.write(f" BV {'BND':<8}  {names[r]}\n")
    out.write("ENDATA\n")
    return out.getvalue()


def emit(model: PackingModel, fmt: str, sink: str | Path | IO[str],
         include_fixed: bool = False) -> int:
    """Write the model as LP or MPS text; returns the number of bytes written.

    Words fixed to one or zero are omitted unless ``include_fixed`` is set, in
    which case they appear as equality rows.  The objective constant for the
    omitted fixed-to-one words is recorded in a comment line.
    """
    if fmt == "lp":
        text = _lp_text(model, include_fixed)
    elif fmt == "mps":
        text = _mps_text(model, include_fixed)
    else:
        raise ModelError(f"unknown format {fmt!r}")
    data = text.encode("ascii")
    if isinstance(sink, (str, Path)):
        try:
            Path(sink).write_bytes(data)
        except OSError as exc:
            raise ModelError(f"cannot write {sink}: {exc}") from None
    else:
        sink.write(text)
    return len(data)


def read_solution(model: PackingModel, text: str) -> Code:
    """Map a ``name=value`` (or ``name value``) listing back to a code.

    Variables with value >= 0.5 are taken; words fixed to one are always included.
    """
    space = model.space
    words = set(model.words(model.fixed_one))
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace("=", " ").split()
        if len(parts) < 2:
            continue
        m = _NAME_RE.match(parts[0])
        if not m:
            continue
        if float(parts[1]) >= 0.5:
            words.add(space.word(m.group(1)))
    return Code(space, frozenset(words))
