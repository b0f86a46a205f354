"""Branching on the second word of a contact pair, branch audits, and
corollary bound propagation for binary/ternary packing numbers."""
from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable

from .code import Code
from .model import build_pair, build_profile_forbidding, build_full
from .space import Codeword, MarginalProfile, MixedSpace, make_space
from .solver import SolveBudget, SolveResult, Status, solve, solve_forced


@dataclass(frozen=True)
class BranchSpec:
    space: MixedSpace
    d: int
    profile: MarginalProfile

    @property
    def word(self) -> Codeword:
        """Trailing ``m_j`` positions of each block set to 1, all else 0."""
        symbols = [0] * self.space.n
        for j, m in enumerate(self.profile.per_block):
            positions = self.space.block_positions(j)
            for p in positions[len(positions) - m:]:
                symbols[p] = 1
        return Codeword(self.space, tuple(symbols))


def enumerate_branches(space: MixedSpace, d: int) -> list[BranchSpec]:
    """One branch per way of spreading ``d`` differences over the blocks.

    Ordered lexicographically on the profile read largest block first.
    """
    caps = [a for _, a in reversed(space.blocks)]
    out = []
    for printed in itertools.product(*(range(c + 1) for c in caps)):
        if sum(printed) == d:
            out.append(BranchSpec(space, d, MarginalProfile(tuple(reversed(printed)))))
    return out


@dataclass
class AuditResult:
    unavoidable: bool
    reason: str
    bound: int | None = None
    result: SolveResult | None = None

    @property
    def verdict(self) -> str:
        return "branch_unavoidable" if self.unavoidable else "inconclusive"


def _pigeonhole(space: MixedSpace, profile: MarginalProfile, known_lower: int) -> bool:
    # all d differences inside one block that is exactly d long: two words
    # agreeing outside that block must differ in every position of it
    nonzero = [j for j, m in enumerate(profile.per_block) if m]
    if len(nonzero) != 1:
        return False
    j = nonzero[0]
    if space.blocks[j][1] != profile.per_block[j]:
        return False
    outside = math.prod(k**a for i, (k, a) in enumerate(space.blocks) if i != j)
    return known_lower > outside


def audit_branch(space: MixedSpace, d: int, profile: MarginalProfile, known_lower: int,
                 budget: SolveBudget | None = None) -> AuditResult:
    """Decide whether every packing of size >= ``known_lower`` must contain a
    contact pair with ``profile``."""
    if _pigeonhole(space, profile, known_lower):
        return AuditResult(True, "pigeonhole")
    budget = budget or SolveBudget()
    model = build_profile_forbidding(space, d, profile, fix_zero=True)
    res = solve(model, replace(budget, initial_lower=max(known_lower - 1, 0)), partition=True)
    if res.upper_bound < known_lower:
        return AuditResult(True, "solved", res.upper_bound, res)
    reason = "budget" if res.status is Status.BUDGET else "solved"
    return AuditResult(False, reason, res.upper_bound, res)


def packing_number(space: MixedSpace, d: int, budget: SolveBudget | None = None) -> SolveResult:
    """Maximum packing size as the best of the pair-fixed branch models."""
    budget = budget or SolveBudget()
    t0 = time.monotonic()
    z = space.zero()
    if d > space.n:
        return SolveResult(Status.OPTIMAL, 1, 1, Code(space, frozenset([z])), 0.0, 0, d)
    if d < 1:
        raise ValueError("d must be >= 1")
    best: SolveResult | None = None
    upper = 0
    nodes = 0
    complete = True
    for br in enumerate_branches(space, d):
        seconds = None
        if budget.seconds is not None:
            seconds = max(0.0, budget.seconds - (time.monotonic() - t0))
        lower = budget.initial_lower
        if best is not None:
            lower = max(lower or 0, best.best_value)
        res = solve(build_pair(space, d, br.word),
                    replace(budget, seconds=seconds, initial_lower=lower))
        nodes += res.node_count
        upper = max(upper, res.upper_bound)
        complete &= res.status is not Status.BUDGET
        if best is None or res.best_value > best.best_value:
            best = res
    assert best is not None
    upper = max(upper, best.best_value)
    if best.best_value == upper:
        status = Status.OPTIMAL
    else:
        status = Status.FEASIBLE if complete else Status.BUDGET
    return SolveResult(status, best.best_value, upper, best.witness,
                       time.monotonic() - t0, nodes, d)


# --- bound propagation --------------------------------------------------------

Key = tuple[int, int, int]  # (binary length b, ternary length t, d)


@dataclass
class LedgerEntry:
    lower: int
    upper: int
    provenance: str
    parent: Key | None = None


@dataclass(frozen=True)
class Rule:
    """Upper-bound rule: ``U(key + shift) <= fn(U(key))``."""

    name: str
    shift: Key
    fn: Callable[[int], int]


RULES: dict[str, list[Rule]] = {
    "ii": [Rule("ii", (1, 0, 0), lambda u: 2 * u),
           Rule("ii", (0, 1, 0), lambda u: 3 * u)],
    "iv": [Rule("iv", (-1, 1, 0), lambda u: 3 * u // 2)],
    "vi": [Rule("vi", (0, 1, 1), lambda u: u)],
}


@dataclass
class BoundLedger:
    entries: dict[Key, LedgerEntry] = field(default_factory=dict)

    def add(self, key: Key, lower: int, upper: int, provenance: str = "anchor",
            parent: Key | None = None):
        if lower > upper:
            raise ValueError(f"lower {lower} > upper {upper} at {key}")
        self.entries[key] = LedgerEntry(lower, upper, provenance, parent)

    def upper(self, b: int, t: int, d: int) -> int | None:
        e = self.entries.get((b, t, d))
        return e.upper if e else None

    def chain(self, key: Key) -> list[tuple[Key, str]]:
        out = []
        seen = set()
        while key is not None:
            if key in seen:
                raise ValueError(f"cyclic provenance at {key}")
            seen.add(key)
            e = self.entries[key]
            out.append((key, e.provenance))
            key = e.parent
        return out

    def lines(self) -> list[str]:
        return [f"2,3 {b},{t} {d} {e.lower} {e.upper} {e.provenance}"
                + (f":{e.parent[0]},{e.parent[1]};{e.parent[2]}" if e.parent else "")
                for (b, t, d), e in sorted(self.entries.items())]


def read_anchors(path: str | Path) -> BoundLedger:
    """Anchor lines: ``k-spec alpha-spec d lower upper provenance``, e.g.
    ``2,3 7,1 3 26 26 anchor``.  Only binary/ternary spaces are accepted."""
    ledger = BoundLedger()
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 5:
            raise ValueError(f"{path}:{lineno}: expected 'k-spec alpha-spec d lower upper [tag]'")
        ks = [int(v) for v in parts[0].split(",")]
        alphas = [int(v) for v in parts[1].split(",")]
        lengths = dict(zip(ks, alphas))
        if set(ks) - {2, 3} or len(ks) != len(alphas):
            raise ValueError(f"{path}:{lineno}: only binary/ternary anchors are supported")
        key = (lengths.get(2, 0), lengths.get(3, 0), int(parts[2]))
        ledger.add(key, int(parts[3]), int(parts[4]), parts[5] if len(parts) > 5 else "anchor")
    return ledger


def propagate_bounds(ledger: BoundLedger, rules: Iterable[str] = ("ii", "iv", "vi"),
                     b_range=range(1, 11), t_range=range(0, 6), d_range=range(3, 5)) -> BoundLedger:
    """Apply the upper-bound rules until nothing inside the grid improves."""
    out = BoundLedger({k: replace(e) for k, e in ledger.entries.items()})
    active = [r for name in rules for r in RULES[name]]
    grid = lambda k: k[0] in b_range and k[1] in t_range and k[2] in d_range  # noqa: E731
    changed = True
    while changed:
        changed = False
        for key in sorted(out.entries):
            src = out.entries[key]
            for rule in active:
                tgt = tuple(a + s for a, s in zip(key, rule.shift))
                if not grid(tgt):
                    continue
                bound = rule.fn(src.upper)
                cur = out.entries.get(tgt)
                if cur is None or bound < cur.upper:
                    lower = cur.lower if cur else 1
                    out.add(tgt, min(lower, bound), bound, rule.name, key)
                    changed = True
    return out


# --- reproduction of the published tables ------------------------------------

def _space(ks, alphas) -> MixedSpace:
    return make_space(zip(ks, alphas))


# (alphabet sizes, block lengths, optimum, optimum with the forced pair)
TABLE1 = [
    ((2, 3), (4, 1), 6, 4),
    ((2, 3), (2, 3), 9, 8),
    ((2, 4), (4, 1), 8, 5),
    ((2, 3, 4), (2, 2, 1), 11, 9),
    ((2, 5), (4, 1), 8, 5),
    ((2, 3, 5), (2, 2, 1), 12, 11),
    ((2, 6), (4, 1), 8, 5),
    ((2, 7), (4, 1), 8, 5),
]
TABLE1_FORCED = ("00000", "00111")

TABLE2 = [
    ((2, 3), (3, 2), 3, 2),
    ((2, 3, 4), (3, 1, 1), 3, 2),
    ((2, 3, 4), (2, 2, 1), 4, 3),
    ((2, 4), (3, 2), 4, 2),
    ((2, 3, 5), (3, 1, 1), 3, 2),
    ((2, 3, 5), (2, 2, 1), 4, 3),
    ((2, 3, 5), (1, 3, 1), 5, 4),
    ((2, 4, 5), (3, 1, 1), 4, 2),
    ((2, 5), (3, 2), 4, 2),
    ((2, 3, 6), (3, 1, 1), 3, 2),
    ((2, 3, 6), (2, 2, 1), 4, 3),
    ((2, 3, 6), (1, 3, 1), 6, 4),
    ((2, 4, 6), (3, 1, 1), 4, 2),
    ((2, 5, 6), (3, 1, 1), 4, 2),
    ((2, 6), (3, 2), 4, 2),
    ((2, 3, 7), (3, 1, 1), 3, 2),
    ((2, 3, 7), (2, 2, 1), 4, 3),
    ((2, 3, 7), (1, 3, 1), 6, 4),
    ((3, 7), (4, 1), 7, 6),
    ((2, 4, 7), (3, 1, 1), 4, 2),
    ((3, 8), (4, 1), 8, 6),
    ((3, 9), (4, 1), 9, 6),
]
TABLE2_FORCED = ("00000", "01111")

# (b, t) -> (improved upper bound, former upper bound)
TABLE3 = {
    (2, 5): (63, 65), (3, 4): (42, 44), (4, 3): (28, 30), (4, 4): (84, 88),
    (5, 3): (56, 60), (6, 2): (39, 44), (6, 3): (112, 118), (7, 1): (26, 30),
    (7, 2): (78, 83), (7, 3): (224, 225), (8, 1): (52, 59), (9, 1): (104, 108),
    (10, 1): (208, 212),
}
TABLE4 = {
    (3, 5): (42, 43), (4, 4): (28, 30), (5, 4): (56, 59), (6, 3): (39, 40),
    (6, 4): (112, 114), (7, 2): (26, 30), (7, 3): (78, 80), (8, 2): (52, 59),
    (9, 2): (104, 108), (10, 2): (208, 212),
}
ANCHORS = {(7, 1, 3): 26, (4, 3, 3): 28}


def label(ks, alphas, d) -> str:
    subs = "" if tuple(ks) == tuple(range(2, len(ks) + 2)) else "_{" + ",".join(map(str, ks)) + "}"
    return f"N{subs}({','.join(map(str, alphas))};{d})"


@dataclass
class Cell:
    table: str
    label: str
    column: str
    expected: int
    got: int | None
    status: str = ""

    @property
    def ok(self) -> bool:
        return self.got == self.expected


@dataclass
class TableReport:
    cells: list[Cell]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells)

    def text(self) -> str:
        rows = [f"{'table':<6} {'instance':<22} {'column':<8} {'expected':>8} {'got':>6}  result"]
        for c in self.cells:
            got = "-" if c.got is None else str(c.got)
            rows.append(f"{c.table:<6} {c.label:<22} {c.column:<8} {c.expected:>8} {got:>6}  "
                        f"{'PASS' if c.ok else 'FAIL'}{(' ' + c.status) if c.status else ''}")
        passed = sum(c.ok for c in self.cells)
        rows.append(f"{passed}/{len(self.cells)} cells match")
        return "\n".join(rows)

    def to_json(self) -> str:
        return json.dumps([c.__dict__ | {"ok": c.ok} for c in self.cells], indent=2)


def reproduce_counterexamples(table: str, budget: SolveBudget | None = None) -> list[Cell]:
    rows, forced, d = (TABLE1, TABLE1_FORCED, 3) if table == "1" else (TABLE2, TABLE2_FORCED, 4)
    cells = []
    for ks, alphas, full, pinned in rows:
        space = _space(ks, alphas)
        name = label(ks, alphas, d)
        res = packing_number(space, d, budget)
        cells.append(Cell(table, name, "max", full, res.best_value, res.status.value))
        res = solve_forced(build_full(space, d), [space.word(w) for w in forced], budget)
        cells.append(Cell(table, name, "forced", pinned, res.best_value, res.status.value))
    return cells


def reproduce_bounds() -> list[Cell]:
    ledger = BoundLedger()
    for key, value in ANCHORS.items():
        ledger.add(key, value, value)
    ledger = propagate_bounds(ledger)
    cells = []
    for table, d, data in (("3", 3, TABLE3), ("4", 4, TABLE4)):
        for (b, t), (new, _old) in sorted(data.items()):
            cells.append(Cell(table, label((2, 3), (b, t), d), "upper", new, ledger.upper(b, t, d)))
    return cells


def reproduce_tables(budget: SolveBudget | None = None) -> TableReport:
    cells = reproduce_counterexamples("1", budget) + reproduce_counterexamples("2", budget)
    return TableReport(cells + reproduce_bounds())
