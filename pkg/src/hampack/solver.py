"""Exact solution of packing models as maximum independent set.

The search is a bitset branch and bound: at every node the candidate set is
greedily covered by cliques of the conflict graph (each clique holds at most
one chosen word), and the cover index of a vertex bounds what any branch
starting from it can still add.  Vertices are numbered by descending
conflict degree, so the cover is built in that order.
"""
from __future__ import annotations

import json
import logging
import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernel
from .code import Code, verify
from .model import ModelError, PackingModel, pin
from .space import Codeword, MixedSpace

log = logging.getLogger(__name__)

ORACLE_LIMIT = 24


class Status(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible_lower_bound"
    BUDGET = "budget_exhausted"
    INFEASIBLE = "infeasible"


@dataclass
class SolveBudget:
    seconds: float | None = None
    nodes: int | None = None
    # a value already known to be attainable; the search only looks for better
    initial_lower: int | None = None
    threads: int = 1
    progress: bool = False

    def __post_init__(self):
        for name in ("seconds", "nodes", "initial_lower"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class SolveResult:
    status: Status
    best_value: int
    upper_bound: int
    witness: Code
    elapsed: float = 0.0
    node_count: int = 0
    d: int = 0

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "value": self.best_value,
            "bound": self.upper_bound,
            "witness": [str(w) for w in self.witness],
            "elapsed": round(self.elapsed, 6),
            "nodes": self.node_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


class _Search:
    """Maximum independent set over ``nv`` vertices given conflict bitsets.

    Thin wrapper holding the packed rows for the compiled kernel.
    """

    def __init__(self, conflicts, parts=()):
        self.nv = nv = len(conflicts)
        full = (1 << nv) - 1
        self.conflict = _kernel.to_words(list(conflicts), nv)
        self.compat = _kernel.to_words([full & ~row & ~(1 << i)
                                        for i, row in enumerate(conflicts)], nv)
        # (vertex mask, independence number of that class)
        self.parts = list(parts)
        self.part_masks = _kernel.to_words([m for m, _ in parts], nv)
        self.alphas = np.array([a for _, a in parts], dtype=np.int64)
        self.W = self.conflict.shape[1]

    def words(self, cand: int) -> np.ndarray:
        return _kernel.to_words([cand], self.nv)[0]

    def part_bound(self, cand: int) -> int:
        return sum(min(a, (cand & m).bit_count()) for m, a in self.parts)

    def cover(self, cand: int, threshold: int = 0):
        """Greedy clique cover of ``cand``; returns vertices with their cover index.

        Vertices landing in a class above ``threshold`` are re-inserted into a
        lower class when possible, directly or by moving one blocking vertex
        to another low class.  Only vertices above the threshold are returned.
        """
        nv = max(self.nv, 1)
        verts = np.zeros(nv, dtype=np.int64)
        bounds = np.zeros(nv, dtype=np.int64)
        n = _kernel.cover(self.words(cand), self.conflict, threshold,
                          np.zeros((nv + 1, self.W), dtype=np.uint64),
                          np.zeros(self.W, dtype=np.uint64), np.zeros(self.W, dtype=np.uint64),
                          verts, bounds)
        return verts[:n].tolist(), bounds[:n].tolist()

    def run(self, root: int, size: int, best: int, node_limit=None, deadline=None,
            shared=None, progress=False):
        """Search below ``root`` with ``size`` vertices already chosen.

        Returns (best, chosen bitset or 0, nodes, complete).
        """
        if shared is None:
            shared = np.zeros(0, dtype=np.int64)
        best, found, path, nodes, complete = _kernel.search(
            self.conflict, self.compat, self.words(root), size, best, self.part_masks,
            self.alphas, -1 if node_limit is None else node_limit,
            0.0 if deadline is None else deadline, shared, progress)
        chosen = sum(1 << int(v) for v in path) if found else 0
        return int(best), chosen, int(nodes), bool(complete)


def _degree_order(model: PackingModel) -> list[int]:
    # ties: first printed position varies fastest, so runs of consecutive
    # vertices are lines along the largest alphabet and the greedy cover
    # picks those large cliques
    deg = [row.bit_count() for row in model.conflicts]
    table = model.space.symbol_table
    return sorted(range(len(deg)),
                  key=lambda i: (-deg[i], tuple(table[model.free[i]][::-1])))


def _relabel(model: PackingModel, order: list[int]) -> list[int]:
    pos = {old: new for new, old in enumerate(order)}
    rows = []
    for old in order:
        row, out = model.conflicts[old], 0
        while row:
            low = row & -row
            out |= 1 << pos[low.bit_length() - 1]
            row ^= low
        rows.append(out)
    return rows


def _greedy(conflicts, order_by_rank) -> int:
    chosen = 0
    blocked = 0
    for v in order_by_rank:
        if not blocked >> v & 1:
            chosen |= 1 << v
            blocked |= conflicts[v] | (1 << v)
    return chosen


_WORKER: dict = {}


def _worker_init(conflicts, shared, deadline, node_limit, parts):
    _WORKER.update(search=_Search(conflicts, parts),
                   shared=np.frombuffer(shared, dtype=np.int64),
                   deadline=deadline, node_limit=node_limit)


def _worker_task(args):
    v, cand, bound = args
    w = _WORKER
    s, shared = w["search"], w["shared"]
    best = int(shared[0])
    if 1 + bound <= best:
        return v, best, 0, 0, True
    nxt = cand & _kernel.from_words(s.compat[v])
    if not nxt:
        return v, max(best, 1), (1 << v) if best < 1 else 0, 1, True
    best, chosen, nodes, done = s.run(nxt, 1, best, w["node_limit"], w["deadline"], shared)
    return v, best, chosen | (1 << v) if chosen else 0, nodes, done


def _run_parallel(conflicts, best, deadline, node_limit, threads, parts):
    """Split the root into one task per vertex; tasks share the incumbent value."""
    root = _Search(conflicts)
    full = (1 << len(conflicts)) - 1
    verts, bounds = root.cover(full)
    tasks = []
    cand = full
    for idx in range(len(verts) - 1, -1, -1):
        v = verts[idx]
        tasks.append((v, cand, bounds[idx]))
        cand &= ~(1 << v)
    ctx = mp.get_context("fork")
    shared = ctx.RawArray("q", 1)
    shared[0] = best
    best_set = 0
    nodes = 1
    unfinished = []
    with ctx.Pool(threads, initializer=_worker_init,
                  initargs=(conflicts, shared, deadline, node_limit, parts)) as pool:
        for (v, value, chosen, n, done), task in zip(pool.imap(_worker_task, tasks), tasks):
            nodes += n
            if chosen and chosen.bit_count() > best_set.bit_count():
                best_set = chosen
            if not done:
                unfinished.append(task[2])
    complete = not unfinished
    found = best_set.bit_count()
    upper = max([max(found, best)] + unfinished)
    return found, best_set, nodes, complete, upper


def _sub_independence(conflicts, mask: int) -> int:
    verts = [v for v in range(len(conflicts)) if mask >> v & 1]
    pos = {v: i for i, v in enumerate(verts)}
    rows = []
    for v in verts:
        row, out = conflicts[v] & mask, 0
        while row:
            low = row & -row
            out |= 1 << pos[low.bit_length() - 1]
            row ^= low
        rows.append(out)
    best, _, _, _ = _Search(rows).run((1 << len(rows)) - 1, 0, 0)
    return best


def _partition(model: PackingModel, order: list[int], conflicts) -> list[tuple[int, int]]:
    """Classes of free words sharing their symbols in the largest alphabet block,
    each paired with its own independence number."""
    space = model.space
    positions = list(space.block_positions(space.s - 1))
    table = space.symbol_table
    masks: dict[tuple, int] = {}
    for new, old in enumerate(order):
        key = tuple(table[model.free[old], positions])
        masks[key] = masks.get(key, 0) | (1 << new)
    if len(masks) < 2:
        return []
    return [(m, _sub_independence(conflicts, m)) for _, m in sorted(masks.items())]


def _solve_free(model: PackingModel, budget: SolveBudget, partition: bool = False):
    """Maximum independent set of the free conflict graph.

    Returns (best, chosen free ranks, nodes, complete, upper) where ``upper``
    bounds the free optimum whether or not the search completed.
    """
    nv = len(model.free)
    if nv == 0:
        return 0, [], 0, True, 0
    order = _degree_order(model)
    conflicts = _relabel(model, order)
    by_rank = sorted(range(nv), key=lambda i: model.free[order[i]])
    greedy = _greedy(conflicts, by_rank)
    best, best_set = greedy.bit_count(), greedy
    target = best
    if budget.initial_lower is not None:
        target = max(best, budget.initial_lower - model.objective_offset)
    deadline = time.monotonic() + budget.seconds if budget.seconds is not None else None
    parts = _partition(model, order, conflicts) if partition else []

    if budget.threads > 1 and nv > 1:
        found, found_set, nodes, complete, upper = _run_parallel(
            conflicts, target, deadline, budget.nodes, budget.threads, parts)
    else:
        s = _Search(conflicts, parts)
        full = (1 << nv) - 1
        _, bounds = s.cover(full)
        upper = bounds[-1] if bounds else 0
        if parts:
            upper = min(upper, s.part_bound(full))
        found, found_set, nodes, complete = s.run(full, 0, target, budget.nodes, deadline,
                                                  progress=budget.progress)
    if found_set and found > best:
        best, best_set = found, found_set
    if complete:
        upper = max(best, target)
    else:
        upper = max(upper, best)
    chosen = []
    while best_set:
        low = best_set & -best_set
        chosen.append(model.free[order[low.bit_length() - 1]])
        best_set ^= low
    return best, chosen, nodes, complete, upper


def solve(model: PackingModel, budget: SolveBudget | None = None,
          partition: bool = False) -> SolveResult:
    """Maximise ``offset + sum(free)`` subject to the model's conflicts.

    With ``partition`` the free words are also grouped by their symbols in the
    largest alphabet block; the sum of the groups' own optima is used as an
    extra bound at every node.  The groups are solved up front, so this only
    pays off when they are small relative to the whole model.
    """
    budget = budget or SolveBudget()
    t0 = time.monotonic()
    best, chosen, nodes, complete, upper = _solve_free(model, budget, partition)
    offset = model.objective_offset
    words = model.words(list(model.fixed_one) + chosen)
    witness = Code(model.space, frozenset(words))
    value, upper = best + offset, upper + offset
    if value == upper:
        status = Status.OPTIMAL
    elif complete:
        status = Status.FEASIBLE
    else:
        status = Status.BUDGET
    if __debug__ and model.forbidden_profile is None:
        assert verify(witness, model.d).passed and len(witness) == value
    return SolveResult(status, value, upper, witness, time.monotonic() - t0, nodes, model.d)


def solve_forced(model: PackingModel, forced, budget: SolveBudget | None = None) -> SolveResult:
    """Solve with the ``forced`` words pinned to one."""
    forced = list(forced)
    try:
        pinned = pin(model, forced)
    except ModelError:
        return SolveResult(Status.INFEASIBLE, 0, 0, Code(model.space), 0.0, 0, model.d)
    return solve(pinned, budget)


def oracle(space: MixedSpace, d: int, forced=None) -> int:
    """Exhaustive maximum by include/exclude recursion over ranks.

    Pruning is feasibility only, plus the trivial count of words still
    unexamined.  Deliberately shares nothing with ``solve``.
    """
    if space.cardinality > ORACLE_LIMIT:
        raise ValueError(f"oracle limited to {ORACLE_LIMIT} words, space has {space.cardinality}")
    words = [w.symbols for w in space.words()]
    forced_syms = [w.symbols for w in (forced or [])]

    def far(a, b):
        return sum(x != y for x, y in zip(a, b)) >= d or a == b

    for a in forced_syms:
        for b in forced_syms:
            if not far(a, b):
                return 0
    start = [w for w in words if w in forced_syms]
    n = len(words)
    best = 0

    def rec(i, chosen):
        nonlocal best
        if len(chosen) + (n - i) <= best:
            return
        if i == n:
            best = len(chosen)
            return
        w = words[i]
        if w in forced_syms:
            rec(i + 1, chosen)
            return
        if all(far(w, c) for c in chosen):
            chosen.append(w)
            rec(i + 1, chosen)
            chosen.pop()
        rec(i + 1, chosen)

    rec(0, list(start))
    return best


def default_threads() -> int:
    return os.cpu_count() or 1
