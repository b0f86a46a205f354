import itertools

import pytest

from conftest import data_path, ladders
from hampack.branch import (ANCHORS, RULES, TABLE3, TABLE4, BoundLedger, audit_branch,
                            enumerate_branches, packing_number, propagate_bounds, read_anchors)
from hampack.model import build_full
from hampack.solver import SolveBudget, Status, solve
from hampack.space import MarginalProfile, distance, marginal_distances, parse_space


def words(space, d):
    return [str(b.word) for b in enumerate_branches(space, d)]


def test_branches_small():
    space = parse_space("2^4,3^1")
    assert words(space, 3) == ["00111", "10011"]
    assert [b.profile.printed() for b in enumerate_branches(space, 3)] == [(0, 3), (1, 2)]


def test_branches_two_ternary():
    assert sorted(words(parse_space("2^3,3^2"), 4)) == ["01111", "11011"]


def test_branches_contain_pair_model_word():
    space = parse_space("2^7,3^1")
    assert len(enumerate_branches(space, 3)) == 2
    assert "00000111" in words(space, 3)


def test_branches_beyond_length():
    assert enumerate_branches(parse_space("2^2"), 3) == []


@pytest.mark.parametrize("space", ladders(200)[::7], ids=str)
def test_branch_words_and_count(space):
    for d in range(1, space.n + 1):
        branches = enumerate_branches(space, d)
        caps = [a for _, a in space.blocks]
        expected = sum(1 for m in itertools.product(*(range(c + 1) for c in caps)) if sum(m) == d)
        assert len(branches) == expected
        z = space.zero()
        for br in branches:
            assert distance(z, br.word) == d
            assert marginal_distances(z, br.word) == br.profile
        printed = [br.profile.printed() for br in branches]
        assert printed == sorted(printed)


def test_audit_forbidding_solve(s71):
    res = audit_branch(s71, 3, MarginalProfile((3, 0)), 26)
    assert res.verdict == "branch_unavoidable"
    assert res.bound is not None and res.bound < 26


def test_audit_pigeonhole(s43):
    res = audit_branch(s43, 3, MarginalProfile((0, 3)), 17)
    assert res.unavoidable and res.reason == "pigeonhole"


def test_audit_inconclusive():
    space = parse_space("2^4,3^1")
    res = audit_branch(space, 3, MarginalProfile((3, 0)), 2)
    assert res.verdict == "inconclusive" and res.bound >= 2


@pytest.mark.parametrize("text,d,value", [("2^4,3^1", 3, 6), ("2^4,7^1", 3, 8),
                                          ("3^4,9^1", 4, 9)])
def test_packing_number_examples(text, d, value):
    res = packing_number(parse_space(text), d)
    assert res.status is Status.OPTIMAL and res.best_value == value
    assert len(res.witness) == value


def test_packing_number_large_d():
    res = packing_number(parse_space("2^1"), 5)
    assert res.best_value == 1 and res.status is Status.OPTIMAL


@pytest.mark.parametrize("space", ladders(60), ids=str)
def test_packing_number_matches_full(space):
    for d in range(1, space.n + 1):
        assert packing_number(space, d).best_value == solve(build_full(space, d)).best_value


def seeded():
    ledger = BoundLedger()
    for key, value in ANCHORS.items():
        ledger.add(key, value, value)
    return ledger


def test_propagation_examples():
    ledger = propagate_bounds(seeded())
    assert [ledger.upper(b, 1, 3) for b in (8, 9, 10)] == [52, 104, 208]
    assert ledger.upper(6, 2, 3) == 39
    assert ledger.upper(7, 2, 4) == 26 and ledger.upper(4, 4, 4) == 28


def test_propagation_reproduces_tables():
    ledger = propagate_bounds(seeded())
    for d, table in ((3, TABLE3), (4, TABLE4)):
        for (b, t), (new, old) in table.items():
            assert ledger.upper(b, t, d) == new
            assert new <= old


def test_propagation_idempotent_and_acyclic():
    once = propagate_bounds(seeded())
    twice = propagate_bounds(once)
    assert {k: e.upper for k, e in once.entries.items()} == \
        {k: e.upper for k, e in twice.entries.items()}
    for key, entry in once.entries.items():
        chain = once.chain(key)
        assert chain[-1][0] in ANCHORS
        assert entry.lower <= entry.upper


def test_propagation_single_rule():
    ledger = propagate_bounds(seeded(), ["ii"])
    assert ledger.upper(8, 1, 3) == 52
    assert ledger.upper(6, 2, 3) is None or ledger.upper(6, 2, 3) != 39


def test_ledger_rejects_inverted():
    with pytest.raises(ValueError):
        BoundLedger().add((1, 1, 3), 5, 4)


def test_read_anchors(tmp_path):
    ledger = read_anchors(data_path("anchors.txt"))
    assert ledger.upper(7, 1, 3) == 26 and ledger.upper(4, 3, 3) == 28
    bad = tmp_path / "a.txt"
    bad.write_text("2,5 7,1 3 26 26\n")
    with pytest.raises(ValueError, match="a.txt:1"):
        read_anchors(bad)


def test_rule_table_names():
    assert set(RULES) == {"ii", "iv", "vi"}


def test_budgeted_packing_number_is_bounded(s71):
    res = packing_number(s71, 3, SolveBudget(nodes=500))
    assert res.status is Status.BUDGET
    assert res.best_value < res.upper_bound
    assert res.upper_bound >= 26
