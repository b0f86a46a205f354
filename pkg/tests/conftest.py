import sys
from importlib import resources

import pytest

from hampack.code import Code, read_code
from hampack.space import distance, make_space, parse_space, unrank


def ladders(limit):
    """Every block ladder (strictly increasing k >= 2) with cardinality <= limit."""
    out = []

    def rec(kmin, prod, blocks):
        if blocks:
            out.append(tuple(blocks))
        for k in range(kmin, limit + 1):
            a = 1
            while prod * k**a <= limit:
                rec(k + 1, prod * k**a, blocks + [(k, a)])
                a += 1

    rec(2, 1, [])
    return [make_space(b) for b in out]


def greedy_packing(space, d, rng):
    """Random maximal packing: scan a shuffled space, keep what fits."""
    order = list(range(space.cardinality))
    rng.shuffle(order)
    chosen = []
    for r in order:
        w = unrank(space, r)
        if all(distance(w, c) >= d for c in chosen):
            chosen.append(w)
    return Code(space, frozenset(chosen))


def data_path(name):
    return resources.files("hampack") / "data" / name


@pytest.fixture(scope="session")
def s71():
    return parse_space("2^7,3^1")


@pytest.fixture(scope="session")
def s43():
    return parse_space("2^4,3^3")


@pytest.fixture(scope="session")
def code26(s71):
    return read_code(s71, data_path("code_7_1_3.txt"))


@pytest.fixture(scope="session")
def code28(s43):
    return read_code(s43, data_path("code_4_3_3.txt"))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results.values():
            terminalreporter.write_line(line)
