import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from hampack.code import (Code, CodeError, connectify, contact_graph, is_connected, make_code,
                          min_distance, read_code, symbol_swap, verify)
from hampack.space import distance, parse_space, unrank

from conftest import greedy_packing, ladders


def pairwise(words):
    return sorted(distance(a, b) for a, b in itertools.combinations(sorted(words), 2))


def test_shipped_codes_min_distance(code26, code28):
    assert (len(code26), min_distance(code26)) == (26, 3)
    assert (len(code28), min_distance(code28)) == (28, 3)


def test_min_distance_pair_and_errors(s71):
    assert min_distance(make_code(s71, ["00000000", "00000111"])) == 3
    with pytest.raises(CodeError):
        min_distance(make_code(s71, ["00000000"]))


def test_verify_reports(code26, code28, s71):
    rep = verify(code26, 3)
    assert rep.passed and rep.cardinality == 26 and rep.min_distance == 3
    assert verify(code28, 3).passed
    rep = verify(make_code(s71, ["00000000", "00000011"]), 3)
    assert not rep.passed
    assert [(str(a), str(b), dd) for a, b, dd in rep.violations] == [("00000000", "00000011", 2)]


def test_read_code_diagnostics(tmp_path, s71):
    f = tmp_path / "bad.txt"
    f.write_text("# header\n00000000\n\n00300000\n")
    with pytest.raises(CodeError, match=r"bad.txt:4: .*position 3"):
        read_code(s71, f)


def test_contact_graph_examples(s71):
    z = s71.zero()
    g = contact_graph(make_code(s71, [z]), 3)
    assert g.edges() == [] and is_connected(g)
    g = contact_graph(make_code(s71, [z, "00000111"]), 3)
    assert len(g.edges()) == 1 and is_connected(g)
    g = contact_graph(make_code(s71, [z, "00001111"]), 3)
    assert g.edges() == [] and not is_connected(g)
    with pytest.raises(CodeError):
        contact_graph(make_code(s71, [z, "00000011"]), 3)


def test_shipped_codes_contact_graphs_connected(code26, code28):
    # computed once after implementation: both listed optima are already connected
    g = contact_graph(code26, 3)
    assert is_connected(g) and len(g.edges()) == 91
    g = contact_graph(code28, 3)
    assert is_connected(g) and len(g.edges()) == 128


def test_contact_edges_exactly_at_d(code28):
    g = contact_graph(code28, 3)
    edges = set(g.edges())
    for a, b in itertools.combinations(code28.sorted(), 2):
        assert ((a, b) in edges) == (distance(a, b) == 3)


def test_connectify_singleton(s71):
    c = make_code(s71, ["00000000"])
    assert connectify(c, 3) == c


def test_connectify_hand_trace():
    space = parse_space("2^5")
    trace = []
    out = connectify(make_code(space, ["00000", "11111"]), 3, trace=trace)
    # swap at position 1 then 2 brings 11111 to 00111
    assert sorted(map(str, out)) == ["00000", "00111"]
    assert trace == [(1, 5), (1, 4)]


def test_connectify_rejects_infeasible(s71):
    with pytest.raises(CodeError):
        connectify(make_code(s71, ["00000000", "00000011"]), 3)


def test_connectify_already_connected(code26):
    out = connectify(code26, 3)
    assert len(out) == 26 and min_distance(out) == 3
    assert is_connected(contact_graph(out, 3))


def test_connectify_randomized():
    spaces = [s for s in ladders(500) if s.cardinality >= 16 and s.n >= 3 and s.blocks[-1][0] <= 10]
    rng = random.Random(2024)
    trials = 0
    for i in range(150):
        space = spaces[rng.randrange(len(spaces))]
        d = rng.choice([2, 3, 4])
        if d > space.n:
            continue
        code = greedy_packing(space, d, rng)
        trace = []
        out = connectify(code, d, seed=i if i % 2 else None, trace=trace)
        assert len(out) == len(code)
        assert len(out) < 2 or min_distance(out) >= d
        assert is_connected(contact_graph(out, d))
        assert all(a > b for a, b in zip(trace, trace[1:]))
        trials += 1
    assert trials >= 100


def test_symbol_swap_examples(s43):
    assert symbol_swap([], 0, 0, 1) == set()
    words = {s43.word(w) for w in ["0000000", "1210101", "2221011"]}
    assert symbol_swap(symbol_swap(words, 2, 0, 2), 2, 0, 2) == words
    assert {str(w) for w in symbol_swap(words, 2, 0, 2)} == {"0020000", "1210101", "2201011"}
    with pytest.raises(CodeError):
        symbol_swap(words, 4, 0, 2)  # binary position


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_symbol_swap_isometry(data):
    space = parse_space(data.draw(st.sampled_from(["2^3,3^2", "2^2,3^1,5^1", "3^4,9^1"])))
    ranks = data.draw(st.sets(st.integers(0, space.cardinality - 1), max_size=12))
    words = [unrank(space, r) for r in ranks]
    j = data.draw(st.integers(0, space.n - 1))
    k = space.radices[j]
    a, b = data.draw(st.lists(st.integers(0, k - 1), min_size=2, max_size=2, unique=True))
    swapped = symbol_swap(words, j, a, b)
    assert len(swapped) == len(words)
    assert pairwise(swapped) == pairwise(words)
