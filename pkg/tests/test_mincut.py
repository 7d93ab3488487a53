import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import brute_force_min_cut_value, random_digraph
from secindex import (
    CapacityOverflowError,
    DiGraph,
    InputError,
    cut_value,
    min_cut,
    min_cut_extremes,
)
from secindex.mincut import MAX_TOTAL_CAPACITY


def test_single_edge_cut():
    g = DiGraph(node_count=2, edges=((0, 1, 5),))
    sol = min_cut(g, 0, 1)
    assert sol.value == 5
    assert sol.cut_edges == (0,)
    assert sol.source_side == frozenset({0})
    assert sol.sink_side == frozenset({1})


def test_disconnected_pair():
    g = DiGraph(node_count=2, edges=())
    sol = min_cut(g, 0, 1)
    assert sol.value == 0
    assert sol.cut_edges == ()


def test_cut_value_single_edge():
    g = DiGraph(node_count=2, edges=((0, 1, 5),))
    assert cut_value(g, {0}) == 5
    assert cut_value(g, {0}) == min_cut(g, 0, 1).value


def test_parallel_edges_all_cut():
    g = DiGraph(node_count=2, edges=((0, 1, 2), (0, 1, 3)))
    sol = min_cut(g, 0, 1)
    assert sol.value == 5
    assert sol.cut_edges == (0, 1)


def test_reject_self_loop():
    with pytest.raises(InputError):
        DiGraph(node_count=2, edges=((0, 0, 1),))


def test_reject_negative_capacity():
    with pytest.raises(InputError):
        DiGraph(node_count=2, edges=((0, 1, -1),))


def test_reject_out_of_range_ids():
    with pytest.raises(InputError):
        DiGraph(node_count=2, edges=((0, 2, 1),))
    g = DiGraph(node_count=2, edges=((0, 1, 1),))
    with pytest.raises(InputError):
        min_cut(g, 0, 5)
    with pytest.raises(InputError):
        min_cut(g, 1, 1)


def test_reject_capacity_overflow():
    with pytest.raises(CapacityOverflowError):
        DiGraph(node_count=2, edges=((0, 1, 2**63 - 1), (1, 0, 1)))
    # exactly at the limit is fine
    DiGraph(node_count=2, edges=((0, 1, MAX_TOTAL_CAPACITY),))


def test_matches_brute_force_on_random_graphs():
    rng = random.Random(4242)
    for _ in range(200):
        g = random_digraph(rng)
        s, t = 0, 7
        sol = min_cut(g, s, t)
        assert sol.value == brute_force_min_cut_value(g, s, t)
        assert sol.value == sum(g.edges[i][2] for i in sol.cut_edges)
        assert cut_value(g, sol.source_side) == sol.value


def test_deterministic_output():
    rng = random.Random(7)
    g = random_digraph(rng)
    assert min_cut(g, 0, 7) == min_cut(g, 0, 7)


def test_monotone_in_capacity():
    rng = random.Random(99)
    for _ in range(50):
        g = random_digraph(rng, nodes=6, edges=10, max_cap=6)
        base = min_cut(g, 0, 5).value
        idx = rng.randrange(len(g.edges))
        u, v, c = g.edges[idx]
        bumped = DiGraph(
            node_count=g.node_count,
            edges=g.edges[:idx] + ((u, v, c + 3),) + g.edges[idx + 1 :],
        )
        assert min_cut(bumped, 0, 5).value >= base


def test_min_cut_below_any_cut_value():
    rng = random.Random(13)
    for _ in range(50):
        g = random_digraph(rng, nodes=7, edges=12)
        sol = min_cut(g, 0, 6)
        side = {0} | {n for n in range(1, 6) if rng.random() < 0.5}
        assert sol.value <= cut_value(g, side)


def test_extremes_share_value_and_nest():
    rng = random.Random(31337)
    for _ in range(100):
        g = random_digraph(rng)
        minimal, maximal = min_cut_extremes(g, 0, 7)
        assert minimal.value == maximal.value
        assert minimal.source_side <= maximal.source_side


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5), st.integers(0, 8)), max_size=14), st.randoms())
def test_flow_equals_cut_property(raw_edges, _rng):
    edges = tuple((u, v, c) for (u, v, c) in raw_edges if u != v)
    g = DiGraph(node_count=6, edges=edges)
    sol = min_cut(g, 0, 5)
    assert sol.value == cut_value(g, sol.source_side)
    assert 0 in sol.source_side and 5 in sol.sink_side
    assert sol.source_side | sol.sink_side == frozenset(range(6))
    assert not (sol.source_side & sol.sink_side)


def test_concurrent_solves_share_graph():
    from concurrent.futures import ThreadPoolExecutor

    rng = random.Random(2718)
    g = random_digraph(rng, nodes=8, edges=20)
    expected = min_cut(g, 0, 7)
    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda _: min_cut(g, 0, 7), range(32)))
    assert all(r == expected for r in results)
