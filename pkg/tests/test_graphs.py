"""Graph construction, parsing, and exact set-quantity tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from pottspart.errors import ParseError, PreconditionError
from pottspart.graphs import (
    Graph,
    boundary_size,
    closure_size,
    components,
    cross_edges,
    induced_subgraph,
    is_alpha_expander,
    parse_graph,
    serialize_graph,
    set_conductance,
    total_volume,
    volume,
)

from conftest import complete, cycle, path, two_triangles


def _random_graph(rng: random.Random, n: int, p: float) -> Graph | None:
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < p
    ]
    try:
        return Graph.from_edges(edges, n=n)
    except PreconditionError:
        return None


class TestConstruction:
    def test_path_basics(self):
        g = parse_graph("0 1\n1 2")
        assert g.n == 3
        assert g.m == 2
        assert g.adj == ((1,), (0, 2), (1,))
        assert g.degrees == (1, 2, 1)

    def test_degree_sum_is_twice_edges(self):
        g = complete(5)
        assert sum(g.degrees) == 2 * g.m

    def test_self_loop_rejected(self):
        with pytest.raises(PreconditionError, match="self-loop"):
            Graph.from_edges([(0, 0), (0, 1)])

    def test_duplicate_rejected(self):
        with pytest.raises(PreconditionError, match="duplicate"):
            Graph.from_edges([(0, 1), (1, 0)])

    def test_isolated_rejected(self):
        with pytest.raises(PreconditionError, match="isolated"):
            Graph.from_edges([(0, 1)], n=3)

    def test_isolated_allowed_when_requested(self):
        g = Graph.from_edges([(0, 1)], n=3, allow_isolated=True)
        assert g.degrees == (1, 1, 0)

    def test_empty_rejected(self):
        with pytest.raises(PreconditionError):
            Graph.from_edges([])


class TestParse:
    def test_comments_and_blanks(self):
        g = parse_graph("# a path\n\n0 1\n\n# mid\n1 2\n")
        assert g.m == 2 and g.n == 3

    def test_header_recognized(self):
        g = parse_graph("3 2\n0 1\n1 2\n")
        assert g.n == 3 and g.m == 2
        assert (2, 3) not in g.edges

    def test_header_with_extra_vertex_capacity_rejected_isolated(self):
        with pytest.raises(ParseError, match="isolated"):
            parse_graph("4 2\n0 1\n1 2\n")

    def test_non_header_first_line_is_edge(self):
        # (0,1) cannot be a header (endpoints of later lines not < 0).
        g = parse_graph("0 1\n1 2\n")
        assert g.m == 2

    def test_bad_line_number_reported(self):
        with pytest.raises(ParseError, match="line 3"):
            parse_graph("0 1\n1 2\nbogus line\n")

    def test_self_loop_line_reported(self):
        with pytest.raises(ParseError, match="line 2: self-loop"):
            parse_graph("0 1\n2 2\n")

    def test_duplicate_line_reported(self):
        with pytest.raises(ParseError, match="line 3: duplicate"):
            parse_graph("0 1\n1 2\n1 0\n")

    def test_empty_text_rejected(self):
        with pytest.raises(ParseError, match="no edges"):
            parse_graph("# nothing here\n")

    def test_round_trip(self):
        rng = random.Random(7)
        for _ in range(50):
            g = _random_graph(rng, rng.randint(2, 9), 0.5)
            if g is None:
                continue
            assert parse_graph(serialize_graph(g)) == g

    @given(st.integers(3, 9), st.integers(0, 2**30))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_hypothesis(self, n, seed):
        g = _random_graph(random.Random(seed), n, 0.6)
        if g is None:
            return
        assert parse_graph(serialize_graph(g)) == g


class TestSetQuantities:
    def test_volume_complete4(self):
        g = complete(4)
        assert total_volume(g) == 12
        assert volume(g, [0, 1]) == 6

    def test_cross_edges_examples(self):
        g = complete(3)
        assert cross_edges(g, [0], [1, 2]) == 2
        assert cross_edges(g, [0, 1], [1, 2]) == 2  # edges into {2}
        assert cross_edges(g, [0], [0]) == 0

    def test_cross_edges_symmetric_on_disjoint(self):
        rng = random.Random(11)
        for _ in range(80):
            g = _random_graph(rng, rng.randint(3, 9), 0.5)
            if g is None:
                continue
            vs = list(range(g.n))
            rng.shuffle(vs)
            k1 = rng.randint(1, g.n - 1)
            k2 = rng.randint(1, g.n - k1)
            s, t = vs[:k1], vs[k1 : k1 + k2]
            assert cross_edges(g, s, t) == cross_edges(g, t, s)

    def test_boundary_closure_cycle4(self):
        g = cycle(4)
        s = [0, 1]
        assert boundary_size(g, s) == 2
        assert closure_size(g, s) == 3

    def test_boundary_is_cut_to_complement(self):
        rng = random.Random(13)
        for _ in range(80):
            g = _random_graph(rng, rng.randint(3, 9), 0.5)
            if g is None:
                continue
            k = rng.randint(1, g.n - 1)
            s = rng.sample(range(g.n), k)
            comp = [v for v in range(g.n) if v not in set(s)]
            assert boundary_size(g, s) == cross_edges(g, s, comp)
            assert boundary_size(g, s) == cross_edges(g, s, range(g.n))

    def test_closure_decomposition(self):
        # closure = boundary + internal edges
        rng = random.Random(17)
        for _ in range(80):
            g = _random_graph(rng, rng.randint(3, 9), 0.5)
            if g is None:
                continue
            k = rng.randint(1, g.n)
            s = set(rng.sample(range(g.n), k))
            internal = sum(1 for u, v in g.edges if u in s and v in s)
            assert closure_size(g, s) == boundary_size(g, s) + internal

    def test_conductance_examples(self):
        assert set_conductance(cycle(6), [0, 1, 2]) == Fraction(1, 3)
        assert set_conductance(complete(4), [0, 1]) == Fraction(2, 3)
        assert set_conductance(complete(4), list(range(4))) == Fraction(0)

    def test_conductance_empty_rejected(self):
        with pytest.raises(PreconditionError):
            set_conductance(cycle(4), [])

    def test_conductance_zero_volume_rejected(self):
        g = Graph.from_edges([(0, 1)], n=3, allow_isolated=True)
        with pytest.raises(PreconditionError, match="zero volume"):
            set_conductance(g, [2])


class TestInducedSubgraph:
    def test_relabelling_map(self):
        g = cycle(5)
        sub, vs = induced_subgraph(g, [1, 2, 3])
        assert vs == (1, 2, 3)
        assert sub.edges == ((0, 1), (1, 2))

    def test_isolated_in_subgraph_rejected_by_default(self):
        g = cycle(5)
        with pytest.raises(PreconditionError, match="isolated"):
            induced_subgraph(g, [0, 1, 3])

    def test_isolated_allowed(self):
        g = cycle(5)
        sub, vs = induced_subgraph(g, [0, 1, 3], allow_isolated=True)
        assert vs == (0, 1, 3)
        assert sub.degrees == (1, 1, 0)

    def test_subgraph_edge_count_matches_bruteforce(self):
        rng = random.Random(23)
        for _ in range(60):
            g = _random_graph(rng, rng.randint(4, 9), 0.6)
            if g is None:
                continue
            k = rng.randint(2, g.n)
            s = sorted(rng.sample(range(g.n), k))
            expected = sum(1 for u, v in g.edges if u in set(s) and v in set(s))
            sub, _ = induced_subgraph(g, s, allow_isolated=True)
            assert sub.m == expected


class TestComponents:
    def test_two_triangles(self):
        g = two_triangles()
        assert components(g) == [(0, 1, 2), (3, 4, 5)]

    def test_connected_path(self):
        assert len(components(path(6))) == 1


class TestAlphaExpander:
    def test_complete4_is_2_expander(self):
        ok, witness = is_alpha_expander(complete(4), 2)
        assert ok and witness is None

    def test_two_triangles_fail_with_witness(self):
        ok, witness = is_alpha_expander(two_triangles(), Fraction(1, 10))
        assert not ok
        assert witness == (0, 1, 2)
        g = two_triangles()
        assert boundary_size(g, witness) < Fraction(1, 10) * len(witness)

    def test_exact_threshold_boundary(self):
        # C_4: every |S| <= 2 has boundary 2, so alpha = 1 holds with equality.
        ok, _ = is_alpha_expander(cycle(4), 1)
        assert ok
        ok, witness = is_alpha_expander(cycle(4), Fraction(101, 100))
        assert not ok and witness is not None

    def test_cap(self):
        with pytest.raises(PreconditionError, match="capped"):
            is_alpha_expander(cycle(25), 0.5)

    def test_witness_minimality_order(self):
        # the witness is the first violating set in ascending-bitmask order
        g = path(4)
        ok, witness = is_alpha_expander(g, 2)
        assert not ok
        assert witness == (0,)  # mask 1 is checked first and violates
