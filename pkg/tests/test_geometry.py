"""
Geometry tests: the distance-t colouring graph, vertex classification
against the naive oracle, and constructive recolouring
"""

import itertools

import networkx as nx
import numpy as np
import pytest

from colourspace.colourings import Colouring, ListAssignment, is_proper
from colourspace.core.errors import (
    BudgetExceededError,
    ImproperColouringError,
    InfeasibleParametersError,
    PreconditionError,
)
from colourspace.enumeration import enumerate_colourings
from colourspace.geometry import (
    ColouringGraphView,
    _close_pairs,
    build_view,
    classify_all,
    classify_vertex,
    cluster_histogram,
    count_frozen,
    force_colour,
    frozen_fraction_disjoint_copies,
    layered_recolour,
    looseness_radius_witness,
    naive_classify,
)
from colourspace.graphs import complete_graph, cycle_graph, distance_layers, path_graph, rooted_arity_tree

ORACLE_CASES = [
    (complete_graph(3), 3, 1),
    (cycle_graph(4), 2, 1),
    (cycle_graph(4), 2, 3),
    (cycle_graph(4), 2, 4),
    (cycle_graph(5), 3, 1),
    (cycle_graph(5), 3, 2),
] + [(cycle_graph(6), 2, t) for t in range(1, 7)]


class TestView:
    def test_edges_match_brute_force(self, c5):
        view = build_view(c5, 3, 2)
        expected = nx.Graph()
        expected.add_nodes_from(range(len(view)))
        for i, j in itertools.combinations(range(len(view)), 2):
            if np.count_nonzero(view.colourings[i] != view.colourings[j]) <= 2:
                expected.add_edge(i, j)
        assert view.edge_count == expected.number_of_edges()
        assert view.cluster_count == nx.number_connected_components(expected)
        for i in range(len(view)):
            assert list(view.neighbours(i)) == sorted(expected.neighbors(i))

    @pytest.mark.parametrize("t", [0, 1, 2, 3, 6])
    def test_close_pairs_match_brute_force(self, t):
        rows = np.random.default_rng(t).integers(0, 3, size=(120, 6))
        # a large bucket: half the rows share their first block
        rows[:60, :2] = 0
        expected = [
            (i, j)
            for i, j in itertools.combinations(range(len(rows)), 2)
            if np.count_nonzero(rows[i] != rows[j]) <= t
        ]
        found_rows, found_cols = _close_pairs(rows, t)
        assert list(zip(found_rows.tolist(), found_cols.tolist())) == expected

    def test_labels_are_dense_in_first_appearance_order(self, k3):
        view = build_view(k3, 3, 1)
        assert list(view.labels) == list(range(6))
        assert list(view.cluster_sizes) == [1] * 6

    def test_index_of_and_colouring(self, c5):
        view = build_view(c5, 3, 1)
        assert view.index_of([0, 1, 0, 1, 2]) == 0
        assert view.colouring(0) == Colouring([0, 1, 0, 1, 2])
        assert view.index_of([0, 0, 0, 0, 0]) is None

    def test_empty_view(self, k3):
        view = build_view(k3, 2, 1)
        assert len(view) == 0
        assert view.cluster_count == 0
        assert cluster_histogram(view) == {}

    def test_view_is_cached(self, c5):
        assert build_view(c5, 3, 1) is build_view(c5, 3, 1)
        assert build_view(c5, 3, 1) is not build_view(c5, 3, 2)

    def test_view_budget(self):
        with pytest.raises(BudgetExceededError):
            build_view(path_graph(8), 3, 1, budget=100)

    def test_negative_t(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        rows = np.array(list(enumerate_colourings(c5, L)))
        with pytest.raises(InfeasibleParametersError):
            ColouringGraphView(c5, 3, -1, rows)


class TestClassification:
    @pytest.mark.parametrize("g,k,t", ORACLE_CASES)
    def test_agrees_with_naive_oracle(self, g, k, t):
        view = build_view(g, k, t)
        for i in range(len(view)):
            tau = view.colouring(i)
            for v in g.vertices():
                status = classify_vertex(view, tau, v)
                expected = naive_classify(g, k, t, tau, v)
                got = {name: getattr(status, name) for name in ("loose", "rigid", "thawed", "frozen")}
                assert got == expected, (tau, v)

    def test_triangle_fully_frozen(self, k3):
        view = build_view(k3, 3, 1)
        for i in range(len(view)):
            assert count_frozen(view, view.colouring(i)) == 3

    @pytest.mark.parametrize("t,thawed", [(1, False), (2, False), (3, False), (4, True)])
    def test_square_thaws_at_four(self, t, thawed):
        g = cycle_graph(4)
        view = build_view(g, 2, t)
        statuses = classify_all(view, [0, 1, 0, 1])
        assert all(s.thawed == thawed for s in statuses)
        assert all(s.frozen != thawed for s in statuses)

    def test_loose_implies_thawed_and_frozen_implies_rigid(self, c5):
        view = build_view(c5, 3, 2)
        for i in range(len(view)):
            for s in classify_all(view, view.colouring(i)):
                assert not s.loose or s.thawed
                assert not s.frozen or s.rigid

    def test_witnesses_realise_each_colour(self, c5):
        view = build_view(c5, 3, 2)
        tau = view.colouring(0)
        status = classify_vertex(view, tau, 0)
        for colour, index in status.witnesses.items():
            assert view.colourings[index, 0] == colour

    def test_improper_or_unknown_colouring(self, c5):
        view = build_view(c5, 3, 1)
        with pytest.raises(ImproperColouringError):
            classify_vertex(view, [0, 0, 1, 0, 1], 0)

    def test_count_frozen_checks_t(self, k3):
        view = build_view(k3, 3, 1)
        with pytest.raises(InfeasibleParametersError):
            count_frozen(view, view.colouring(0), t=2)

    def test_cluster_histogram(self):
        view = build_view(cycle_graph(4), 2, 2)
        assert cluster_histogram(view) == {1: 2}
        assert cluster_histogram(build_view(cycle_graph(4), 2, 4)) == {2: 1}

    def test_frozen_fraction_disjoint_triangles(self):
        report = frozen_fraction_disjoint_copies(complete_graph(3), 2, 3, 1)
        assert report.n == 6
        assert report.frozen == 6
        assert report.fully_frozen_copies == 2
        assert report.fraction == 1.0


class TestForceColour:
    def test_complete_on_five_cycle(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        for sigma in enumerate_colourings(c5, L):
            for v in c5.vertices():
                closed = {v, *c5.adjacency[v]}
                for x in range(3):
                    result = force_colour(c5, L, sigma, v, x)
                    assert result.success
                    assert result.colouring[v] == x
                    assert is_proper(c5, L, result.colouring)
                    assert result.changed <= closed

    def test_noop_when_already_coloured(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        sigma = Colouring([0, 1, 0, 1, 2])
        result = force_colour(c5, L, sigma, 0, 0)
        assert result.colouring == sigma
        assert result.changed == frozenset()

    def test_failure_is_a_value(self):
        g = path_graph(4)
        L = ListAssignment.uniform_k(4, 2)
        result = force_colour(g, L, Colouring([0, 1, 0, 1]), 1, 0)
        assert not result.success
        assert result.colouring == Colouring([0, 1, 0, 1])
        assert result.reason

    def test_dependent_neighbourhood(self, k3):
        with pytest.raises(PreconditionError):
            force_colour(k3, ListAssignment.uniform_k(3, 4), Colouring([0, 1, 2]), 0, 3)


class TestLayeredRecolouring:
    def test_structure_on_ternary_tree(self):
        g = rooted_arity_tree(3, 3)
        k = 4
        sigma = next(iter(enumerate_colourings(g, ListAssignment.uniform_k(g.n, k))))
        result = layered_recolour(g, k, sigma, 0, 3)
        L = ListAssignment.uniform_k(g.n, k)
        assert len(result.sequence) == 2
        for step in result.sequence:
            assert is_proper(g, L, step)
        changed = {u for u in g.vertices() if result.final[u] != sigma[u]}
        inside = set().union(*distance_layers(g, 0, 3)[2:])
        assert changed <= inside
        assert set(result.final_list_sizes) == {1, 2, 3}
        assert result.success == all(s >= 2 for s in result.final_list_sizes.values())

    def test_girth_precondition(self, c5):
        sigma = Colouring([0, 1, 0, 1, 2])
        with pytest.raises(PreconditionError):
            layered_recolour(c5, 3, sigma, 0, 2)

    def test_witness_stays_in_ball(self):
        g = rooted_arity_tree(2, 3)
        k = 3
        sigma = next(iter(enumerate_colourings(g, ListAssignment.uniform_k(g.n, k))))
        result = looseness_radius_witness(g, k, sigma, 0, 2, 2)
        if result.success:
            assert result.colouring[0] == 2
            ball = set().union(*distance_layers(g, 0, 2))
            assert result.changed <= ball
            assert is_proper(g, ListAssignment.uniform_k(g.n, k), result.colouring)
