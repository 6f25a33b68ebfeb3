"""
Sampling tests: exact uniformity, Glauber moves, neighbourhood resampling
and the randomised colouring heuristics
"""

from collections import Counter

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chisquare

from colourspace.colourings import Colouring, ListAssignment, hamming_distance, is_proper
from colourspace.core.errors import EmptySolutionSpaceError, PreconditionError
from colourspace.enumeration import enumerate_colourings
from colourspace.graphs import cycle_graph, path_graph, petersen_graph
from colourspace.sampling import (
    UniformSampler,
    default_list_floor,
    first_colouring,
    glauber_step,
    greedy_colour,
    local_search_colour,
    make_rng,
    neighbourhood_resample,
    resample_transition_matrix,
    sample_batch,
    sample_uniform,
)
from colourspace.schemas.sampling import BadVertexConfig, SamplerConfig


def chi_square_pvalue(g, L, samples):
    tally = Counter(samples)
    observed = [tally.get(s, 0) for s in enumerate_colourings(g, L)]
    assert sum(observed) == len(samples)
    return chisquare(observed).pvalue


class TestUniformSampler:
    def test_count_and_properness(self, c5, rng):
        L = ListAssignment.uniform_k(5, 3)
        sampler = UniformSampler(c5, L)
        assert sampler.count == 30
        assert all(is_proper(c5, L, s) and s.is_total for s in sampler.draw_many(rng, 100))

    def test_empty_space(self, k3):
        with pytest.raises(EmptySolutionSpaceError):
            UniformSampler(k3, ListAssignment.uniform_k(3, 2))

    def test_table_is_shared(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        assert UniformSampler(c5, L).table is UniformSampler(c5, L).table

    def test_explicit_lists(self, p4, rng):
        L = ListAssignment([[0, 1], [1, 2], [0, 2], [2, 3]])
        sampler = UniformSampler(p4, L)
        assert sampler.count == len(list(enumerate_colourings(p4, L)))
        assert all(is_proper(p4, L, s) for s in sampler.draw_many(rng, 50))

    def test_quick_uniformity(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        samples = sample_batch(c5, L, SamplerConfig(seed=5), trials=6000)
        assert chi_square_pvalue(c5, L, samples) > 1e-3

    @pytest.mark.slow
    @pytest.mark.parametrize("graph,count", [(path_graph(4), 24), (cycle_graph(5), 30)])
    def test_full_uniformity(self, graph, count):
        L = ListAssignment.uniform_k(graph.n, 3)
        samples = sample_batch(graph, L, SamplerConfig(seed=2024), trials=200_000)
        assert len(set(samples)) == count
        assert chi_square_pvalue(graph, L, samples) > 1e-3


class TestSeeding:
    def test_same_seed_same_batch(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        cfg = SamplerConfig(seed=77)
        assert sample_batch(c5, L, cfg, 40) == sample_batch(c5, L, cfg, 40)
        assert sample_uniform(c5, L, cfg) == sample_batch(c5, L, cfg, 1)[0]

    def test_glauber_same_seed_same_chain(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        cfg = SamplerConfig(seed=3, method="glauber", burnin=20, thin=2)
        first = sample_batch(c5, L, cfg, 25)
        assert first == sample_batch(c5, L, cfg, 25)
        assert len(first) == 25
        assert all(is_proper(c5, L, s) for s in first)

    def test_make_rng_passes_generators_through(self, rng):
        assert make_rng(rng) is rng
        assert make_rng(1).integers(100) == np.random.default_rng(1).integers(100)

    def test_config_rejects_unknown_fields(self):
        with pytest.raises(ValidationError):
            SamplerConfig(seed=-1)
        with pytest.raises(ValidationError):
            SamplerConfig(method="metropolis")
        with pytest.raises(ValidationError):
            SamplerConfig(sweeps=3)


class TestGlauber:
    def test_step_changes_at_most_one_vertex(self, c5, rng):
        L = ListAssignment.uniform_k(5, 4)
        sigma = first_colouring(c5, L)
        for _ in range(200):
            tau = glauber_step(c5, L, sigma, rng)
            assert hamming_distance(sigma, tau) <= 1
            assert is_proper(c5, L, tau)
            sigma = tau

    def test_first_colouring(self, c5):
        assert first_colouring(c5, ListAssignment.uniform_k(5, 3)) == Colouring([0, 1, 0, 1, 2])
        with pytest.raises(EmptySolutionSpaceError):
            first_colouring(c5, ListAssignment.uniform_k(5, 2))


class TestNeighbourhoodResample:
    @pytest.mark.parametrize("graph_name", ["c5", "star7"])
    def test_uniform_vector_is_stationary(self, graph_name, request):
        g = request.getfixturevalue(graph_name)
        L = ListAssignment.uniform_k(g.n, 3)
        states, matrix = resample_transition_matrix(g, L, 0)
        assert np.allclose(matrix.sum(axis=1), 1.0, atol=1e-12)
        uniform = np.full(len(states), 1.0 / len(states))
        assert np.max(np.abs(uniform @ matrix - uniform)) <= 1e-12

    def test_state_space_is_colourings_of_g_minus_v(self, star7):
        states, _ = resample_transition_matrix(star7, ListAssignment.uniform_k(7, 3), 0)
        assert len(states) == 3**6
        assert all(s[0] is None for s in states)

    def test_move_only_touches_the_neighbourhood(self, c5, rng):
        L = ListAssignment.uniform_k(5, 3)
        sigma = Colouring([None, 1, 0, 1, 2])
        for _ in range(50):
            tau = neighbourhood_resample(c5, L, sigma, 0, rng)
            assert tau[0] is None
            assert (tau[2], tau[3]) == (0, 1)
            assert is_proper(c5, L, tau)

    def test_dependent_neighbourhood_rejected(self, k3, rng):
        L = ListAssignment.uniform_k(3, 3)
        with pytest.raises(PreconditionError):
            neighbourhood_resample(k3, L, Colouring([None, 1, 2]), 0, rng)


class TestHeuristics:
    def test_greedy_on_bipartite_path(self, rng):
        g = path_graph(8)
        for _ in range(20):
            outcome = greedy_colour(g, 2, rng)
            assert outcome.success
            assert is_proper(g, ListAssignment.uniform_k(8, 2), outcome.colouring)

    def test_greedy_fails_on_odd_cycle(self, c5, rng):
        outcome = greedy_colour(c5, 2, rng)
        assert not outcome.success
        assert outcome.failed_vertex is not None
        assert is_proper(c5, ListAssignment.uniform_k(5, 2), outcome.colouring)

    def test_default_list_floor(self):
        assert default_list_floor(1) == 1
        assert default_list_floor(3) == 3
        assert default_list_floor(10) == 5

    def test_local_search_needs_triangle_free(self, k3):
        with pytest.raises(PreconditionError):
            local_search_colour(k3, 5, rng=0)

    def test_local_search_on_even_cycle(self):
        g = cycle_graph(6)
        outcome = local_search_colour(g, 3, rng=11)
        assert outcome.success
        assert outcome.colouring.is_total
        assert is_proper(g, ListAssignment.uniform_k(6, 3), outcome.colouring)

    def test_local_search_respects_iteration_cap(self):
        g = petersen_graph()
        outcome = local_search_colour(g, 3, BadVertexConfig(list_floor=3, max_iterations=25), rng=4)
        assert outcome.iterations <= 25
        assert is_proper(g, ListAssignment.uniform_k(10, 3), outcome.colouring)
        assert outcome.success == outcome.colouring.is_total

    def test_bad_vertex_config_validation(self):
        with pytest.raises(ValidationError):
            BadVertexConfig(list_floor=0)
        with pytest.raises(ValidationError):
            BadVertexConfig(max_iterations=-1)
