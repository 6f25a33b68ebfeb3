"""
Percolation tests: propagation, adversarial leaves, exact root
probabilities and Monte Carlo estimates against the tail bound
"""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from colourspace import percolation
from colourspace.bounds import percolation_bound
from colourspace.colourings import ListAssignment, available_colours
from colourspace.core.errors import InfeasibleParametersError, PreconditionError
from colourspace.enumeration import enumerate_colourings
from colourspace.graphs import cycle_graph
from colourspace.percolation import (
    adversarial_mask,
    colouring_leaf_model,
    estimate_root_probability,
    exact_root_probability_small,
    exhaustive_root_probability,
    propagate,
)
from colourspace.schemas.percolation import PercolationInstance

SMALL_SHAPES = [(2, f) for f in range(1, 5)] + [(3, 1), (3, 2), (4, 1), (4, 2)] + [(a, 1) for a in range(5, 9)]


def iid(arity, depth, threshold, p):
    return PercolationInstance(arity=arity, depth=depth, threshold=threshold, model="iid", p=p)


class TestPropagation:
    def test_adversarial_subtree_activates_root(self):
        instance = PercolationInstance(arity=3, depth=2, threshold=2, model="adversarial")
        mask = adversarial_mask(instance)
        assert mask.sum() == 4
        assert list(np.flatnonzero(mask)) == [0, 1, 3, 4]
        result = propagate(instance, mask)
        assert result.root_active
        assert result.to_dict() == {"root_active": True, "active_per_level": [1, 2, 4]}

    def test_one_leaf_short_of_the_subtree(self):
        instance = PercolationInstance(arity=3, depth=2, threshold=2, model="adversarial")
        mask = adversarial_mask(instance)
        mask[4] = False
        assert not propagate(instance, mask).root_active

    def test_explicit_mask_from_instance(self):
        instance = PercolationInstance(arity=2, depth=2, threshold=1, model="explicit", mask=[0, 0, 0, 1])
        result = propagate(instance)
        assert result.root_active
        assert [int(level.sum()) for level in result.levels] == [1, 1, 1]

    def test_integer_bit_mask(self):
        instance = PercolationInstance(arity=2, depth=2, threshold=2, model="explicit", mask=[1, 1, 0, 0])
        assert propagate(instance, 0b1111).root_active
        assert not propagate(instance, 0b0111).root_active
        assert propagate(instance, 0b0011).to_dict()["active_per_level"] == [0, 1, 2]

    @settings(max_examples=200, deadline=None)
    @given(
        st.integers(min_value=1, max_value=3),
        st.integers(min_value=0, max_value=(1 << 27) - 1),
        st.integers(min_value=0, max_value=(1 << 27) - 1),
    )
    def test_monotone_in_the_leaf_set(self, threshold, smaller, extra):
        instance = iid(3, 3, threshold, 0.5)
        low = propagate(instance, smaller).levels
        high = propagate(instance, smaller | extra).levels
        for a, b in zip(low, high):
            assert not np.any(a & ~b)

    @pytest.mark.parametrize("mask", [[1, 0, 1], 1 << 4, -1])
    def test_bad_masks(self, mask):
        instance = PercolationInstance(arity=2, depth=2, threshold=1, model="explicit", mask=[0, 0, 0, 0])
        with pytest.raises(PreconditionError):
            propagate(instance, mask)

    def test_missing_mask(self):
        with pytest.raises(PreconditionError):
            propagate(iid(2, 2, 1, 0.5))

    def test_threshold_above_arity(self):
        with pytest.raises(PreconditionError):
            adversarial_mask(PercolationInstance(arity=2, depth=2, threshold=3, model="adversarial"))

    def test_schema_requires_model_parameters(self):
        with pytest.raises(ValidationError):
            PercolationInstance(arity=2, depth=1, threshold=1, model="iid")
        with pytest.raises(ValidationError):
            PercolationInstance(arity=2, depth=1, threshold=1, model="explicit")
        with pytest.raises(ValidationError):
            PercolationInstance(arity=1, depth=1, threshold=1, p=0.5)


class TestExactProbabilities:
    @pytest.mark.parametrize("arity,depth", SMALL_SHAPES)
    @pytest.mark.parametrize("p", [0.25, 0.5, 0.75])
    def test_composition_matches_exhaustive(self, arity, depth, p):
        for threshold in range(1, arity + 1):
            instance = iid(arity, depth, threshold, p)
            assert exact_root_probability_small(instance) == exhaustive_root_probability(instance)

    def test_worked_value(self):
        # depth 1, s = 1: 1 - (1 - p)^arity
        assert exact_root_probability_small(iid(3, 1, 1, 0.5)) == Fraction(7, 8)
        # depth 2 with q = 7/16 at the middle level
        assert exact_root_probability_small(iid(2, 2, 1, 0.25)) == 1 - Fraction(9, 16) ** 2

    def test_exhaustive_leaf_limit(self):
        with pytest.raises(InfeasibleParametersError):
            exhaustive_root_probability(iid(2, 5, 1, 0.5))

    def test_requires_iid(self):
        instance = PercolationInstance(arity=2, depth=1, threshold=1, model="adversarial")
        with pytest.raises(PreconditionError):
            exact_root_probability_small(instance)

    @pytest.mark.parametrize("arity", range(5, 13))
    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_exact_value_below_bound_when_hypothesis_holds(self, arity, depth):
        for threshold in range(math.ceil(3 * math.log(arity)), arity + 1):
            p = threshold / (6 * arity)
            exact = exact_root_probability_small(iid(arity, depth, threshold, p))
            assert exact <= Fraction(math.exp(percolation_bound(threshold, depth)))


class TestMonteCarlo:
    def test_estimate_near_exact(self):
        instance = iid(2, 2, 1, 0.25)
        result = estimate_root_probability(instance, 20000, 9)
        exact = float(exact_root_probability_small(instance))
        assert abs(result.estimate - exact) <= 5 * math.sqrt(exact * (1 - exact) / 20000)
        assert result.bound_log is None
        assert result.within_bound() is None

    def test_same_seed_same_estimate(self):
        instance = iid(3, 2, 2, 0.4)
        first = estimate_root_probability(instance, 5000, 21)
        assert first.active == estimate_root_probability(instance, 5000, 21).active

    def test_independent_of_jobs(self, monkeypatch):
        monkeypatch.setattr(percolation, "BATCH_CELLS", 64)
        instance = iid(2, 2, 1, 0.3)
        serial = estimate_root_probability(instance, 1000, 5, jobs=1)
        threaded = estimate_root_probability(instance, 1000, 5, jobs=4)
        assert serial.active == threaded.active
        assert serial.trials == threaded.trials == 1000

    def test_deterministic_models_rejected(self):
        instance = PercolationInstance(arity=2, depth=1, threshold=1, model="adversarial")
        with pytest.raises(PreconditionError):
            estimate_root_probability(instance, 10)

    def test_zero_trials(self):
        with pytest.raises(InfeasibleParametersError):
            estimate_root_probability(iid(2, 1, 1, 0.5), 0)

    @pytest.mark.slow
    def test_large_tree_respects_bound(self):
        instance = iid(12, 2, 8, 1 / 9)
        result = estimate_root_probability(instance, 1_000_000, 10)
        assert result.hypothesis_ok
        assert result.bound == pytest.approx(math.exp(-8))
        assert result.within_bound()


class TestColouringLeaves:
    def colouring_instance(self, **extra):
        spec = {"graph": {"family": "cycle", "n": 6}, "k": 3, "list_threshold": 1, **extra}
        return PercolationInstance(arity=2, depth=2, threshold=2, model="colouring", colouring=spec)

    def test_leaf_model_shape(self, rng):
        g = cycle_graph(6)
        leaves = colouring_leaf_model(g, 3, [2, 3, 4, 5], 1, rng)
        assert leaves.dtype == bool
        assert leaves.shape == (4,)

    def test_estimate_near_exact(self):
        g = cycle_graph(6)
        L = ListAssignment.uniform_k(6, 3)
        colourings = list(enumerate_colourings(g, L))
        hits = sum(1 for s in colourings if all(len(available_colours(g, L, s, w)) <= 1 for w in (2, 3, 4, 5)))
        exact = hits / len(colourings)

        result = estimate_root_probability(self.colouring_instance(), 3000, 4)
        assert abs(result.estimate - exact) <= 5 * math.sqrt(max(exact * (1 - exact), 1e-4) / 3000)
        assert result.bound_log == -2
        assert result.hypothesis_ok is None

    def test_leaf_vertex_count_checked(self):
        with pytest.raises(PreconditionError):
            estimate_root_probability(self.colouring_instance(leaf_vertices=[0, 1, 2]), 10)
