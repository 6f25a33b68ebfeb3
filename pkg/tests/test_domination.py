"""
Domination tests: exact subset-product expectations, Ber(p) domination,
negative correlation, renormalisation and tail bounds
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from colourspace.colourings import Colouring, ListAssignment, available_colours
from colourspace.core.config import settings
from colourspace.core.errors import (
    BudgetExceededError,
    EmptySolutionSpaceError,
    InfeasibleParametersError,
    PreconditionError,
)
from colourspace.domination import (
    BinaryFamily,
    ExpectationTable,
    check_ber_domination,
    check_family_domination,
    check_negative_correlation,
    family_distribution,
    independent_distribution,
    renormalise_and_check,
    subset_product_expectations,
    tail_probability_empirical,
    verify_tail_bounds,
    wilson_interval,
)
from colourspace.enumeration import conditioned_count, enumerate_colourings
from colourspace.graphs import cycle_graph, path_graph
from colourspace.schemas.domination import BinaryFamilySpec


def short(g, L, sigma, u, threshold):
    return len(available_colours(g, L, sigma, u)) <= threshold


def brute_expectation(g, L, vertices, threshold, subset):
    colourings = list(enumerate_colourings(g, L))
    hits = sum(1 for s in colourings if all(short(g, L, s, vertices[i], threshold) for i in subset))
    return Fraction(hits, len(colourings))


class TestSubsetProducts:
    def test_six_cycle_against_enumeration(self):
        g = cycle_graph(6)
        L = ListAssignment.uniform_k(6, 3)
        spec = BinaryFamilySpec(vertices=[0, 2, 4], threshold=1)
        table = subset_product_expectations(g, L, spec)
        assert table.denominator == 66
        assert len(table) == 8
        assert table[[]] == 1
        for size in range(4):
            for subset in itertools.combinations(range(3), size):
                assert table[list(subset)] == brute_expectation(g, L, [0, 2, 4], 1, subset)

    def test_singleton_is_conditioned_probability(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        table = subset_product_expectations(c5, L, BinaryFamilySpec(vertices=[2], threshold=1))
        hits = conditioned_count(c5, L, lambda s: short(c5, L, s, 2, 1)).count
        assert table[[0]] == Fraction(hits, 30)

    def test_monotone_in_subsets(self):
        g = cycle_graph(6)
        L = ListAssignment.uniform_k(6, 3)
        table = subset_product_expectations(g, L, BinaryFamilySpec(vertices=[0, 1, 3, 4], threshold=1))
        for small in table:
            for large in table:
                if small <= large:
                    assert table[sorted(small)] >= table[sorted(large)]

    def test_invalid_subset(self):
        table = ExpectationTable(independent_distribution([0.5, 0.5]))
        with pytest.raises(KeyError):
            table[[0, 0]]
        with pytest.raises(KeyError):
            table[[2]]

    def test_to_dict_uses_fraction_strings(self):
        table = ExpectationTable(independent_distribution(["1/3", "1/2"]))
        assert table.to_dict() == {"": "1", "0": "1/3", "1": "1/2", "0,1": "1/6"}

    def test_empty_space(self, k3):
        family = BinaryFamily(["x"], [lambda s: True])
        with pytest.raises(EmptySolutionSpaceError):
            family_distribution(k3, ListAssignment.uniform_k(3, 2), family)

    def test_subset_limit(self, monkeypatch):
        monkeypatch.setattr(settings, "SUBSET_LIMIT", 3)
        with pytest.raises(BudgetExceededError):
            independent_distribution([0.5] * 4)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            BinaryFamilySpec(vertices=[1, 1], threshold=1)
        with pytest.raises(ValueError):
            BinaryFamilySpec(vertices=[0], threshold=-1)


class TestBerDomination:
    def test_all_zero_family(self):
        report = check_ber_domination(ExpectationTable(independent_distribution([0, 0, 0])), 0.0)
        assert report.dominated

    def test_single_variable_above_p(self):
        report = check_ber_domination(ExpectationTable(independent_distribution([0.3])), 0.25)
        assert not report.dominated
        assert report.worst_subset == ["0"]
        assert report.slack == pytest.approx(-0.05)

    def test_equality_is_dominated(self):
        # exact 3/10 sits above the float 0.3; the one-ulp promotion absorbs it
        report = check_ber_domination(ExpectationTable(independent_distribution([0.3, 0.3])), 0.3)
        assert report.dominated

    def test_p_out_of_range(self):
        with pytest.raises(InfeasibleParametersError):
            check_ber_domination(ExpectationTable(independent_distribution([0.5])), 1.5)

    def test_twins_are_positively_correlated(self):
        # 0 and 2 share N = {1, 3} in C4, so their indicators coincide
        g = cycle_graph(4)
        L = ListAssignment.uniform_k(4, 3)
        report = check_family_domination(g, L, BinaryFamilySpec(vertices=[0, 2], threshold=1), 1 / 3)
        assert report.independence
        assert not report.dominated
        assert report.worst_subset == ["0", "2"]
        assert report.expectations["0"] == "1/3"
        assert report.expectations["0,2"] == "1/3"

    def test_independence_flag(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        report = check_family_domination(c5, L, BinaryFamilySpec(vertices=[0, 1], threshold=1), 1.0)
        assert report.independence is False
        assert report.dominated


class TestNegativeCorrelation:
    def test_star_centre(self, star7):
        report = check_negative_correlation(star7, ListAssignment.uniform_k(7, 3), 0, colours=[0, 1])
        assert report.extensions == 3**6
        assert report.holds
        assert report.marginals == {0: 1 - Fraction(2, 3) ** 6, 1: 1 - Fraction(2, 3) ** 6}

    def test_five_cycle_with_far_vertices_fixed(self, c5):
        L = ListAssignment.uniform_k(5, 3)
        report = check_negative_correlation(c5, L, 0, sigma0=Colouring([0, 1, 0, 1, 2]))
        assert report.extensions == 4
        assert report.holds
        assert report.marginals == {0: Fraction(1, 2), 1: Fraction(1, 2), 2: Fraction(3, 4)}

    def test_single_colour_is_trivial(self, c5):
        report = check_negative_correlation(c5, ListAssignment.uniform_k(5, 3), 0, colours=[2])
        assert report.holds
        assert report.worst_subset is None

    def test_no_extension(self):
        g = path_graph(3)
        L = ListAssignment([[0, 1], [0], [0]])
        with pytest.raises(EmptySolutionSpaceError):
            check_negative_correlation(g, L, 0, sigma0=Colouring([None, None, 0]))


class TestRenormalisation:
    def test_independent_halves(self):
        distribution = independent_distribution([0.5] * 6)
        report = renormalise_and_check(distribution, [[0, 1, 2], [3, 4, 5]], 1, 0.5)
        assert report.dominated
        assert report.input_dominated
        assert report.q == pytest.approx(math.exp(1.5 * (1 - 2 * math.log(2))))

    def test_single_block_is_the_plain_tail(self):
        distribution = independent_distribution([0.5] * 4)
        report = renormalise_and_check(distribution, [[0, 1, 2, 3]], 0.25, 0.5)
        # sum > 2.5 means 3 or 4 successes: 5/16
        assert report.expectations["Q0+1+2+3"] == "5/16"
        assert report.dominated == (Fraction(5, 16) <= Fraction(report.q))

    def test_colouring_family_on_eight_cycle(self):
        g = cycle_graph(8)
        L = ListAssignment.uniform_k(8, 3)
        family = BinaryFamily.short_lists(g, L, BinaryFamilySpec(vertices=[0, 2, 4, 6], threshold=1))
        distribution = family_distribution(g, L, family)
        assert distribution.denominator == 258
        report = renormalise_and_check(distribution, [[0, 1], [2, 3]], 0.5, 0.5)
        both = brute_expectation(g, L, [0, 2, 4, 6], 1, (0, 1))
        assert report.expectations["Q0+2"] == str(both)
        assert isinstance(report.dominated, bool)

    @pytest.mark.parametrize(
        "partition",
        [[[0, 1], [2]], [[0, 1], [1, 2]], [[0, 5]], [], [[]]],
    )
    def test_invalid_partition(self, partition):
        with pytest.raises(PreconditionError):
            renormalise_and_check(independent_distribution([0.5] * 3), partition, 1, 0.5)


class TestEmpiricalAndTails:
    def test_sure_and_impossible_events(self, c5, rng):
        L = ListAssignment.uniform_k(5, 3)
        sure = tail_probability_empirical(c5, L, lambda s: True, 200, rng)
        never = tail_probability_empirical(c5, L, lambda s: False, 200, rng)
        assert sure.estimate == 1.0
        assert never.estimate == 0.0
        assert sure.high == pytest.approx(1.0)
        assert never.low == pytest.approx(0.0, abs=1e-12)

    def test_estimate_near_exact_value(self, p4):
        L = ListAssignment.uniform_k(4, 3)
        exact = Fraction(conditioned_count(p4, L, lambda s: short(p4, L, s, 1, 1)).count, 24)
        assert exact == Fraction(1, 2)
        result = tail_probability_empirical(p4, L, lambda s: short(p4, L, s, 1, 1), 4000, np.random.default_rng(3))
        assert abs(result.estimate - 0.5) <= 5 * math.sqrt(0.25 / 4000)

    def test_zero_trials(self, c5, rng):
        with pytest.raises(InfeasibleParametersError):
            tail_probability_empirical(c5, ListAssignment.uniform_k(5, 3), lambda s: True, 0, rng)
        with pytest.raises(InfeasibleParametersError):
            wilson_interval(0, 0)

    def test_wilson_interval(self):
        low, high = wilson_interval(50, 100)
        assert low < 0.5 < high
        assert high - 0.5 == pytest.approx(0.5 - low)

    @pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
    def test_chernoff_family_has_no_violations(self, p):
        checks = verify_tail_bounds([p] * 12, [0.0, 0.25, 0.5, 1.0, 2.0])
        assert len(checks) == 12
        assert [c for c in checks if not c.holds] == []

    def test_mixed_probabilities(self):
        checks = verify_tail_bounds(["1/7", 0.2, 0.9, "1/2", 0.05], [0.1, 0.6, 3.0])
        assert all(c.holds for c in checks)
        assert {c.kind for c in checks} == {"upper", "absolute", "lower"}

    def test_negative_delta(self):
        with pytest.raises(InfeasibleParametersError):
            verify_tail_bounds([0.5], [-0.1])
