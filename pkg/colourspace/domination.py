"""
Domination Module for Colourspace

Exact checks of the probabilistic statements behind list-size concentration:
Bernoulli domination of binary families, negative correlation of colour
exclusion events, the renormalisation of a dominated family into block
tail events, and Chernoff-type tail bounds on independent families.

Joint distributions are held as integer weights per outcome mask over a
common denominator, so every probability compared here is an exact
rational. Floats enter only as bound values, and those are promoted one ulp
upward before comparing.
"""

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm

from .bounds import chernoff_upper, chernoff_upper_abs, lower_tail_bound
from .colourings import Colouring, ListAssignment, available_colours, validate_colouring
from .core.config import settings
from .core.errors import (
    BudgetExceededError,
    EmptySolutionSpaceError,
    InfeasibleParametersError,
    PreconditionError,
)
from .enumeration import enumerate_colourings
from .graphs import Graph, delete_vertex, is_independent_set
from .sampling import UniformSampler
from .schemas.domination import BinaryFamilySpec

logger = logging.getLogger(__name__)

Probability = Union[float, int, str, Fraction]


def _exact(p: Probability) -> Fraction:
    """Floats are read by their shortest decimal representation"""
    if isinstance(p, float):
        return Fraction(repr(p))
    return Fraction(p)


def _promote(bound: float) -> Fraction:
    """Float bound as an exact rational, one ulp upward"""
    return Fraction(math.nextafter(bound, math.inf))


def _check_size(size: int, what: str) -> None:
    if size > settings.SUBSET_LIMIT:
        raise BudgetExceededError(f"{what} over {size} variables", settings.SUBSET_LIMIT)


# ---------------------------------------------------------------------------
# Families and joint distributions
# ---------------------------------------------------------------------------


@dataclass
class BinaryFamily:
    """Named indicator events over colourings"""

    labels: List[str]
    events: List[Callable[[Colouring], bool]]

    def __post_init__(self):
        if len(self.labels) != len(self.events):
            raise InfeasibleParametersError("every event needs exactly one label")

    def __len__(self) -> int:
        return len(self.events)

    def mask(self, sigma: Colouring) -> int:
        bits = 0
        for i, event in enumerate(self.events):
            if event(sigma):
                bits |= 1 << i
        return bits

    @classmethod
    def short_lists(cls, g: Graph, L: ListAssignment, spec: BinaryFamilySpec) -> "BinaryFamily":
        """X_u = [l_sigma(u) <= threshold]"""
        for u in spec.vertices:
            g.check_vertex(u)

        def short(u: int) -> Callable[[Colouring], bool]:
            return lambda sigma: len(available_colours(g, L, sigma, u)) <= spec.threshold

        return cls([str(u) for u in spec.vertices], [short(u) for u in spec.vertices])


@dataclass
class OutcomeDistribution:
    """Exact joint law of ``size`` binary variables: P(mask) = weights[mask] / denominator"""

    size: int
    weights: Dict[int, int]
    denominator: int
    labels: Optional[List[str]] = None

    def __post_init__(self):
        if self.denominator <= 0:
            raise EmptySolutionSpaceError("distribution has no mass")
        if self.labels is None:
            self.labels = [str(i) for i in range(self.size)]

    def probability(self, mask: int) -> Fraction:
        return Fraction(self.weights.get(mask, 0), self.denominator)

    def dense(self) -> np.ndarray:
        dtype = np.int64 if self.denominator < 2**62 else object
        out = np.zeros(1 << self.size, dtype=dtype)
        for mask, weight in self.weights.items():
            out[mask] = weight
        return out

    def sum_law(self) -> Dict[int, Fraction]:
        """Law of the number of active variables"""
        totals: Dict[int, int] = {}
        for mask, weight in self.weights.items():
            ones = bin(mask).count("1")
            totals[ones] = totals.get(ones, 0) + weight
        return {j: Fraction(w, self.denominator) for j, w in sorted(totals.items())}


def family_distribution(
    g: Graph,
    L: ListAssignment,
    family: BinaryFamily,
    budget: Optional[int] = None,
) -> OutcomeDistribution:
    """Joint law of the family under the uniform measure on C(G, L)"""
    _check_size(len(family), "joint distribution")
    weights: Dict[int, int] = {}
    total = 0
    for sigma in enumerate_colourings(g, L, budget=budget):
        mask = family.mask(sigma)
        weights[mask] = weights.get(mask, 0) + 1
        total += 1
    if total == 0:
        raise EmptySolutionSpaceError(f"no proper colourings of {g!r}")
    return OutcomeDistribution(len(family), weights, total, list(family.labels))


def independent_distribution(ps: Sequence[Probability]) -> OutcomeDistribution:
    """Joint law of independent Bernoulli(p_i) variables, exactly"""
    _check_size(len(ps), "independent distribution")
    exact = [_exact(p) for p in ps]
    if any(not 0 <= p <= 1 for p in exact):
        raise InfeasibleParametersError(f"probabilities must lie in [0, 1], got {list(ps)}")
    denominator = math.prod(p.denominator for p in exact)
    weights = {}
    for mask in range(1 << len(exact)):
        weight = 1
        for i, p in enumerate(exact):
            weight *= p.numerator if mask >> i & 1 else p.denominator - p.numerator
        if weight:
            weights[mask] = weight
    return OutcomeDistribution(len(exact), weights, denominator)


# ---------------------------------------------------------------------------
# Subset-product expectations
# ---------------------------------------------------------------------------


def _popcounts(size: int) -> np.ndarray:
    index = np.arange(1 << size)
    counts = np.zeros(1 << size, dtype=np.int64)
    for i in range(size):
        counts += (index >> i) & 1
    return counts


class ExpectationTable(Mapping):
    """J -> E[prod_{i in J} X_i] for every subset J of the family's indices"""

    def __init__(self, distribution: OutcomeDistribution):
        self.size = distribution.size
        self.labels = list(distribution.labels)
        self.denominator = distribution.denominator
        values = distribution.dense()
        # superset sums: values[S] becomes the weight of outcomes containing S
        for i in range(self.size):
            view = values.reshape(-1, 2, 1 << i)
            view[:, 0, :] += view[:, 1, :]
        self.numerators = values
        self.popcounts = _popcounts(self.size)

    @staticmethod
    def _mask(subset) -> int:
        return sum(1 << i for i in subset)

    def __getitem__(self, subset) -> Fraction:
        mask = self._mask(subset)
        if mask >= 1 << self.size or len(set(subset)) != len(subset):
            raise KeyError(subset)
        return Fraction(int(self.numerators[mask]), self.denominator)

    def __iter__(self) -> Iterator[frozenset]:
        for mask in range(1 << self.size):
            yield frozenset(i for i in range(self.size) if mask >> i & 1)

    def __len__(self) -> int:
        return 1 << self.size

    def subset_labels(self, mask: int) -> List[str]:
        return [self.labels[i] for i in range(self.size) if mask >> i & 1]

    def to_dict(self) -> Dict[str, str]:
        """Subset (labels joined by commas) -> exact fraction string"""
        return {
            ",".join(self.subset_labels(mask)): str(Fraction(int(self.numerators[mask]), self.denominator))
            for mask in range(1 << self.size)
        }


def subset_product_expectations(
    g: Graph,
    L: ListAssignment,
    family: Union[BinaryFamily, BinaryFamilySpec],
    budget: Optional[int] = None,
) -> ExpectationTable:
    if isinstance(family, BinaryFamilySpec):
        family = BinaryFamily.short_lists(g, L, family)
    return ExpectationTable(family_distribution(g, L, family, budget=budget))


@dataclass
class DominationReport:
    dominated: bool
    p: float
    worst_subset: Optional[List[str]]
    slack: float
    independence: Optional[bool] = None
    expectations: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dominated": self.dominated,
            "p": self.p,
            "worst_subset": self.worst_subset,
            "slack": self.slack,
            "independence": self.independence,
            "expectations": self.expectations,
        }


def check_ber_domination(
    expectations: ExpectationTable,
    p: float,
    independence: Optional[bool] = None,
) -> DominationReport:
    """Is E[prod_J X_i] <= p^|J| for every J?

    The verdict is exact; ``slack`` is the smallest p^|J| - E[...] over
    non-empty J as a float, and ``worst_subset`` attains it.
    """
    if not 0 <= p <= 1:
        raise InfeasibleParametersError(f"p must lie in [0, 1], got {p}")
    lifted = _promote(p)
    den = expectations.denominator
    values = expectations.numerators
    dominated = True
    for j in range(1, expectations.size + 1):
        bound = lifted**j * den
        ceiling = min(bound.numerator // bound.denominator, den)
        if np.any(values[expectations.popcounts == j] > ceiling):
            dominated = False
            break

    worst, slack = None, math.inf
    if expectations.size:
        excess = values.astype(float) / float(den) - np.power(float(p), expectations.popcounts)
        excess[0] = -math.inf
        top = int(np.argmax(excess))
        worst, slack = expectations.subset_labels(top), -float(excess[top])
    return DominationReport(
        dominated=dominated,
        p=p,
        worst_subset=worst,
        slack=slack,
        independence=independence,
        expectations=expectations.to_dict(),
    )


def check_family_domination(
    g: Graph,
    L: ListAssignment,
    family: BinaryFamilySpec,
    p: float,
    budget: Optional[int] = None,
) -> DominationReport:
    table = subset_product_expectations(g, L, family, budget=budget)
    return check_ber_domination(table, p, independence=is_independent_set(g, family.vertices))


# ---------------------------------------------------------------------------
# Negative correlation of colour exclusion events
# ---------------------------------------------------------------------------


@dataclass
class CorrelationReport:
    holds: bool
    extensions: int
    marginals: Dict[int, Fraction]
    worst_subset: Optional[List[int]] = None
    worst_gap: Optional[Fraction] = None

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "extensions": self.extensions,
            "marginals": {str(x): str(p) for x, p in self.marginals.items()},
            "worst_subset": self.worst_subset,
            "worst_gap": None if self.worst_gap is None else str(self.worst_gap),
        }


def check_negative_correlation(
    g: Graph,
    L: ListAssignment,
    v: int,
    colours: Optional[Sequence[int]] = None,
    sigma0: Optional[Colouring] = None,
    budget: Optional[int] = None,
) -> CorrelationReport:
    """Exact check that the events E_x = [x not in L_sigma(v)] are negatively
    correlated: P(all E_x, x in Y) <= prod P(E_x) for every |Y| >= 2.

    sigma is uniform over the proper colourings of G - v that agree with
    ``sigma0`` outside N[v]; v itself stays uncoloured.
    """
    v = g.check_vertex(v)
    L.check_graph(g)
    colours = sorted(L[v]) if colours is None else sorted(set(colours))
    _check_size(len(colours), "negative correlation")
    nbrs = g.adjacency[v]
    outside = [u for u in g.vertices() if u != v and u not in nbrs]
    if sigma0 is None:
        sigma0 = Colouring.empty(g.n)
    pinned = Colouring(sigma0).restrict(u for u in outside if sigma0[u] is not None)
    validate_colouring(g, L, pinned)

    smaller, mapping = delete_vertex(g, v)
    sub_lists = ListAssignment(L[u] for u in sorted(mapping))
    fixed = Colouring(pinned[old] for old in sorted(mapping))

    weights: Dict[int, int] = {}
    total = 0
    for tau in enumerate_colourings(smaller, sub_lists, budget=budget, fixed=fixed):
        used = {tau[mapping[u]] for u in nbrs}
        mask = 0
        for i, x in enumerate(colours):
            if x in used or x not in L[v]:
                mask |= 1 << i
        weights[mask] = weights.get(mask, 0) + 1
        total += 1
    if total == 0:
        raise EmptySolutionSpaceError(f"sigma0 has no proper extension to N({v})")

    table = ExpectationTable(OutcomeDistribution(len(colours), weights, total, [str(x) for x in colours]))
    marginals = {x: table[[i]] for i, x in enumerate(colours)}
    holds, worst, gap = True, None, None
    for size in range(2, len(colours) + 1):
        for subset in combinations(range(len(colours)), size):
            joint = table[subset]
            product = math.prod((marginals[colours[i]] for i in subset), start=Fraction(1))
            difference = joint - product
            if gap is None or difference > gap:
                gap, worst = difference, [colours[i] for i in subset]
            if joint > product:
                holds = False
    logger.debug(f"negative correlation at v={v} over {total} extensions: holds={holds}")
    return CorrelationReport(holds, total, marginals, worst, gap)


# ---------------------------------------------------------------------------
# Renormalisation into block tail events
# ---------------------------------------------------------------------------


@dataclass
class RenormalisationReport:
    q: float
    dominated: bool
    input_dominated: bool
    worst_subset: Optional[List[str]]
    slack: float
    expectations: Dict[str, str]

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "dominated": self.dominated,
            "input_dominated": self.input_dominated,
            "worst_subset": self.worst_subset,
            "slack": self.slack,
            "expectations": self.expectations,
        }


def _check_partition(partition: Sequence[Sequence[int]], size: int) -> List[Tuple[int, ...]]:
    blocks = [tuple(block) for block in partition]
    if not blocks or any(not block for block in blocks):
        raise PreconditionError("partition blocks must be non-empty")
    if len({len(block) for block in blocks}) != 1:
        raise PreconditionError("partition blocks must all have the same size")
    members = [i for block in blocks for i in block]
    if len(set(members)) != len(members):
        raise PreconditionError("partition blocks must be disjoint")
    if any(not 0 <= i < size for i in members):
        raise PreconditionError(f"partition refers to variables outside 0..{size - 1}")
    return blocks


def renormalise_and_check(
    distribution: OutcomeDistribution,
    partition: Sequence[Sequence[int]],
    delta: float,
    p: float,
) -> RenormalisationReport:
    """R_i = [sum of X_j over block Q_i > (1 + delta) p |Q_i|] checked for
    Ber(q) domination with q = chernoff_upper(p |Q|, delta)."""
    blocks = _check_partition(partition, distribution.size)
    block_size = len(blocks[0])
    q = chernoff_upper(p * block_size, delta)
    cutoff = (1 + Fraction(delta)) * Fraction(p) * block_size

    weights: Dict[int, int] = {}
    for mask, weight in distribution.weights.items():
        renorm = 0
        for i, block in enumerate(blocks):
            if sum(mask >> j & 1 for j in block) > cutoff:
                renorm |= 1 << i
        weights[renorm] = weights.get(renorm, 0) + weight
    labels = ["Q" + "+".join(distribution.labels[j] for j in block) for block in blocks]
    renormalised = OutcomeDistribution(len(blocks), weights, distribution.denominator, labels)

    input_report = check_ber_domination(ExpectationTable(distribution), p)
    report = check_ber_domination(ExpectationTable(renormalised), q)
    return RenormalisationReport(
        q=q,
        dominated=report.dominated,
        input_dominated=input_report.dominated,
        worst_subset=report.worst_subset,
        slack=report.slack,
        expectations=report.expectations,
    )


# ---------------------------------------------------------------------------
# Monte Carlo and tail bounds
# ---------------------------------------------------------------------------


@dataclass
class Estimate:
    estimate: float
    low: float
    high: float
    successes: int
    trials: int

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "ci_low": self.low,
            "ci_high": self.high,
            "successes": self.successes,
            "trials": self.trials,
        }


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    if trials <= 0:
        raise InfeasibleParametersError("a confidence interval needs at least one trial")
    z = float(norm.ppf(0.5 + confidence / 2))
    phat = successes / trials
    scale = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / scale
    half = z / scale * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return max(0.0, centre - half), min(1.0, centre + half)


def tail_probability_empirical(
    g: Graph,
    L: ListAssignment,
    event: Callable[[Colouring], bool],
    trials: int,
    rng: np.random.Generator,
    budget: Optional[int] = None,
) -> Estimate:
    """Monte Carlo estimate of P(event) under the uniform colouring, with a Wilson 95% interval"""
    if trials <= 0:
        raise InfeasibleParametersError(f"trials must be positive, got {trials}")
    sampler = UniformSampler(g, L, budget)
    hits = sum(1 for _ in range(trials) if event(sampler.draw(rng)))
    low, high = wilson_interval(hits, trials)
    return Estimate(hits / trials, low, high, hits, trials)


@dataclass
class TailCheck:
    kind: str
    delta: float
    threshold: float
    probability: Fraction
    bound: float

    @property
    def holds(self) -> bool:
        return self.probability <= _promote(self.bound)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "delta": self.delta,
            "threshold": self.threshold,
            "probability": str(self.probability),
            "bound": self.bound,
            "holds": self.holds,
        }


def verify_tail_bounds(probabilities: Sequence[Probability], deltas: Sequence[float]) -> List[TailCheck]:
    """Exact tail probabilities of a sum of independent Bernoullis against
    the multiplicative upper tail, the absolute form at sigma = 6 mu (1 + delta)
    and the lower tail for delta in (0, 1)."""
    law = independent_distribution(probabilities).sum_law()
    mu_exact = sum((_exact(p) for p in probabilities), Fraction(0))
    mu = float(mu_exact)

    def upper(threshold: Fraction) -> Fraction:
        return sum((pr for j, pr in law.items() if j >= threshold), Fraction(0))

    def lower(threshold: Fraction) -> Fraction:
        return sum((pr for j, pr in law.items() if j <= threshold), Fraction(0))

    checks = []
    for delta in deltas:
        if delta < 0:
            raise InfeasibleParametersError(f"deviation must be non-negative, got {delta}")
        above = (1 + Fraction(delta)) * mu_exact
        checks.append(TailCheck("upper", delta, float(above), upper(above), chernoff_upper(mu, delta)))
        sigma = 6 * above
        at = max(float(sigma), 6 * mu)
        checks.append(TailCheck("absolute", delta, at, upper(sigma), chernoff_upper_abs(mu, at)))
        if 0 < delta < 1 and mu > 0:
            below = (1 - Fraction(delta)) * mu_exact
            checks.append(TailCheck("lower", delta, float(below), lower(below), lower_tail_bound(delta, mu)))
    return checks
