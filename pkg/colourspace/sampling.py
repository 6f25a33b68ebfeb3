"""
Sampling Module for Colourspace

Exactly-uniform sampling of proper L-colourings, heat-bath Glauber dynamics,
the neighbourhood resampling move, and two randomised colouring heuristics
(min-available-list greedy and Bad-vertex local search).

Every function takes an explicit ``numpy.random.Generator``; nothing here
touches global random state, so the seed fully determines the output.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cache import get_shared_cache
from .colourings import Colouring, ListAssignment, available_colours, validate_colouring
from .core.config import settings
from .core.errors import EmptySolutionSpaceError, InfeasibleParametersError, PreconditionError
from .enumeration import CompletionTable, enumerate_colourings
from .graphs import Graph, delete_vertex, is_independent_set, is_triangle_free
from .schemas.sampling import BadVertexConfig, SamplerConfig

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator, None]


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Generator from a seed, or the generator itself"""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class UniformSampler:
    """Exactly uniform sampler over C(G, L).

    The completion table is built once per instance and shared through the
    instance cache, so repeated samplers on the same instance are cheap.
    """

    def __init__(self, g: Graph, L: ListAssignment, budget: Optional[int] = None):
        L.check_graph(g)
        cache = get_shared_cache()
        key = cache.instance_key("completion_table", g, L)
        self.table: CompletionTable = cache.get_or_compute(key, lambda: CompletionTable(g, L, budget))
        if self.table.total == 0:
            raise EmptySolutionSpaceError(f"no proper colourings of {g!r}")

    @property
    def count(self) -> int:
        return self.table.total

    def draw(self, rng: np.random.Generator) -> Colouring:
        return self.table.draw(rng)

    def draw_many(self, rng: np.random.Generator, trials: int) -> List[Colouring]:
        return [self.table.draw(rng) for _ in range(trials)]


def first_colouring(g: Graph, L: ListAssignment, budget: Optional[int] = None) -> Colouring:
    """Lexicographically first proper colouring"""
    sigma = next(iter(enumerate_colourings(g, L, budget=budget)), None)
    if sigma is None:
        raise EmptySolutionSpaceError(f"no proper colourings of {g!r}")
    return sigma


def glauber_step(g: Graph, L: ListAssignment, sigma: Colouring, rng: np.random.Generator) -> Colouring:
    """One heat-bath update at a uniformly chosen vertex.

    The current colour is always in the available list, so the output stays
    proper and differs from the input in at most one vertex.
    """
    if g.n == 0:
        return sigma
    v = int(rng.integers(g.n))
    options = sorted(available_colours(g, L, sigma, v))
    colour = options[int(rng.integers(len(options)))]
    if colour == sigma[v]:
        return sigma
    return Colouring(sigma).with_colour(v, colour)


def _run_glauber(g: Graph, L: ListAssignment, sigma: Colouring, steps: int, rng) -> Colouring:
    for _ in range(steps):
        sigma = glauber_step(g, L, sigma, rng)
    return sigma


def sample_uniform(
    g: Graph,
    L: ListAssignment,
    cfg: Optional[SamplerConfig] = None,
    budget: Optional[int] = None,
) -> Colouring:
    cfg = cfg or SamplerConfig()
    rng = np.random.default_rng(cfg.seed)
    if cfg.method == "exact_sequential":
        return UniformSampler(g, L, budget).draw(rng)
    return _run_glauber(g, L, first_colouring(g, L, budget), cfg.burnin, rng)


def sample_batch(
    g: Graph,
    L: ListAssignment,
    cfg: Optional[SamplerConfig] = None,
    trials: int = 1,
    budget: Optional[int] = None,
) -> List[Colouring]:
    """``trials`` colourings from one seeded stream.

    The exact method draws independently. The Glauber method runs a single
    chain: ``burnin`` steps, then one recorded sample after every
    ``thin + 1`` further steps.
    """
    if trials < 0:
        raise InfeasibleParametersError(f"trials must be non-negative, got {trials}")
    cfg = cfg or SamplerConfig()
    rng = np.random.default_rng(cfg.seed)
    if cfg.method == "exact_sequential":
        return UniformSampler(g, L, budget).draw_many(rng, trials)

    sigma = _run_glauber(g, L, first_colouring(g, L, budget), cfg.burnin, rng)
    samples = []
    for _ in range(trials):
        sigma = _run_glauber(g, L, sigma, cfg.thin + 1, rng)
        samples.append(sigma)
    return samples


# ---------------------------------------------------------------------------
# Neighbourhood resampling
# ---------------------------------------------------------------------------


def _check_resample_input(g: Graph, L: ListAssignment, v: int) -> List[int]:
    v = g.check_vertex(v)
    L.check_graph(g)
    nbrs = sorted(g.adjacency[v])
    if not is_independent_set(g, nbrs):
        raise PreconditionError(f"N({v}) is not an independent set")
    return nbrs


def neighbourhood_resample(
    g: Graph,
    L: ListAssignment,
    sigma: Colouring,
    v: int,
    rng: np.random.Generator,
) -> Colouring:
    """Resample every u in N(v) independently and uniformly from L(u) minus
    the colours of its neighbours outside N[v]; v stays uncoloured."""
    nbrs = _check_resample_input(g, L, v)
    base = Colouring(sigma).with_colours({u: None for u in [v, *nbrs]})
    validate_colouring(g, L, Colouring(sigma).with_colour(v, None))

    updates: Dict[int, int] = {}
    for u in nbrs:
        options = sorted(available_colours(g, L, base, u))
        if not options:
            raise EmptySolutionSpaceError(f"vertex {u} has no colour available outside N[{v}]")
        updates[u] = options[int(rng.integers(len(options)))]
    return base.with_colours(updates)


def _lift(sigma: Sequence[int], mapping: Dict[int, int], n: int) -> Colouring:
    entries: List[Optional[int]] = [None] * n
    for old, new in mapping.items():
        entries[old] = sigma[new]
    return Colouring(entries)


def resample_transition_matrix(
    g: Graph,
    L: ListAssignment,
    v: int,
    budget: Optional[int] = None,
) -> Tuple[List[Colouring], np.ndarray]:
    """Exact transition matrix of :func:`neighbourhood_resample` over C(G - v).

    States are colourings of G with v uncoloured, in lexicographic order of
    G - v. Row i is the distribution of the move started from state i.
    """
    nbrs = _check_resample_input(g, L, v)
    smaller, mapping = delete_vertex(g, v)
    sub_lists = ListAssignment(L[u] for u in sorted(mapping))
    states = [_lift(tau, mapping, g.n) for tau in enumerate_colourings(smaller, sub_lists, budget=budget)]
    index = {state: i for i, state in enumerate(states)}

    matrix = np.zeros((len(states), len(states)))
    for i, state in enumerate(states):
        base = state.with_colours({u: None for u in nbrs})
        options = [sorted(available_colours(g, L, base, u)) for u in nbrs]
        weight = 1.0 / math.prod(len(o) for o in options)
        for combo in itertools.product(*options):
            matrix[i, index[base.with_colours(dict(zip(nbrs, combo)))]] += weight
    logger.debug(f"resample matrix at v={v}: {len(states)} states")
    return states, matrix


# ---------------------------------------------------------------------------
# Colouring heuristics
# ---------------------------------------------------------------------------


@dataclass
class ColouringOutcome:
    """Result of a randomised colouring run; failure is a value, not an error"""

    success: bool
    colouring: Colouring
    failed_vertex: Optional[int] = None
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "colouring": self.colouring.to_json(),
            "failed_vertex": self.failed_vertex,
            "iterations": self.iterations,
        }


def _pick(rng: np.random.Generator, items: Sequence):
    return items[int(rng.integers(len(items)))]


def greedy_colour(g: Graph, k: int, rng: np.random.Generator) -> ColouringOutcome:
    """Repeatedly colour a uniform vertex among those with fewest available
    colours, using a uniform available colour; fail at the first empty list."""
    if k < 1:
        raise InfeasibleParametersError(f"k must be at least 1, got {k}")
    colour: List[Optional[int]] = [None] * g.n
    available = [set(range(k)) for _ in range(g.n)]
    remaining = set(g.vertices())
    while remaining:
        least = min(len(available[v]) for v in remaining)
        v = _pick(rng, sorted(u for u in remaining if len(available[u]) == least))
        if least == 0:
            return ColouringOutcome(False, Colouring(colour), failed_vertex=v)
        c = _pick(rng, sorted(available[v]))
        colour[v] = c
        remaining.discard(v)
        for u in g.adjacency[v]:
            available[u].discard(c)
    return ColouringOutcome(True, Colouring(colour))


def default_list_floor(k: int) -> int:
    """ceil(k / ln k), or 1 when that is undefined"""
    if k <= 1:
        return 1
    return math.ceil(k / math.log(k))


def _greedy_fill(g: Graph, L: ListAssignment, colour: List[Optional[int]], rng) -> None:
    """Min-list greedy over uncoloured vertices, skipping those with empty lists"""
    while True:
        sizes = {}
        for v in g.vertices():
            if colour[v] is None:
                size = len(available_colours(g, L, colour, v))
                if size:
                    sizes[v] = size
        if not sizes:
            return
        least = min(sizes.values())
        v = _pick(rng, sorted(u for u, s in sizes.items() if s == least))
        colour[v] = _pick(rng, sorted(available_colours(g, L, colour, v)))


def _bad_vertices(g: Graph, L: ListAssignment, colour: List[Optional[int]], floor: int) -> List[int]:
    return [
        v
        for v in g.vertices()
        if colour[v] is None and len(available_colours(g, L, colour, v)) < floor
    ]


def local_search_colour(
    g: Graph,
    k: int,
    bad_cfg: Optional[BadVertexConfig] = None,
    rng: SeedLike = None,
) -> ColouringOutcome:
    """Bad-vertex local search on a triangle-free graph.

    A vertex is Bad when it is uncoloured and has fewer than ``list_floor``
    available colours. While one exists (and the iteration cap allows), a
    uniformly chosen Bad vertex has its neighbourhood uncoloured and
    recoloured in random order. Without Bad vertices the colouring is
    completed greedily; blocked vertices stay uncoloured and become Bad.
    """
    if k < 1:
        raise InfeasibleParametersError(f"k must be at least 1, got {k}")
    if not is_triangle_free(g):
        raise PreconditionError("local search requires a triangle-free graph")
    bad_cfg = bad_cfg or BadVertexConfig()
    rng = make_rng(rng)
    floor = bad_cfg.list_floor if bad_cfg.list_floor is not None else default_list_floor(k)
    cap = bad_cfg.max_iterations if bad_cfg.max_iterations is not None else settings.LOCAL_SEARCH_MAX_ITERATIONS

    L = ListAssignment.uniform_k(g.n, k)
    colour: List[Optional[int]] = [None] * g.n
    _greedy_fill(g, L, colour, rng)

    iterations = 0
    while True:
        bad = _bad_vertices(g, L, colour, floor)
        if not bad:
            _greedy_fill(g, L, colour, rng)
            if all(c is not None for c in colour):
                logger.debug(f"local search finished after {iterations} resamples")
                return ColouringOutcome(True, Colouring(colour), iterations=iterations)
            continue
        if iterations >= cap:
            logger.info(f"local search hit the iteration cap of {cap} with {len(bad)} Bad vertices")
            return ColouringOutcome(False, Colouring(colour), failed_vertex=bad[0], iterations=iterations)

        v = _pick(rng, bad)
        nbrs = sorted(g.adjacency[v])
        for u in nbrs:
            colour[u] = None
        for u in rng.permutation(nbrs):
            options = sorted(available_colours(g, L, colour, int(u)))
            if options:
                colour[int(u)] = _pick(rng, options)
        iterations += 1
