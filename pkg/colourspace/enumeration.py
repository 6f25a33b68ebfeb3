"""
Enumeration Module for Colourspace

Exact, exhaustive computation over the space of proper L-colourings:
counting, deterministic iteration, extension and conditioned counts, and
free energy. These are the brute-force oracles every probabilistic claim
is checked against.

Counting runs a frontier dynamic programme over a greedy elimination order.
For uniform lists the frontier is stored as a canonical set partition
(colours are exchangeable); otherwise explicit colours are kept. Iteration
is a forward-checking backtracking search in vertex id order, so colourings
come out lexicographically.
"""

import logging
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .bounds import tree_free_energy
from .colourings import Colouring, ListAssignment, available_colours, validate_colouring
from .core.config import settings
from .core.errors import (
    BoundDomainError,
    BudgetExceededError,
    EmptySolutionSpaceError,
    ImproperColouringError,
    InfeasibleParametersError,
)
from .graphs import Graph, connected_components, delete_vertex, induced_subgraph, max_degree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CountResult:
    """Exact count and its natural log (``-inf`` for zero)"""

    count: int

    @property
    def log_count(self) -> float:
        return math.log(self.count) if self.count > 0 else -math.inf

    def to_dict(self) -> dict:
        return {"count": str(self.count), "log_count": self.log_count}


class _Budget:
    """Counts work units and raises once a limit is passed"""

    def __init__(self, limit: Optional[int], what: str):
        self.limit = settings.NODE_BUDGET if limit is None else limit
        self.what = what
        self.used = 0

    def charge(self, units: int = 1) -> None:
        self.used += units
        if self.used > self.limit:
            logger.warning(f"{self.what}: budget of {self.limit} exhausted")
            raise BudgetExceededError(self.what, self.limit)


# ---------------------------------------------------------------------------
# Frontier dynamic programme
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Step:
    vertex: int
    neighbour_positions: Tuple[int, ...]
    sources: Tuple[int, ...]
    frontier: Tuple[int, ...]


def elimination_order(g: Graph, vertices: Optional[Sequence[int]] = None) -> List[int]:
    """Greedy order keeping the set of placed-but-open vertices small.

    Ties prefer vertices with more placed neighbours, then smaller ids.
    """
    remaining = set(g.vertices() if vertices is None else vertices)
    open_degree = {v: len(g.adjacency[v]) for v in remaining}
    placed = set()
    frontier_size = 0
    order = []
    while remaining:
        best_key, best = None, None
        for x in remaining:
            placed_nbrs = [u for u in g.adjacency[x] if u in placed]
            closing = sum(1 for u in placed_nbrs if open_degree[u] == 1)
            opens = 1 if open_degree[x] > 0 else 0
            key = (frontier_size + opens - closing, -len(placed_nbrs), x)
            if best_key is None or key < best_key:
                best_key, best = key, x
        order.append(best)
        remaining.discard(best)
        placed.add(best)
        for u in g.adjacency[best]:
            open_degree[u] -= 1
        frontier_size = best_key[0]
    return order


def _plan(g: Graph, order: Sequence[int]) -> List[_Step]:
    position = {v: i for i, v in enumerate(order)}
    steps = []
    frontier: Tuple[int, ...] = ()
    for i, v in enumerate(order):
        index = {u: p for p, u in enumerate(frontier)}
        nbr_pos = tuple(index[u] for u in g.adjacency[v] if u in index)
        candidates = list(frontier) + [v]
        kept = sorted(u for u in candidates if any(position.get(w, -1) > i for w in g.adjacency[u]))
        sources = tuple(-1 if u == v else index[u] for u in kept)
        frontier = tuple(kept)
        steps.append(_Step(v, nbr_pos, sources, frontier))
    return steps


def _canonical(raw: Tuple[int, ...]) -> Tuple[int, ...]:
    relabel: Dict[int, int] = {}
    return tuple(relabel.setdefault(x, len(relabel)) for x in raw)


def _count_symmetric(g: Graph, k: int, order: Sequence[int], budget: _Budget) -> int:
    table: Dict[Tuple[int, ...], int] = {(): 1}
    for step in _plan(g, order):
        nxt: Dict[Tuple[int, ...], int] = {}
        for state, ways in table.items():
            budget.charge()
            used = max(state) + 1 if state else 0
            blocked = {state[p] for p in step.neighbour_positions}
            choices = [(c, 1) for c in range(used) if c not in blocked]
            if k > used:
                choices.append((used, k - used))
            for c, multiplicity in choices:
                raw = tuple(c if src < 0 else state[src] for src in step.sources)
                key = _canonical(raw)
                nxt[key] = nxt.get(key, 0) + ways * multiplicity
        table = nxt
        if not table:
            return 0
    return sum(table.values())


def _count_explicit(g: Graph, L: ListAssignment, order: Sequence[int], budget: _Budget) -> int:
    table: Dict[Tuple[int, ...], int] = {(): 1}
    for step in _plan(g, order):
        colours = sorted(L[step.vertex])
        nxt: Dict[Tuple[int, ...], int] = {}
        for state, ways in table.items():
            budget.charge()
            blocked = {state[p] for p in step.neighbour_positions}
            for c in colours:
                if c in blocked:
                    continue
                key = tuple(c if src < 0 else state[src] for src in step.sources)
                nxt[key] = nxt.get(key, 0) + ways
        table = nxt
        if not table:
            return 0
    return sum(table.values())


def count_colourings(
    g: Graph,
    L: ListAssignment,
    budget: Optional[int] = None,
    fixed: Optional[Colouring] = None,
) -> CountResult:
    """Exact number of proper total L-colourings (optionally with ``fixed`` vertices pinned)"""
    L.check_graph(g)
    if fixed is not None:
        if len(fixed) != g.n:
            raise InfeasibleParametersError("fixed colouring does not match the graph")
        L = ListAssignment(
            frozenset([c]) & L[v] if c is not None else L[v] for v, c in enumerate(fixed)
        )
    tracker = _Budget(budget, "count_colourings")
    k = L.k
    total = 1
    for component in connected_components(g):
        order = elimination_order(g, component)
        if k is not None:
            total *= _count_symmetric(g, k, order, tracker)
        else:
            total *= _count_explicit(g, L, order, tracker)
        if total == 0:
            break
    logger.debug(f"count_colourings({g!r}) = {total} after {tracker.used} state expansions")
    return CountResult(total)


class CompletionTable:
    """Exact completion counts for every reachable prefix state of a fixed order.

    Drawing a colouring colours vertices in that order, each colour chosen
    with probability proportional to its number of proper completions, which
    makes every draw exactly uniform over the colourings.
    """

    def __init__(self, g: Graph, L: ListAssignment, budget: Optional[int] = None):
        L.check_graph(g)
        self.g = g
        self.L = L
        self.order = [v for comp in connected_components(g) for v in elimination_order(g, comp)]
        self._steps = _plan(g, self.order)
        tracker = _Budget(budget, "completion table")

        layers: List[set] = [{()}]
        for step in self._steps:
            nxt = set()
            for state in layers[-1]:
                tracker.charge()
                for _, key in self._moves(step, state):
                    nxt.add(key)
            layers.append(nxt)

        counts: List[Dict[Tuple[int, ...], int]] = [dict() for _ in layers]
        counts[-1] = {state: 1 for state in layers[-1]}
        for i in range(len(self._steps) - 1, -1, -1):
            step, below = self._steps[i], counts[i + 1]
            counts[i] = {
                state: sum(below[key] for _, key in self._moves(step, state)) for state in layers[i]
            }
        self._counts = counts
        self.total = counts[0].get((), 0)
        self._options: Dict[Tuple[int, Tuple[int, ...]], tuple] = {}
        logger.info(f"CompletionTable initialized for {g!r}: {self.total} colourings")

    def _moves(self, step: _Step, state: Tuple[int, ...]):
        blocked = {state[p] for p in step.neighbour_positions}
        for c in sorted(self.L[step.vertex]):
            if c not in blocked:
                yield c, tuple(c if src < 0 else state[src] for src in step.sources)

    def _choices(self, i: int, state: Tuple[int, ...]) -> tuple:
        cached = self._options.get((i, state))
        if cached is None:
            below = self._counts[i + 1]
            colours, keys, cumulative, running = [], [], [], 0
            for c, key in self._moves(self._steps[i], state):
                weight = below.get(key, 0)
                if weight:
                    running += weight
                    colours.append(c)
                    keys.append(key)
                    cumulative.append(running)
            cached = (colours, keys, cumulative)
            self._options[(i, state)] = cached
        return cached

    def draw(self, rng: np.random.Generator) -> Colouring:
        if self.total == 0:
            raise EmptySolutionSpaceError(f"no proper colourings of {self.g!r}")
        colouring: List[Optional[int]] = [None] * self.g.n
        state: Tuple[int, ...] = ()
        for i, v in enumerate(self.order):
            colours, keys, cumulative = self._choices(i, state)
            pick = bisect_right(cumulative, uniform_below(rng, cumulative[-1]))
            colouring[v] = colours[pick]
            state = keys[pick]
        return Colouring(colouring)


def uniform_below(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in [0, bound) for arbitrarily large ``bound``"""
    if bound < 2**62:
        return int(rng.integers(bound))
    bits = bound.bit_length()
    words = -(-bits // 62)
    while True:
        value = 0
        for word in rng.integers(0, 2**62, size=words, dtype=np.int64):
            value = (value << 62) | int(word)
        value >>= words * 62 - bits
        if value < bound:
            return value


# ---------------------------------------------------------------------------
# Backtracking enumeration
# ---------------------------------------------------------------------------


def enumerate_colourings(
    g: Graph,
    L: ListAssignment,
    budget: Optional[int] = None,
    fixed: Optional[Colouring] = None,
) -> Iterator[Colouring]:
    """Yield every proper total L-colouring once, lexicographically in (vertex id, colour)"""
    L.check_graph(g)
    n = g.n
    domains = []
    for v in range(n):
        pinned = None if fixed is None else fixed[v]
        colours = sorted(L[v]) if pinned is None else ([pinned] if pinned in L[v] else [])
        domains.append(colours)
    domain_sets = [set(d) for d in domains]
    later = [[u for u in g.adjacency[v] if u > v] for v in range(n)]
    blocked: List[Dict[int, int]] = [dict() for _ in range(n)]
    free = [len(d) for d in domains]
    if n and min(free) == 0:
        return
    tracker = _Budget(budget, "enumerate_colourings")
    colour: List[Optional[int]] = [None] * n

    def extend(v: int) -> Iterator[Colouring]:
        tracker.charge()
        if v == n:
            yield Colouring(colour)
            return
        for c in domains[v]:
            if blocked[v].get(c):
                continue
            colour[v] = c
            touched = []
            wiped = False
            for u in later[v]:
                seen = blocked[u].get(c, 0)
                blocked[u][c] = seen + 1
                touched.append(u)
                if seen == 0 and c in domain_sets[u]:
                    free[u] -= 1
                    if free[u] == 0:
                        wiped = True
                        break
            if not wiped:
                yield from extend(v + 1)
            for u in touched:
                blocked[u][c] -= 1
                if blocked[u][c] == 0 and c in domain_sets[u]:
                    free[u] += 1
        colour[v] = None

    yield from extend(0)


def materialise(g: Graph, L: ListAssignment, budget: Optional[int] = None, limit: Optional[int] = None):
    """All colourings as a (count, n) int array; ``limit`` caps how many may exist"""
    rows = []
    for sigma in enumerate_colourings(g, L, budget=budget):
        rows.append(sigma)
        if limit is not None and len(rows) > limit:
            raise BudgetExceededError("colouring materialisation", limit)
    return np.array(rows, dtype=np.int64).reshape(len(rows), g.n)


# ---------------------------------------------------------------------------
# Derived counts
# ---------------------------------------------------------------------------


def extension_count(g: Graph, L: ListAssignment, sigma: Colouring, v: int) -> int:
    """Number of ways to extend a proper colouring of G - v to G, i.e. l_sigma(v)"""
    v = g.check_vertex(v)
    sigma = Colouring(sigma).with_colour(v, None)
    missing = [u for u in sigma.uncoloured() if u != v]
    if missing:
        raise ImproperColouringError(f"colouring must be total on G - {v}; uncoloured: {missing}")
    validate_colouring(g, L, sigma)
    return len(available_colours(g, L, sigma, v))


def conditioned_count(
    g: Graph,
    L: ListAssignment,
    pred: Callable[[Colouring], bool],
    budget: Optional[int] = None,
) -> CountResult:
    return CountResult(sum(1 for sigma in enumerate_colourings(g, L, budget=budget) if pred(sigma)))


def free_energy(g: Graph, k: int, budget: Optional[int] = None) -> float:
    """f(G,k) = ln |C_k(G)| / n"""
    if g.n == 0:
        raise InfeasibleParametersError("free energy is undefined on the empty graph")
    result = count_colourings(g, ListAssignment.uniform_k(g.n, k), budget=budget)
    return result.log_count / g.n


def relative_free_energy(g: Graph, k: int, delta: Optional[int] = None, budget: Optional[int] = None) -> float:
    """h(G,k) = f(G,k) / f(T_delta,k), with delta defaulting to the maximum degree"""
    delta = max_degree(g) if delta is None else delta
    reference = tree_free_energy(delta, k)
    if reference == 0:
        raise BoundDomainError(f"tree free energy vanishes for delta={delta}, k={k}")
    return free_energy(g, k, budget=budget) / reference


def expected_available_list(g: Graph, L: ListAssignment, v: int, budget: Optional[int] = None) -> Fraction:
    """E[l_sigma(v)] for sigma uniform on C(G - v), equal to |C(G)| / |C(G - v)|"""
    v = g.check_vertex(v)
    smaller, mapping = delete_vertex(g, v)
    sub_lists = ListAssignment(L[u] for u in sorted(mapping))
    below = count_colourings(smaller, sub_lists, budget=budget).count
    if below == 0:
        raise EmptySolutionSpaceError(f"G - {v} has no proper L-colouring")
    return Fraction(count_colourings(g, L, budget=budget).count, below)


def list_size_profile(g: Graph, L: ListAssignment, budget: Optional[int] = None) -> Dict[int, Fraction]:
    return {v: expected_available_list(g, L, v, budget=budget) for v in g.vertices()}


def inductive_premise(g: Graph, L: ListAssignment, ell: float, budget: Optional[int] = None) -> dict:
    """Check |C(H)| >= ell * |C(H - v)| along the vertex prefixes H_i = G[{0..i}], v = i"""
    ratios = {}
    previous = 1
    for i in range(g.n):
        prefix, _ = induced_subgraph(g, range(i + 1))
        current = count_colourings(prefix, ListAssignment(L[u] for u in range(i + 1)), budget=budget).count
        ratios[i] = Fraction(current, previous) if previous else Fraction(0)
        previous = current
    return {
        "ratios": ratios,
        "holds": all(r >= Fraction(ell) for r in ratios.values()),
    }


def chromatic_number(g: Graph, budget: Optional[int] = None) -> int:
    k = 0
    while count_colourings(g, ListAssignment.uniform_k(g.n, k), budget=budget).count == 0:
        k += 1
    return k
